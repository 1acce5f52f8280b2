//! Minute-stepped simulation of a battery-electric fleet on a linear corridor.
//!
//! The clock advances in one-minute steps. Inside a step, bus events (station arrivals, end of
//! dwell, end of charging, battery exhaustion) and terminal dispatches are processed in time
//! order at their exact sub-minute instants, so headways such as 2 min 15 s are honoured
//! without rounding. Passengers who reach a station in the same minute are spread evenly
//! across it, and a dispatched bus opens its doors at the terminal for one dwell before
//! leaving. The final stop of a trip is alight-only.
//!
//! Dispatching starts ahead of opening by as many whole headways as fit in one trip, so the
//! corridor is already served when the first passengers arrive. Dispatching stops at close;
//! buses on a trip finish it (still picking up and dropping off), then everyone returns to the
//! depot and slow-charges until the horizon ends, one full day after opening.

mod policy;
pub(crate) mod world;

pub use policy::{charge_increment, charging_policy, dispatch_policy, ChargeAction, DispatchDecision, PolicyContext, SiteView};
pub use world::{BusState, BusStatus, World};

use serde::{Deserialize, Serialize};

use crate::demand::PassengerSet;
use crate::error::{Error, Result};
use crate::route::{BaselineDieselOps, RouteModel, ServiceCalendar};

/// Simulation resolution in minutes.
pub const MINUTE_STEP: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusSpec {
    pub passenger_capacity: u32,
    /// Nameplate energy, kWh.
    pub battery_capacity_kwh: f64,
    pub usable_fraction: f64,
    pub energy_per_km: f64,
    pub avg_speed_kmh: f64,
    pub dwell_time_s: f64,
    /// Constant hotel load (HVAC, lighting) while on a trip, kW.
    pub aux_load_kw: f64,
}

impl BusSpec {
    pub fn usable_kwh(&self) -> f64 {
        self.battery_capacity_kwh * self.usable_fraction
    }

    pub fn km_per_minute(&self) -> f64 {
        self.avg_speed_kmh / 60.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.passenger_capacity == 0 {
            return Err(Error::validation("sim.passenger_capacity", "must be positive"));
        }
        for (f, v) in [
            ("sim.battery_kwh", self.battery_capacity_kwh),
            ("sim.energy_per_km", self.energy_per_km),
            ("sim.avg_speed_kmh", self.avg_speed_kmh),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(f, "must be positive"));
            }
        }
        if !(self.usable_fraction > 0.0 && self.usable_fraction <= 1.0) {
            return Err(Error::validation("sim.usable_fraction", "must lie in (0, 1]"));
        }
        if !(self.dwell_time_s >= 0.0 && self.dwell_time_s.is_finite()) {
            return Err(Error::validation("sim.dwell_s", "must be non-negative"));
        }
        if !(self.aux_load_kw >= 0.0 && self.aux_load_kw.is_finite()) {
            return Err(Error::validation("sim.aux_load_kw", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargerBank {
    pub fast_count: u32,
    pub fast_power_kw: f64,
    /// Stations hosting fast chargers. Chargers are dealt out round-robin in this order.
    pub fast_locations: Vec<usize>,
    pub slow_count: u32,
    pub slow_power_kw: f64,
    pub slow_location: usize,
}

impl ChargerBank {
    /// Number of fast chargers at the `i`-th entry of `fast_locations`.
    pub fn fast_at_site(&self, i: usize) -> u32 {
        let sites = self.fast_locations.len() as u32;
        if sites == 0 {
            return 0;
        }
        self.fast_count / sites + u32::from((i as u32) < self.fast_count % sites)
    }

    pub fn validate(&self, route: &RouteModel) -> Result<()> {
        if !(self.fast_power_kw > 0.0 && self.slow_power_kw > 0.0) {
            return Err(Error::validation("sim.charger power", "fast and slow power must be positive"));
        }
        for &s in &self.fast_locations {
            if !route.is_terminal(s) {
                return Err(Error::validation(
                    "sim.fast_locations",
                    format!("station {s} is not a terminal"),
                ));
            }
        }
        if self.slow_location >= route.station_count() {
            return Err(Error::validation("sim.slow_location", "not a station index"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub bus_count: u32,
    pub bus_spec: BusSpec,
    pub charger_bank: ChargerBank,
    /// Fraction of usable capacity below which a bus arriving at a terminal goes to charge.
    pub charge_start_threshold: f64,
    /// Fraction of usable capacity at which fast charging stops.
    pub charge_stop_threshold: f64,
    pub dispatch_headway_peak_s: f64,
    pub dispatch_headway_offpeak_s: f64,
    /// Minimum turnaround at a terminal after the final dwell, before the bus can leave again.
    pub terminal_layover_s: f64,
    /// Battery energy per unit of grid energy.
    pub charging_efficiency: f64,
}

impl SimConfig {
    pub fn validate(&self, route: &RouteModel) -> Result<()> {
        if self.bus_count == 0 {
            return Err(Error::validation("sim.bus_count", "must be at least 1"));
        }
        self.bus_spec.validate()?;
        self.charger_bank.validate(route)?;
        let (a, b) = (self.charge_start_threshold, self.charge_stop_threshold);
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::validation(
                "sim.charge thresholds",
                format!("need 0 <= start < stop <= 1, got start {a}, stop {b}"),
            ));
        }
        if !(self.dispatch_headway_peak_s > 0.0 && self.dispatch_headway_offpeak_s > 0.0) {
            return Err(Error::validation("sim.headways", "must be positive"));
        }
        if !(self.terminal_layover_s >= 0.0 && self.terminal_layover_s.is_finite()) {
            return Err(Error::validation("sim.terminal_layover_s", "must be non-negative"));
        }
        if !(self.charging_efficiency > 0.0 && self.charging_efficiency <= 1.0) {
            return Err(Error::validation("sim.charging_efficiency", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrandingEvent {
    pub bus_id: usize,
    pub minute: f64,
    pub position_km: f64,
    pub passengers_onboard: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BusSummary {
    pub bus_id: usize,
    pub distance_km: f64,
    /// Traction plus auxiliary energy drawn from the battery.
    pub energy_kwh: f64,
    pub traction_kwh: f64,
    pub aux_kwh: f64,
    /// Energy put into the battery by fast and slow chargers.
    pub charged_kwh: f64,
    pub fast_sessions: u32,
    pub initial_soc_kwh: f64,
    pub final_soc_kwh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassengerOutcome {
    pub id: u32,
    pub arrival_minute: u32,
    /// Arrival instant inside the arrival minute, minutes since midnight.
    pub arrival_time: f64,
    pub board_time: Option<f64>,
    pub alight_time: Option<f64>,
    pub alight_station: Option<u32>,
}

impl PassengerOutcome {
    pub fn wait_min(&self) -> Option<f64> {
        self.board_time.map(|b| b - self.arrival_time)
    }

    pub fn board_minute(&self) -> Option<u32> {
        self.board_time.map(|b| b.floor() as u32)
    }
}

/// Width of one waiting-time histogram bin, minutes. The last bin collects the overflow.
pub const WAIT_BIN_MIN: f64 = 1.0;
pub const WAIT_BINS: usize = 31;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub seed: u64,
    pub bus_count: u32,
    /// Minute of day of the first grid-load entry.
    pub horizon_start_minute: u32,
    pub avg_wait_min: f64,
    pub wait_histogram: Vec<u64>,
    /// Grid energy drawn in each minute of the horizon, kWh.
    pub grid_load_per_minute: Vec<f64>,
    pub per_bus: Vec<BusSummary>,
    pub total_distance_km: f64,
    /// Grid energy over the horizon, kWh.
    pub total_energy_kwh: f64,
    pub traction_kwh: f64,
    pub aux_kwh: f64,
    pub fast_charged_kwh: f64,
    pub slow_charged_kwh: f64,
    pub passengers_total: usize,
    pub passengers_served: usize,
    pub unserved_at_close: usize,
    pub stranded_passengers: usize,
    pub peak_arrivals: usize,
    pub offpeak_arrivals: usize,
    pub strandings: Vec<StrandingEvent>,
    pub headway_violations: u64,
    pub dispatches: u64,
    pub drain_end_minute: f64,
    pub outcomes: Vec<PassengerOutcome>,
}

impl SimResult {
    pub fn peak_share(&self) -> f64 {
        let n = self.peak_arrivals + self.offpeak_arrivals;
        if n == 0 {
            0.0
        } else {
            self.peak_arrivals as f64 / n as f64
        }
    }

    pub fn consumed_kwh(&self) -> f64 {
        self.per_bus.iter().map(|b| b.energy_kwh).sum()
    }
}

/// Runs one service day. The engine itself draws no random numbers; `seed` identifies the
/// demand realisation and is carried into the result.
pub fn run_simulation(
    route: &RouteModel,
    calendar: &ServiceCalendar,
    config: &SimConfig,
    demand: &PassengerSet,
    seed: u64,
) -> Result<SimResult> {
    let mut world = World::new(route, calendar, config, demand)?;
    let mut minute = world.start_minute();
    while !world.is_finished(minute) {
        world.step(minute);
        minute += MINUTE_STEP;
    }
    Ok(world.finish(seed))
}

pub fn grid_load_profile(result: &SimResult) -> Vec<f64> {
    result.grid_load_per_minute.clone()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FleetComparison {
    pub beb_avg_wait_min: f64,
    /// Half-headway of the diesel service, weighted by the peak/off-peak passenger split.
    pub baseline_wait_min: f64,
    pub delta_wait_min: f64,
    pub relative_wait_change: f64,
    pub beb_total_distance_km: f64,
    pub baseline_total_distance_km: f64,
    pub delta_distance_km: f64,
    pub passengers_served: usize,
    pub passengers_total: usize,
}

pub fn fleet_comparison(result: &SimResult, baseline: &BaselineDieselOps) -> FleetComparison {
    let baseline_wait = baseline.blended_half_headway_min(result.peak_share());
    let baseline_km = baseline.fleet_in_circuit as f64 * baseline.avg_daily_distance_per_bus_km;
    FleetComparison {
        beb_avg_wait_min: result.avg_wait_min,
        baseline_wait_min: baseline_wait,
        delta_wait_min: result.avg_wait_min - baseline_wait,
        relative_wait_change: (result.avg_wait_min - baseline_wait) / baseline_wait,
        beb_total_distance_km: result.total_distance_km,
        baseline_total_distance_km: baseline_km,
        delta_distance_km: result.total_distance_km - baseline_km,
        passengers_served: result.passengers_served,
        passengers_total: result.passengers_total,
    }
}
