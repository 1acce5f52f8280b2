//! Scenario files: one JSON document holding every input of a run.
//!
//! Every section and field is optional and falls back to the Lahore defaults, so a file only
//! lists what it changes. Unknown keys are rejected. `--set section.field=value` overrides are
//! applied on top of the file.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::demand::DemandParams;
use crate::error::{Error, Result};
use crate::route::{build_route, uniform_route, BaselineDieselOps, RouteModel, ServiceCalendar};
use crate::sim::{BusSpec, ChargerBank, SimConfig};
use crate::tco::{BebCostModel, DieselCostModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Metadata {
    pub name: String,
    pub description: String,
    pub seed: u64,
}

impl Default for Metadata {
    fn default() -> Self {
        Metadata {
            name: "lahore".into(),
            description: "Lahore Metro corridor, optimized electric fleet".into(),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationSpec {
    pub name: String,
    pub km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RouteSection {
    /// Used with `length_km` for evenly spaced stations when `stations` is absent.
    pub station_count: usize,
    pub length_km: f64,
    pub stations: Option<Vec<StationSpec>>,
    pub depot_station: usize,
}

impl Default for RouteSection {
    fn default() -> Self {
        RouteSection {
            station_count: 27,
            length_km: 26.1,
            stations: None,
            depot_station: 0,
        }
    }
}

impl RouteSection {
    pub fn build(&self) -> Result<RouteModel> {
        let route = match &self.stations {
            Some(list) => {
                let spec: Vec<(&str, f64)> = list.iter().map(|s| (s.name.as_str(), s.km)).collect();
                build_route(&spec)?
            }
            None => uniform_route(self.station_count, self.length_km)?,
        };
        route.with_depot(self.depot_station)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub bus_count: u32,
    pub battery_kwh: f64,
    pub usable_fraction: f64,
    pub mileage_km_per_kwh: f64,
    pub passenger_capacity: u32,
    pub avg_speed_kmh: f64,
    pub dwell_s: f64,
    pub terminal_layover_s: f64,
    pub aux_load_kw: f64,
    pub charging_efficiency: f64,
    pub fast_charger_count: u32,
    pub fast_power_kw: f64,
    /// Terminal stations hosting fast chargers; both terminals when absent.
    pub fast_locations: Option<Vec<usize>>,
    pub slow_charger_count: u32,
    pub slow_power_kw: f64,
    pub charge_start_threshold: f64,
    pub charge_stop_threshold: f64,
    pub headway_peak_s: f64,
    pub headway_offpeak_s: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            bus_count: 64,
            battery_kwh: 350.0,
            usable_fraction: 0.70,
            mileage_km_per_kwh: 1.88,
            passenger_capacity: 160,
            avg_speed_kmh: 40.0,
            dwell_s: 30.0,
            terminal_layover_s: 786.0,
            aux_load_kw: 42.0,
            charging_efficiency: 1.0,
            fast_charger_count: 10,
            fast_power_kw: 325.0,
            fast_locations: None,
            slow_charger_count: 58,
            slow_power_kw: 150.0,
            charge_start_threshold: 0.30,
            charge_stop_threshold: 0.95,
            headway_peak_s: 135.0,
            headway_offpeak_s: 180.0,
        }
    }
}

impl SimSection {
    pub fn config(&self, route: &RouteModel) -> Result<SimConfig> {
        if !(self.mileage_km_per_kwh > 0.0 && self.mileage_km_per_kwh.is_finite()) {
            return Err(Error::validation("sim.mileage_km_per_kwh", "must be positive"));
        }
        let (first, last) = route.terminals();
        let cfg = SimConfig {
            bus_count: self.bus_count,
            bus_spec: BusSpec {
                passenger_capacity: self.passenger_capacity,
                battery_capacity_kwh: self.battery_kwh,
                usable_fraction: self.usable_fraction,
                energy_per_km: 1.0 / self.mileage_km_per_kwh,
                avg_speed_kmh: self.avg_speed_kmh,
                dwell_time_s: self.dwell_s,
                aux_load_kw: self.aux_load_kw,
            },
            charger_bank: ChargerBank {
                fast_count: self.fast_charger_count,
                fast_power_kw: self.fast_power_kw,
                fast_locations: self.fast_locations.clone().unwrap_or_else(|| vec![first, last]),
                slow_count: self.slow_charger_count,
                slow_power_kw: self.slow_power_kw,
                slow_location: route.depot_station(),
            },
            charge_start_threshold: self.charge_start_threshold,
            charge_stop_threshold: self.charge_stop_threshold,
            dispatch_headway_peak_s: self.headway_peak_s,
            dispatch_headway_offpeak_s: self.headway_offpeak_s,
            terminal_layover_s: self.terminal_layover_s,
            charging_efficiency: self.charging_efficiency,
        };
        cfg.validate(route)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TcoSection {
    pub include_emissions: bool,
}

impl Default for TcoSection {
    fn default() -> Self {
        TcoSection { include_emissions: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub bus_counts: Vec<u32>,
    pub battery_sizes_kwh: Vec<f64>,
    pub fast_charger_counts: Vec<u32>,
    pub seeds: Vec<u64>,
    /// Highest acceptable mean wait; derived from the diesel headways when absent.
    pub wait_tolerance_min: Option<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            bus_counts: vec![58, 64],
            battery_sizes_kwh: vec![350.0, 400.0],
            fast_charger_counts: vec![2, 4, 6, 8, 10, 12, 14],
            seeds: (1..=10).collect(),
            wait_tolerance_min: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub metadata: Metadata,
    pub route: RouteSection,
    pub calendar: ServiceCalendar,
    pub baseline: BaselineDieselOps,
    pub demand: DemandParams,
    pub sim: SimSection,
    pub diesel: DieselCostModel<f64>,
    pub beb: BebCostModel<f64>,
    pub tco: TcoSection,
    pub sweep: Option<SweepSection>,
}

impl Scenario {
    pub fn lahore() -> Self {
        Scenario::default()
    }

    pub fn route_model(&self) -> Result<RouteModel> {
        self.route.build()
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        self.sim.config(&self.route_model()?)
    }

    /// Demand parameters with the calibration scale applied for this route and calendar.
    pub fn demand_params(&self) -> Result<DemandParams> {
        let route = self.route_model()?;
        self.demand.calibrated(&self.calendar, route.station_count())
    }

    pub fn sweep_section(&self) -> SweepSection {
        self.sweep.clone().unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        let route = self.route_model()?;
        self.calendar.validate()?;
        self.baseline.validate()?;
        self.demand.validate()?;
        self.sim.config(&route)?;
        self.diesel.validate()?;
        self.beb.validate()?;
        if let Some(s) = &self.sweep {
            if s.bus_counts.is_empty() || s.battery_sizes_kwh.is_empty() || s.fast_charger_counts.is_empty() || s.seeds.is_empty() {
                return Err(Error::validation("sweep", "every list must be non-empty"));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("scenario serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// Parses scenario JSON. Missing fields take their defaults.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    serde_json::from_str(text).map_err(|source| Error::Parse {
        what: "scenario".into(),
        source,
    })
}

/// Reads a scenario (defaults when `path` is `None`), applies `key=value` overrides and
/// validates the result.
pub fn load_scenario(path: Option<&Path>, overrides: &[String]) -> Result<Scenario> {
    let base = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|source| Error::Parse {
                what: p.display().to_string(),
                source,
            })?
        }
        None => Scenario::default(),
    };
    let scenario = apply_overrides(base, overrides)?;
    scenario.validate()?;
    Ok(scenario)
}

/// Applies dotted-path overrides such as `sim.fast_charger_count=12`. Values are read as JSON
/// and fall back to plain strings.
pub fn apply_overrides(scenario: Scenario, overrides: &[String]) -> Result<Scenario> {
    if overrides.is_empty() {
        return Ok(scenario);
    }
    let defaults = serde_json::to_value(SweepSection::default()).expect("serializes");
    let mut tree = serde_json::to_value(&scenario).expect("scenario serializes");
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Error::validation("--set", format!("expected key=value, got `{item}`")))?;
        let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut node = &mut tree;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            if node.is_null() && i == 1 && parts[0] == "sweep" {
                *node = defaults.clone();
            }
            let Some(obj) = node.as_object_mut() else {
                return Err(Error::UnknownKey(key.to_string()));
            };
            let Some(child) = obj.get_mut(*part) else {
                return Err(Error::UnknownKey(key.to_string()));
            };
            node = child;
        }
        *node = value;
    }
    serde_json::from_value(tree).map_err(|source| Error::Parse {
        what: "overrides".into(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_build() {
        let s = Scenario::lahore();
        s.validate().unwrap();
        let cfg = s.sim_config().unwrap();
        assert_eq!(cfg.bus_count, 64);
        assert_eq!(cfg.charger_bank.fast_locations, vec![0, 26]);
        assert!((cfg.bus_spec.energy_per_km - 1.0 / 1.88).abs() < 1e-15);
        assert!((s.demand_params().unwrap().calibration_scale - 95_000.0 / 179_820.0).abs() < 1e-12);
    }

    #[test]
    fn partial_file() {
        let s = parse_scenario(r#"{"sim": {"bus_count": 58}, "metadata": {"seed": 9}}"#).unwrap();
        assert_eq!(s.sim.bus_count, 58);
        assert_eq!(s.sim.battery_kwh, 350.0);
        assert_eq!(s.metadata.seed, 9);
    }

    #[test]
    fn unknown_key_in_file() {
        let err = parse_scenario("{\n  \"sim\": {\n    \"bus_cuont\": 58\n  }\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bus_cuont") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn override_single_field() {
        let base = Scenario::lahore();
        let s = apply_overrides(base.clone(), &["sim.fast_charger_count=12".into()]).unwrap();
        assert_eq!(s.sim.fast_charger_count, 12);
        let mut back = s.clone();
        back.sim.fast_charger_count = 10;
        assert_eq!(back, base);
        assert_ne!(s.hash(), base.hash());
    }

    #[test]
    fn override_unknown_key() {
        let err = apply_overrides(Scenario::lahore(), &["sim.chargers=3".into()]).unwrap_err();
        assert!(matches!(err, Error::UnknownKey(k) if k == "sim.chargers"));
        assert!(apply_overrides(Scenario::lahore(), &["nonsense".into()]).is_err());
    }

    #[test]
    fn override_string_and_sweep() {
        let s = apply_overrides(
            Scenario::lahore(),
            &["metadata.name=test run".into(), "sweep.seeds=[1,2]".into()],
        )
        .unwrap();
        assert_eq!(s.metadata.name, "test run");
        assert_eq!(s.sweep.unwrap().seeds, vec![1, 2]);
    }

    #[test]
    fn invalid_value_rejected() {
        let s = apply_overrides(Scenario::lahore(), &["sim.bus_count=0".into()]).unwrap();
        assert!(s.validate().unwrap_err().is_validation());
    }

    #[test]
    fn round_trip_and_stable_hash() {
        let s = Scenario::lahore();
        let back = parse_scenario(&s.to_json_pretty()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.hash(), s.hash());
        assert_eq!(s.hash().len(), 64);
    }
}
