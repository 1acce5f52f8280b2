//! Dispatch and charging rules.

use super::world::{BusState, BusStatus, World};

/// Tolerance for comparing times (minutes) and energies (kWh).
pub(crate) const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispatchDecision {
    /// Send `bus_id` out from terminal `terminal` (0 = first station, 1 = last station).
    Dispatch { terminal: usize, bus_id: usize },
    /// A departure is due but no bus with enough charge is waiting.
    Starved { terminal: usize },
}

/// Departures due at time `t` (minutes since midnight).
///
/// A terminal is due once the time since its last departure reaches the headway target of the
/// current period. Of the ready buses with charge at or above the start threshold, the one with
/// the least charge is released. A terminal that already reported starvation is not reported again until it has
/// dispatched.
pub fn dispatch_policy(world: &World, t: f64) -> Vec<DispatchDecision> {
    let mut out = Vec::new();
    if !world.service_open(t) {
        return out;
    }
    let floor = world.config().charge_start_threshold * world.config().bus_spec.usable_kwh();
    for terminal in 0..2 {
        let state = world.terminal(terminal);
        let due = match state.last_departure {
            None => true,
            Some(last) => t - last + EPS >= world.headway_min(t),
        };
        if !due {
            continue;
        }
        let candidate = state
            .ready
            .iter()
            .copied()
            .filter(|&b| world.bus(b).soc >= floor && world.bus(b).soc > 0.0)
            .min_by(|&a, &b| world.bus(a).soc.total_cmp(&world.bus(b).soc));
        match candidate {
            Some(bus_id) => out.push(DispatchDecision::Dispatch { terminal, bus_id }),
            None if !state.starved => out.push(DispatchDecision::Starved { terminal }),
            None => {}
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChargeAction {
    StartFast,
    QueueFast,
    StartSlow,
    Continue,
    Release,
}

/// Charger availability where the bus is standing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteView {
    pub free_fast: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyContext {
    pub usable_kwh: f64,
    pub start_threshold: f64,
    pub stop_threshold: f64,
    /// False outside operating hours, when every bus belongs at the depot.
    pub service_open: bool,
}

/// Charging decision for a bus standing at a terminal or the depot.
///
/// During service: a bus below the start threshold claims a free fast charger or joins the
/// queue, and a charging bus is released at the stop threshold. Outside service hours every
/// bus slow-charges to full.
pub fn charging_policy(bus: &BusState, site: SiteView, ctx: &PolicyContext) -> ChargeAction {
    let status = bus.status();
    if !ctx.service_open {
        return match status {
            BusStatus::Charging if bus.soc >= ctx.usable_kwh - EPS => ChargeAction::Release,
            BusStatus::Charging => ChargeAction::Continue,
            _ if bus.soc < ctx.usable_kwh - EPS => ChargeAction::StartSlow,
            _ => ChargeAction::Continue,
        };
    }
    let stop = ctx.stop_threshold * ctx.usable_kwh;
    match status {
        BusStatus::Charging if bus.soc >= stop - EPS => ChargeAction::Release,
        BusStatus::Charging => ChargeAction::Continue,
        BusStatus::QueuedForCharger if site.free_fast > 0 => ChargeAction::StartFast,
        BusStatus::QueuedForCharger => ChargeAction::Continue,
        _ if bus.soc < ctx.start_threshold * ctx.usable_kwh => {
            if site.free_fast > 0 {
                ChargeAction::StartFast
            } else {
                ChargeAction::QueueFast
            }
        }
        _ => ChargeAction::Continue,
    }
}

/// Energy a charger adds over `dt_min` minutes, capped by the remaining headroom.
pub fn charge_increment(power_kw: f64, dt_min: f64, headroom_kwh: f64) -> f64 {
    (power_kw * dt_min / 60.0).min(headroom_kwh.max(0.0))
}
