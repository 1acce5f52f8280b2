use std::collections::VecDeque;

use crate::demand::{Direction, Passenger, PassengerSet};
use crate::error::{Error, Result};
use crate::route::{service_period, RouteModel, ServiceCalendar, ServicePeriod};

use super::policy::{charge_increment, charging_policy, dispatch_policy, ChargeAction, DispatchDecision, PolicyContext, SiteView, EPS};
use super::{BusSummary, PassengerOutcome, SimConfig, SimResult, StrandingEvent, WAIT_BINS, WAIT_BIN_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusStatus {
    /// On a trip: moving or dwelling at a station.
    InService,
    /// Turning around or waiting at a terminal for its next departure.
    Layover,
    Charging,
    QueuedForCharger,
    Depot,
    Stranded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Activity {
    Moving { to: usize },
    Dwelling { until: f64 },
    Turnaround { until: f64 },
    Ready,
    FastQueued { site: usize },
    FastCharging { site: usize },
    DepotQueued,
    DepotCharging,
    DepotIdle,
    Stranded,
}

#[derive(Debug, Clone)]
pub struct BusState {
    pub bus_id: usize,
    pub direction: Direction,
    pub position_km: f64,
    /// Station the bus is heading to, or standing at when not moving.
    pub next_station: usize,
    pub soc: f64,
    pub onboard: Vec<u32>,
    pub odometer_today: f64,
    /// Battery energy consumed today (traction plus auxiliary).
    pub energy_today: f64,
    activity: Activity,
    clock: f64,
    traction_kwh: f64,
    aux_kwh: f64,
    fast_kwh: f64,
    slow_kwh: f64,
    initial_soc: f64,
    fast_sessions: u32,
}

impl BusState {
    pub fn status(&self) -> BusStatus {
        match self.activity {
            Activity::Moving { .. } | Activity::Dwelling { .. } => BusStatus::InService,
            Activity::Turnaround { .. } | Activity::Ready => BusStatus::Layover,
            Activity::FastCharging { .. } | Activity::DepotCharging => BusStatus::Charging,
            Activity::FastQueued { .. } | Activity::DepotQueued => BusStatus::QueuedForCharger,
            Activity::DepotIdle => BusStatus::Depot,
            Activity::Stranded => BusStatus::Stranded,
        }
    }

    fn on_trip(&self) -> bool {
        matches!(
            self.activity,
            Activity::Moving { .. } | Activity::Dwelling { .. } | Activity::Turnaround { .. }
        )
    }

    /// Energy put into the battery so far.
    pub fn charged_kwh(&self) -> f64 {
        self.fast_kwh + self.slow_kwh
    }

    pub fn initial_soc(&self) -> f64 {
        self.initial_soc
    }

    fn consume(&mut self, traction: f64, aux: f64) {
        let want = traction + aux;
        let (traction, aux) = if want > self.soc && want > 0.0 {
            let k = self.soc / want;
            (traction * k, aux * k)
        } else {
            (traction, aux)
        };
        self.soc -= traction + aux;
        if self.soc < 0.0 {
            self.soc = 0.0;
        }
        self.traction_kwh += traction;
        self.aux_kwh += aux;
        self.energy_today += traction + aux;
    }
}

#[derive(Debug, Clone)]
pub(crate) struct TerminalState {
    pub station: usize,
    pub direction: Direction,
    /// Buses ready to leave, longest-waiting first.
    pub ready: VecDeque<usize>,
    pub last_departure: Option<f64>,
    pub starved: bool,
}

#[derive(Debug, Clone)]
struct ChargerSite {
    station: usize,
    capacity: u32,
    active: Vec<usize>,
    queue: VecDeque<usize>,
}

impl ChargerSite {
    fn free(&self) -> u32 {
        self.capacity.saturating_sub(self.active.len() as u32)
    }
}

#[derive(Debug, Clone, Copy)]
enum BusEvent {
    Arrive,
    DwellEnd,
    TurnaroundEnd,
    ChargeDone,
    Exhausted,
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Bus(usize, BusEvent),
    Dispatch,
}

/// Full simulation state. Drive it with [`World::step`] once per minute from opening time.
#[derive(Debug, Clone)]
pub struct World<'a> {
    route: &'a RouteModel,
    calendar: &'a ServiceCalendar,
    config: &'a SimConfig,
    passengers: &'a [Passenger],
    /// Arrival instant of each passenger, minutes since midnight.
    arrival_time: Vec<f64>,
    /// First dispatch instant, at or before opening.
    service_start: f64,
    now: f64,
    buses: Vec<BusState>,
    /// Waiting passengers per station, indexed by direction.
    queues: Vec<[VecDeque<u32>; 2]>,
    terminals: [TerminalState; 2],
    fast_sites: Vec<ChargerSite>,
    depot: ChargerSite,
    next_passenger: usize,
    board_time: Vec<Option<f64>>,
    alight_time: Vec<Option<f64>>,
    grid_this_minute: f64,
    grid_load: Vec<f64>,
    strandings: Vec<StrandingEvent>,
    stranded_passengers: usize,
    served: usize,
    headway_violations: u64,
    dispatches: u64,
    closed: bool,
    drained: bool,
    drain_mark: Option<f64>,
}

impl<'a> World<'a> {
    pub fn new(
        route: &'a RouteModel,
        calendar: &'a ServiceCalendar,
        config: &'a SimConfig,
        demand: &'a PassengerSet,
    ) -> Result<Self> {
        calendar.validate()?;
        config.validate(route)?;
        let n = route.station_count();
        for (i, p) in demand.passengers.iter().enumerate() {
            p.check(n)?;
            if p.id as usize != i {
                return Err(Error::validation(
                    "demand",
                    format!("passenger ids must be 0..N in order, found {} at position {i}", p.id),
                ));
            }
            if i > 0 && demand.passengers[i - 1].arrival_minute > p.arrival_minute {
                return Err(Error::validation("demand", "passengers must be sorted by arrival minute"));
            }
        }

        let open = calendar.open_minute() as f64;
        let service_start = open - warm_up_min(route, calendar, config);
        let usable = config.bus_spec.usable_kwh();
        let last = n - 1;
        let mut terminals = [
            TerminalState {
                station: 0,
                direction: Direction::Up,
                ready: VecDeque::new(),
                last_departure: None,
                starved: false,
            },
            TerminalState {
                station: last,
                direction: Direction::Down,
                ready: VecDeque::new(),
                last_departure: None,
                starved: false,
            },
        ];
        let buses = (0..config.bus_count as usize)
            .map(|bus_id| {
                let t = bus_id % 2;
                terminals[t].ready.push_back(bus_id);
                BusState {
                    bus_id,
                    direction: terminals[t].direction,
                    position_km: route.distance(terminals[t].station),
                    next_station: terminals[t].station,
                    soc: usable,
                    onboard: Vec::new(),
                    odometer_today: 0.0,
                    energy_today: 0.0,
                    activity: Activity::Ready,
                    clock: service_start.floor(),
                    traction_kwh: 0.0,
                    aux_kwh: 0.0,
                    fast_kwh: 0.0,
                    slow_kwh: 0.0,
                    initial_soc: usable,
                    fast_sessions: 0,
                }
            })
            .collect();

        let bank = &config.charger_bank;
        let fast_sites = bank
            .fast_locations
            .iter()
            .enumerate()
            .map(|(i, &station)| ChargerSite {
                station,
                capacity: bank.fast_at_site(i),
                active: Vec::new(),
                queue: VecDeque::new(),
            })
            .collect();

        Ok(World {
            route,
            calendar,
            config,
            passengers: &demand.passengers,
            arrival_time: spread_arrivals(&demand.passengers, n),
            service_start,
            now: service_start.floor(),
            buses,
            queues: vec![[VecDeque::new(), VecDeque::new()]; n],
            terminals,
            fast_sites,
            depot: ChargerSite {
                station: bank.slow_location,
                capacity: bank.slow_count,
                active: Vec::new(),
                queue: VecDeque::new(),
            },
            next_passenger: 0,
            board_time: vec![None; demand.len()],
            alight_time: vec![None; demand.len()],
            grid_this_minute: 0.0,
            grid_load: Vec::new(),
            strandings: Vec::new(),
            stranded_passengers: 0,
            served: 0,
            headway_violations: 0,
            dispatches: 0,
            closed: false,
            drained: false,
            drain_mark: None,
        })
    }

    pub fn config(&self) -> &SimConfig {
        self.config
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn buses(&self) -> &[BusState] {
        &self.buses
    }

    pub fn bus(&self, id: usize) -> &BusState {
        &self.buses[id]
    }

    #[cfg(test)]
    pub(crate) fn set_soc(&mut self, id: usize, soc: f64) {
        self.buses[id].soc = soc;
        self.buses[id].initial_soc = soc;
    }

    pub(crate) fn terminal(&self, i: usize) -> &TerminalState {
        &self.terminals[i]
    }

    /// Passengers currently waiting at `station` for `direction`.
    pub fn waiting(&self, station: usize, direction: Direction) -> usize {
        self.queues[station][direction.index()].len()
    }

    pub fn headway_violations(&self) -> u64 {
        self.headway_violations
    }

    pub fn grid_load(&self) -> &[f64] {
        &self.grid_load
    }

    /// First minute of the simulated horizon.
    pub fn start_minute(&self) -> u32 {
        self.service_start.floor() as u32
    }

    pub fn service_open(&self, t: f64) -> bool {
        !self.closed && t < self.calendar.close_minute() as f64 && t + EPS >= self.service_start
    }

    /// Service period at `t`; the warm-up before opening runs to the opening period.
    fn period(&self, t: f64) -> ServicePeriod {
        let open = self.calendar.open_minute();
        service_period(self.calendar, (t.floor() as u32).max(open))
    }

    /// Headway target in minutes for the period containing `t`.
    pub fn headway_min(&self, t: f64) -> f64 {
        match self.period(t) {
            ServicePeriod::Peak => self.config.dispatch_headway_peak_s / 60.0,
            _ => self.config.dispatch_headway_offpeak_s / 60.0,
        }
    }

    /// Earliest time after `last` at which the elapsed time meets the headway of the period
    /// in force at that moment.
    fn due_after(&self, last: f64) -> f64 {
        let hp = self.config.dispatch_headway_peak_s / 60.0;
        let ho = self.config.dispatch_headway_offpeak_s / 60.0;
        let mut candidates = vec![last + hp, last + ho];
        for (s, e) in &self.calendar.peak_windows {
            candidates.push(s.0 as f64);
            candidates.push(e.0 as f64);
        }
        candidates
            .into_iter()
            .filter(|&c| c > last && c - last + EPS >= self.headway_min(c))
            .fold(last + hp.max(ho), f64::min)
    }

    fn context(&self) -> PolicyContext {
        PolicyContext {
            usable_kwh: self.config.bus_spec.usable_kwh(),
            start_threshold: self.config.charge_start_threshold,
            stop_threshold: self.config.charge_stop_threshold,
            service_open: !self.closed,
        }
    }

    fn fast_site_at(&self, station: usize) -> Option<usize> {
        self.fast_sites.iter().position(|s| s.station == station)
    }

    /// True once service has closed, every trip has ended and the horizon of one day after
    /// opening is complete.
    pub fn is_finished(&self, minute: u32) -> bool {
        let horizon = self.calendar.open_minute() + 24 * 60;
        minute >= horizon && self.drained
    }

    /// Advances the world through `[minute, minute + 1)`.
    pub fn step(&mut self, minute: u32) {
        let start = minute as f64;
        let end = start + 1.0;
        self.advance_all(start);
        self.admit(minute);
        if !self.closed && minute >= self.calendar.close_minute() {
            self.close_service(start);
        }
        if !self.closed {
            self.apply_dispatch(start);
        }
        while let Some((t, ev)) = self.next_event(end) {
            self.advance_all(t);
            match ev {
                Event::Bus(id, kind) => self.handle_bus(id, kind, t),
                Event::Dispatch => self.apply_dispatch(t),
            }
        }
        self.advance_all(end);
        if self.closed && !self.drained && !self.buses.iter().any(BusState::on_trip) {
            self.drained = true;
        }
        self.grid_load.push(self.grid_this_minute);
        self.grid_this_minute = 0.0;
    }

    fn admit(&mut self, minute: u32) {
        while let Some(p) = self.passengers.get(self.next_passenger) {
            if p.arrival_minute > minute {
                break;
            }
            self.queues[p.origin as usize][p.direction.index()].push_back(p.id);
            self.next_passenger += 1;
        }
    }

    fn advance_all(&mut self, t: f64) {
        if t <= self.now {
            return;
        }
        for id in 0..self.buses.len() {
            self.advance_bus(id, t);
        }
        self.now = t;
    }

    fn advance_bus(&mut self, id: usize, t: f64) {
        let spec = &self.config.bus_spec;
        let bank = &self.config.charger_bank;
        let usable = spec.usable_kwh();
        let stop = self.config.charge_stop_threshold * usable;
        let eff = self.config.charging_efficiency;
        let bus = &mut self.buses[id];
        let dt = t - bus.clock;
        if dt <= 0.0 {
            return;
        }
        match bus.activity {
            Activity::Moving { to } => {
                let target = self.route.distance(to);
                let remaining = (target - bus.position_km).abs();
                let dist = (spec.km_per_minute() * dt).min(remaining);
                let before = bus.soc;
                bus.consume(dist * spec.energy_per_km, spec.aux_load_kw * dt / 60.0);
                // exhausted batteries stop the bus where the energy ran out
                let used = before - bus.soc;
                let want = dist * spec.energy_per_km + spec.aux_load_kw * dt / 60.0;
                let dist = if want > 0.0 && used < want { dist * used / want } else { dist };
                bus.position_km += match bus.direction {
                    Direction::Up => dist,
                    Direction::Down => -dist,
                };
                bus.odometer_today += dist;
            }
            Activity::Dwelling { .. } => bus.consume(0.0, spec.aux_load_kw * dt / 60.0),
            Activity::FastCharging { .. } => {
                let c = charge_increment(bank.fast_power_kw, dt, stop - bus.soc);
                bus.soc += c;
                bus.fast_kwh += c;
                self.grid_this_minute += c / eff;
            }
            Activity::DepotCharging => {
                let c = charge_increment(bank.slow_power_kw, dt, usable - bus.soc);
                bus.soc += c;
                bus.slow_kwh += c;
                self.grid_this_minute += c / eff;
            }
            _ => {}
        }
        bus.clock = t;
    }

    fn bus_next_event(&self, bus: &BusState) -> Option<(f64, BusEvent)> {
        let spec = &self.config.bus_spec;
        let usable = spec.usable_kwh();
        let aux_rate = spec.aux_load_kw / 60.0;
        match bus.activity {
            Activity::Moving { to } => {
                let remaining = (self.route.distance(to) - bus.position_km).abs();
                let arrive = bus.clock + remaining / spec.km_per_minute();
                let rate = spec.km_per_minute() * spec.energy_per_km + aux_rate;
                let empty = bus.clock + bus.soc / rate;
                if empty < arrive - EPS {
                    Some((empty, BusEvent::Exhausted))
                } else {
                    Some((arrive, BusEvent::Arrive))
                }
            }
            Activity::Dwelling { until, .. } => {
                if aux_rate > 0.0 && bus.clock + bus.soc / aux_rate < until - EPS {
                    Some((bus.clock + bus.soc / aux_rate, BusEvent::Exhausted))
                } else {
                    Some((until, BusEvent::DwellEnd))
                }
            }
            Activity::Turnaround { until } => Some((until, BusEvent::TurnaroundEnd)),
            Activity::FastCharging { .. } => {
                let head = self.config.charge_stop_threshold * usable - bus.soc;
                let rate = self.config.charger_bank.fast_power_kw / 60.0;
                Some((bus.clock + head.max(0.0) / rate, BusEvent::ChargeDone))
            }
            Activity::DepotCharging => {
                let head = usable - bus.soc;
                let rate = self.config.charger_bank.slow_power_kw / 60.0;
                Some((bus.clock + head.max(0.0) / rate, BusEvent::ChargeDone))
            }
            _ => None,
        }
    }

    fn next_event(&self, end: f64) -> Option<(f64, Event)> {
        let mut best: Option<(f64, u8, usize, Event)> = None;
        let mut offer = |t: f64, rank: u8, key: usize, ev: Event| {
            let t = t.max(self.now);
            if t >= end {
                return;
            }
            let better = match best {
                None => true,
                Some((bt, br, bk, _)) => (t, rank, key) < (bt, br, bk),
            };
            if better {
                best = Some((t, rank, key, ev));
            }
        };
        for bus in &self.buses {
            if let Some((t, kind)) = self.bus_next_event(bus) {
                offer(t, 0, bus.bus_id, Event::Bus(bus.bus_id, kind));
            }
        }
        if !self.closed {
            let close = self.calendar.close_minute() as f64;
            for (i, term) in self.terminals.iter().enumerate() {
                if term.starved {
                    continue;
                }
                let due = term
                    .last_departure
                    .map_or(self.now.max(self.service_start), |l| self.due_after(l));
                if due < close {
                    offer(due, 1, i, Event::Dispatch);
                }
            }
        }
        best.map(|(t, _, _, ev)| (t, ev))
    }

    fn handle_bus(&mut self, id: usize, kind: BusEvent, t: f64) {
        match kind {
            BusEvent::Arrive => self.arrive(id, t),
            BusEvent::DwellEnd => {
                let station = self.buses[id].next_station;
                self.board(id, station, t, t);
                self.depart(id, station);
            }
            BusEvent::TurnaroundEnd => self.make_ready(id, t),
            BusEvent::ChargeDone => self.charge_done(id, t),
            BusEvent::Exhausted => self.strand(id, t),
        }
    }

    fn arrive(&mut self, id: usize, t: f64) {
        let Activity::Moving { to } = self.buses[id].activity else {
            return;
        };
        self.buses[id].position_km = self.route.distance(to);
        self.alight(id, to, t);
        let trip_end = match self.buses[id].direction {
            Direction::Up => to + 1 == self.route.station_count(),
            Direction::Down => to == 0,
        };
        if trip_end {
            self.end_trip(id, t);
        } else {
            self.open_doors(id, to, t);
        }
    }

    fn open_doors(&mut self, id: usize, station: usize, t: f64) {
        let dwell = self.config.bus_spec.dwell_time_s / 60.0;
        self.board(id, station, t, t + dwell);
        self.buses[id].activity = Activity::Dwelling { until: t + dwell };
    }

    fn alight(&mut self, id: usize, station: usize, t: f64) {
        let passengers = self.passengers;
        let alight_time = &mut self.alight_time;
        let mut served = 0;
        self.buses[id].onboard.retain(|&pid| {
            if passengers[pid as usize].destination as usize == station {
                alight_time[pid as usize] = Some(t);
                served += 1;
                false
            } else {
                true
            }
        });
        self.served += served;
    }

    /// Boards passengers who have arrived by `t`. Their wait ends when the bus pulls away at
    /// `departs`.
    fn board(&mut self, id: usize, station: usize, t: f64, departs: f64) {
        let cap = self.config.bus_spec.passenger_capacity as usize;
        let bus = &mut self.buses[id];
        let queue = &mut self.queues[station][bus.direction.index()];
        while bus.onboard.len() < cap {
            let Some(&pid) = queue.front() else { break };
            let arrived = self.arrival_time[pid as usize];
            if arrived > t + EPS {
                break;
            }
            queue.pop_front();
            self.board_time[pid as usize] = Some(departs);
            bus.onboard.push(pid);
        }
    }

    fn depart(&mut self, id: usize, from: usize) {
        let bus = &mut self.buses[id];
        let to = match bus.direction {
            Direction::Up => from + 1,
            Direction::Down => from - 1,
        };
        bus.next_station = to;
        bus.activity = Activity::Moving { to };
    }

    fn end_trip(&mut self, id: usize, t: f64) {
        let station = self.buses[id].next_station;
        if self.closed {
            self.mark_drain(t);
            self.to_depot(id, t);
            return;
        }
        let site = self.fast_site_at(station);
        let free_fast = site.map_or(0, |s| self.fast_sites[s].free());
        let action = charging_policy(&self.buses[id], SiteView { free_fast }, &self.context());
        match (action, site) {
            (ChargeAction::StartFast, Some(s)) => self.start_fast(id, s),
            (ChargeAction::QueueFast, Some(s)) => {
                self.fast_sites[s].queue.push_back(id);
                self.buses[id].activity = Activity::FastQueued { site: s };
            }
            (ChargeAction::QueueFast, None) => {
                // no charger at this terminal: the bus waits out the day here
                self.buses[id].activity = Activity::FastQueued { site: usize::MAX };
            }
            _ => {
                let until = t + self.config.terminal_layover_s / 60.0;
                self.buses[id].activity = Activity::Turnaround { until };
                if self.config.terminal_layover_s == 0.0 {
                    self.make_ready(id, t);
                }
            }
        }
    }

    fn start_fast(&mut self, id: usize, site: usize) {
        self.fast_sites[site].active.push(id);
        let bus = &mut self.buses[id];
        bus.activity = Activity::FastCharging { site };
        bus.fast_sessions += 1;
    }

    fn make_ready(&mut self, id: usize, t: f64) {
        if self.closed {
            self.to_depot(id, t);
            return;
        }
        let station = self.buses[id].next_station;
        let term = if station == 0 { 0 } else { 1 };
        self.buses[id].activity = Activity::Ready;
        self.buses[id].direction = self.terminals[term].direction;
        self.terminals[term].ready.push_back(id);
        if self.terminals[term].starved {
            self.apply_dispatch(t);
        }
    }

    fn charge_done(&mut self, id: usize, t: f64) {
        match self.buses[id].activity {
            Activity::FastCharging { site } => {
                self.release_fast(id, site);
                self.make_ready(id, t);
            }
            Activity::DepotCharging => {
                self.depot.active.retain(|&b| b != id);
                self.buses[id].activity = Activity::DepotIdle;
                if let Some(next) = self.depot.queue.pop_front() {
                    self.buses[next].activity = Activity::DepotCharging;
                    self.depot.active.push(next);
                }
            }
            _ => {}
        }
    }

    fn release_fast(&mut self, id: usize, site: usize) {
        self.fast_sites[site].active.retain(|&b| b != id);
        if self.closed {
            return;
        }
        if let Some(next) = self.fast_sites[site].queue.pop_front() {
            self.start_fast(next, site);
        }
    }

    fn strand(&mut self, id: usize, t: f64) {
        let bus = &mut self.buses[id];
        bus.soc = bus.soc.max(0.0);
        let onboard = std::mem::take(&mut bus.onboard);
        self.strandings.push(StrandingEvent {
            bus_id: id,
            minute: t,
            position_km: bus.position_km,
            passengers_onboard: onboard.len(),
        });
        self.stranded_passengers += onboard.len();
        bus.activity = Activity::Stranded;
    }

    fn apply_dispatch(&mut self, t: f64) {
        for decision in dispatch_policy(self, t) {
            match decision {
                DispatchDecision::Dispatch { terminal, bus_id } => {
                    let term = &mut self.terminals[terminal];
                    term.ready.retain(|&b| b != bus_id);
                    term.last_departure = Some(t);
                    term.starved = false;
                    let station = term.station;
                    let direction = term.direction;
                    self.dispatches += 1;
                    self.buses[bus_id].direction = direction;
                    self.buses[bus_id].next_station = station;
                    self.open_doors(bus_id, station, t);
                }
                DispatchDecision::Starved { terminal } => {
                    self.terminals[terminal].starved = true;
                    self.headway_violations += 1;
                }
            }
        }
    }

    fn close_service(&mut self, t: f64) {
        self.closed = true;
        for term in &mut self.terminals {
            term.starved = false;
        }
        let mut to_depot = Vec::new();
        for term in &mut self.terminals {
            to_depot.extend(term.ready.drain(..));
        }
        for site in &mut self.fast_sites {
            to_depot.extend(site.active.drain(..));
            to_depot.extend(site.queue.drain(..));
        }
        for bus in &self.buses {
            if let Activity::FastQueued { site: usize::MAX } = bus.activity {
                to_depot.push(bus.bus_id);
            }
        }
        for id in to_depot {
            self.to_depot(id, t);
        }
        if !self.buses.iter().any(BusState::on_trip) {
            self.mark_drain(t);
        }
    }

    fn mark_drain(&mut self, t: f64) {
        self.drain_mark = Some(self.drain_mark.map_or(t, |m: f64| m.max(t)));
    }

    fn to_depot(&mut self, id: usize, _t: f64) {
        let ctx = self.context();
        match charging_policy(&self.buses[id], SiteView { free_fast: 0 }, &ctx) {
            ChargeAction::StartSlow if self.depot.free() > 0 => {
                self.depot.active.push(id);
                self.buses[id].activity = Activity::DepotCharging;
            }
            ChargeAction::StartSlow => {
                self.depot.queue.push_back(id);
                self.buses[id].activity = Activity::DepotQueued;
            }
            _ => self.buses[id].activity = Activity::DepotIdle,
        }
    }

    /// Capacity, state-of-charge and passenger bookkeeping checks.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let cap = self.config.bus_spec.passenger_capacity as usize;
        let usable = self.config.bus_spec.usable_kwh();
        for b in &self.buses {
            if b.onboard.len() > cap {
                return Err(format!("bus {} carries {} > {cap}", b.bus_id, b.onboard.len()));
            }
            if b.soc < 0.0 || b.soc > usable + EPS {
                return Err(format!("bus {} soc {} outside [0, {usable}]", b.bus_id, b.soc));
            }
            let balance = b.initial_soc + b.charged_kwh() - b.energy_today - b.soc;
            if balance.abs() > 1e-9 {
                return Err(format!("bus {} energy imbalance {balance}", b.bus_id));
            }
        }
        let waiting: usize = self.queues.iter().map(|q| q[0].len() + q[1].len()).sum();
        let onboard: usize = self.buses.iter().map(|b| b.onboard.len()).sum();
        let admitted = self.next_passenger;
        if self.served + waiting + onboard + self.stranded_passengers != admitted {
            return Err(format!(
                "passenger bookkeeping: served {} + waiting {waiting} + onboard {onboard} + stranded {} != admitted {admitted}",
                self.served, self.stranded_passengers
            ));
        }
        Ok(())
    }

    pub fn finish(self, seed: u64) -> SimResult {
        let outcomes: Vec<PassengerOutcome> = self
            .passengers
            .iter()
            .map(|p| {
                let alight = self.alight_time[p.id as usize];
                PassengerOutcome {
                    id: p.id,
                    arrival_minute: p.arrival_minute,
                    arrival_time: self.arrival_time[p.id as usize],
                    board_time: self.board_time[p.id as usize],
                    alight_time: alight,
                    alight_station: alight.map(|_| p.destination),
                }
            })
            .collect();
        let mut hist = vec![0u64; WAIT_BINS];
        let mut wait_sum = 0.0;
        let mut boarded = 0usize;
        for w in outcomes.iter().filter_map(PassengerOutcome::wait_min) {
            wait_sum += w;
            boarded += 1;
            let bin = ((w / WAIT_BIN_MIN) as usize).min(WAIT_BINS - 1);
            hist[bin] += 1;
        }
        let per_bus: Vec<BusSummary> = self
            .buses
            .iter()
            .map(|b| BusSummary {
                bus_id: b.bus_id,
                distance_km: b.odometer_today,
                energy_kwh: b.energy_today,
                traction_kwh: b.traction_kwh,
                aux_kwh: b.aux_kwh,
                charged_kwh: b.charged_kwh(),
                fast_sessions: b.fast_sessions,
                initial_soc_kwh: b.initial_soc,
                final_soc_kwh: b.soc,
            })
            .collect();
        let (peak, offpeak) = self.passengers.iter().fold((0, 0), |(p, o), x| {
            match service_period(self.calendar, x.arrival_minute) {
                ServicePeriod::Peak => (p + 1, o),
                _ => (p, o + 1),
            }
        });
        let total = self.passengers.len();
        SimResult {
            seed,
            bus_count: self.config.bus_count,
            horizon_start_minute: self.start_minute(),
            avg_wait_min: if boarded == 0 { 0.0 } else { wait_sum / boarded as f64 },
            wait_histogram: hist,
            total_distance_km: per_bus.iter().map(|b| b.distance_km).sum(),
            total_energy_kwh: self.grid_load.iter().sum(),
            traction_kwh: per_bus.iter().map(|b| b.traction_kwh).sum(),
            aux_kwh: per_bus.iter().map(|b| b.aux_kwh).sum(),
            fast_charged_kwh: self.buses.iter().map(|b| b.fast_kwh).sum(),
            slow_charged_kwh: self.buses.iter().map(|b| b.slow_kwh).sum(),
            grid_load_per_minute: self.grid_load,
            per_bus,
            passengers_total: total,
            passengers_served: self.served,
            unserved_at_close: total - self.served,
            stranded_passengers: self.stranded_passengers,
            peak_arrivals: peak,
            offpeak_arrivals: offpeak,
            strandings: self.strandings,
            headway_violations: self.headway_violations,
            dispatches: self.dispatches,
            drain_end_minute: self.drain_mark.unwrap_or(self.calendar.close_minute() as f64),
            outcomes,
        }
    }
}

/// Passengers arriving at a station in the same minute are spread evenly across that minute:
/// the k-th of c arrives at `minute + (k + 0.5) / c`.
fn spread_arrivals(passengers: &[Passenger], stations: usize) -> Vec<f64> {
    let mut out = vec![0.0; passengers.len()];
    let mut count = vec![0u32; stations];
    let mut rank = vec![0u32; stations];
    let mut start = 0;
    while start < passengers.len() {
        let minute = passengers[start].arrival_minute;
        let end = start + passengers[start..].iter().take_while(|p| p.arrival_minute == minute).count();
        let block = &passengers[start..end];
        for p in block {
            count[p.origin as usize] += 1;
        }
        for (i, p) in block.iter().enumerate() {
            let o = p.origin as usize;
            out[start + i] = minute as f64 + (rank[o] as f64 + 0.5) / count[o] as f64;
            rank[o] += 1;
        }
        for p in block {
            count[p.origin as usize] = 0;
            rank[p.origin as usize] = 0;
        }
        start = end;
    }
    out
}

/// Lead time before opening at which dispatching starts, so that buses already cover the
/// corridor at the opening headway when the first passengers arrive. Whole headways that fit
/// inside one trip, zero when a trip is shorter than a headway.
pub(crate) fn warm_up_min(route: &RouteModel, calendar: &ServiceCalendar, config: &SimConfig) -> f64 {
    let spec = &config.bus_spec;
    let stops = route.station_count().saturating_sub(1) as f64;
    let trip = route.total_length() / spec.km_per_minute() + stops * spec.dwell_time_s / 60.0;
    let headway = match service_period(calendar, calendar.open_minute()) {
        ServicePeriod::Peak => config.dispatch_headway_peak_s,
        _ => config.dispatch_headway_offpeak_s,
    } / 60.0;
    let lead = (trip / headway).floor() * headway;
    lead.min(calendar.open_minute() as f64)
}
