//! Corridor geometry, service calendar and diesel baseline operations.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A stop on the corridor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub index: usize,
    pub name: String,
    /// Kilometres from station 0.
    pub distance_from_origin: f64,
}

/// Linear, bi-directional corridor. Terminals are always the first and last station.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteModel {
    stations: Vec<Station>,
    depot_station: usize,
}

impl RouteModel {
    pub fn stations(&self) -> &[Station] {
        &self.stations
    }

    pub fn station_count(&self) -> usize {
        self.stations.len()
    }

    pub fn total_length(&self) -> f64 {
        self.stations.last().map_or(0.0, |s| s.distance_from_origin)
    }

    pub fn terminals(&self) -> (usize, usize) {
        (0, self.stations.len() - 1)
    }

    pub fn is_terminal(&self, index: usize) -> bool {
        index == 0 || index + 1 == self.stations.len()
    }

    pub fn depot_station(&self) -> usize {
        self.depot_station
    }

    pub fn distance(&self, index: usize) -> f64 {
        self.stations[index].distance_from_origin
    }

    /// Returns a copy with the depot moved. Fails if `index` is not a station.
    pub fn with_depot(mut self, index: usize) -> Result<Self> {
        if index >= self.stations.len() {
            return Err(Error::validation(
                "route.depot_station",
                format!("{index} is not a station index (0..{})", self.stations.len()),
            ));
        }
        self.depot_station = index;
        Ok(self)
    }
}

/// Builds a corridor from `(name, km from origin)` pairs.
pub fn build_route<S: AsRef<str>>(station_spec: &[(S, f64)]) -> Result<RouteModel> {
    if station_spec.len() < 2 {
        return Err(Error::validation(
            "route.stations",
            format!("need at least 2 stations, got {}", station_spec.len()),
        ));
    }
    let mut prev: Option<f64> = None;
    for (i, (_, km)) in station_spec.iter().enumerate() {
        if !km.is_finite() {
            return Err(Error::validation(
                "route.stations",
                format!("station {i} distance is not finite"),
            ));
        }
        match prev {
            None if *km != 0.0 => {
                return Err(Error::validation(
                    "route.stations",
                    format!("first station must be at 0 km, got {km}"),
                ))
            }
            Some(p) if *km <= p => {
                return Err(Error::validation(
                    "route.stations",
                    format!("distances must be strictly increasing: station {i} at {km} km follows {p} km"),
                ))
            }
            _ => {}
        }
        prev = Some(*km);
    }
    let stations = station_spec
        .iter()
        .enumerate()
        .map(|(index, (name, km))| Station {
            index,
            name: name.as_ref().to_string(),
            distance_from_origin: *km,
        })
        .collect();
    Ok(RouteModel {
        stations,
        depot_station: 0,
    })
}

/// `count` stations spread evenly over `length_km`, named `S01`, `S02`, ...
pub fn uniform_route(count: usize, length_km: f64) -> Result<RouteModel> {
    if count < 2 {
        return Err(Error::validation(
            "route.station_count",
            format!("need at least 2 stations, got {count}"),
        ));
    }
    if !(length_km > 0.0) {
        return Err(Error::validation("route.length_km", "must be positive"));
    }
    let gap = length_km / (count - 1) as f64;
    let spec: Vec<(String, f64)> = (0..count)
        .map(|i| {
            let km = if i + 1 == count { length_km } else { gap * i as f64 };
            (format!("S{:02}", i + 1), km)
        })
        .collect();
    build_route(&spec)
}

/// Minutes since midnight, serialized as `"HH:MM"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockTime(pub u32);

impl ClockTime {
    pub fn hm(h: u32, m: u32) -> Self {
        ClockTime(h * 60 + m)
    }

    pub fn minutes(self) -> u32 {
        self.0
    }
}

impl fmt::Display for ClockTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.0 / 60, self.0 % 60)
    }
}

impl std::str::FromStr for ClockTime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (h, m) = s
            .split_once(':')
            .ok_or_else(|| format!("expected HH:MM, got `{s}`"))?;
        let h: u32 = h.trim().parse().map_err(|_| format!("bad hour in `{s}`"))?;
        let m: u32 = m.trim().parse().map_err(|_| format!("bad minute in `{s}`"))?;
        if m >= 60 || h > 24 || (h == 24 && m != 0) {
            return Err(format!("time out of range: `{s}`"));
        }
        Ok(ClockTime::hm(h, m))
    }
}

impl Serialize for ClockTime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ClockTime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ServicePeriod {
    Peak,
    OffPeak,
    Closed,
}

/// Operating hours and peak windows of a service day. Windows are half-open `[start, end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceCalendar {
    pub open: ClockTime,
    pub close: ClockTime,
    pub peak_windows: Vec<(ClockTime, ClockTime)>,
}

impl Default for ServiceCalendar {
    fn default() -> Self {
        ServiceCalendar::lahore()
    }
}

impl ServiceCalendar {
    pub fn new(open: ClockTime, close: ClockTime, peak_windows: Vec<(ClockTime, ClockTime)>) -> Result<Self> {
        let cal = ServiceCalendar {
            open,
            close,
            peak_windows,
        };
        cal.validate()?;
        Ok(cal)
    }

    /// 06:15 to 22:15 with peaks 07-10, 12-15 and 17-20.
    pub fn lahore() -> Self {
        ServiceCalendar {
            open: ClockTime::hm(6, 15),
            close: ClockTime::hm(22, 15),
            peak_windows: vec![
                (ClockTime::hm(7, 0), ClockTime::hm(10, 0)),
                (ClockTime::hm(12, 0), ClockTime::hm(15, 0)),
                (ClockTime::hm(17, 0), ClockTime::hm(20, 0)),
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.open >= self.close {
            return Err(Error::validation(
                "calendar",
                format!("open {} must precede close {}", self.open, self.close),
            ));
        }
        let mut last_end = self.open;
        for (i, (start, end)) in self.peak_windows.iter().enumerate() {
            if start >= end {
                return Err(Error::validation(
                    "calendar.peak_windows",
                    format!("window {i} ({start}-{end}) is empty or reversed"),
                ));
            }
            if *start < last_end {
                return Err(Error::validation(
                    "calendar.peak_windows",
                    format!("window {i} ({start}-{end}) overlaps or is out of order"),
                ));
            }
            if *end > self.close {
                return Err(Error::validation(
                    "calendar.peak_windows",
                    format!("window {i} ({start}-{end}) extends past close {}", self.close),
                ));
            }
            last_end = *end;
        }
        Ok(())
    }

    pub fn open_minute(&self) -> u32 {
        self.open.0
    }

    pub fn close_minute(&self) -> u32 {
        self.close.0
    }

    pub fn is_operating(&self, minute: u32) -> bool {
        minute >= self.open.0 && minute < self.close.0
    }
}

pub fn service_period(calendar: &ServiceCalendar, minute: u32) -> ServicePeriod {
    if !calendar.is_operating(minute) {
        return ServicePeriod::Closed;
    }
    let peak = calendar
        .peak_windows
        .iter()
        .any(|(s, e)| minute >= s.0 && minute < e.0);
    if peak {
        ServicePeriod::Peak
    } else {
        ServicePeriod::OffPeak
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OperatingMinutes {
    pub total: u32,
    pub peak: u32,
    pub offpeak: u32,
}

pub fn operating_minutes(calendar: &ServiceCalendar) -> OperatingMinutes {
    let total = calendar.close.0 - calendar.open.0;
    let peak: u32 = calendar
        .peak_windows
        .iter()
        .map(|(s, e)| e.0 - s.0)
        .sum();
    OperatingMinutes {
        total,
        peak,
        offpeak: total - peak,
    }
}

/// Reference facts about the diesel service the electric fleet replaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineDieselOps {
    pub fleet_in_circuit: u32,
    pub headway_peak_s: f64,
    pub headway_offpeak_s: f64,
    pub avg_speed_kmh: f64,
    pub max_speed_kmh: f64,
    pub bus_capacity: u32,
    pub avg_daily_distance_per_bus_km: f64,
}

impl Default for BaselineDieselOps {
    fn default() -> Self {
        BaselineDieselOps {
            fleet_in_circuit: 58,
            headway_peak_s: 135.0,
            headway_offpeak_s: 180.0,
            avg_speed_kmh: 40.0,
            max_speed_kmh: 55.0,
            bus_capacity: 160,
            avg_daily_distance_per_bus_km: 313.2,
        }
    }
}

impl BaselineDieselOps {
    pub fn validate(&self) -> Result<()> {
        if !(self.headway_peak_s > 0.0 && self.headway_peak_s <= self.headway_offpeak_s) {
            return Err(Error::validation(
                "baseline.headway_peak_s",
                "must be positive and no larger than headway_offpeak_s",
            ));
        }
        if !(self.avg_speed_kmh > 0.0 && self.avg_speed_kmh <= self.max_speed_kmh) {
            return Err(Error::validation(
                "baseline.avg_speed_kmh",
                "must be positive and no larger than max_speed_kmh",
            ));
        }
        if self.bus_capacity == 0 {
            return Err(Error::validation("baseline.bus_capacity", "must be positive"));
        }
        if self.fleet_in_circuit == 0 {
            return Err(Error::validation("baseline.fleet_in_circuit", "must be positive"));
        }
        Ok(())
    }

    /// Expected wait under uniform arrivals: half the headway, weighted by the share of
    /// passengers arriving in peak.
    pub fn blended_half_headway_min(&self, peak_share: f64) -> f64 {
        let peak = self.headway_peak_s / 120.0;
        let off = self.headway_offpeak_s / 120.0;
        peak_share * peak + (1.0 - peak_share) * off
    }
}
