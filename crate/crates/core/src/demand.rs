//! Passenger synthesis for one service day.
//!
//! Every `(station, minute)` cell draws from its own ChaCha8 substream: the generator is seeded
//! from the day seed with `seed_from_u64` and the cell index selects the stream with
//! `set_stream`. Cells are therefore independent of iteration order and the whole day can be
//! generated in parallel without changing a single draw.
//!
//! Within a cell the draws are, in order: one Poisson count, then for each passenger one
//! direction draw followed by one destination draw.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::route::{operating_minutes, service_period, RouteModel, ServiceCalendar, ServicePeriod};
use crate::scalar::Scalar;

/// Arrival intensities for one service day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandParams {
    /// Expected arrivals per station per minute in peak, before scaling.
    pub lambda_peak: f64,
    /// Expected arrivals per station per minute off-peak, before scaling.
    pub lambda_offpeak: f64,
    /// Daily ridership the rates are calibrated to. `None` keeps `calibration_scale` as given.
    pub target_daily_passengers: Option<f64>,
    /// Multiplier applied to both rates.
    pub calibration_scale: f64,
}

impl Default for DemandParams {
    fn default() -> Self {
        DemandParams {
            lambda_peak: 10.0,
            lambda_offpeak: 3.0,
            target_daily_passengers: Some(95_000.0),
            calibration_scale: 1.0,
        }
    }
}

impl DemandParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_offpeak >= 0.0 && self.lambda_offpeak.is_finite()) {
            return Err(Error::validation("demand.lambda_offpeak", "must be finite and >= 0"));
        }
        if !(self.lambda_peak >= self.lambda_offpeak && self.lambda_peak.is_finite()) {
            return Err(Error::validation(
                "demand.lambda_peak",
                "must be finite and >= lambda_offpeak",
            ));
        }
        if !(self.calibration_scale >= 0.0 && self.calibration_scale.is_finite()) {
            return Err(Error::validation("demand.calibration_scale", "must be finite and >= 0"));
        }
        if let Some(t) = self.target_daily_passengers {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::validation(
                    "demand.target_daily_passengers",
                    "must be finite and >= 0",
                ));
            }
        }
        Ok(())
    }

    /// Rate per station per minute for a period, after scaling.
    pub fn rate(&self, period: ServicePeriod) -> f64 {
        match period {
            ServicePeriod::Peak => self.lambda_peak * self.calibration_scale,
            ServicePeriod::OffPeak => self.lambda_offpeak * self.calibration_scale,
            ServicePeriod::Closed => 0.0,
        }
    }

    /// Expected daily passengers with the current scale.
    pub fn expected_daily(&self, calendar: &ServiceCalendar, station_count: usize) -> f64 {
        raw_expectation(self, calendar, station_count) * self.calibration_scale
    }

    /// Copy with `calibration_scale` set from the target. Without a target, or when the raw
    /// rates are all zero, the params are returned unchanged.
    pub fn calibrated(&self, calendar: &ServiceCalendar, station_count: usize) -> Result<Self> {
        match self.target_daily_passengers {
            Some(_) if raw_expectation(self, calendar, station_count) > 0.0 => Ok(DemandParams {
                calibration_scale: calibrate_lambda(self, calendar, station_count)?,
                ..self.clone()
            }),
            _ => Ok(self.clone()),
        }
    }
}

fn raw_expectation(params: &DemandParams, calendar: &ServiceCalendar, station_count: usize) -> f64 {
    let m = operating_minutes(calendar);
    station_count as f64 * (m.peak as f64 * params.lambda_peak + m.offpeak as f64 * params.lambda_offpeak)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Towards increasing station index.
    Up,
    Down,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Direction::Up => 0,
            Direction::Down => 1,
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "up" | "Up" => Ok(Direction::Up),
            "down" | "Down" => Ok(Direction::Down),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passenger {
    pub id: u32,
    pub arrival_minute: u32,
    pub origin: u32,
    pub direction: Direction,
    pub destination: u32,
}

impl Passenger {
    pub fn check(&self, station_count: usize) -> Result<()> {
        let ok = (self.destination as usize) < station_count
            && (self.origin as usize) < station_count
            && match self.direction {
                Direction::Up => self.destination > self.origin,
                Direction::Down => self.destination < self.origin,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::validation(
                "passenger",
                format!(
                    "passenger {} ({} -> {} {:?}) is inconsistent with a {station_count}-station route",
                    self.id, self.origin, self.destination, self.direction
                ),
            ))
        }
    }
}

/// One day of passengers, ordered by `(arrival_minute, origin)` with ids assigned in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct PassengerSet {
    pub passengers: Vec<Passenger>,
    pub seed: u64,
    pub calibration_scale: f64,
}

impl PassengerSet {
    pub fn empty(seed: u64) -> Self {
        PassengerSet {
            passengers: Vec::new(),
            seed,
            calibration_scale: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.passengers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.passengers.is_empty()
    }

    /// Passengers grouped per `(origin, minute)` cell.
    pub fn cells(&self) -> impl Iterator<Item = ((u32, u32), &[Passenger])> {
        self.passengers
            .chunk_by(|a, b| a.arrival_minute == b.arrival_minute && a.origin == b.origin)
            .map(|g| ((g[0].origin, g[0].arrival_minute), g))
    }

    /// Counts of passengers arriving in peak and off-peak minutes.
    pub fn period_counts(&self, calendar: &ServiceCalendar) -> (usize, usize) {
        self.passengers.iter().fold((0, 0), |(p, o), x| {
            match service_period(calendar, x.arrival_minute) {
                ServicePeriod::Peak => (p + 1, o),
                _ => (p, o + 1),
            }
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(["id", "arrival_minute", "origin", "direction", "destination"])
            .map_err(csv_err)?;
        for p in &self.passengers {
            out.write_record([
                p.id.to_string(),
                p.arrival_minute.to_string(),
                p.origin.to_string(),
                p.direction.as_str().to_string(),
                p.destination.to_string(),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the format written by [`PassengerSet::write_csv`] and checks each row against the
    /// station count.
    pub fn read_csv<R: Read>(r: R, station_count: usize, seed: u64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let mut passengers = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let field = |i: usize| -> Result<&str> {
                rec.get(i).ok_or_else(|| {
                    Error::validation("passengers.csv", format!("row {} has too few columns", line + 2))
                })
            };
            let num = |i: usize| -> Result<u32> {
                field(i)?.parse().map_err(|_| {
                    Error::validation("passengers.csv", format!("row {}: bad number in column {i}", line + 2))
                })
            };
            let p = Passenger {
                id: num(0)?,
                arrival_minute: num(1)?,
                origin: num(2)?,
                direction: field(3)?
                    .parse()
                    .map_err(|e: String| Error::validation("passengers.csv", format!("row {}: {e}", line + 2)))?,
                destination: num(4)?,
            };
            p.check(station_count)?;
            passengers.push(p);
        }
        passengers.sort_by_key(|p| (p.arrival_minute, p.origin, p.id));
        Ok(PassengerSet {
            passengers,
            seed,
            calibration_scale: f64::NAN,
        })
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::validation("csv", format!("{other:?}")),
    }
}

/// Poisson probability mass `λ^x e^{-λ} / x!`, evaluated in log space.
pub fn poisson_pmf<T: Scalar>(x: u64, lambda: T) -> T {
    if lambda == T::zero() {
        return if x == 0 { T::one() } else { T::zero() };
    }
    let mut log_fact = T::zero();
    for k in 2..=x {
        log_fact = log_fact + T::of(k as f64).ln();
    }
    (T::of(x as f64) * lambda.ln() - lambda - log_fact).exp()
}

pub fn poisson_sample<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<u64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::validation("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(lambda).map_err(|e| Error::validation("lambda", e.to_string()))?;
    Ok(dist.sample(rng) as u64)
}

/// Probability that a passenger boarding at 0-based `station_index` travels towards higher
/// indices: `(n - i - 1) / (n - 1)`.
pub fn direction_probability<T: Scalar>(station_index: usize, station_count: usize) -> Result<T> {
    if station_count < 2 {
        return Err(Error::validation("station_count", "need at least 2 stations"));
    }
    if station_index >= station_count {
        return Err(Error::validation(
            "station_index",
            format!("{station_index} out of range for {station_count} stations"),
        ));
    }
    Ok(T::of_usize(station_count - station_index - 1) / T::of_usize(station_count - 1))
}

/// One Bernoulli draw.
pub fn sample_direction<R: Rng + ?Sized>(p_up: f64, rng: &mut R) -> Direction {
    if rng.random::<f64>() < p_up {
        Direction::Up
    } else {
        Direction::Down
    }
}

/// Destination uniform over the stations beyond `origin` in `direction`.
pub fn sample_alighting<R: Rng + ?Sized>(
    origin: usize,
    direction: Direction,
    station_count: usize,
    rng: &mut R,
) -> Result<usize> {
    if origin >= station_count {
        return Err(Error::validation("origin", format!("{origin} out of range")));
    }
    match direction {
        Direction::Up if origin + 1 < station_count => Ok(rng.random_range(origin + 1..station_count)),
        Direction::Down if origin > 0 => Ok(rng.random_range(0..origin)),
        _ => Err(Error::validation(
            "direction",
            format!("no station beyond {origin} heading {direction:?}"),
        )),
    }
}

/// Scale that makes the expected daily total equal the target ridership.
pub fn calibrate_lambda(params: &DemandParams, calendar: &ServiceCalendar, station_count: usize) -> Result<f64> {
    let raw = raw_expectation(params, calendar, station_count);
    if !(raw > 0.0) {
        return Err(Error::validation(
            "demand",
            "expected daily arrivals are zero, nothing to calibrate",
        ));
    }
    let target = params
        .target_daily_passengers
        .ok_or_else(|| Error::validation("demand.target_daily_passengers", "no target set"))?;
    Ok(target / raw)
}

/// Substream generator for one `(station, minute)` cell.
pub fn cell_rng(seed: u64, station: usize, minute: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((minute as u64) << 20) | station as u64);
    rng
}

/// Draws one day of passengers. `params.calibration_scale` is applied as-is; call
/// [`DemandParams::calibrated`] first to match a ridership target.
pub fn generate_day_demand(
    route: &RouteModel,
    calendar: &ServiceCalendar,
    params: &DemandParams,
    seed: u64,
) -> Result<PassengerSet> {
    params.validate()?;
    calendar.validate()?;
    let n = route.station_count();
    let probs: Vec<f64> = (0..n)
        .map(|i| direction_probability(i, n))
        .collect::<Result<_>>()?;

    let minutes: Vec<u32> = (calendar.open_minute()..calendar.close_minute()).collect();
    let per_minute: Vec<Vec<Passenger>> = minutes
        .par_iter()
        .map(|&minute| {
            let lambda = params.rate(service_period(calendar, minute));
            let mut out = Vec::new();
            for (station, &p_up) in probs.iter().enumerate() {
                let mut rng = cell_rng(seed, station, minute);
                let count = poisson_sample(lambda, &mut rng)?;
                for _ in 0..count {
                    let direction = sample_direction(p_up, &mut rng);
                    let destination = sample_alighting(station, direction, n, &mut rng)?;
                    out.push(Passenger {
                        id: 0,
                        arrival_minute: minute,
                        origin: station as u32,
                        direction,
                        destination: destination as u32,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut passengers: Vec<Passenger> = per_minute.into_iter().flatten().collect();
    for (i, p) in passengers.iter_mut().enumerate() {
        p.id = i as u32;
    }
    Ok(PassengerSet {
        passengers,
        seed,
        calibration_scale: params.calibration_scale,
    })
}
