//! Total cost of ownership, emissions and breakeven for diesel and battery-electric fleets.
//!
//! All money is in a single currency (USD) with no inflation. A discount rate can be set on
//! each model; it defaults to zero, in which case every figure is undiscounted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Litres of fuel for `distance_km` at `km_per_l`.
pub fn fuel_consumption<T: Scalar>(distance_km: T, km_per_l: T) -> Result<T> {
    if !(km_per_l > T::zero()) {
        return Err(Error::validation("mileage_km_per_l", "must be positive"));
    }
    if distance_km < T::zero() {
        return Err(Error::validation("distance_km", "must be non-negative"));
    }
    Ok(distance_km / km_per_l)
}

/// kWh drawn for `distance_km` at `km_per_kwh`.
pub fn electricity_consumption<T: Scalar>(distance_km: T, km_per_kwh: T) -> Result<T> {
    if !(km_per_kwh > T::zero()) {
        return Err(Error::validation("mileage_km_per_kwh", "must be positive"));
    }
    if distance_km < T::zero() {
        return Err(Error::validation("distance_km", "must be non-negative"));
    }
    Ok(distance_km / km_per_kwh)
}

/// Tonnes CO2e from burning `liters` of fuel.
pub fn diesel_emissions<T: Scalar>(liters: T, ton_per_l: T) -> T {
    liters * ton_per_l
}

/// Grid carbon intensity anchors, `(year, kgCO2e/kWh)`. Linear between anchors, flat outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct GridEmissionTrajectory<T> {
    pub anchors: Vec<(i32, T)>,
}

impl<T: Scalar> GridEmissionTrajectory<T> {
    pub fn new(anchors: Vec<(i32, T)>) -> Result<Self> {
        let t = GridEmissionTrajectory { anchors };
        t.validate()?;
        Ok(t)
    }

    /// 2020: 0.416, 2025: 0.351, 2030: 0.239 kgCO2e/kWh.
    pub fn pakistan_igcep() -> Self {
        GridEmissionTrajectory {
            anchors: vec![(2020, T::of(0.416)), (2025, T::of(0.351)), (2030, T::of(0.239))],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.anchors.is_empty() {
            return Err(Error::validation("grid_emission_trajectory", "needs at least one anchor"));
        }
        for w in self.anchors.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::validation(
                    "grid_emission_trajectory",
                    "years must be strictly increasing",
                ));
            }
        }
        if self.anchors.iter().any(|(_, f)| !(*f > T::zero())) {
            return Err(Error::validation("grid_emission_trajectory", "factors must be positive"));
        }
        Ok(())
    }

    /// kgCO2e/kWh in `year`.
    pub fn factor(&self, year: T) -> T {
        let first = self.anchors[0];
        let last = self.anchors[self.anchors.len() - 1];
        if year <= T::of(first.0 as f64) {
            return first.1;
        }
        if year >= T::of(last.0 as f64) {
            return last.1;
        }
        for w in self.anchors.windows(2) {
            let (y0, f0) = (T::of(w[0].0 as f64), w[0].1);
            let (y1, f1) = (T::of(w[1].0 as f64), w[1].1);
            if year <= y1 {
                return f0 + (year - y0) / (y1 - y0) * (f1 - f0);
            }
        }
        last.1
    }
}

/// Tonnes CO2e from drawing `kwh` from the grid in `year`.
pub fn grid_emissions<T: Scalar>(kwh: T, year: T, trajectory: &GridEmissionTrajectory<T>) -> T {
    kwh * trajectory.factor(year) / T::of(1000.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct DieselCostModel<T> {
    pub fleet_size: u32,
    pub bus_cost: T,
    pub study_life: u32,
    pub mileage_km_per_l: T,
    pub avg_daily_km: T,
    pub maintenance_per_km: T,
    pub fuel_price_per_l: T,
    pub emission_ton_per_l: T,
    pub emission_cost_per_ton: T,
    pub operating_days_per_year: T,
    pub discount_rate: T,
}

impl<T: Scalar> Default for DieselCostModel<T> {
    fn default() -> Self {
        DieselCostModel {
            fleet_size: 58,
            bus_cost: T::of(350_000.0),
            study_life: 12,
            mileage_km_per_l: T::of(2.0),
            avg_daily_km: T::of(415.0),
            maintenance_per_km: T::of(0.3921),
            fuel_price_per_l: T::of(0.7657),
            emission_ton_per_l: T::of(0.002910),
            emission_cost_per_ton: T::of(50.0),
            operating_days_per_year: T::of(365.0),
            discount_rate: T::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct ChargerCost<T> {
    pub count: u32,
    pub unit_cost: T,
    pub install_cost: T,
}

impl<T: Scalar> Default for ChargerCost<T> {
    fn default() -> Self {
        ChargerCost {
            count: 0,
            unit_cost: T::zero(),
            install_cost: T::zero(),
        }
    }
}

impl<T: Scalar> ChargerCost<T> {
    pub fn installed_unit(&self) -> T {
        self.unit_cost + self.install_cost
    }

    pub fn total(&self) -> T {
        T::of(self.count as f64) * self.installed_unit()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct BebCostModel<T> {
    pub fleet_size: u32,
    pub bus_cost: T,
    pub slow_charger: ChargerCost<T>,
    pub fast_charger: ChargerCost<T>,
    pub battery_kwh: T,
    pub battery_cost_per_kwh: T,
    pub battery_life_years: u32,
    pub battery_salvage_fraction: T,
    pub study_life: u32,
    pub mileage_km_per_kwh: T,
    pub avg_daily_km: T,
    pub maintenance_per_km: T,
    /// Constant grid factor, tCO2e/kWh. Ignored when `grid_trajectory` is set.
    pub grid_emission_ton_per_kwh: T,
    pub grid_trajectory: Option<GridEmissionTrajectory<T>>,
    pub emission_cost_per_ton: T,
    pub electricity_price_per_kwh: T,
    pub operating_days_per_year: T,
    pub discount_rate: T,
    /// Calendar year of study year 0, used to look up the grid trajectory.
    pub start_year: i32,
}

impl<T: Scalar> Default for BebCostModel<T> {
    fn default() -> Self {
        BebCostModel {
            fleet_size: 64,
            bus_cost: T::of(532_000.0),
            slow_charger: ChargerCost {
                count: 58,
                unit_cost: T::of(50_000.0),
                install_cost: T::of(17_050.0),
            },
            fast_charger: ChargerCost {
                count: 10,
                unit_cost: T::of(495_636.0),
                install_cost: T::of(202_811.0),
            },
            battery_kwh: T::of(350.0),
            battery_cost_per_kwh: T::of(137.0),
            battery_life_years: 6,
            battery_salvage_fraction: T::of(0.30),
            study_life: 12,
            mileage_km_per_kwh: T::of(1.88),
            avg_daily_km: T::of(374.0),
            maintenance_per_km: T::of(0.206),
            grid_emission_ton_per_kwh: T::of(0.0004586),
            grid_trajectory: None,
            emission_cost_per_ton: T::of(50.0),
            electricity_price_per_kwh: T::of(0.1143),
            operating_days_per_year: T::of(365.0),
            discount_rate: T::zero(),
            start_year: 2022,
        }
    }
}

fn positive<T: Scalar>(field: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, "must be positive"))
    }
}

fn non_negative<T: Scalar>(field: &str, v: T) -> Result<()> {
    if v >= T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, "must be non-negative"))
    }
}

impl<T: Scalar> DieselCostModel<T> {
    pub fn validate(&self) -> Result<()> {
        if self.study_life < 1 {
            return Err(Error::validation("diesel.study_life", "must be at least 1 year"));
        }
        if self.fleet_size == 0 {
            return Err(Error::validation("diesel.fleet_size", "must be positive"));
        }
        positive("diesel.mileage_km_per_l", self.mileage_km_per_l)?;
        positive("diesel.operating_days_per_year", self.operating_days_per_year)?;
        non_negative("diesel.bus_cost", self.bus_cost)?;
        non_negative("diesel.avg_daily_km", self.avg_daily_km)?;
        non_negative("diesel.maintenance_per_km", self.maintenance_per_km)?;
        non_negative("diesel.fuel_price_per_l", self.fuel_price_per_l)?;
        non_negative("diesel.emission_ton_per_l", self.emission_ton_per_l)?;
        non_negative("diesel.emission_cost_per_ton", self.emission_cost_per_ton)?;
        non_negative("diesel.discount_rate", self.discount_rate)?;
        Ok(())
    }

    /// Litres per bus per day.
    pub fn daily_fuel_per_bus(&self) -> T {
        self.avg_daily_km / self.mileage_km_per_l
    }

    /// Every unit price and cost multiplied by `k`.
    pub fn scale_prices(&self, k: T) -> Self {
        DieselCostModel {
            bus_cost: self.bus_cost * k,
            maintenance_per_km: self.maintenance_per_km * k,
            fuel_price_per_l: self.fuel_price_per_l * k,
            emission_cost_per_ton: self.emission_cost_per_ton * k,
            ..self.clone()
        }
    }
}

impl<T: Scalar> BebCostModel<T> {
    pub fn validate(&self) -> Result<()> {
        if self.study_life < 1 {
            return Err(Error::validation("beb.study_life", "must be at least 1 year"));
        }
        if self.battery_life_years < 1 {
            return Err(Error::validation("beb.battery_life_years", "must be at least 1 year"));
        }
        if self.fleet_size == 0 {
            return Err(Error::validation("beb.fleet_size", "must be positive"));
        }
        positive("beb.mileage_km_per_kwh", self.mileage_km_per_kwh)?;
        positive("beb.battery_kwh", self.battery_kwh)?;
        positive("beb.operating_days_per_year", self.operating_days_per_year)?;
        if !(self.battery_salvage_fraction >= T::zero() && self.battery_salvage_fraction <= T::one()) {
            return Err(Error::validation("beb.battery_salvage_fraction", "must lie in [0, 1]"));
        }
        for (f, v) in [
            ("beb.bus_cost", self.bus_cost),
            ("beb.slow_charger.unit_cost", self.slow_charger.unit_cost),
            ("beb.slow_charger.install_cost", self.slow_charger.install_cost),
            ("beb.fast_charger.unit_cost", self.fast_charger.unit_cost),
            ("beb.fast_charger.install_cost", self.fast_charger.install_cost),
            ("beb.battery_cost_per_kwh", self.battery_cost_per_kwh),
            ("beb.avg_daily_km", self.avg_daily_km),
            ("beb.maintenance_per_km", self.maintenance_per_km),
            ("beb.grid_emission_ton_per_kwh", self.grid_emission_ton_per_kwh),
            ("beb.emission_cost_per_ton", self.emission_cost_per_ton),
            ("beb.electricity_price_per_kwh", self.electricity_price_per_kwh),
            ("beb.discount_rate", self.discount_rate),
        ] {
            non_negative(f, v)?;
        }
        if let Some(t) = &self.grid_trajectory {
            t.validate()?;
        }
        Ok(())
    }

    /// kWh per bus per day.
    pub fn daily_energy_per_bus(&self) -> T {
        self.avg_daily_km / self.mileage_km_per_kwh
    }

    /// tCO2e/kWh for a study year.
    pub fn grid_factor(&self, year_index: u32) -> T {
        match &self.grid_trajectory {
            Some(t) => t.factor(T::of((self.start_year + year_index as i32) as f64)) / T::of(1000.0),
            None => self.grid_emission_ton_per_kwh,
        }
    }

    /// One full set of packs for the fleet.
    pub fn fleet_battery_cost(&self) -> T {
        T::of(self.fleet_size as f64) * self.battery_kwh * self.battery_cost_per_kwh
    }

    /// Buses, chargers with installation, and initial packs.
    pub fn capital_cost(&self) -> T {
        T::of(self.fleet_size as f64) * self.bus_cost
            + self.slow_charger.total()
            + self.fast_charger.total()
            + self.fleet_battery_cost()
    }

    /// Study years, excluding year 0, in which the packs are swapped.
    pub fn replacement_years(&self) -> Vec<u32> {
        (1..self.study_life)
            .filter(|y| y % self.battery_life_years == 0)
            .collect()
    }

    pub fn scale_prices(&self, k: T) -> Self {
        let scale_charger = |c: &ChargerCost<T>| ChargerCost {
            count: c.count,
            unit_cost: c.unit_cost * k,
            install_cost: c.install_cost * k,
        };
        BebCostModel {
            bus_cost: self.bus_cost * k,
            slow_charger: scale_charger(&self.slow_charger),
            fast_charger: scale_charger(&self.fast_charger),
            battery_cost_per_kwh: self.battery_cost_per_kwh * k,
            maintenance_per_km: self.maintenance_per_km * k,
            emission_cost_per_ton: self.emission_cost_per_ton * k,
            electricity_price_per_kwh: self.electricity_price_per_kwh * k,
            ..self.clone()
        }
    }
}

/// Cost components for one study year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YearCost<T> {
    pub year_index: u32,
    pub capital: T,
    pub energy: T,
    pub maintenance: T,
    pub battery_replacement: T,
    pub emission: T,
    /// Tonnes CO2e emitted in the year.
    pub emission_tons: T,
}

impl<T: Scalar> YearCost<T> {
    pub fn total(&self, include_emissions: bool) -> T {
        let base = self.capital + self.energy + self.maintenance + self.battery_replacement;
        if include_emissions {
            base + self.emission
        } else {
            base
        }
    }
}

/// Either fleet type, so both can flow through the same cashflow code.
#[derive(Debug, Clone, PartialEq)]
pub enum CostModel<T> {
    Diesel(DieselCostModel<T>),
    Beb(BebCostModel<T>),
}

impl<T: Scalar> CostModel<T> {
    pub fn study_life(&self) -> u32 {
        match self {
            CostModel::Diesel(m) => m.study_life,
            CostModel::Beb(m) => m.study_life,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CostModel::Diesel(m) => m.validate(),
            CostModel::Beb(m) => m.validate(),
        }
    }

    fn discount(&self, year_index: u32) -> T {
        let r = match self {
            CostModel::Diesel(m) => m.discount_rate,
            CostModel::Beb(m) => m.discount_rate,
        };
        (T::one() + r).powi(-(year_index as i32))
    }
}

impl<T> From<DieselCostModel<T>> for CostModel<T> {
    fn from(m: DieselCostModel<T>) -> Self {
        CostModel::Diesel(m)
    }
}

impl<T> From<BebCostModel<T>> for CostModel<T> {
    fn from(m: BebCostModel<T>) -> Self {
        CostModel::Beb(m)
    }
}

/// Cost components of one study year. Emission cost is always computed; whether it counts is
/// decided by the caller.
pub fn annual_cashflow<T: Scalar>(model: &CostModel<T>, year_index: u32) -> Result<YearCost<T>> {
    if year_index >= model.study_life() {
        return Err(Error::validation(
            "year_index",
            format!("{year_index} is outside a {}-year study", model.study_life()),
        ));
    }
    let d = model.discount(year_index);
    let mut out = match model {
        CostModel::Diesel(m) => {
            let fleet = T::of(m.fleet_size as f64);
            let litres = fleet * m.daily_fuel_per_bus() * m.operating_days_per_year;
            let km = fleet * m.avg_daily_km * m.operating_days_per_year;
            let tons = diesel_emissions(litres, m.emission_ton_per_l);
            YearCost {
                year_index,
                capital: if year_index == 0 { fleet * m.bus_cost } else { T::zero() },
                energy: litres * m.fuel_price_per_l,
                maintenance: km * m.maintenance_per_km,
                battery_replacement: T::zero(),
                emission: tons * m.emission_cost_per_ton,
                emission_tons: tons,
            }
        }
        CostModel::Beb(m) => {
            let fleet = T::of(m.fleet_size as f64);
            let kwh = fleet * m.daily_energy_per_bus() * m.operating_days_per_year;
            let km = fleet * m.avg_daily_km * m.operating_days_per_year;
            let tons = kwh * m.grid_factor(year_index);
            let replaced = year_index > 0 && year_index % m.battery_life_years == 0;
            YearCost {
                year_index,
                capital: if year_index == 0 { m.capital_cost() } else { T::zero() },
                energy: kwh * m.electricity_price_per_kwh,
                maintenance: km * m.maintenance_per_km,
                battery_replacement: if replaced {
                    m.fleet_battery_cost() * (T::one() - m.battery_salvage_fraction)
                } else {
                    T::zero()
                },
                emission: tons * m.emission_cost_per_ton,
                emission_tons: tons,
            }
        }
    };
    out.capital = out.capital * d;
    out.energy = out.energy * d;
    out.maintenance = out.maintenance * d;
    out.battery_replacement = out.battery_replacement * d;
    out.emission = out.emission * d;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TcoResult<T> {
    pub years: Vec<YearCost<T>>,
    pub cumulative_with_emissions: Vec<T>,
    pub cumulative_without_emissions: Vec<T>,
    pub cumulative_emission_cost: Vec<T>,
    pub include_emissions: bool,
    pub total: T,
}

impl<T: Scalar> TcoResult<T> {
    /// The cumulative series selected by `include_emissions`.
    pub fn cumulative(&self) -> &[T] {
        if self.include_emissions {
            &self.cumulative_with_emissions
        } else {
            &self.cumulative_without_emissions
        }
    }
}

fn running_sum<T: Scalar>(it: impl Iterator<Item = T>) -> Vec<T> {
    it.scan(T::zero(), |acc, x| {
        *acc = *acc + x;
        Some(*acc)
    })
    .collect()
}

pub fn compute_tco<T: Scalar>(model: &CostModel<T>, include_emissions: bool) -> Result<TcoResult<T>> {
    model.validate()?;
    let years = (0..model.study_life())
        .map(|y| annual_cashflow(model, y))
        .collect::<Result<Vec<_>>>()?;
    let with = running_sum(years.iter().map(|y| y.total(true)));
    let without = running_sum(years.iter().map(|y| y.total(false)));
    let emission = running_sum(years.iter().map(|y| y.emission));
    let total = *if include_emissions { &with } else { &without }
        .last()
        .expect("study life is at least one year");
    Ok(TcoResult {
        years,
        cumulative_with_emissions: with,
        cumulative_without_emissions: without,
        cumulative_emission_cost: emission,
        include_emissions,
        total,
    })
}

/// First index at which series `b` has fallen to or below series `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Breakeven<T> {
    pub index: usize,
    /// Sub-year crossing point from linear interpolation between `index - 1` and `index`.
    pub fractional: T,
}

impl<T: Scalar> Breakeven<T> {
    pub fn calendar_year(&self, start_year: i32) -> i32 {
        start_year + self.index as i32
    }
}

pub fn breakeven_year<T: Scalar>(cum_a: &[T], cum_b: &[T]) -> Result<Option<Breakeven<T>>> {
    if cum_a.len() != cum_b.len() {
        return Err(Error::validation(
            "breakeven",
            format!("series lengths differ: {} vs {}", cum_a.len(), cum_b.len()),
        ));
    }
    let gap: Vec<T> = cum_b.iter().zip(cum_a).map(|(b, a)| *b - *a).collect();
    let Some(index) = gap.iter().position(|g| *g <= T::zero()) else {
        return Ok(None);
    };
    let fractional = if index == 0 {
        T::zero()
    } else {
        let (g0, g1) = (gap[index - 1], gap[index]);
        T::of_usize(index - 1) + g0 / (g0 - g1)
    };
    Ok(Some(Breakeven { index, fractional }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmissionGap<T> {
    pub diesel_cumulative: Vec<T>,
    pub beb_cumulative: Vec<T>,
    /// Diesel minus battery-electric at study end.
    pub absolute_gap: T,
    /// Gap as a fraction of the battery-electric figure. Infinite when that figure is zero.
    pub relative_gap: T,
    /// Diesel over battery-electric at study end.
    pub ratio: T,
}

pub fn emission_cost_comparison<T: Scalar>(diesel: &TcoResult<T>, beb: &TcoResult<T>) -> EmissionGap<T> {
    let d_end = diesel.cumulative_emission_cost.last().copied().unwrap_or_else(T::zero);
    let b_end = beb.cumulative_emission_cost.last().copied().unwrap_or_else(T::zero);
    let absolute_gap = d_end - b_end;
    EmissionGap {
        diesel_cumulative: diesel.cumulative_emission_cost.clone(),
        beb_cumulative: beb.cumulative_emission_cost.clone(),
        absolute_gap,
        relative_gap: absolute_gap / b_end,
        ratio: d_end / b_end,
    }
}

/// Both fleets over the study, with breakeven points for both emission modes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FleetComparison<T> {
    pub diesel: TcoResult<T>,
    pub beb: TcoResult<T>,
    pub breakeven_with_emissions: Option<Breakeven<T>>,
    pub breakeven_without_emissions: Option<Breakeven<T>>,
    pub emission_gap: EmissionGap<T>,
    /// One minus the ratio of battery-electric to diesel totals in the selected mode.
    pub tco_reduction: T,
}

pub fn compare_fleets<T: Scalar>(
    diesel: &DieselCostModel<T>,
    beb: &BebCostModel<T>,
    include_emissions: bool,
) -> Result<FleetComparison<T>> {
    if diesel.study_life != beb.study_life {
        return Err(Error::validation(
            "study_life",
            format!("diesel {} years vs battery-electric {} years", diesel.study_life, beb.study_life),
        ));
    }
    let d = compute_tco(&CostModel::Diesel(diesel.clone()), include_emissions)?;
    let b = compute_tco(&CostModel::Beb(beb.clone()), include_emissions)?;
    let with = breakeven_year(&d.cumulative_with_emissions, &b.cumulative_with_emissions)?;
    let without = breakeven_year(&d.cumulative_without_emissions, &b.cumulative_without_emissions)?;
    let gap = emission_cost_comparison(&d, &b);
    Ok(FleetComparison {
        tco_reduction: T::one() - b.total / d.total,
        diesel: d,
        beb: b,
        breakeven_with_emissions: with,
        breakeven_without_emissions: without,
        emission_gap: gap,
    })
}
