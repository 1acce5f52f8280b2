//! Grid search over fleet size, battery size and fast-charger count, and the cost/wait
//! trade-off rule that picks an operating point.

use rayon::prelude::*;
use serde::Serialize;

use crate::demand::{generate_day_demand, PassengerSet};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::Scenario;
use crate::sim::run_simulation;

/// Factor applied to the diesel half-headway to obtain the default wait tolerance.
pub const DEFAULT_TOLERANCE_FACTOR: f64 = 1.10;

/// Number of nearest cells listed when nothing is feasible.
pub const CLOSEST_CELLS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub bus_count: u32,
    pub battery_kwh: f64,
    pub fast_chargers: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub bus_counts: Vec<u32>,
    pub battery_sizes_kwh: Vec<f64>,
    pub fast_charger_counts: Vec<u32>,
    pub seeds: Vec<u64>,
    pub base: Scenario,
}

impl SweepGrid {
    /// Grid from the scenario's sweep section. Fails when the section is missing.
    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        let Some(s) = &scenario.sweep else {
            return Err(Error::validation("sweep", "scenario has no sweep section"));
        };
        let grid = SweepGrid {
            bus_counts: s.bus_counts.clone(),
            battery_sizes_kwh: s.battery_sizes_kwh.clone(),
            fast_charger_counts: s.fast_charger_counts.clone(),
            seeds: s.seeds.clone(),
            base: scenario.clone(),
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bus_counts.is_empty()
            || self.battery_sizes_kwh.is_empty()
            || self.fast_charger_counts.is_empty()
            || self.seeds.is_empty()
        {
            return Err(Error::validation("sweep", "every list must be non-empty"));
        }
        if self.bus_counts.contains(&0) {
            return Err(Error::validation("sweep.bus_counts", "must be positive"));
        }
        if self.battery_sizes_kwh.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
            return Err(Error::validation("sweep.battery_sizes_kwh", "must be positive"));
        }
        if self.fast_charger_counts.contains(&0) {
            return Err(Error::validation("sweep.fast_charger_counts", "must be positive"));
        }
        self.base.route_model()?;
        self.base.calendar.validate()?;
        self.base.demand.validate()?;
        Ok(())
    }

    /// Cells in bus-count, battery, charger order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &bus_count in &self.bus_counts {
            for &battery_kwh in &self.battery_sizes_kwh {
                for &fast_chargers in &self.fast_charger_counts {
                    out.push(Cell {
                        bus_count,
                        battery_kwh,
                        fast_chargers,
                    });
                }
            }
        }
        out
    }

    /// The base scenario with the cell's fleet, battery and charger count in both the
    /// simulation and the cost model.
    pub fn scenario_for(&self, cell: &Cell) -> Scenario {
        let mut s = self.base.clone();
        s.sim.bus_count = cell.bus_count;
        s.sim.battery_kwh = cell.battery_kwh;
        s.sim.fast_charger_count = cell.fast_chargers;
        s.beb.fleet_size = cell.bus_count;
        s.beb.battery_kwh = cell.battery_kwh;
        s.beb.fast_charger.count = cell.fast_chargers;
        s
    }
}

/// Metrics of one (cell, seed) simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedRun {
    pub cell: Cell,
    pub seed: u64,
    pub avg_wait_min: f64,
    pub total_distance_km: f64,
    pub total_energy_kwh: f64,
    pub passengers_total: usize,
    pub passengers_served: usize,
    pub unserved_at_close: usize,
    pub strandings: usize,
    pub headway_violations: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: Cell,
    /// Mean over seeds of the average wait; `None` when every seed failed.
    pub mean_wait_min: Option<f64>,
    /// Sample standard deviation over seeds; zero for a single seed.
    pub std_wait_min: f64,
    pub capital_usd: f64,
    /// Capital above the cheapest cell of the grid.
    pub capital_delta_usd: f64,
    pub strandings: usize,
    pub headway_violations: u64,
    pub mean_energy_kwh: f64,
    pub mean_distance_km: f64,
    pub failed_seeds: usize,
}

impl CellSummary {
    pub fn is_feasible(&self, wait_tolerance_min: f64) -> bool {
        self.failed_seeds == 0
            && self.strandings == 0
            && self.mean_wait_min.is_some_and(|w| w <= wait_tolerance_min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub seeds: Vec<u64>,
    pub cells: Vec<CellSummary>,
    pub runs: Vec<SeedRun>,
    /// Share of passengers arriving in peak periods, averaged over seeds.
    pub peak_share: f64,
    /// Diesel half-headway weighted by `peak_share`, minutes.
    pub baseline_wait_min: f64,
}

impl SweepReport {
    /// Baseline half-headway scaled by [`DEFAULT_TOLERANCE_FACTOR`].
    pub fn default_tolerance(&self) -> f64 {
        self.baseline_wait_min * DEFAULT_TOLERANCE_FACTOR
    }
}

/// Runs every cell for every seed on the global thread pool.
pub fn run_sweep(grid: &SweepGrid) -> Result<SweepReport> {
    run_sweep_with_threads(grid, None)
}

/// As [`run_sweep`], limited to `threads` workers when given. The report does not depend on
/// the thread count.
pub fn run_sweep_with_threads(grid: &SweepGrid, threads: Option<usize>) -> Result<SweepReport> {
    grid.validate()?;
    match threads {
        None => sweep_inner(grid),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::validation("sweep.threads", e.to_string()))?;
            pool.install(|| sweep_inner(grid))
        }
    }
}

fn sweep_inner(grid: &SweepGrid) -> Result<SweepReport> {
    let base = &grid.base;
    let route = base.route_model()?;
    let params = base.demand_params()?;
    let demands: Vec<PassengerSet> = grid
        .seeds
        .par_iter()
        .map(|&seed| generate_day_demand(&route, &base.calendar, &params, seed))
        .collect::<Result<_>>()?;

    let cells = grid.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..grid.seeds.len()).map(move |s| (c, s)))
        .collect();
    let runs: Vec<SeedRun> = jobs
        .par_iter()
        .map(|&(c, s)| run_cell(grid, &cells[c], grid.seeds[s], &demands[s]))
        .collect();

    let mut summaries: Vec<CellSummary> = cells
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let per_seed = &runs[c * grid.seeds.len()..(c + 1) * grid.seeds.len()];
            summarize(*cell, per_seed, grid.scenario_for(cell).beb.capital_cost())
        })
        .collect();
    let cheapest = summaries
        .iter()
        .map(|s| s.capital_usd)
        .fold(f64::INFINITY, f64::min);
    for s in &mut summaries {
        s.capital_delta_usd = s.capital_usd - cheapest;
    }

    let peak_share = demands
        .iter()
        .map(|d| {
            let (peak, off) = d.period_counts(&base.calendar);
            if peak + off == 0 {
                0.0
            } else {
                peak as f64 / (peak + off) as f64
            }
        })
        .sum::<f64>()
        / demands.len() as f64;
    Ok(SweepReport {
        seeds: grid.seeds.clone(),
        cells: summaries,
        runs,
        peak_share,
        baseline_wait_min: base.baseline.blended_half_headway_min(peak_share),
    })
}

fn run_cell(grid: &SweepGrid, cell: &Cell, seed: u64, demand: &PassengerSet) -> SeedRun {
    let failed = |e: Error| SeedRun {
        cell: *cell,
        seed,
        avg_wait_min: f64::NAN,
        total_distance_km: 0.0,
        total_energy_kwh: 0.0,
        passengers_total: demand.len(),
        passengers_served: 0,
        unserved_at_close: demand.len(),
        strandings: 0,
        headway_violations: 0,
        error: Some(e.to_string()),
    };
    let scenario = grid.scenario_for(cell);
    let outcome = scenario.route_model().and_then(|route| {
        let cfg = scenario.sim.config(&route)?;
        run_simulation(&route, &scenario.calendar, &cfg, demand, seed)
    });
    match outcome {
        Ok(r) => SeedRun {
            cell: *cell,
            seed,
            avg_wait_min: r.avg_wait_min,
            total_distance_km: r.total_distance_km,
            total_energy_kwh: r.total_energy_kwh,
            passengers_total: r.passengers_total,
            passengers_served: r.passengers_served,
            unserved_at_close: r.unserved_at_close,
            strandings: r.strandings.len(),
            headway_violations: r.headway_violations,
            error: None,
        },
        Err(e) => failed(e),
    }
}

fn summarize(cell: Cell, runs: &[SeedRun], capital_usd: f64) -> CellSummary {
    let ok: Vec<&SeedRun> = runs.iter().filter(|r| r.error.is_none()).collect();
    // Welford updates keep the mean of identical values exact
    let stats = |f: &dyn Fn(&SeedRun) -> f64| {
        let (mut mean, mut m2) = (0.0, 0.0);
        for (i, r) in ok.iter().enumerate() {
            let x = f(r);
            let d = x - mean;
            mean += d / (i + 1) as f64;
            m2 += d * (x - mean);
        }
        (mean, m2)
    };
    let mean = |f: &dyn Fn(&SeedRun) -> f64| stats(f).0;
    let (mean_wait, std_wait) = if ok.is_empty() {
        (None, 0.0)
    } else {
        let (m, m2) = stats(&|r| r.avg_wait_min);
        let var = if ok.len() > 1 { m2 / (ok.len() - 1) as f64 } else { 0.0 };
        (Some(m), var.sqrt())
    };
    CellSummary {
        cell,
        mean_wait_min: mean_wait,
        std_wait_min: std_wait,
        capital_usd,
        capital_delta_usd: 0.0,
        strandings: runs.iter().map(|r| r.strandings).sum(),
        headway_violations: runs.iter().map(|r| r.headway_violations).sum(),
        mean_energy_kwh: if ok.is_empty() { 0.0 } else { mean(&|r| r.total_energy_kwh) },
        mean_distance_km: if ok.is_empty() { 0.0 } else { mean(&|r| r.total_distance_km) },
        failed_seeds: runs.len() - ok.len(),
    }
}

/// Extra installed cost of going from `n1` to `n2` fast chargers.
pub fn charger_cost_delta<T: Scalar>(n1: u32, n2: u32, unit_cost: T, install_cost: T) -> Result<T> {
    if n2 < n1 {
        return Err(Error::validation(
            "charger_cost_delta",
            format!("target count {n2} is below starting count {n1}"),
        ));
    }
    Ok(T::of((n2 - n1) as f64) * (unit_cost + install_cost))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Recommendation {
    Feasible {
        bus_count: u32,
        battery_kwh: f64,
        fast_chargers: u32,
        wait_tolerance_min: f64,
        cell: CellSummary,
    },
    NoFeasibleConfiguration {
        wait_tolerance_min: f64,
        /// Cells closest to the tolerance: stranding-free ones first, then by mean wait.
        closest: Vec<CellSummary>,
    },
}

impl Recommendation {
    pub fn chosen(&self) -> Option<&CellSummary> {
        match self {
            Recommendation::Feasible { cell, .. } => Some(cell),
            Recommendation::NoFeasibleConfiguration { .. } => None,
        }
    }
}

/// Cheapest cell whose mean wait is within `wait_tolerance_min` and which never stranded a
/// bus. Ties go to fewer chargers, then the smaller battery, then fewer buses.
pub fn recommend(report: &SweepReport, wait_tolerance_min: f64) -> Result<Recommendation> {
    if report.cells.is_empty() {
        return Err(Error::validation("sweep report", "no cells"));
    }
    let best = report
        .cells
        .iter()
        .filter(|c| c.is_feasible(wait_tolerance_min))
        .min_by(|a, b| {
            a.capital_usd
                .total_cmp(&b.capital_usd)
                .then(a.cell.fast_chargers.cmp(&b.cell.fast_chargers))
                .then(a.cell.battery_kwh.total_cmp(&b.cell.battery_kwh))
                .then(a.cell.bus_count.cmp(&b.cell.bus_count))
        });
    Ok(match best {
        Some(c) => Recommendation::Feasible {
            bus_count: c.cell.bus_count,
            battery_kwh: c.cell.battery_kwh,
            fast_chargers: c.cell.fast_chargers,
            wait_tolerance_min,
            cell: c.clone(),
        },
        None => {
            let mut ranked: Vec<&CellSummary> = report.cells.iter().collect();
            ranked.sort_by(|a, b| {
                (a.strandings > 0 || a.failed_seeds > 0)
                    .cmp(&(b.strandings > 0 || b.failed_seeds > 0))
                    .then(
                        a.mean_wait_min
                            .unwrap_or(f64::INFINITY)
                            .total_cmp(&b.mean_wait_min.unwrap_or(f64::INFINITY)),
                    )
                    .then(a.capital_usd.total_cmp(&b.capital_usd))
            });
            Recommendation::NoFeasibleConfiguration {
                wait_tolerance_min,
                closest: ranked.into_iter().take(CLOSEST_CELLS).cloned().collect(),
            }
        }
    })
}
