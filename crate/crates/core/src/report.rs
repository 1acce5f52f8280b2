//! Output files for each command: CSV tables, JSON summaries and the run manifest.
//!
//! CSV files are comma separated with a header row, `.` decimals, LF line endings and floats
//! printed with six decimals. Builders return bytes so callers can compare or hash them before
//! anything touches the disk.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::demand::PassengerSet;
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::sim::{fleet_comparison, FleetComparison, SimResult, StrandingEvent};
use crate::sweep::{charger_cost_delta, Recommendation, SweepReport};
use crate::tco::{compare_fleets, Breakeven, TcoResult};

/// Reference figures from the Lahore case study that the model does not reproduce.
pub const REFERENCE_AVG_WAIT_MIN: f64 = 0.9285;
pub const REFERENCE_DAILY_GRID_KWH: f64 = 38_110.0;
pub const REFERENCE_DAILY_DISTANCE_KM: f64 = 23_936.0;
pub const REFERENCE_DIESEL_TCO_USD: f64 = 74.7e6;
pub const REFERENCE_BEB_TCO_USD: f64 = 64.14e6;
pub const REFERENCE_TCO_REDUCTION: f64 = 0.30;
pub const REFERENCE_CHARGER_DELTA_8_TO_10_USD: f64 = 180_000.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl OutputFile {
    fn new(name: &str, bytes: Vec<u8>) -> Self {
        OutputFile {
            name: name.to_string(),
            bytes,
        }
    }

    fn json<T: Serialize>(name: &str, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
        bytes.push(b'\n');
        Self::new(name, bytes)
    }
}

/// A computed quantity next to the case-study figure it is compared with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    pub quantity: String,
    pub reference: f64,
    pub computed: f64,
    pub relative_difference: f64,
    pub note: String,
}

impl Deviation {
    fn new(quantity: &str, reference: f64, computed: f64, note: &str) -> Self {
        Deviation {
            quantity: quantity.to_string(),
            reference,
            computed,
            relative_difference: (computed - reference) / reference,
            note: note.to_string(),
        }
    }
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

/// Builds a CSV table in memory.
fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub scenario: String,
    pub seed: u64,
    pub bus_count: u32,
    pub battery_kwh: f64,
    pub fast_chargers: u32,
    pub avg_wait_min: f64,
    pub total_energy_kwh: f64,
    pub total_distance_km: f64,
    pub avg_distance_per_bus_km: f64,
    pub traction_kwh: f64,
    pub aux_kwh: f64,
    pub fast_charged_kwh: f64,
    pub slow_charged_kwh: f64,
    pub passengers_total: usize,
    pub passengers_served: usize,
    pub unserved_at_close: usize,
    pub stranded_passengers: usize,
    pub peak_share: f64,
    pub dispatches: u64,
    pub headway_violations: u64,
    /// Set when any bus ran flat on the road.
    pub stranding_warning: bool,
    pub strandings: Vec<StrandingEvent>,
    pub wait_histogram_bin_min: f64,
    pub wait_histogram: Vec<u64>,
    pub comparison: FleetComparison,
    pub deviations: Vec<Deviation>,
}

pub fn sim_summary(scenario: &Scenario, result: &SimResult) -> SimSummary {
    let buses = result.per_bus.len().max(1) as f64;
    SimSummary {
        scenario: scenario.metadata.name.clone(),
        seed: result.seed,
        bus_count: result.bus_count,
        battery_kwh: scenario.sim.battery_kwh,
        fast_chargers: scenario.sim.fast_charger_count,
        avg_wait_min: result.avg_wait_min,
        total_energy_kwh: result.total_energy_kwh,
        total_distance_km: result.total_distance_km,
        avg_distance_per_bus_km: result.total_distance_km / buses,
        traction_kwh: result.traction_kwh,
        aux_kwh: result.aux_kwh,
        fast_charged_kwh: result.fast_charged_kwh,
        slow_charged_kwh: result.slow_charged_kwh,
        passengers_total: result.passengers_total,
        passengers_served: result.passengers_served,
        unserved_at_close: result.unserved_at_close,
        stranded_passengers: result.stranded_passengers,
        peak_share: result.peak_share(),
        dispatches: result.dispatches,
        headway_violations: result.headway_violations,
        stranding_warning: !result.strandings.is_empty(),
        strandings: result.strandings.clone(),
        wait_histogram_bin_min: crate::sim::WAIT_BIN_MIN,
        wait_histogram: result.wait_histogram.clone(),
        comparison: fleet_comparison(result, &scenario.baseline),
        deviations: vec![
            Deviation::new(
                "avg_wait_min",
                REFERENCE_AVG_WAIT_MIN,
                result.avg_wait_min,
                "dwell and charging policy details of the case study are unpublished",
            ),
            Deviation::new(
                "total_energy_kwh",
                REFERENCE_DAILY_GRID_KWH,
                result.total_energy_kwh,
                "reference distance at the stated mileage implies about a third of the reference energy; auxiliary load covers the rest",
            ),
            Deviation::new(
                "total_distance_km",
                REFERENCE_DAILY_DISTANCE_KM,
                result.total_distance_km,
                "depot runs and deadheading are not modelled",
            ),
        ],
    }
}

pub fn grid_load_csv(result: &SimResult) -> Vec<u8> {
    table(
        &["minute", "kwh"],
        result
            .grid_load_per_minute
            .iter()
            .enumerate()
            .map(|(i, kwh)| vec![(result.horizon_start_minute as usize + i).to_string(), f6(*kwh)]),
    )
}

pub fn per_bus_csv(result: &SimResult) -> Vec<u8> {
    table(
        &[
            "bus_id",
            "km",
            "kwh",
            "traction_kwh",
            "aux_kwh",
            "charged_kwh",
            "fast_sessions",
            "initial_soc_kwh",
            "final_soc_kwh",
        ],
        result.per_bus.iter().map(|b| {
            vec![
                b.bus_id.to_string(),
                f6(b.distance_km),
                f6(b.energy_kwh),
                f6(b.traction_kwh),
                f6(b.aux_kwh),
                f6(b.charged_kwh),
                b.fast_sessions.to_string(),
                f6(b.initial_soc_kwh),
                f6(b.final_soc_kwh),
            ]
        }),
    )
}

/// One row per passenger; `wait_min` is empty for passengers never picked up.
pub fn waits_csv(result: &SimResult) -> Vec<u8> {
    table(
        &["passenger_id", "wait_min"],
        result
            .outcomes
            .iter()
            .map(|o| vec![o.id.to_string(), o.wait_min().map(f6).unwrap_or_default()]),
    )
}

pub fn simulate_outputs(scenario: &Scenario, result: &SimResult) -> Vec<OutputFile> {
    vec![
        OutputFile::json("summary.json", &sim_summary(scenario, result)),
        OutputFile::new("grid_load.csv", grid_load_csv(result)),
        OutputFile::new("per_bus.csv", per_bus_csv(result)),
        OutputFile::new("waits.csv", waits_csv(result)),
    ]
}

// ---------------------------------------------------------------- tco

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BreakevenSummary {
    pub study_year: usize,
    pub calendar_year: i32,
    /// Interpolated crossing, years after study start.
    pub fractional_year: f64,
}

impl BreakevenSummary {
    fn from(b: Option<Breakeven<f64>>, start_year: i32) -> Option<Self> {
        b.map(|b| BreakevenSummary {
            study_year: b.index,
            calendar_year: b.calendar_year(start_year),
            fractional_year: b.fractional,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TcoSummary {
    pub scenario: String,
    pub include_emissions: bool,
    pub study_life_years: u32,
    pub start_year: i32,
    pub diesel_total_usd: f64,
    pub beb_total_usd: f64,
    pub diesel_total_with_emissions_usd: f64,
    pub diesel_total_without_emissions_usd: f64,
    pub beb_total_with_emissions_usd: f64,
    pub beb_total_without_emissions_usd: f64,
    pub tco_reduction: f64,
    pub beb_capital_usd: f64,
    /// `None` when the battery-electric fleet never catches up within the study.
    pub breakeven_with_emissions: Option<BreakevenSummary>,
    pub breakeven_without_emissions: Option<BreakevenSummary>,
    pub diesel_emission_cost_usd: f64,
    pub beb_emission_cost_usd: f64,
    pub emission_gap_usd: f64,
    pub emission_gap_relative: f64,
    pub emission_ratio: f64,
    pub figure11_written: bool,
    pub notes: Vec<String>,
    pub deviations: Vec<Deviation>,
}

fn cashflow_csv(r: &TcoResult<f64>, start_year: i32) -> Vec<u8> {
    table(
        &[
            "year",
            "calendar_year",
            "capital",
            "energy",
            "maintenance",
            "battery_replacement",
            "emission",
            "emission_tons",
            "cumulative_with_emissions",
            "cumulative_without_emissions",
        ],
        r.years.iter().enumerate().map(|(i, y)| {
            vec![
                y.year_index.to_string(),
                (start_year + y.year_index as i32).to_string(),
                f6(y.capital),
                f6(y.energy),
                f6(y.maintenance),
                f6(y.battery_replacement),
                f6(y.emission),
                f6(y.emission_tons),
                f6(r.cumulative_with_emissions[i]),
                f6(r.cumulative_without_emissions[i]),
            ]
        }),
    )
}

fn pair_csv(start_year: i32, cols: [&str; 2], a: &[f64], b: &[f64]) -> Vec<u8> {
    table(
        &["year", "calendar_year", cols[0], cols[1]],
        a.iter().zip(b).enumerate().map(|(i, (x, y))| {
            vec![i.to_string(), (start_year + i as i32).to_string(), f6(*x), f6(*y)]
        }),
    )
}

/// Cashflows for both fleets, the comparison summary and the figure series. With emissions
/// off the emission figure is skipped and the totals exclude emission cost.
pub fn tco_outputs(scenario: &Scenario, include_emissions: bool) -> Result<(TcoSummary, Vec<OutputFile>)> {
    let c = compare_fleets(&scenario.diesel, &scenario.beb, include_emissions)?;
    let start = scenario.beb.start_year;
    let last = |v: &[f64]| *v.last().expect("study life is at least one year");
    let mut notes = vec!["single currency (USD), no inflation".to_string()];
    if !include_emissions {
        notes.push("emission cost disabled: figure11.csv not written, totals exclude emissions".into());
    }
    let summary = TcoSummary {
        scenario: scenario.metadata.name.clone(),
        include_emissions,
        study_life_years: scenario.beb.study_life,
        start_year: start,
        diesel_total_usd: c.diesel.total,
        beb_total_usd: c.beb.total,
        diesel_total_with_emissions_usd: last(&c.diesel.cumulative_with_emissions),
        diesel_total_without_emissions_usd: last(&c.diesel.cumulative_without_emissions),
        beb_total_with_emissions_usd: last(&c.beb.cumulative_with_emissions),
        beb_total_without_emissions_usd: last(&c.beb.cumulative_without_emissions),
        tco_reduction: c.tco_reduction,
        beb_capital_usd: scenario.beb.capital_cost(),
        breakeven_with_emissions: BreakevenSummary::from(c.breakeven_with_emissions, start),
        breakeven_without_emissions: BreakevenSummary::from(c.breakeven_without_emissions, start),
        diesel_emission_cost_usd: last(&c.emission_gap.diesel_cumulative),
        beb_emission_cost_usd: last(&c.emission_gap.beb_cumulative),
        emission_gap_usd: c.emission_gap.absolute_gap,
        emission_gap_relative: c.emission_gap.relative_gap,
        emission_ratio: c.emission_gap.ratio,
        figure11_written: include_emissions,
        notes,
        deviations: vec![
            Deviation::new(
                "diesel_total_usd",
                REFERENCE_DIESEL_TCO_USD,
                c.diesel.total,
                "reference total is not reproducible from the published unit costs",
            ),
            Deviation::new(
                "beb_total_usd",
                REFERENCE_BEB_TCO_USD,
                c.beb.total,
                "reference total is not reproducible from the published unit costs",
            ),
            Deviation::new(
                "tco_reduction",
                REFERENCE_TCO_REDUCTION,
                c.tco_reduction,
                "follows from the two totals above",
            ),
        ],
    };
    let mut files = vec![
        OutputFile::new("cashflow_diesel.csv", cashflow_csv(&c.diesel, start)),
        OutputFile::new("cashflow_beb.csv", cashflow_csv(&c.beb, start)),
        OutputFile::json("tco_summary.json", &summary),
    ];
    if include_emissions {
        files.push(OutputFile::new(
            "figure11.csv",
            pair_csv(
                start,
                ["diesel_emission_cost_cum", "beb_emission_cost_cum"],
                &c.emission_gap.diesel_cumulative,
                &c.emission_gap.beb_cumulative,
            ),
        ));
    }
    files.push(OutputFile::new(
        "figure12.csv",
        pair_csv(
            start,
            ["diesel_cum", "beb_cum"],
            &c.diesel.cumulative_without_emissions,
            &c.beb.cumulative_without_emissions,
        ),
    ));
    files.push(OutputFile::new(
        "figure13.csv",
        pair_csv(
            start,
            ["diesel_cum", "beb_cum"],
            &c.diesel.cumulative_with_emissions,
            &c.beb.cumulative_with_emissions,
        ),
    ));
    Ok((summary, files))
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendationFile {
    #[serde(flatten)]
    pub recommendation: Recommendation,
    /// "default" when derived from the diesel headways, "configured" otherwise.
    pub tolerance_source: String,
    pub baseline_wait_min: f64,
    pub peak_share: f64,
    pub seeds: usize,
    pub cells: usize,
    pub charger_cost_delta_8_to_10_usd: f64,
    pub deviations: Vec<Deviation>,
}

fn opt6(x: Option<f64>) -> String {
    x.map(f6).unwrap_or_default()
}

pub fn sweep_csv(report: &SweepReport) -> Vec<u8> {
    table(
        &[
            "bus_count",
            "battery_kwh",
            "fast_chargers",
            "seed",
            "avg_wait_min",
            "total_distance_km",
            "total_energy_kwh",
            "passengers_total",
            "passengers_served",
            "unserved_at_close",
            "strandings",
            "headway_violations",
            "error",
        ],
        report.runs.iter().map(|r| {
            vec![
                r.cell.bus_count.to_string(),
                f6(r.cell.battery_kwh),
                r.cell.fast_chargers.to_string(),
                r.seed.to_string(),
                opt6(r.error.is_none().then_some(r.avg_wait_min)),
                f6(r.total_distance_km),
                f6(r.total_energy_kwh),
                r.passengers_total.to_string(),
                r.passengers_served.to_string(),
                r.unserved_at_close.to_string(),
                r.strandings.to_string(),
                r.headway_violations.to_string(),
                r.error.clone().unwrap_or_default(),
            ]
        }),
    )
}

pub fn sweep_summary_csv(report: &SweepReport, wait_tolerance_min: f64) -> Vec<u8> {
    table(
        &[
            "bus_count",
            "battery_kwh",
            "fast_chargers",
            "mean_wait_min",
            "std_wait_min",
            "capital_usd",
            "capital_delta_usd",
            "strandings",
            "headway_violations",
            "mean_energy_kwh",
            "mean_distance_km",
            "failed_seeds",
            "feasible",
        ],
        report.cells.iter().map(|c| {
            vec![
                c.cell.bus_count.to_string(),
                f6(c.cell.battery_kwh),
                c.cell.fast_chargers.to_string(),
                opt6(c.mean_wait_min),
                f6(c.std_wait_min),
                f6(c.capital_usd),
                f6(c.capital_delta_usd),
                c.strandings.to_string(),
                c.headway_violations.to_string(),
                f6(c.mean_energy_kwh),
                f6(c.mean_distance_km),
                c.failed_seeds.to_string(),
                c.is_feasible(wait_tolerance_min).to_string(),
            ]
        }),
    )
}

fn sorted_unique<T: PartialOrd + Copy>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut v: Vec<T> = Vec::new();
    for x in items {
        if !v.contains(&x) {
            v.push(x);
        }
    }
    v.sort_by(|a, b| a.partial_cmp(b).expect("comparable"));
    v
}

fn mean_wait(report: &SweepReport, bus: u32, battery: f64, fast: u32) -> Option<f64> {
    report
        .cells
        .iter()
        .find(|c| c.cell.bus_count == bus && c.cell.battery_kwh == battery && c.cell.fast_chargers == fast)
        .and_then(|c| c.mean_wait_min)
}

/// Mean wait against charger count, one column per fleet size, at `battery_kwh`.
pub fn figure8_csv(report: &SweepReport, battery_kwh: f64) -> Vec<u8> {
    let buses = sorted_unique(report.cells.iter().map(|c| c.cell.bus_count));
    let fast = sorted_unique(report.cells.iter().map(|c| c.cell.fast_chargers));
    let mut header = vec!["fast_chargers".to_string()];
    header.extend(buses.iter().map(|b| format!("wait_{b}_buses")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    table(
        &header,
        fast.iter().map(|&f| {
            let mut row = vec![f.to_string()];
            row.extend(buses.iter().map(|&b| opt6(mean_wait(report, b, battery_kwh, f))));
            row
        }),
    )
}

/// Mean wait against charger count, one column per battery size, for every fleet size.
pub fn figure9_10_csv(report: &SweepReport) -> Vec<u8> {
    let buses = sorted_unique(report.cells.iter().map(|c| c.cell.bus_count));
    let batteries = sorted_unique(report.cells.iter().map(|c| c.cell.battery_kwh));
    let fast = sorted_unique(report.cells.iter().map(|c| c.cell.fast_chargers));
    let mut header = vec!["bus_count".to_string(), "fast_chargers".to_string()];
    header.extend(batteries.iter().map(|k| format!("wait_{k}_kwh")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::new();
    for &b in &buses {
        for &f in &fast {
            let mut row = vec![b.to_string(), f.to_string()];
            row.extend(batteries.iter().map(|&k| opt6(mean_wait(report, b, k, f))));
            rows.push(row);
        }
    }
    table(&header, rows)
}

pub fn sweep_outputs(
    scenario: &Scenario,
    report: &SweepReport,
    recommendation: &Recommendation,
    tolerance_source: &str,
) -> Result<Vec<OutputFile>> {
    let tol = match recommendation {
        Recommendation::Feasible { wait_tolerance_min, .. }
        | Recommendation::NoFeasibleConfiguration { wait_tolerance_min, .. } => *wait_tolerance_min,
    };
    let fc = &scenario.beb.fast_charger;
    let delta = charger_cost_delta(8, 10, fc.unit_cost, fc.install_cost)?;
    let file = RecommendationFile {
        recommendation: recommendation.clone(),
        tolerance_source: tolerance_source.to_string(),
        baseline_wait_min: report.baseline_wait_min,
        peak_share: report.peak_share,
        seeds: report.seeds.len(),
        cells: report.cells.len(),
        charger_cost_delta_8_to_10_usd: delta,
        deviations: vec![Deviation::new(
            "charger_cost_delta_8_to_10_usd",
            REFERENCE_CHARGER_DELTA_8_TO_10_USD,
            delta,
            "two installed fast chargers at the configured unit and installation prices",
        )],
    };
    let battery = if report.cells.iter().any(|c| c.cell.battery_kwh == scenario.sim.battery_kwh) {
        scenario.sim.battery_kwh
    } else {
        report.cells[0].cell.battery_kwh
    };
    Ok(vec![
        OutputFile::new("sweep.csv", sweep_csv(report)),
        OutputFile::new("sweep_summary.csv", sweep_summary_csv(report, tol)),
        OutputFile::json("recommendation.json", &file),
        OutputFile::new("figure8.csv", figure8_csv(report, battery)),
        OutputFile::new("figure9_10.csv", figure9_10_csv(report)),
    ])
}

// ---------------------------------------------------------------- demand

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandSummary {
    pub scenario: String,
    pub seed: u64,
    pub total: usize,
    pub peak: usize,
    pub offpeak: usize,
    pub calibration_scale: f64,
    pub expected_total: f64,
    pub target_daily_passengers: Option<f64>,
}

pub fn demand_outputs(scenario: &Scenario, demand: &PassengerSet) -> Result<(DemandSummary, Vec<OutputFile>)> {
    let params = scenario.demand_params()?;
    let stations = scenario.route_model()?.station_count();
    let (peak, offpeak) = demand.period_counts(&scenario.calendar);
    let summary = DemandSummary {
        scenario: scenario.metadata.name.clone(),
        seed: demand.seed,
        total: demand.len(),
        peak,
        offpeak,
        calibration_scale: params.calibration_scale,
        expected_total: params.expected_daily(&scenario.calendar, stations),
        target_daily_passengers: params.target_daily_passengers,
    };
    let mut csv = Vec::new();
    demand.write_csv(&mut csv)?;
    Ok((
        summary.clone(),
        vec![
            OutputFile::new("passengers.csv", csv),
            OutputFile::json("demand_summary.json", &summary),
        ],
    ))
}

// ---------------------------------------------------------------- manifest

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub scenario_name: String,
    /// Hash of the fully resolved scenario, overrides and seed included.
    pub scenario_hash: String,
    pub seeds: Vec<u64>,
    pub files: Vec<ManifestEntry>,
    /// Elapsed run time; the only field that differs between identical runs.
    pub wall_clock_s: f64,
}

impl RunManifest {
    pub fn new(command: &str, scenario: &Scenario, seeds: Vec<u64>, files: &[OutputFile], wall_clock_s: f64) -> Self {
        RunManifest {
            tool: "ebus".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            scenario_name: scenario.metadata.name.clone(),
            scenario_hash: scenario.hash(),
            seeds,
            files: files
                .iter()
                .map(|f| ManifestEntry {
                    name: f.name.clone(),
                    bytes: f.bytes.len(),
                    sha256: hex::encode(Sha256::digest(&f.bytes)),
                })
                .collect(),
            wall_clock_s,
        }
    }
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, dir.join(name)).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::Io(e)
    })
}

/// Writes every output file, then the manifest.
pub fn write_outputs(dir: &Path, files: &[OutputFile], manifest: &RunManifest) -> Result<()> {
    fs::create_dir_all(dir)?;
    for f in files {
        write_atomic(dir, &f.name, &f.bytes)?;
    }
    let mut bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    bytes.push(b'\n');
    write_atomic(dir, MANIFEST_NAME, &bytes)
}
