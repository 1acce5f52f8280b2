//! Command-line front end: argument parsing, command dispatch and exit codes.
//!
//! Exit codes: 0 success, 1 invalid input (bad flags, configuration or values), 2 runtime or
//! I/O failure.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use ebus_core::demand::generate_day_demand;
use ebus_core::report::{self, OutputFile, RunManifest};
use ebus_core::scenario::{load_scenario, Scenario};
use ebus_core::sim::run_simulation;
use ebus_core::sweep::{recommend, run_sweep_with_threads, Recommendation, SweepGrid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ebus", version, about = "Electric bus corridor simulator and fleet cost model")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Scenario JSON file. Built-in Lahore defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Demand seed; overrides metadata.seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Override a scenario field, e.g. --set sim.fast_charger_count=12. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Only print errors.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate demand and simulate one service day.
    Simulate,
    /// Compare diesel and battery-electric cost of ownership.
    Tco {
        /// Leave emission cost out of the totals.
        #[arg(long)]
        no_emissions: bool,
    },
    /// Run the fleet/battery/charger grid and recommend a configuration.
    Sweep {
        /// Wait tolerance in minutes; defaults to the diesel half-headway plus 10%.
        #[arg(long, value_name = "MIN")]
        tolerance: Option<f64>,
        /// Worker threads; all cores when omitted.
        #[arg(long, value_name = "N")]
        threads: Option<usize>,
    },
    /// Generate one day of passengers.
    Demand,
}

/// Error carrying the exit code it should produce.
#[derive(Debug)]
struct Classified(i32);

impl std::fmt::Display for Classified {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "exit {}", self.0)
    }
}

impl std::error::Error for Classified {}

fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(Classified(code)) = cause.downcast_ref::<Classified>() {
            return *code;
        }
        if let Some(e) = cause.downcast_ref::<ebus_core::Error>() {
            return if e.is_validation() { EXIT_VALIDATION } else { EXIT_RUNTIME };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_RUNTIME;
        }
    }
    EXIT_RUNTIME
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn resolve(global: &GlobalArgs) -> Result<Scenario> {
    let mut scenario = load_scenario(global.config.as_deref(), &global.overrides)?;
    if let Some(seed) = global.seed {
        scenario.metadata.seed = seed;
    }
    Ok(scenario)
}

fn say(global: &GlobalArgs, msg: impl AsRef<str>) {
    if !global.quiet {
        println!("{}", msg.as_ref());
    }
}

fn persist(out: &Path, command: &str, scenario: &Scenario, seeds: Vec<u64>, files: &[OutputFile], t0: Instant) -> Result<()> {
    let manifest = RunManifest::new(command, scenario, seeds, files, t0.elapsed().as_secs_f64());
    report::write_outputs(out, files, &manifest)
        .with_context(|| format!("writing outputs to {}", out.display()))?;
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    let t0 = Instant::now();
    let scenario = resolve(g)?;
    match &cli.command {
        Command::Simulate => cmd_simulate(g, &scenario, t0),
        Command::Tco { no_emissions } => cmd_tco(g, &scenario, !no_emissions && scenario.tco.include_emissions, t0),
        Command::Sweep { tolerance, threads } => cmd_sweep(g, &scenario, *tolerance, *threads, t0),
        Command::Demand => cmd_demand(g, &scenario, t0),
    }
}

fn cmd_simulate(g: &GlobalArgs, s: &Scenario, t0: Instant) -> Result<()> {
    let seed = s.metadata.seed;
    let route = s.route_model()?;
    let cfg = s.sim.config(&route)?;
    let demand = generate_day_demand(&route, &s.calendar, &s.demand_params()?, seed)?;
    let result = run_simulation(&route, &s.calendar, &cfg, &demand, seed)?;
    let files = report::simulate_outputs(s, &result);
    persist(&g.out, "simulate", s, vec![seed], &files, t0)?;
    say(
        g,
        format!(
            "seed {seed}: avg wait {:.4} min, {:.0} km, {:.0} kWh from the grid, {} of {} passengers served",
            result.avg_wait_min,
            result.total_distance_km,
            result.total_energy_kwh,
            result.passengers_served,
            result.passengers_total
        ),
    );
    if !result.strandings.is_empty() {
        eprintln!("warning: {} bus(es) ran flat on the road", result.strandings.len());
    }
    say(g, format!("wrote {}", g.out.display()));
    Ok(())
}

fn cmd_tco(g: &GlobalArgs, s: &Scenario, include_emissions: bool, t0: Instant) -> Result<()> {
    let (summary, files) = report::tco_outputs(s, include_emissions)?;
    persist(&g.out, "tco", s, vec![], &files, t0)?;
    let year = |b: Option<report::BreakevenSummary>| b.map_or("none".to_string(), |b| b.calendar_year.to_string());
    say(
        g,
        format!(
            "diesel {:.2} M USD, battery-electric {:.2} M USD; breakeven {} with emissions, {} without",
            summary.diesel_total_usd / 1e6,
            summary.beb_total_usd / 1e6,
            year(summary.breakeven_with_emissions),
            year(summary.breakeven_without_emissions)
        ),
    );
    say(g, format!("wrote {}", g.out.display()));
    Ok(())
}

fn cmd_sweep(g: &GlobalArgs, s: &Scenario, tolerance: Option<f64>, threads: Option<usize>, t0: Instant) -> Result<()> {
    let grid = SweepGrid::from_scenario(s)?;
    if let Some(t) = tolerance {
        if !(t >= 0.0) {
            return Err(ebus_core::Error::validation("--tolerance", "must be non-negative").into());
        }
    }
    let report = run_sweep_with_threads(&grid, threads)?;
    let configured = tolerance.or(s.sweep_section().wait_tolerance_min);
    let tol = configured.unwrap_or_else(|| report.default_tolerance());
    let rec = recommend(&report, tol)?;
    let source = if configured.is_some() { "configured" } else { "default" };
    let files = report::sweep_outputs(s, &report, &rec, source)?;
    persist(&g.out, "sweep", s, grid.seeds.clone(), &files, t0)?;
    match &rec {
        Recommendation::Feasible {
            bus_count,
            battery_kwh,
            fast_chargers,
            cell,
            ..
        } => say(
            g,
            format!(
                "recommended: {bus_count} buses, {battery_kwh} kWh, {fast_chargers} fast chargers (mean wait {:.4} min, tolerance {tol:.4})",
                cell.mean_wait_min.unwrap_or(f64::NAN)
            ),
        ),
        Recommendation::NoFeasibleConfiguration { .. } => {
            say(g, format!("no feasible configuration within {tol:.4} min"))
        }
    }
    say(g, format!("wrote {}", g.out.display()));
    Ok(())
}

fn cmd_demand(g: &GlobalArgs, s: &Scenario, t0: Instant) -> Result<()> {
    let seed = s.metadata.seed;
    let route = s.route_model()?;
    let demand = generate_day_demand(&route, &s.calendar, &s.demand_params()?, seed)?;
    let (summary, files) = report::demand_outputs(s, &demand)?;
    persist(&g.out, "demand", s, vec![seed], &files, t0)?;
    say(
        g,
        format!(
            "seed {seed}: {} passengers ({} peak, {} off-peak), scale {:.5}",
            summary.total, summary.peak, summary.offpeak, summary.calibration_scale
        ),
    );
    Ok(())
}
