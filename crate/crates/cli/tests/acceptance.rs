//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if any criterion fails.
//!
//! Run with `cargo test --release -p ebus-cli --test acceptance -- --nocapture`.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use tempfile::TempDir;

use ebus_core::demand::{
    direction_probability, generate_day_demand, poisson_pmf, poisson_sample, sample_alighting, sample_direction,
    DemandParams, Direction,
};
use ebus_core::route::{uniform_route, ClockTime, ServiceCalendar};
use ebus_core::scenario::{load_scenario, Scenario};
use ebus_core::sim::{run_simulation, BusSpec, ChargerBank, SimConfig, World};
use ebus_core::sweep::{recommend, Cell, CellSummary, SweepReport};
use ebus_core::tco::{
    compare_fleets, compute_tco, electricity_consumption, fuel_consumption, BebCostModel, CostModel, DieselCostModel,
};

// Tolerances and bands.
const WAIT_BAND: (f64, f64) = (0.65, 1.30);
const MIN_FLEET_REDUCTION: f64 = 0.05;
const DAILY_TARGET: f64 = 95_000.0;
const DAILY_BAND: f64 = 0.02;
const SCALE_EXPECTED: f64 = 0.52831;
const SCALE_TOL: f64 = 1e-5;
const PMF_TOL: f64 = 1e-5;
const MIN_EMISSION_RATIO: f64 = 1.5;
const GRID_FACTOR_2020: f64 = 0.000416;
const ENERGY_TOL: f64 = 1e-9;
const CHI_N: usize = 100_000;
const ALPHA: f64 = 0.001;
const SEEDS: std::ops::RangeInclusive<u64> = 1..=10;

// Realized values with the default modelling decisions, pinned once computed.
const PINNED_WAIT_64_350_10: f64 = 1.268_845_617_309_811_5;
const PINNED_EMISSION_RATIO_2020: f64 = 6.612_292_033_564;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn lahore_path() -> PathBuf {
    root().join("scenarios/lahore.json")
}

fn lahore() -> Scenario {
    load_scenario(Some(&lahore_path()), &[]).unwrap()
}

fn tiny_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/tiny.json")
}

fn ebus(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ebus")).args(args).output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn critical(df: usize) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - ALPHA)
}

fn chi_square(observed: &[u64], expected: &[f64]) -> f64 {
    observed.iter().zip(expected).map(|(&o, &e)| (o as f64 - e).powi(2) / e).sum()
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

struct Line {
    id: u32,
    name: &'static str,
    result: Check,
}

fn check(id: u32, name: &'static str, f: impl FnOnce() -> Check) -> Line {
    let result = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(p) => Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into())),
    };
    Line { id, name, result }
}

/// The sweep as written by the binary, read back from sweep_summary.csv.
struct SweepRun {
    cells: Vec<(u32, f64, u32, f64)>,
    recommendation: Value,
}

impl SweepRun {
    fn wait(&self, bus: u32, bat: f64, fast: u32) -> f64 {
        self.cells
            .iter()
            .find(|c| c.0 == bus && c.1 == bat && c.2 == fast)
            .map(|c| c.3)
            .expect("cell present")
    }
}

fn lahore_sweep(out: &Path, threads: &str) -> SweepRun {
    let o = ebus(&[
        "sweep",
        "--config",
        lahore_path().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--threads",
        threads,
        "--quiet",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("sweep_summary.csv")).unwrap();
    let cells = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect();
    SweepRun {
        cells,
        recommendation: json(&out.join("recommendation.json")),
    }
}

fn c1_optimized_wait() -> Check {
    let s = lahore();
    let route = s.route_model().unwrap();
    let cfg = s.sim_config().unwrap();
    ensure(
        (cfg.bus_count, cfg.bus_spec.battery_capacity_kwh, cfg.charger_bank.fast_count) == (64, 350.0, 10),
        "scenario is not the optimized configuration",
    )?;
    let params = s.demand_params().unwrap();
    let waits: Vec<f64> = SEEDS
        .map(|seed| {
            let d = generate_day_demand(&route, &s.calendar, &params, seed).unwrap();
            run_simulation(&route, &s.calendar, &cfg, &d, seed).unwrap().avg_wait_min
        })
        .collect();
    let mean = waits.iter().sum::<f64>() / waits.len() as f64;
    ensure(mean >= WAIT_BAND.0 && mean <= WAIT_BAND.1, format!("mean wait {mean:.4} outside {WAIT_BAND:?}"))?;
    ensure(
        (mean - PINNED_WAIT_64_350_10).abs() < 1e-9,
        format!("mean wait {mean:.12} moved from pinned {PINNED_WAIT_64_350_10}"),
    )?;
    Ok(format!("mean wait {mean:.4} min over 10 seeds (band {WAIT_BAND:?}, case study 0.9285)"))
}

fn c2_fleet_effect(sweep: &SweepRun) -> Check {
    let w58 = sweep.wait(58, 350.0, 10);
    let w64 = sweep.wait(64, 350.0, 10);
    let reduction = (w58 - w64) / w58;
    ensure(w64 < w58, format!("64 buses {w64:.4} not below 58 buses {w58:.4}"))?;
    ensure(reduction >= MIN_FLEET_REDUCTION, format!("reduction {:.1}% below 5%", 100.0 * reduction))?;
    // at the larger battery as well
    let r400 = (sweep.wait(58, 400.0, 10) - sweep.wait(64, 400.0, 10)) / sweep.wait(58, 400.0, 10);
    ensure(r400 >= MIN_FLEET_REDUCTION, format!("400 kWh reduction {:.1}%", 100.0 * r400))?;
    Ok(format!(
        "58 buses {w58:.4} vs 64 buses {w64:.4} min: {:.1}% lower (400 kWh: {:.1}%)",
        100.0 * reduction,
        100.0 * r400
    ))
}

fn c3_recommendation(sweep: &SweepRun, other: &SweepRun) -> Check {
    let r = &sweep.recommendation;
    ensure(r["status"] == "feasible", format!("status {}", r["status"]))?;
    let got = (r["bus_count"].as_u64(), r["battery_kwh"].as_f64(), r["fast_chargers"].as_u64());
    ensure(got == (Some(64), Some(350.0), Some(10)), format!("recommended {got:?}"))?;
    ensure(r["tolerance_source"] == "default", "tolerance was not the default")?;
    ensure(sweep.recommendation == other.recommendation, "recommendation depends on thread count")?;
    ensure(sweep.cells == other.cells, "sweep summary depends on thread count")?;
    // second route: the in-process simulation agrees with the sweep cell
    let cell = sweep.wait(64, 350.0, 10);
    ensure((cell - PINNED_WAIT_64_350_10).abs() < 1e-6, format!("sweep cell {cell} vs direct runs"))?;
    let tol = r["wait_tolerance_min"].as_f64().unwrap();
    let margin = sweep.wait(58, 400.0, 12) - tol;
    Ok(format!(
        "(64, 350 kWh, 10) at tolerance {tol:.4} min; 28 cells x 10 seeds; 58/400/12 excluded by {margin:.4} min"
    ))
}

fn c4_demand() -> Check {
    let s = lahore();
    let route = s.route_model().unwrap();
    let params = s.demand_params().unwrap();
    // closed form: 27 stations, 540 peak and 420 off-peak minutes at rates 10 and 3
    let oracle = DAILY_TARGET / (27.0 * (540.0 * 10.0 + 420.0 * 3.0));
    ensure((params.calibration_scale - oracle).abs() < 1e-12, "scale differs from closed form")?;
    ensure(
        (params.calibration_scale - SCALE_EXPECTED).abs() < SCALE_TOL,
        format!("scale {}", params.calibration_scale),
    )?;
    let mut lo = usize::MAX;
    let mut hi = 0;
    for seed in 1..=20u64 {
        let n = generate_day_demand(&route, &s.calendar, &params, seed).unwrap().len();
        ensure(
            (n as f64 - DAILY_TARGET).abs() <= DAILY_BAND * DAILY_TARGET,
            format!("seed {seed}: {n} passengers"),
        )?;
        lo = lo.min(n);
        hi = hi.max(n);
    }
    Ok(format!("scale {:.6}; 20 seeds gave {lo}..{hi} passengers", params.calibration_scale))
}

fn c5_formulas() -> Check {
    let fuel = fuel_consumption(415.0, 2.0).unwrap();
    ensure(fuel == 207.5, format!("fuel {fuel}"))?;
    let kwh: f64 = electricity_consumption(374.0, 1.88).unwrap();
    ensure((kwh - 374.0 / 1.88).abs() < 1e-12 && (kwh - 198.936).abs() < 1e-3, format!("energy {kwh}"))?;
    let p = |i| direction_probability::<f64>(i, 27).unwrap();
    ensure((p(0), p(13), p(26)) == (1.0, 0.5, 0.0), format!("direction {:?}", (p(0), p(13), p(26))))?;
    let pmf = poisson_pmf(3, 3.0f64);
    let oracle = 27.0 * (-3.0f64).exp() / 6.0;
    ensure((pmf - oracle).abs() < 1e-12 && (pmf - 0.22404).abs() < PMF_TOL, format!("pmf {pmf}"))?;
    Ok(format!("207.5 L, {kwh:.3} kWh, p = 1/0.5/0, f(3;3) = {pmf:.5}"))
}

fn c6_breakeven() -> Check {
    let s = lahore();
    let c = compare_fleets(&s.diesel, &s.beb, true).unwrap();
    let with = c.breakeven_with_emissions.ok_or("no breakeven with emissions")?;
    let without = c.breakeven_without_emissions.ok_or("no breakeven without emissions")?;
    let life = s.beb.study_life as usize;
    ensure(with.fractional <= without.fractional, "emissions delay breakeven")?;
    for b in [with, without] {
        ensure(b.index >= 1 && b.index < life, format!("breakeven at study year {}", b.index))?;
    }
    Ok(format!(
        "{} with emissions ({:.2} y) <= {} without ({:.2} y); case study 2032 vs 2033-2034",
        with.calendar_year(s.beb.start_year),
        with.fractional,
        without.calendar_year(s.beb.start_year),
        without.fractional
    ))
}

fn c7_emission_gap() -> Check {
    let s = lahore();
    let beb = BebCostModel {
        grid_emission_ton_per_kwh: GRID_FACTOR_2020,
        ..s.beb.clone()
    };
    let c = compare_fleets(&s.diesel, &beb, true).unwrap();
    let ratio = c.emission_gap.ratio;
    ensure(ratio >= MIN_EMISSION_RATIO, format!("ratio {ratio}"))?;
    ensure(
        (ratio - PINNED_EMISSION_RATIO_2020).abs() < 1e-9,
        format!("ratio {ratio:.12} moved from pinned {PINNED_EMISSION_RATIO_2020:.12}"),
    )?;
    let default = compare_fleets(&s.diesel, &s.beb, true).unwrap().emission_gap.ratio;
    ensure(default >= MIN_EMISSION_RATIO, format!("default-factor ratio {default}"))?;
    Ok(format!(
        "diesel/BEB emission cost {ratio:.3}x at the 2020 grid factor ({default:.3}x at the default); gap {:.2} M USD",
        c.emission_gap.absolute_gap / 1e6
    ))
}

fn small_case() -> impl Strategy<Value = (usize, f64, u32, u32, f64, u64, SimConfig)> {
    (
        (3usize..=8, 2.0f64..20.0, 0u32..120, 1u32..=3, 0.0f64..0.6, any::<u64>()),
        (1u32..=6, 1u32..=200, 20.0f64..400.0, 0.3f64..=1.0, 0.3f64..2.0, 15.0f64..60.0, 0.0f64..90.0),
        (0u32..=4, 0u32..=6, 0.0f64..0.5, 0.5f64..=1.0, 60.0f64..300.0, 0.0f64..900.0),
    )
        .prop_map(
            |(
                (stations, length, open, hours, lambda, seed),
                (buses, cap, battery, usable, per_km, speed, dwell),
                (fast, slow, start, gap, headway, layover),
            )| {
                let cfg = SimConfig {
                    bus_count: buses,
                    bus_spec: BusSpec {
                        passenger_capacity: cap,
                        battery_capacity_kwh: battery,
                        usable_fraction: usable,
                        energy_per_km: per_km,
                        avg_speed_kmh: speed,
                        dwell_time_s: dwell,
                        aux_load_kw: 0.0,
                    },
                    charger_bank: ChargerBank {
                        fast_count: fast,
                        fast_power_kw: 325.0,
                        fast_locations: vec![0, stations - 1],
                        slow_count: slow,
                        slow_power_kw: 150.0,
                        slow_location: 0,
                    },
                    charge_start_threshold: start,
                    charge_stop_threshold: (start + gap).min(1.0),
                    dispatch_headway_peak_s: headway,
                    dispatch_headway_offpeak_s: headway * 1.3,
                    terminal_layover_s: layover,
                    charging_efficiency: 1.0,
                };
                (stations, length, open, hours, lambda, seed, cfg)
            },
        )
}

fn c8_sim_properties() -> Check {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 1000,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let steps = std::cell::Cell::new(0u64);
    let passengers = std::cell::Cell::new(0usize);
    let outcome = runner.run(&small_case(), |(stations, length, open, hours, lambda, seed, cfg)| {
        let route = uniform_route(stations, length).unwrap();
        let cal = ServiceCalendar::new(ClockTime(open), ClockTime(open + 60 * hours), vec![]).unwrap();
        let params = DemandParams {
            lambda_peak: lambda,
            lambda_offpeak: lambda,
            target_daily_passengers: None,
            calibration_scale: 1.0,
        };
        let demand = generate_day_demand(&route, &cal, &params, seed).unwrap();
        let mut w = World::new(&route, &cal, &cfg, &demand).unwrap();
        let mut m = w.start_minute();
        while !w.is_finished(m) {
            w.step(m);
            w.check_invariants().map_err(|e| TestCaseError::fail(format!("minute {m}: {e}")))?;
            steps.set(steps.get() + 1);
            m += 1;
        }
        let r = w.finish(seed);
        passengers.set(passengers.get() + r.passengers_total);
        prop_assert_eq!(r.passengers_served + r.unserved_at_close, demand.len());
        for b in &r.per_bus {
            let balance = b.initial_soc_kwh + b.charged_kwh - b.traction_kwh - b.final_soc_kwh;
            prop_assert!(balance.abs() < ENERGY_TOL, "bus {} imbalance {}", b.bus_id, balance);
            prop_assert!(b.final_soc_kwh >= 0.0 && b.final_soc_kwh <= cfg.bus_spec.usable_kwh() + 1e-9);
        }
        Ok(())
    });
    outcome.map_err(|e| e.to_string())?;
    Ok(format!("1000 random corridors, {} checked minutes, {} passengers", steps.get(), passengers.get()))
}

fn c9_determinism() -> Check {
    let tmp = TempDir::new().unwrap();
    let cases: [(&str, PathBuf); 5] = [
        ("simulate", lahore_path()),
        ("demand", lahore_path()),
        ("tco", lahore_path()),
        ("sweep", tiny_path()),
        ("simulate", tiny_path()),
    ];
    let mut files = 0;
    for (i, (cmd, cfg)) in cases.iter().enumerate() {
        let mut dirs = Vec::new();
        for run in 0..2 {
            let out = tmp.path().join(format!("{i}_{run}"));
            let o = ebus(&[cmd, "--config", cfg.to_str().unwrap(), "--seed", "42", "--out", out.to_str().unwrap(), "--quiet"]);
            ensure(o.status.success(), format!("{cmd} failed: {}", String::from_utf8_lossy(&o.stderr)))?;
            dirs.push(out);
        }
        let list = |d: &Path| {
            let mut v: Vec<_> = fs::read_dir(d).unwrap().map(|e| e.unwrap().file_name()).collect();
            v.sort();
            v
        };
        ensure(list(&dirs[0]) == list(&dirs[1]), format!("{cmd}: file sets differ"))?;
        for name in list(&dirs[0]) {
            let (a, b) = (fs::read(dirs[0].join(&name)).unwrap(), fs::read(dirs[1].join(&name)).unwrap());
            if name == "manifest.json" {
                let strip = |bytes: &[u8]| {
                    let mut v: Value = serde_json::from_slice(bytes).unwrap();
                    v.as_object_mut().unwrap().remove("wall_clock_s");
                    v
                };
                ensure(strip(&a) == strip(&b), format!("{cmd}: manifests differ"))?;
            } else {
                ensure(a == b, format!("{cmd}: {name:?} differs"))?;
            }
            files += 1;
        }
    }
    Ok(format!("{files} files byte-identical across paired runs (manifest compared without wall clock)"))
}

fn c10_samplers() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n_st = 27;
    let mut worst: f64 = 0.0;
    for (origin, dir) in [(3, Direction::Up), (3, Direction::Down), (24, Direction::Down), (13, Direction::Up)] {
        let support: Vec<usize> = match dir {
            Direction::Up => (origin + 1..n_st).collect(),
            Direction::Down => (0..origin).collect(),
        };
        let mut counts = vec![0u64; n_st];
        for _ in 0..CHI_N {
            counts[sample_alighting(origin, dir, n_st, &mut rng).unwrap()] += 1;
        }
        let obs: Vec<u64> = support.iter().map(|&s| counts[s]).collect();
        ensure(obs.iter().sum::<u64>() == CHI_N as u64, "alighting outside support")?;
        let stat = chi_square(&obs, &vec![CHI_N as f64 / support.len() as f64; support.len()]);
        let crit = critical(support.len() - 1);
        ensure(stat < crit, format!("alighting {origin} {dir:?}: chi2 {stat:.2} >= {crit:.2}"))?;
        worst = worst.max(stat / crit);
    }
    for i in [2usize, 9, 13, 22] {
        let p = (n_st - 1 - i) as f64 / (n_st - 1) as f64;
        let ups = (0..CHI_N).filter(|_| sample_direction(p, &mut rng) == Direction::Up).count() as u64;
        let stat = chi_square(&[ups, CHI_N as u64 - ups], &[CHI_N as f64 * p, CHI_N as f64 * (1.0 - p)]);
        ensure(stat < critical(1), format!("direction {i}: chi2 {stat:.2}"))?;
        worst = worst.max(stat / critical(1));
    }
    for lambda in [0.5, 3.0, 5.283] {
        let xs: Vec<f64> = (0..CHI_N).map(|_| poisson_sample(lambda, &mut rng).unwrap() as f64).collect();
        let n = CHI_N as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        ensure((mean - lambda).abs() < 3.0 * (lambda / n).sqrt(), format!("poisson {lambda}: mean {mean}"))?;
        let se_var = ((lambda + 2.0 * lambda * lambda) / n).sqrt();
        ensure((var - lambda).abs() < 3.0 * se_var, format!("poisson {lambda}: variance {var}"))?;
    }
    Ok(format!("n = 100000 per test; largest chi2/critical ratio {worst:.3}"))
}

fn cost_model() -> impl Strategy<Value = CostModel<f64>> {
    let diesel = (1u32..200, 0.0f64..1e6, 1u32..30, 0.5f64..6.0, 0.0f64..600.0, 0.0f64..3.0, 0.0f64..0.01)
        .prop_map(|(fleet, bus, life, km_l, km, price, ton)| {
            CostModel::Diesel(DieselCostModel {
                fleet_size: fleet,
                bus_cost: bus,
                study_life: life,
                mileage_km_per_l: km_l,
                avg_daily_km: km,
                fuel_price_per_l: price,
                emission_ton_per_l: ton,
                ..DieselCostModel::default()
            })
        });
    let beb = (1u32..200, 0.0f64..1e6, 1u32..15, 1u32..30, 10.0f64..800.0, 0.0f64..=1.0, 0.0f64..0.002)
        .prop_map(|(fleet, bus, batt_life, life, kwh, salvage, grid)| {
            CostModel::Beb(BebCostModel {
                fleet_size: fleet,
                bus_cost: bus,
                battery_life_years: batt_life,
                study_life: life,
                battery_kwh: kwh,
                battery_salvage_fraction: salvage,
                grid_emission_ton_per_kwh: grid,
                ..BebCostModel::default()
            })
        });
    prop_oneof![diesel, beb]
}

fn c11_tco_properties() -> Check {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 1000,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    runner
        .run(&(cost_model(), 0.0f64..10.0), |(m, k)| {
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
            let scaled = match &m {
                CostModel::Diesel(d) => CostModel::Diesel(d.scale_prices(k)),
                CostModel::Beb(b) => CostModel::Beb(b.scale_prices(k)),
            };
            for inc in [true, false] {
                let base = compute_tco(&m, inc).unwrap();
                prop_assert!(close(compute_tco(&scaled, inc).unwrap().total, k * base.total));
                for w in base.cumulative().windows(2) {
                    prop_assert!(w[1] >= w[0]);
                }
            }
            prop_assert!(compute_tco(&m, true).unwrap().total >= compute_tco(&m, false).unwrap().total);
            if let CostModel::Beb(b) = &m {
                prop_assert_eq!(
                    b.replacement_years().len(),
                    ((b.study_life - 1) / b.battery_life_years) as usize
                );
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("1000 random cost models: homogeneity, emission flag, monotone cumulative, replacements".into())
}

fn c12_monotone(sweep: &SweepRun) -> Check {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 2000,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let cell = (1u32..4, 1u32..8, 0.1f64..10.0, 0u32..20, prop_oneof![3 => Just(0usize), 1 => Just(1usize)]);
    let report = proptest::collection::vec(cell, 1..30).prop_map(|cells| SweepReport {
        seeds: vec![1],
        cells: cells
            .into_iter()
            .map(|(b, f, wait, capital, strand)| CellSummary {
                cell: Cell {
                    bus_count: b,
                    battery_kwh: 350.0,
                    fast_chargers: f,
                },
                mean_wait_min: Some(wait),
                std_wait_min: 0.0,
                capital_usd: capital as f64 * 1e5,
                capital_delta_usd: 0.0,
                strandings: strand,
                headway_violations: 0,
                mean_energy_kwh: 0.0,
                mean_distance_km: 0.0,
                failed_seeds: 0,
            })
            .collect(),
        runs: vec![],
        peak_share: 0.5,
        baseline_wait_min: 1.0,
    });
    runner
        .run(&(report, 0.0f64..12.0, 0.0f64..12.0), |(r, t, dt)| {
            let capital = |tol| recommend(&r, tol).unwrap().chosen().map(|c| c.capital_usd);
            if let Some(a) = capital(t) {
                let b = capital(t + dt);
                prop_assert!(b.is_some_and(|b| b <= a));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    // and along the Lahore sweep's own waits
    let mut waits: Vec<f64> = sweep.cells.iter().map(|c| c.3).collect();
    waits.sort_by(f64::total_cmp);
    let mut steps = 0;
    let mut last: Option<f64> = None;
    for w in waits {
        let tol_capital = sweep
            .cells
            .iter()
            .filter(|c| c.3 <= w)
            .map(|c| {
                let mut s = lahore();
                s.beb.fleet_size = c.0;
                s.beb.battery_kwh = c.1;
                s.beb.fast_charger.count = c.2;
                s.beb.capital_cost()
            })
            .fold(f64::INFINITY, f64::min);
        if let Some(prev) = last {
            ensure(tol_capital <= prev, format!("capital rose at tolerance {w}"))?;
        }
        last = Some(tol_capital);
        steps += 1;
    }
    Ok(format!("2000 random reports plus {steps} tolerance steps on the Lahore sweep"))
}

#[test]
fn acceptance() {
    let tmp = TempDir::new().unwrap();
    let sweep_a = lahore_sweep(&tmp.path().join("sweep_a"), "1");
    let sweep_b = lahore_sweep(&tmp.path().join("sweep_b"), "4");

    let lines = vec![
        check(1, "optimized-scenario waiting time", c1_optimized_wait),
        check(2, "fleet-size effect", || c2_fleet_effect(&sweep_a)),
        check(3, "sweep recommendation", || c3_recommendation(&sweep_a, &sweep_b)),
        check(4, "demand calibration", c4_demand),
        check(5, "formula unit values", c5_formulas),
        check(6, "breakeven ordering", c6_breakeven),
        check(7, "emission gap direction", c7_emission_gap),
        check(8, "simulation invariants", c8_sim_properties),
        check(9, "determinism", c9_determinism),
        check(10, "sampler statistics", c10_samplers),
        check(11, "cost model properties", c11_tco_properties),
        check(12, "monotone recommendation", || c12_monotone(&sweep_a)),
    ];
    let mut failed = Vec::new();
    for l in &lines {
        match &l.result {
            Ok(detail) => println!("PASS [{:>2}] {}: {}", l.id, l.name, detail),
            Err(why) => {
                println!("FAIL [{:>2}] {}: {}", l.id, l.name, why);
                failed.push(l.id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
