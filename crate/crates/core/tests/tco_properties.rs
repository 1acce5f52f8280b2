//! Randomized cost models: price homogeneity, emission flag ordering, cumulative series
//! shape and battery replacement count.

use proptest::prelude::*;

use ebus_core::tco::{
    annual_cashflow, compute_tco, BebCostModel, ChargerCost, CostModel, DieselCostModel, GridEmissionTrajectory,
};

fn diesel() -> impl Strategy<Value = DieselCostModel<f64>> {
    (
        (1u32..200, 0.0f64..1e6, 1u32..30, 0.5f64..6.0, 0.0f64..600.0),
        (0.0f64..2.0, 0.0f64..3.0, 0.0f64..0.01, 0.0f64..200.0, 200.0f64..366.0),
    )
        .prop_map(|((fleet, bus, life, km_l, km), (maint, fuel, ton_l, ton_cost, days))| DieselCostModel {
            fleet_size: fleet,
            bus_cost: bus,
            study_life: life,
            mileage_km_per_l: km_l,
            avg_daily_km: km,
            maintenance_per_km: maint,
            fuel_price_per_l: fuel,
            emission_ton_per_l: ton_l,
            emission_cost_per_ton: ton_cost,
            operating_days_per_year: days,
            discount_rate: 0.0,
        })
}

fn beb() -> impl Strategy<Value = BebCostModel<f64>> {
    (
        (1u32..200, 0.0f64..1e6, 0u32..100, 0.0f64..1e5, 0u32..30, 0.0f64..1e6),
        (10.0f64..800.0, 0.0f64..500.0, 1u32..15, 0.0f64..=1.0, 1u32..30, 0.5f64..4.0),
        (0.0f64..600.0, 0.0f64..1.0, 0.0f64..0.002, any::<bool>(), 0.0f64..200.0, 0.0f64..0.5),
    )
        .prop_map(
            |(
                (fleet, bus, slow_n, slow_cost, fast_n, fast_cost),
                (kwh, per_kwh, batt_life, salvage, life, km_kwh),
                (km, maint, grid, trajectory, ton_cost, price),
            )| BebCostModel {
                fleet_size: fleet,
                bus_cost: bus,
                slow_charger: ChargerCost {
                    count: slow_n,
                    unit_cost: slow_cost,
                    install_cost: slow_cost * 0.3,
                },
                fast_charger: ChargerCost {
                    count: fast_n,
                    unit_cost: fast_cost,
                    install_cost: fast_cost * 0.4,
                },
                battery_kwh: kwh,
                battery_cost_per_kwh: per_kwh,
                battery_life_years: batt_life,
                battery_salvage_fraction: salvage,
                study_life: life,
                mileage_km_per_kwh: km_kwh,
                avg_daily_km: km,
                maintenance_per_km: maint,
                grid_emission_ton_per_kwh: grid,
                grid_trajectory: trajectory.then(GridEmissionTrajectory::pakistan_igcep),
                emission_cost_per_ton: ton_cost,
                electricity_price_per_kwh: price,
                operating_days_per_year: 365.0,
                discount_rate: 0.0,
                start_year: 2022,
            },
        )
}

fn model() -> impl Strategy<Value = CostModel<f64>> {
    prop_oneof![diesel().prop_map(CostModel::Diesel), beb().prop_map(CostModel::Beb)]
}

fn scaled(m: &CostModel<f64>, k: f64) -> CostModel<f64> {
    match m {
        CostModel::Diesel(d) => CostModel::Diesel(d.scale_prices(k)),
        CostModel::Beb(b) => CostModel::Beb(b.scale_prices(k)),
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, ..ProptestConfig::default() })]

    #[test]
    fn totals_are_degree_one_in_prices(m in model(), k in 0.0f64..10.0, inc in any::<bool>()) {
        let base = compute_tco(&m, inc).unwrap();
        let s = compute_tco(&scaled(&m, k), inc).unwrap();
        prop_assert!(close(s.total, k * base.total), "{} vs {}", s.total, k * base.total);
        for (a, b) in s.cumulative().iter().zip(base.cumulative()) {
            prop_assert!(close(*a, k * b));
        }
        // quantities are not prices
        for (a, b) in s.years.iter().zip(&base.years) {
            prop_assert!(close(a.emission_tons, b.emission_tons));
        }
    }

    #[test]
    fn emissions_never_lower_the_total(m in model()) {
        let with = compute_tco(&m, true).unwrap();
        let without = compute_tco(&m, false).unwrap();
        prop_assert!(with.total >= without.total);
        for (a, b) in with.cumulative_with_emissions.iter().zip(&with.cumulative_without_emissions) {
            prop_assert!(a >= b);
        }
        prop_assert_eq!(&with.cumulative_with_emissions, &without.cumulative_with_emissions);
    }

    #[test]
    fn cumulative_series_never_decrease(m in model(), inc in any::<bool>()) {
        let r = compute_tco(&m, inc).unwrap();
        prop_assert_eq!(r.cumulative().len(), m.study_life() as usize);
        for s in [&r.cumulative_with_emissions, &r.cumulative_without_emissions, &r.cumulative_emission_cost] {
            for w in s.windows(2) {
                prop_assert!(w[1] >= w[0]);
            }
        }
        prop_assert_eq!(*r.cumulative().last().unwrap(), r.total);
    }

    #[test]
    fn replacement_count(b in beb()) {
        let expected = ((b.study_life - 1) / b.battery_life_years) as usize;
        prop_assert_eq!(b.replacement_years().len(), expected);
        let m = CostModel::Beb(b.clone());
        let charged = (0..b.study_life)
            .filter(|&y| annual_cashflow(&m, y).unwrap().battery_replacement > 0.0)
            .count();
        let pays = b.fleet_battery_cost() * (1.0 - b.battery_salvage_fraction) > 0.0;
        prop_assert_eq!(charged, if pays { expected } else { 0 });
    }
}
