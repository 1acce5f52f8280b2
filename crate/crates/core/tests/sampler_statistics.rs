//! Frequency tests for the demand samplers at n = 100 000 draws, alpha = 0.001.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use ebus_core::demand::{
    generate_day_demand, poisson_pmf, poisson_sample, sample_alighting, sample_direction, DemandParams,
    Direction,
};
use ebus_core::route::{uniform_route, ServiceCalendar};

const N: usize = 100_000;
const ALPHA: f64 = 0.001;

fn critical(df: usize) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - ALPHA)
}

fn chi_square(observed: &[u64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum()
}

#[test]
fn critical_value_sanity() {
    // tabulated chi-square quantiles at 0.999
    assert!((critical(1) - 10.828).abs() < 1e-3);
    assert!((critical(20) - 45.315).abs() < 1e-3);
}

#[test]
fn alighting_is_uniform_in_both_directions() {
    let n_st = 27;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (origin, dir) in [(5, Direction::Up), (5, Direction::Down), (20, Direction::Down), (0, Direction::Up)] {
        let support: Vec<usize> = match dir {
            Direction::Up => (origin + 1..n_st).collect(),
            Direction::Down => (0..origin).collect(),
        };
        let mut counts = vec![0u64; n_st];
        for _ in 0..N {
            counts[sample_alighting(origin, dir, n_st, &mut rng).unwrap()] += 1;
        }
        let observed: Vec<u64> = support.iter().map(|&s| counts[s]).collect();
        assert_eq!(observed.iter().sum::<u64>(), N as u64, "draw outside the support");
        let expected = vec![N as f64 / support.len() as f64; support.len()];
        let stat = chi_square(&observed, &expected);
        let crit = critical(support.len() - 1);
        println!("alighting origin {origin} {dir:?}: chi2 {stat:.2} (critical {crit:.2})");
        assert!(stat < crit, "origin {origin} {dir:?}: chi2 {stat} >= {crit}");
    }
}

#[test]
fn direction_frequencies_match_binomial() {
    let n_st = 27usize;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in [1usize, 6, 13, 20, 25] {
        let p_up = (n_st - 1 - i) as f64 / (n_st - 1) as f64;
        let ups = (0..N).filter(|_| sample_direction(p_up, &mut rng) == Direction::Up).count() as u64;
        let stat = chi_square(&[ups, N as u64 - ups], &[N as f64 * p_up, N as f64 * (1.0 - p_up)]);
        println!("direction station {i}: up {ups}, chi2 {stat:.2}");
        assert!(stat < critical(1), "station {i}: chi2 {stat}");
    }
}

#[test]
fn poisson_mean_and_variance_within_three_sigma() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for lambda in [0.5, 1.58, 3.0, 5.283] {
        let xs: Vec<f64> = (0..N).map(|_| poisson_sample(lambda, &mut rng).unwrap() as f64).collect();
        let n = N as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se_mean = (lambda / n).sqrt();
        // variance of the sample variance for a Poisson law: (mu4 - sigma^4) / n with
        // mu4 = lambda (1 + 3 lambda)
        let se_var = ((lambda + 2.0 * lambda * lambda) / n).sqrt();
        println!("poisson {lambda}: mean {mean:.4} var {var:.4}");
        assert!((mean - lambda).abs() < 3.0 * se_mean, "lambda {lambda}: mean {mean}");
        assert!((var - lambda).abs() < 3.0 * se_var, "lambda {lambda}: var {var}");
    }
}

#[test]
fn poisson_counts_fit_the_pmf() {
    let lambda = 3.0;
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let top = 10usize;
    let mut counts = vec![0u64; top + 1];
    for _ in 0..N {
        let k = poisson_sample(lambda, &mut rng).unwrap() as usize;
        counts[k.min(top)] += 1;
    }
    let mut expected: Vec<f64> = (0..top).map(|k| N as f64 * poisson_pmf(k as u64, lambda)).collect();
    expected.push(N as f64 - expected.iter().sum::<f64>());
    let stat = chi_square(&counts, &expected);
    assert!(stat < critical(top), "chi2 {stat}");
}

#[test]
fn generated_day_direction_shares() {
    // whole-day generator: direction shares per station follow the binomial rule
    let route = uniform_route(6, 10.0).unwrap();
    let cal = ServiceCalendar::lahore();
    let params = DemandParams {
        lambda_peak: 2.0,
        lambda_offpeak: 2.0,
        target_daily_passengers: None,
        calibration_scale: 1.0,
    };
    let day = generate_day_demand(&route, &cal, &params, 5).unwrap();
    for i in 1..5usize {
        let here: Vec<_> = day.passengers.iter().filter(|p| p.origin as usize == i).collect();
        let ups = here.iter().filter(|p| p.direction == Direction::Up).count() as u64;
        let n = here.len() as f64;
        let p = (5 - i) as f64 / 5.0;
        let stat = chi_square(&[ups, here.len() as u64 - ups], &[n * p, n * (1.0 - p)]);
        assert!(stat < critical(1), "station {i}: chi2 {stat}");
    }
}
