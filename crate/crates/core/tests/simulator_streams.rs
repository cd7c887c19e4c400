// SPDX-License-Identifier: Apache-2.0

use chrono::NaiveDate;

use mlrss_core::simulator::{truth_labels, InjectedOutbreak};
use mlrss_core::scenario::seasonal_beta;
use mlrss_core::{simulate, DesignSpec, ProfileShape, SimConfig};

fn flat_config(level: f64, days: u32, outbreaks: Vec<InjectedOutbreak>, seed: u64) -> SimConfig {
    SimConfig {
        beta_true: vec![level.ln(), 0.0],
        spec: DesignSpec::intercept_only(),
        start_date: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
        horizon_days: days,
        outbreaks,
        seed,
    }
}

#[test]
fn peak_excess_matches_the_analytic_mean() {
    let (c, mu, sigma) = (50.0, 8.0, 5.0);
    let start = 20u32;
    let peak = start + mu as u32 - 1;
    let outbreak = InjectedOutbreak {
        start,
        shape: ProfileShape::gaussian(c, mu, sigma),
    };
    let seeds = 200;
    let mut total = 0.0;
    for seed in 0..seeds {
        let sim = simulate(&flat_config(20.0, 60, vec![outbreak.clone()], seed)).unwrap();
        total += (peak - 1..=peak + 1).map(|t| sim.series.counts[t as usize - 1] as f64).sum::<f64>();
    }
    let n = 3.0 * seeds as f64;
    let observed = total / n - 20.0;
    let expected = c * (1.0 + 2.0 * (-1.0 / sigma).exp()) / 3.0;
    // Poisson variance equals the mean of each day's count.
    let se = ((20.0 + expected) / n).sqrt();
    assert!((observed - expected).abs() <= 3.0 * se, "observed {observed}, expected {expected} ± {se}");
}

#[test]
fn seasonal_baseline_is_poisson_dispersed() {
    let config = SimConfig {
        beta_true: seasonal_beta(25.0),
        spec: DesignSpec::surveillance(),
        start_date: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
        horizon_days: 6000,
        outbreaks: Vec::new(),
        seed: 4,
    };
    let sim = simulate(&config).unwrap();
    let (sq, lam): (f64, f64) = sim
        .series
        .counts
        .iter()
        .zip(&sim.lambda)
        .fold((0.0, 0.0), |(s, l), (&o, &m)| (s + (o as f64 - m).powi(2), l + m));
    let index = sq / lam;
    assert!((0.9..=1.1).contains(&index), "dispersion index {index}");
    let mean_resid: f64 = sim.series.counts.iter().zip(&sim.lambda).map(|(&o, m)| o as f64 - m).sum::<f64>();
    assert!(mean_resid.abs() / lam.sqrt() < 4.0);
}

#[test]
fn truth_labels_do_not_depend_on_the_seed() {
    let outbreaks = vec![
        InjectedOutbreak {
            start: 10,
            shape: ProfileShape::gaussian(10.0, 5.0, 8.0),
        },
        InjectedOutbreak {
            start: 14,
            shape: ProfileShape::lognormal(6.0, 1.0, 0.5),
        },
    ];
    let a = simulate(&flat_config(12.0, 80, outbreaks.clone(), 1)).unwrap();
    let b = simulate(&flat_config(12.0, 80, outbreaks.clone(), 2)).unwrap();
    assert_eq!(a.lambda, b.lambda);
    assert_eq!(a.delta, b.delta);
    assert_eq!(a.outbreaks, b.outbreaks);
    assert_ne!(a.series.counts, b.series.counts);
    let (lambda, delta, table) = truth_labels(&flat_config(12.0, 80, outbreaks, 3)).unwrap();
    assert_eq!((lambda, delta, table), (a.lambda, a.delta, a.outbreaks));
}
