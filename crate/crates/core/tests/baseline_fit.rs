// SPDX-License-Identifier: Apache-2.0

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mlrss_core::baseline::{build_design_row, fit_baseline_days, BaselineFit, IrlsOptions};
use mlrss_core::scenario::seasonal_beta;
use mlrss_core::{predict_lambda, simulate, CalendarDay, DesignSpec, LabeledSeries, SimConfig};

fn simulated(level: f64, days: u32, seed: u64) -> LabeledSeries {
    simulate(&SimConfig {
        beta_true: seasonal_beta(level),
        spec: DesignSpec::surveillance(),
        start_date: NaiveDate::from_ymd_opt(2015, 6, 1).unwrap(),
        horizon_days: days,
        outbreaks: Vec::new(),
        seed,
    })
    .unwrap()
}

fn fit(days: &[CalendarDay], counts: &[u64]) -> BaselineFit {
    fit_baseline_days(days, counts, &DesignSpec::surveillance(), &IrlsOptions::default()).unwrap()
}

#[test]
fn recovers_held_out_means() {
    let labeled = simulated(30.0, 4 * 365, 11);
    let spec = DesignSpec::surveillance();
    let days = spec.days_for(&labeled.series);
    let train = 3 * 365;
    let fitted = fit(&days[..train], &labeled.series.counts[..train]);
    let predicted = predict_lambda(&fitted.model, &days[train..]).unwrap();
    let truth = &labeled.lambda[train..];
    let mape = predicted.iter().zip(truth).map(|(p, t)| ((p - t) / t).abs()).sum::<f64>() / truth.len() as f64;
    assert!(mape < 0.05, "held-out MAPE {mape}");
    assert!(fitted.model.converged);
}

#[test]
fn deviance_never_increases() {
    for seed in 0..5 {
        let labeled = simulated(8.0, 2 * 365, seed);
        let days = DesignSpec::surveillance().days_for(&labeled.series);
        let fitted = fit(&days, &labeled.series.counts);
        for pair in fitted.deviance_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-10, "deviance rose: {pair:?}");
        }
    }
}

#[test]
fn score_equations_hold_at_convergence() {
    let labeled = simulated(25.0, 3 * 365, 3);
    let spec = DesignSpec::surveillance();
    let days = spec.days_for(&labeled.series);
    let fitted = fit(&days, &labeled.series.counts);
    let total: f64 = fitted.fitted.iter().sum();
    for j in 0..spec.column_count() {
        let score: f64 = days
            .iter()
            .zip(&labeled.series.counts)
            .zip(&fitted.fitted)
            .map(|((d, &o), mu)| (o as f64 - mu) * build_design_row(d, &spec)[j])
            .sum();
        assert!(score.abs() < 1e-6 * total, "column {j}: score {score}");
    }
}

#[test]
fn fit_is_invariant_to_permuting_days() {
    let labeled = simulated(15.0, 2 * 365, 5);
    let days = DesignSpec::surveillance().days_for(&labeled.series);
    let reference = fit(&days, &labeled.series.counts);

    let mut pairs: Vec<(CalendarDay, u64)> = days.iter().copied().zip(labeled.series.counts.iter().copied()).collect();
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(77));
    let (shuffled_days, shuffled_counts): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let shuffled = fit(&shuffled_days, &shuffled_counts);
    for (a, b) in reference.model.beta.iter().zip(&shuffled.model.beta) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn predict_reproduces_fitted_means() {
    let labeled = simulated(40.0, 500, 8);
    let days = DesignSpec::surveillance().days_for(&labeled.series);
    let fitted = fit(&days, &labeled.series.counts);
    let predicted = predict_lambda(&fitted.model, &days).unwrap();
    for (p, f) in predicted.iter().zip(&fitted.fitted) {
        assert!((p - f).abs() <= 1e-12 * f, "{p} vs {f}");
    }
}
