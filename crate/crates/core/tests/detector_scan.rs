// SPDX-License-Identifier: Apache-2.0

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mlrss_core::detector::scan_stream;
use mlrss_core::{
    predict_lambda, simulate, Detector, DetectorConfig, ProfileBank, ProfileShape, Remediation, Scenario, Source,
};

fn small_bank() -> ProfileBank {
    ProfileBank::new(vec![
        ProfileShape::gaussian(8.0, 4.0, 6.0),
        ProfileShape::gaussian(3.0, 7.0, 20.0),
        ProfileShape::gaussian(12.0, 2.0, 3.0),
    ])
    .unwrap()
}

/// Mixture likelihood ratio as a direct product of per-day ratios.
fn direct_log_mlr(counts: &[u64], lambdas: &[f64], bank: &ProfileBank) -> f64 {
    let mean: f64 = bank
        .shapes()
        .iter()
        .map(|shape| {
            counts
                .iter()
                .zip(lambdas)
                .enumerate()
                .map(|(i, (&o, &l))| {
                    let d = shape.excess_at(i as f64 + 1.0);
                    (-d).exp() * ((l + d) / l).powi(o as i32)
                })
                .product::<f64>()
        })
        .sum::<f64>()
        / bank.len() as f64;
    mean.ln()
}

#[test]
fn matches_direct_products_on_small_windows() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let bank = small_bank();
    let config = DetectorConfig {
        remediation: Remediation::Off,
        ..DetectorConfig::default()
    };
    for _ in 0..200 {
        let n = rng.random_range(2..=8usize);
        let lambdas: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..20.0)).collect();
        let counts: Vec<u64> = (0..n).map(|_| rng.random_range(0..=10u64)).collect();
        let results = scan_stream(&config, &bank, &counts, &lambdas).unwrap();
        for r in &results {
            for &(t_o, log_s) in &r.per_start {
                let range = t_o as usize - 1..r.day as usize;
                let direct = direct_log_mlr(&counts[range.clone()], &lambdas[range], &bank);
                assert!((log_s - direct).abs() <= 1e-9 * direct.abs().max(1.0), "{log_s} vs {direct}");
            }
        }
    }
}

#[test]
fn scan_dominates_every_start_and_reports_earliest_argmax() {
    let scenario = Scenario::for_source(Source::Otc);
    let sim = simulate(&scenario.outbreak_config(4, 40, 9).unwrap()).unwrap();
    let lambdas = predict_lambda(&scenario.true_baseline().unwrap(), &scenario.spec.days_for(&sim.series)).unwrap();
    let results = scan_stream(&Source::Otc.study_detector_config(), &small_bank(), &sim.series.counts, &lambdas).unwrap();
    for r in results.iter().skip(1) {
        let best = r.per_start.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.log_r, best);
        let earliest = r.per_start.iter().find(|&&(_, v)| v == best).unwrap().0;
        assert_eq!(r.t_star, earliest);
        assert!(r.per_start.len() >= 10.min(r.day as usize - 1));
        assert!(r.per_start.len() <= 15);
    }
}

#[test]
fn streaming_matches_batch_and_is_deterministic() {
    let scenario = Scenario::for_source(Source::Th);
    let sim = simulate(&scenario.outbreak_config(2, 40, 3).unwrap()).unwrap();
    let model = scenario.true_baseline().unwrap();
    let days = scenario.spec.days_for(&sim.series);
    let lambdas = predict_lambda(&model, &days).unwrap();
    let bank = ProfileBank::new(vec![scenario.central.clone()]).unwrap();
    let config = Source::Th.study_detector_config();

    let batch = scan_stream(&config, &bank, &sim.series.counts, &lambdas).unwrap();
    let again = scan_stream(&config, &bank, &sim.series.counts, &lambdas).unwrap();
    assert_eq!(batch, again);

    let mut detector = Detector::with_baseline(config, bank, model).unwrap();
    for ((day, &count), expected) in days.iter().zip(&sim.series.counts).zip(&batch) {
        assert_eq!(&detector.step(count, day).unwrap(), expected);
    }
}

#[test]
fn null_stream_scores_stay_centred() {
    // Without outbreaks the slope score fluctuates around zero: its mean over
    // a long null stream sits within a few standard errors of 0.
    let scenario = Scenario::for_source(Source::Otc);
    let sim = simulate(&scenario.null_config(1500, 21)).unwrap();
    let lambdas = predict_lambda(&scenario.true_baseline().unwrap(), &scenario.spec.days_for(&sim.series)).unwrap();
    let bank = ProfileBank::new(vec![scenario.central.clone()]).unwrap();
    let results = scan_stream(&Source::Otc.study_detector_config(), &bank, &sim.series.counts, &lambdas).unwrap();
    let scores: Vec<f64> = results.iter().skip(20).map(|r| r.score).collect();
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // Neighbouring slopes share 12 of 13 points, so inflate the standard
    // error by the window length.
    let se = (var * 13.0 / n).sqrt();
    assert!(mean.abs() <= 3.0 * se, "mean {mean}, se {se}");
}
