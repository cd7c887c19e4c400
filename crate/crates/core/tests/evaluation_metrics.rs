// SPDX-License-Identifier: Apache-2.0

use mlrss_core::evaluation::{amoc, calibrate_threshold, linear_grid, EvalOptions};
use mlrss_core::scenario::{run_ewma, sub_seed};
use mlrss_core::{evaluate, simulate, Scenario, Source, Truth};

fn ewma_on_test_stream(seed: u64) -> (Vec<f64>, Truth, Vec<f64>) {
    let scenario = Scenario::for_source(Source::Otc);
    let model = scenario.true_baseline().unwrap();
    let test = simulate(&scenario.outbreak_config(10, 35, sub_seed(seed, 1)).unwrap()).unwrap();
    let null = simulate(&scenario.null_config(730, sub_seed(seed, 2))).unwrap();
    (
        run_ewma(&test.series, &model, 0.25).unwrap(),
        Truth::from(&test),
        run_ewma(&null.series, &model, 0.25).unwrap(),
    )
}

#[test]
fn alarm_sets_are_nested_in_the_threshold() {
    let (scores, truth, _) = ewma_on_test_stream(1);
    let options = EvalOptions::default();
    let grid = linear_grid(0.0, 3.0, 31);
    let reports: Vec<_> = grid.iter().map(|&t| evaluate(&scores, &truth, t, &options).unwrap()).collect();
    for pair in reports.windows(2) {
        assert!(pair[1].alarms.iter().all(|a| pair[0].alarms.contains(a)));
        assert!(pair[1].false_alarms <= pair[0].false_alarms);
    }
    // Pure function of its inputs.
    assert_eq!(evaluate(&scores, &truth, 1.0, &options).unwrap(), reports[10]);
}

#[test]
fn calibrated_threshold_respects_the_budget_on_its_stream() {
    let (_, _, null) = ewma_on_test_stream(2);
    for rate in [0.5, 1.0, 5.0] {
        let tau = calibrate_threshold(&null, rate);
        let alarms = null.iter().filter(|&&s| s > tau).count() as f64;
        assert!(100.0 * alarms / null.len() as f64 <= rate);
    }
}

#[test]
fn false_alarm_rate_tracks_null_exceedance() {
    // Thresholds calibrated on one null stream give roughly the requested
    // rate on the outbreak-free days of an independent test stream.
    let (scores, truth, null) = ewma_on_test_stream(3);
    let options = EvalOptions::default();
    for rate in [2.0, 5.0, 10.0] {
        let tau = calibrate_threshold(&null, rate);
        let report = evaluate(&scores, &truth, tau, &options).unwrap();
        assert!(
            report.false_alarm_rate < 3.0 * rate + 2.0,
            "requested {rate}, got {}",
            report.false_alarm_rate
        );
    }
}

#[test]
fn amoc_curve_is_sorted_and_trades_delay_for_false_alarms() {
    let (scores, truth, _) = ewma_on_test_stream(4);
    let curve = amoc(&scores, &truth, &linear_grid(0.2, 4.0, 20), &EvalOptions::default()).unwrap();
    for pair in curve.windows(2) {
        assert!(pair[0].false_alarm_rate <= pair[1].false_alarm_rate);
    }
    let strict = curve.iter().max_by(|a, b| a.threshold.total_cmp(&b.threshold)).unwrap();
    let loose = curve.iter().min_by(|a, b| a.threshold.total_cmp(&b.threshold)).unwrap();
    assert!(strict.missed >= loose.missed);
    assert!(strict.false_alarm_rate <= loose.false_alarm_rate);
}
