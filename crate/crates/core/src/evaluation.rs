// SPDX-License-Identifier: Apache-2.0

//! Alarm metrics for a score stream against labeled outbreaks: detection
//! delay, false-alarm rate and AMOC curves across thresholds.
//!
//! An alarm is raised on day `t` iff `a_t > threshold`. A run of consecutive
//! alarm days counts once, at its first day: each outbreak is credited with
//! the first alarm run that begins in `[t_o, effective_last]`, and the delay
//! is counted from `t_o`. A run already under way before `t_o` is a false
//! alarm and earns no credit. Days inside an outbreak's window or within
//! `buffer_days` after it are neither detection credit nor false alarms,
//! since the scan statistic stays elevated for a while after an outbreak.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{LabeledSeries, OutbreakTruth};

pub const DEFAULT_BUFFER_DAYS: u32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub horizon: u32,
    pub outbreaks: Vec<OutbreakTruth>,
}

impl Truth {
    pub fn new(horizon: u32, outbreaks: Vec<OutbreakTruth>) -> Self {
        Self { horizon, outbreaks }
    }

    /// Days that count toward the false-alarm rate, as a 1-based mask.
    fn outbreak_free(&self, buffer_days: u32) -> Vec<bool> {
        let mut free = vec![true; self.horizon as usize];
        for o in &self.outbreaks {
            let last = (o.effective_last + buffer_days).min(self.horizon);
            for t in o.start.max(1)..=last {
                free[t as usize - 1] = false;
            }
        }
        free
    }
}

impl From<&LabeledSeries> for Truth {
    fn from(labeled: &LabeledSeries) -> Self {
        Self::new(labeled.horizon(), labeled.outbreaks.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalOptions {
    pub buffer_days: u32,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            buffer_days: DEFAULT_BUFFER_DAYS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutbreakDetection {
    pub start: u32,
    pub window_last: u32,
    pub first_alarm: Option<u32>,
}

impl OutbreakDetection {
    pub fn delay(&self) -> Option<u32> {
        self.first_alarm.map(|a| a - self.start)
    }

    /// Delay with a miss counted as the full window length, which exceeds
    /// every achievable delay.
    pub fn penalized_delay(&self) -> u32 {
        self.delay().unwrap_or(self.window_last - self.start + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub threshold: f64,
    pub alarms: Vec<u32>,
    pub detections: Vec<OutbreakDetection>,
    pub false_alarms: usize,
    pub outbreak_free_days: usize,
    /// False alarms per 100 outbreak-free days.
    pub false_alarm_rate: f64,
    pub missed: usize,
    /// Mean delay over detected outbreaks.
    pub mean_delay: Option<f64>,
    pub penalized_mean_delay: f64,
}

pub fn evaluate(scores: &[f64], truth: &Truth, threshold: f64, options: &EvalOptions) -> Result<EvaluationReport> {
    if scores.len() != truth.horizon as usize {
        return Err(Error::RangeMismatch(format!(
            "{} scores for a {}-day truth record",
            scores.len(),
            truth.horizon
        )));
    }
    let alarms: Vec<u32> = scores
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > threshold)
        .map(|(i, _)| i as u32 + 1)
        .collect();

    let raised = |t: u32| scores[t as usize - 1] > threshold;
    let free = truth.outbreak_free(options.buffer_days);
    let outbreak_free_days = free.iter().filter(|&&f| f).count();
    let false_alarms = alarms.iter().filter(|&&t| free[t as usize - 1]).count();
    let false_alarm_rate = if outbreak_free_days == 0 {
        0.0
    } else {
        100.0 * false_alarms as f64 / outbreak_free_days as f64
    };

    let detections: Vec<OutbreakDetection> = truth
        .outbreaks
        .iter()
        .map(|o| {
            let window_last = o.effective_last.max(o.start).min(truth.horizon);
            let first_alarm = (o.start..=window_last)
                .find(|&t| raised(t) && (t == 1 || !raised(t - 1)));
            OutbreakDetection {
                start: o.start,
                window_last,
                first_alarm,
            }
        })
        .collect();

    let delays: Vec<f64> = detections.iter().filter_map(|d| d.delay()).map(f64::from).collect();
    let missed = detections.len() - delays.len();
    let mean_delay = (!delays.is_empty()).then(|| delays.iter().sum::<f64>() / delays.len() as f64);
    let penalized_mean_delay = if detections.is_empty() {
        0.0
    } else {
        detections.iter().map(|d| f64::from(d.penalized_delay())).sum::<f64>() / detections.len() as f64
    };

    Ok(EvaluationReport {
        threshold,
        alarms,
        detections,
        false_alarms,
        outbreak_free_days,
        false_alarm_rate,
        missed,
        mean_delay,
        penalized_mean_delay,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmocPoint {
    pub threshold: f64,
    pub false_alarm_rate: f64,
    pub mean_delay: Option<f64>,
    pub penalized_mean_delay: f64,
    pub missed: usize,
}

/// One [`evaluate`] per threshold, sorted by false-alarm rate (ties by
/// descending threshold).
pub fn amoc(scores: &[f64], truth: &Truth, thresholds: &[f64], options: &EvalOptions) -> Result<Vec<AmocPoint>> {
    if thresholds.is_empty() {
        return Err(Error::InvalidConfig("threshold grid is empty".into()));
    }
    let mut curve = thresholds
        .iter()
        .map(|&tau| {
            evaluate(scores, truth, tau, options).map(|r| AmocPoint {
                threshold: tau,
                false_alarm_rate: r.false_alarm_rate,
                mean_delay: r.mean_delay,
                penalized_mean_delay: r.penalized_mean_delay,
                missed: r.missed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    curve.sort_by(|a, b| {
        a.false_alarm_rate
            .total_cmp(&b.false_alarm_rate)
            .then(b.threshold.total_cmp(&a.threshold))
    });
    Ok(curve)
}

/// Lowest threshold whose alarm rate on `null_scores` stays at or below
/// `max_rate` alarms per 100 days.
pub fn calibrate_threshold(null_scores: &[f64], max_rate: f64) -> f64 {
    if null_scores.is_empty() {
        return f64::INFINITY;
    }
    let mut sorted = null_scores.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let allowed = (max_rate * null_scores.len() as f64 / 100.0).floor() as usize;
    if allowed >= sorted.len() {
        return f64::NEG_INFINITY;
    }
    sorted[allowed]
}

/// Evenly spaced grid from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
