// SPDX-License-Identifier: Apache-2.0

//! Mixture likelihood ratio scan statistic.
//!
//! For a candidate start `t_o` and profile `θ`, the log likelihood ratio of
//! an outbreak against the baseline over days `t_o..=t` is
//!
//! ```text
//! log Λ(θ) = Σ_s [ −δ_s + o_s · ln(1 + δ_s / λ_s) ]
//! ```
//!
//! The mixture over a bank of `n` profiles is `log S = logsumexp_j log Λ(θ_j) − ln n`,
//! the scan statistic is `log R_t = max_{t_o ∈ W_t} log S_{t_o,t}` and the
//! alarm score is the least-squares slope of the last `S + 1` values of `R`.
//!
//! Everything is kept in the log domain; `R` is only exponentiated (with a
//! saturation cap) when the slope score is formed.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::baseline::BaselineModel;
use crate::calendar::CalendarDay;
use crate::error::{Error, Result};
use crate::profiles::{ProfileBank, ProfileShape};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Remediation {
    Off,
    /// Replace the single largest super-threshold residual.
    #[default]
    Once,
    /// Keep replacing until no residual exceeds the threshold.
    Repeated,
}

/// Which series the slope score is fit to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreScale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    /// Slope window `S`; the score uses the last `S + 1` scan values.
    pub slope_window: usize,
    /// Minimum number of candidate start days looked back.
    pub min_window: u32,
    /// Optional hard limit on how far back a candidate start may lie. `None`
    /// lets the window follow `t*` arbitrarily far into the past.
    pub max_lookback: Option<u32>,
    /// Standardized-residual threshold for outlier remediation.
    pub gamma: f64,
    pub remediation: Remediation,
    /// `log R` values above this are clamped before exponentiation.
    pub saturation_log_cap: f64,
    pub score_scale: ScoreScale,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            slope_window: 12,
            min_window: 10,
            max_lookback: None,
            gamma: 23.0,
            remediation: Remediation::Once,
            saturation_log_cap: 700.0,
            score_scale: ScoreScale::Linear,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.slope_window < 1 {
            return Err(Error::InvalidConfig("slope_window must be at least 1".into()));
        }
        if self.min_window < 1 {
            return Err(Error::InvalidConfig("min_window must be at least 1".into()));
        }
        if let Some(max) = self.max_lookback {
            if max < self.min_window {
                return Err(Error::InvalidConfig(format!(
                    "max_lookback ({max}) must be at least min_window ({})",
                    self.min_window
                )));
            }
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidConfig(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.saturation_log_cap.is_finite() && self.saturation_log_cap <= 709.0) {
            return Err(Error::InvalidConfig(
                "saturation_log_cap must be finite and at most 709".into(),
            ));
        }
        Ok(())
    }
}

/// Log likelihood ratio of outbreak excesses `deltas` against the baseline.
pub fn log_lr_from_excess(counts: &[u64], lambdas: &[f64], deltas: &[f64]) -> f64 {
    counts
        .iter()
        .zip(lambdas)
        .zip(deltas)
        .map(|((&o, &l), &d)| {
            if o == 0 {
                -d
            } else {
                -d + o as f64 * (d / l).ln_1p()
            }
        })
        .sum()
}

/// Log likelihood ratio for `shape` starting on the day of `counts[0]`.
pub fn log_lr(counts: &[u64], lambdas: &[f64], shape: &ProfileShape) -> f64 {
    let deltas = excess_curve(shape, counts.len());
    log_lr_from_excess(counts, lambdas, &deltas)
}

fn excess_curve(shape: &ProfileShape, len: usize) -> Vec<f64> {
    (1..=len).map(|u| shape.excess_at(u as f64)).collect()
}

/// Largest standardized residual `(o − m)/√m` with `m = λ + δ`; earliest
/// index wins ties.
fn max_residual(counts: &[u64], lambdas: &[f64], deltas: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, ((&o, &l), &d)) in counts.iter().zip(lambdas).zip(deltas).enumerate() {
        let mean = l + d;
        let r = (o as f64 - mean) / mean.sqrt();
        if best.is_none_or(|(_, b)| r > b) {
            best = Some((i, r));
        }
    }
    best
}

/// One pass of outlier remediation on a local copy: if the largest
/// standardized residual exceeds `gamma`, that day's count is replaced by
/// the rounded expected count. Returns the index that was replaced.
pub fn remediate_excess(
    counts: &[u64],
    lambdas: &[f64],
    deltas: &[f64],
    gamma: f64,
) -> (Vec<u64>, Option<usize>) {
    let mut out = counts.to_vec();
    let replaced = remediate_in_place(&mut out, lambdas, deltas, gamma);
    (out, replaced)
}

fn remediate_in_place(counts: &mut [u64], lambdas: &[f64], deltas: &[f64], gamma: f64) -> Option<usize> {
    match max_residual(counts, lambdas, deltas) {
        Some((i, r)) if r > gamma => {
            counts[i] = (lambdas[i] + deltas[i]).round() as u64;
            Some(i)
        }
        _ => None,
    }
}

/// [`remediate_excess`] for `shape` starting on the day of `counts[0]`.
pub fn remediate(
    counts: &[u64],
    lambdas: &[f64],
    shape: &ProfileShape,
    gamma: f64,
) -> (Vec<u64>, bool) {
    let deltas = excess_curve(shape, counts.len());
    let (out, replaced) = remediate_excess(counts, lambdas, &deltas, gamma);
    (out, replaced.is_some())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureEval {
    pub log_s: f64,
    /// Number of bank members whose window needed remediation.
    pub remediated: usize,
}

/// Log mixture likelihood ratio over the bank for the start day of `counts[0]`.
pub fn log_mlr(
    counts: &[u64],
    lambdas: &[f64],
    bank: &ProfileBank,
    remediation: Remediation,
    gamma: f64,
) -> MixtureEval {
    let mut scratch = MlrScratch::default();
    scratch.eval(counts, lambdas, bank, remediation, gamma)
}

#[derive(Debug, Default)]
struct MlrScratch {
    deltas: Vec<f64>,
    counts: Vec<u64>,
    terms: Vec<f64>,
}

impl MlrScratch {
    fn eval(
        &mut self,
        counts: &[u64],
        lambdas: &[f64],
        bank: &ProfileBank,
        remediation: Remediation,
        gamma: f64,
    ) -> MixtureEval {
        let len = counts.len();
        self.terms.clear();
        let mut remediated = 0;
        for shape in bank.shapes() {
            self.deltas.clear();
            self.deltas.extend((1..=len).map(|u| shape.excess_at(u as f64)));
            let value = match remediation {
                Remediation::Off => log_lr_from_excess(counts, lambdas, &self.deltas),
                Remediation::Once | Remediation::Repeated => {
                    self.counts.clear();
                    self.counts.extend_from_slice(counts);
                    let mut changed = false;
                    let passes = if remediation == Remediation::Once { 1 } else { len };
                    for _ in 0..passes {
                        if remediate_in_place(&mut self.counts, lambdas, &self.deltas, gamma).is_none() {
                            break;
                        }
                        changed = true;
                    }
                    remediated += usize::from(changed);
                    log_lr_from_excess(&self.counts, lambdas, &self.deltas)
                }
            };
            self.terms.push(value);
        }
        MixtureEval {
            log_s: log_sum_exp(&self.terms) - (bank.len() as f64).ln(),
            remediated,
        }
    }
}

/// `ln Σ exp(x_i)` without overflow; `−∞` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Least-squares slope weights for `S + 1` equally spaced points
/// `x_i = i`: `w_i = (x_i − x̄) / Σ (x_j − x̄)²`.
pub fn slope_weights(slope_window: usize) -> Vec<f64> {
    let n = slope_window + 1;
    let mean = (n as f64 + 1.0) / 2.0;
    let ss: f64 = (1..=n).map(|i| (i as f64 - mean).powi(2)).sum();
    (1..=n).map(|i| (i as f64 - mean) / ss).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub value: f64,
    /// Some `log R` in the slope window hit the saturation cap.
    pub saturated: bool,
}

/// Slope of the last `S + 1` scan values; 0 until that many exist.
pub fn algorithm_score(
    log_r_history: &[f64],
    slope_window: usize,
    saturation_log_cap: f64,
    scale: ScoreScale,
) -> Score {
    let n = slope_window + 1;
    if log_r_history.len() < n {
        return Score {
            value: 0.0,
            saturated: false,
        };
    }
    let recent = &log_r_history[log_r_history.len() - n..];
    let mut saturated = false;
    let value = slope_weights(slope_window)
        .iter()
        .zip(recent)
        .map(|(w, &lr)| {
            let r = match scale {
                ScoreScale::Linear => {
                    if lr > saturation_log_cap {
                        saturated = true;
                    }
                    lr.min(saturation_log_cap).exp()
                }
                ScoreScale::Log => lr,
            };
            w * r
        })
        .sum();
    Score { value, saturated }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub day: u32,
    pub log_r: f64,
    /// Earliest start day attaining `log_r`.
    pub t_star: u32,
    pub score: f64,
    pub saturated: bool,
    /// (start, bank member) pairs that needed remediation on this day.
    pub remediated: usize,
    /// Candidate starts `W_t` as an inclusive range; `None` on the first day.
    pub window: Option<(u32, u32)>,
    /// `log S_{t_o,t}` for each scanned start, ascending by start day.
    pub per_start: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorState {
    /// Last processed day, 0 before the first step.
    pub t: u32,
    pub t_star: u32,
    /// Day index of the oldest retained observation.
    first_retained: u32,
    counts: VecDeque<u64>,
    lambdas: VecDeque<f64>,
    pub log_r_history: Vec<f64>,
    pub score_history: Vec<f64>,
}

impl Default for DetectorState {
    fn default() -> Self {
        Self {
            t: 0,
            t_star: 1,
            first_retained: 1,
            counts: VecDeque::new(),
            lambdas: VecDeque::new(),
            log_r_history: Vec::new(),
            score_history: Vec::new(),
        }
    }
}

impl DetectorState {
    pub fn retained_days(&self) -> usize {
        self.counts.len()
    }
}

/// Streaming scan detector for one count stream.
#[derive(Debug, Clone)]
pub struct Detector {
    config: DetectorConfig,
    bank: ProfileBank,
    baseline: Option<BaselineModel>,
    state: DetectorState,
    scratch_counts: Vec<u64>,
    scratch_lambdas: Vec<f64>,
}

impl Detector {
    /// Detector whose baseline means are supplied with each observation.
    pub fn new(config: DetectorConfig, bank: ProfileBank) -> Result<Self> {
        config.validate()?;
        if bank.is_empty() {
            return Err(Error::EmptyBank { attempted: 0 });
        }
        Ok(Self {
            config,
            bank,
            baseline: None,
            state: DetectorState::default(),
            scratch_counts: Vec::new(),
            scratch_lambdas: Vec::new(),
        })
    }

    pub fn with_baseline(config: DetectorConfig, bank: ProfileBank, baseline: BaselineModel) -> Result<Self> {
        let mut d = Self::new(config, bank)?;
        d.baseline = Some(baseline);
        Ok(d)
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn state(&self) -> &DetectorState {
        &self.state
    }

    /// Processes day `day.t` using the detector's baseline model.
    pub fn step(&mut self, count: u64, day: &CalendarDay) -> Result<ScanResult> {
        let Some(model) = &self.baseline else {
            return Err(Error::InvalidConfig("detector has no baseline model".into()));
        };
        self.check_order(day.t)?;
        let lambda = model.lambda(day)?;
        self.step_with_lambda(day.t, count, lambda)
    }

    fn check_order(&self, t: u32) -> Result<()> {
        let expected = self.state.t + 1;
        if t != expected {
            return Err(Error::OutOfOrderDay { expected, got: t });
        }
        Ok(())
    }

    /// Processes day `t` with an explicit baseline mean.
    pub fn step_with_lambda(&mut self, t: u32, count: u64, lambda: f64) -> Result<ScanResult> {
        self.check_order(t)?;
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::NonpositiveLambda(lambda));
        }
        let state = &mut self.state;
        state.t = t;
        state.counts.push_back(count);
        state.lambdas.push_back(lambda);

        let (log_r, t_star, window, per_start, remediated) = if t == 1 {
            // No candidate start precedes the first day; R_1 = 1.
            (0.0, state.t_star, None, Vec::new(), 0)
        } else {
            let floor = i64::from(t) - i64::from(self.config.min_window);
            let mut lo = floor.min(i64::from(state.t_star));
            if let Some(max) = self.config.max_lookback {
                lo = lo.max(i64::from(t) - i64::from(max));
            }
            let lo = lo.max(1) as u32;
            let hi = t - 1;

            // Everything before `lo` can never be scanned again: later windows
            // start no earlier than min(t*, t + 1 − min_window) ≥ lo, and the
            // lookback limit only moves forward.
            while state.first_retained < lo {
                state.counts.pop_front();
                state.lambdas.pop_front();
                state.first_retained += 1;
            }
            self.scratch_counts.clear();
            self.scratch_counts.extend(state.counts.iter());
            self.scratch_lambdas.clear();
            self.scratch_lambdas.extend(state.lambdas.iter());

            let mut scratch = MlrScratch::default();
            let mut per_start = Vec::with_capacity((hi - lo + 1) as usize);
            let mut best = (f64::NEG_INFINITY, lo);
            let mut remediated = 0;
            for start in lo..=hi {
                let offset = (start - state.first_retained) as usize;
                let eval = scratch.eval(
                    &self.scratch_counts[offset..],
                    &self.scratch_lambdas[offset..],
                    &self.bank,
                    self.config.remediation,
                    self.config.gamma,
                );
                remediated += eval.remediated;
                if eval.log_s > best.0 {
                    best = (eval.log_s, start);
                }
                per_start.push((start, eval.log_s));
            }
            (best.0, best.1, Some((lo, hi)), per_start, remediated)
        };

        state.t_star = t_star;
        state.log_r_history.push(log_r);
        let score = algorithm_score(
            &state.log_r_history,
            self.config.slope_window,
            self.config.saturation_log_cap,
            self.config.score_scale,
        );
        state.score_history.push(score.value);
        Ok(ScanResult {
            day: t,
            log_r,
            t_star,
            score: score.value,
            saturated: score.saturated,
            remediated,
            window,
            per_start,
        })
    }
}

/// Runs a fresh detector over a whole stream of counts and baseline means.
pub fn scan_stream(
    config: &DetectorConfig,
    bank: &ProfileBank,
    counts: &[u64],
    lambdas: &[f64],
) -> Result<Vec<ScanResult>> {
    if counts.len() != lambdas.len() {
        return Err(Error::RangeMismatch(format!(
            "{} counts but {} baseline values",
            counts.len(),
            lambdas.len()
        )));
    }
    let mut det = Detector::new(config.clone(), bank.clone())?;
    counts
        .iter()
        .zip(lambdas)
        .enumerate()
        .map(|(i, (&o, &l))| det.step_with_lambda(i as u32 + 1, o, l))
        .collect()
}
