// SPDX-License-Identifier: Apache-2.0

//! Synthetic daily counts `o_t ~ Poisson(λ_t + Σ δ_t)` with labeled outbreaks.
//!
//! Streams are a pure function of the configuration: the generator is
//! ChaCha8 seeded from the 64-bit seed, and Poisson variates come from
//! [`poisson_sample`], whose algorithm is fixed here rather than delegated
//! to a library that may change between releases.

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::baseline::{predict_lambda, BaselineModel, DesignSpec};
use crate::calendar::CountSeries;
use crate::error::{Error, Result};
use crate::profiles::{OutbreakSignature, ProfileShape};

/// Fraction of an outbreak's peak excess that bounds its effective duration.
pub const EFFECTIVE_FRACTION: f64 = 0.05;
/// Days of context added on each side of an extracted signature.
pub const SIGNATURE_MARGIN: u32 = 2;
const MAX_OUTBREAK_DAYS: u32 = 2000;
const INVERSION_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectedOutbreak {
    /// Start day `t_o` (1-based).
    pub start: u32,
    pub shape: ProfileShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub beta_true: Vec<f64>,
    pub spec: DesignSpec,
    pub start_date: NaiveDate,
    pub horizon_days: u32,
    #[serde(default)]
    pub outbreaks: Vec<InjectedOutbreak>,
    pub seed: u64,
}

impl SimConfig {
    pub fn baseline(&self) -> Result<BaselineModel> {
        BaselineModel::from_coefficients(self.spec.clone(), self.beta_true.clone())
    }

    pub fn validate(&self) -> Result<()> {
        self.baseline()?;
        if self.horizon_days == 0 {
            return Err(Error::InvalidConfig("horizon_days must be positive".into()));
        }
        for o in &self.outbreaks {
            o.shape.validate()?;
            if o.start == 0 {
                return Err(Error::InvalidConfig("outbreak start days are 1-based".into()));
            }
        }
        Ok(())
    }
}

/// Ground truth for one injected outbreak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutbreakTruth {
    pub start: u32,
    pub peak_day: u32,
    pub peak_excess: f64,
    /// First and last day whose excess exceeds 5% of the peak.
    pub effective_first: u32,
    pub effective_last: u32,
    /// The effective window runs past the simulated horizon.
    pub truncated: bool,
}

impl OutbreakTruth {
    pub fn for_shape(start: u32, shape: &ProfileShape, horizon: u32) -> Self {
        let excess: Vec<f64> = (1..=MAX_OUTBREAK_DAYS).map(|u| shape.excess_at(f64::from(u))).collect();
        let (peak_idx, peak) = excess
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        let cut = EFFECTIVE_FRACTION * peak;
        let first = excess.iter().position(|&v| v > cut).unwrap_or(peak_idx);
        let last = excess.iter().rposition(|&v| v > cut).unwrap_or(peak_idx);
        let day = |idx: usize| start + idx as u32;
        let effective_last = day(last);
        Self {
            start,
            peak_day: day(peak_idx),
            peak_excess: peak,
            effective_first: day(first).min(horizon),
            effective_last: effective_last.min(horizon),
            truncated: effective_last > horizon,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub series: CountSeries,
    /// True baseline means.
    pub lambda: Vec<f64>,
    /// Total outbreak excess per day.
    pub delta: Vec<f64>,
    pub outbreaks: Vec<OutbreakTruth>,
}

impl LabeledSeries {
    pub fn horizon(&self) -> u32 {
        self.series.len() as u32
    }
}

/// Labels without the random draw: baseline means, summed excess and the
/// outbreak table.
pub fn truth_labels(config: &SimConfig) -> Result<(Vec<f64>, Vec<f64>, Vec<OutbreakTruth>)> {
    config.validate()?;
    let model = config.baseline()?;
    let skeleton = CountSeries::new(config.start_date, vec![0; config.horizon_days as usize]);
    let lambda = predict_lambda(&model, &config.spec.days_for(&skeleton))?;
    let mut delta = vec![0.0; lambda.len()];
    for o in &config.outbreaks {
        for (i, d) in delta.iter_mut().enumerate() {
            *d += o.shape.delta(i as i64 + 1, i64::from(o.start));
        }
    }
    let outbreaks = config
        .outbreaks
        .iter()
        .map(|o| OutbreakTruth::for_shape(o.start, &o.shape, config.horizon_days))
        .collect();
    Ok((lambda, delta, outbreaks))
}

pub fn simulate(config: &SimConfig) -> Result<LabeledSeries> {
    let (lambda, delta, outbreaks) = truth_labels(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let counts = lambda
        .iter()
        .zip(&delta)
        .map(|(l, d)| poisson_sample(l + d, &mut rng))
        .collect();
    Ok(LabeledSeries {
        series: CountSeries::new(config.start_date, counts),
        lambda,
        delta,
        outbreaks,
    })
}

/// Draws a Poisson variate.
///
/// Means below 30 use sequential inversion of the CDF from a single uniform.
/// Larger means use Hörmann's transformed rejection with squeeze (PTRS),
/// which consumes two uniforms per trial.
pub fn poisson_sample<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    if mean < INVERSION_LIMIT {
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut p = (-mean).exp();
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
            // Guard against rounding leaving the CDF just short of u.
            if p < f64::MIN_POSITIVE && k as f64 > mean {
                break;
            }
        }
        return k;
    }

    let smu = mean.sqrt();
    let b = 0.931 + 2.53 * smu;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    let log_mean = mean.ln();
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mean + k * log_mean - ln_gamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedSignature {
    pub signature: OutbreakSignature,
    /// The window was cut short by the start or end of the series.
    pub truncated: bool,
}

/// Counts and true baseline over outbreak `index`'s effective window plus a
/// two-day margin.
pub fn extract_signature(labeled: &LabeledSeries, index: usize) -> Result<ExtractedSignature> {
    extract_signature_with_baseline(labeled, index, &labeled.lambda)
}

/// As [`extract_signature`], with baseline means from another source such
/// as a fitted model.
pub fn extract_signature_with_baseline(
    labeled: &LabeledSeries,
    index: usize,
    lambdas: &[f64],
) -> Result<ExtractedSignature> {
    let truth = labeled.outbreaks.get(index).ok_or(Error::IndexOutOfRange {
        index,
        len: labeled.outbreaks.len(),
    })?;
    if lambdas.len() != labeled.series.len() {
        return Err(Error::RangeMismatch(format!(
            "{} baseline values for a {}-day series",
            lambdas.len(),
            labeled.series.len()
        )));
    }
    signature_window(&labeled.series.counts, lambdas, truth)
}

/// Cuts the signature window for `truth` out of full-series arrays.
pub fn signature_window(counts: &[u64], lambdas: &[f64], truth: &OutbreakTruth) -> Result<ExtractedSignature> {
    let horizon = counts.len() as u32;
    if truth.start > horizon {
        return Err(Error::RangeMismatch(format!(
            "outbreak starting on day {} lies beyond the {horizon}-day series",
            truth.start
        )));
    }
    let wanted_first = i64::from(truth.effective_first) - i64::from(SIGNATURE_MARGIN);
    let wanted_last = i64::from(truth.effective_last) + i64::from(SIGNATURE_MARGIN);
    let first = wanted_first.max(1) as u32;
    let last = (wanted_last.min(i64::from(horizon))) as u32;
    let range = (first - 1) as usize..last as usize;
    let signature = OutbreakSignature::new(
        counts[range.clone()].to_vec(),
        lambdas[range].to_vec(),
        i64::from(first),
        i64::from(truth.start),
    )?;
    Ok(ExtractedSignature {
        signature,
        truncated: truth.truncated || wanted_first < 1 || wanted_last > i64::from(horizon),
    })
}

/// Outbreaks with each parameter of `central` scaled by an independent
/// uniform factor in `[1 − jitter, 1 + jitter]`, started every `spacing`
/// days after `lead_in` with a random offset of up to a quarter spacing.
pub fn jittered_outbreaks(
    central: &ProfileShape,
    count: usize,
    jitter: f64,
    lead_in: u32,
    spacing: u32,
    seed: u64,
) -> Result<Vec<InjectedOutbreak>> {
    central.validate()?;
    if !(0.0..1.0).contains(&jitter) {
        return Err(Error::InvalidConfig(format!("jitter must be in [0, 1), got {jitter}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = central.theta();
    let form = match central {
        ProfileShape::BimodalGaussian { form, .. } => *form,
        _ => Default::default(),
    };
    (0..count)
        .map(|i| {
            let params: Vec<f64> = theta
                .iter()
                .map(|v| v * (1.0 + jitter * (2.0 * rng.random::<f64>() - 1.0)))
                .collect();
            let offset = rng.random_range(0..=spacing / 4);
            let shape = ProfileShape::from_theta(central.family(), form, &params)?;
            Ok(InjectedOutbreak {
                start: lead_in + i as u32 * spacing + offset,
                shape,
            })
        })
        .collect()
}

/// Horizon that fits `count` outbreaks laid out by [`jittered_outbreaks`].
pub fn scenario_horizon(count: usize, lead_in: u32, spacing: u32) -> u32 {
    lead_in + count as u32 * spacing + spacing / 4
}
