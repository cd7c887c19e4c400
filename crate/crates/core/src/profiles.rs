// SPDX-License-Identifier: Apache-2.0

//! Parametric outbreak profiles `δ_t(t_o, θ)` and their maximum-likelihood
//! fit from labeled outbreak windows.
//!
//! With `u = t − t_o + 1` (so the first outbreak day has `u = 1`):
//!
//! ```text
//! log-normal kernel   c · exp(−(ln u − μ)² / σ)
//! Gaussian kernel     c · exp(−(u − μ)² / σ)
//! bimodal Gaussian    c · [exp(−(u − μ₁)² / σ) + exp(−(u − μ₂)² / σ)]
//! ```
//!
//! The bimodal family can also be evaluated as the single exponential
//! `c · exp(−[(u − μ₁)² + (u − μ₂)²] / σ)` via [`BimodalForm::SingleExponent`].
//! Days before the start have no excess.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{nelder_mead, SimplexOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileFamily {
    #[serde(rename = "lognormal")]
    LogNormalKernel,
    #[serde(rename = "gaussian")]
    GaussianKernel,
    #[serde(rename = "bimodal")]
    BimodalGaussian,
}

impl ProfileFamily {
    pub fn parameter_count(self) -> usize {
        match self {
            ProfileFamily::BimodalGaussian => 4,
            _ => 3,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ProfileFamily::LogNormalKernel => "lognormal",
            ProfileFamily::GaussianKernel => "gaussian",
            ProfileFamily::BimodalGaussian => "bimodal",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "lognormal" => Ok(ProfileFamily::LogNormalKernel),
            "gaussian" => Ok(ProfileFamily::GaussianKernel),
            "bimodal" => Ok(ProfileFamily::BimodalGaussian),
            other => Err(Error::Parse(format!("unknown profile family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BimodalForm {
    /// Sum of two Gaussian bumps sharing `c` and `σ`.
    #[default]
    TwoComponent,
    /// One exponential of the summed squared deviations (unimodal, peak at
    /// the midpoint of `μ₁` and `μ₂`).
    SingleExponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProfileShape {
    LogNormalKernel {
        c: f64,
        mu: f64,
        sigma: f64,
    },
    GaussianKernel {
        c: f64,
        mu: f64,
        sigma: f64,
    },
    BimodalGaussian {
        c: f64,
        mu1: f64,
        mu2: f64,
        sigma: f64,
        form: BimodalForm,
    },
}

impl ProfileShape {
    pub fn lognormal(c: f64, mu: f64, sigma: f64) -> Self {
        ProfileShape::LogNormalKernel { c, mu, sigma }
    }

    pub fn gaussian(c: f64, mu: f64, sigma: f64) -> Self {
        ProfileShape::GaussianKernel { c, mu, sigma }
    }

    /// Two-component bimodal shape; the centers are stored in ascending order.
    pub fn bimodal(c: f64, mu1: f64, mu2: f64, sigma: f64) -> Self {
        Self::bimodal_with(c, mu1, mu2, sigma, BimodalForm::TwoComponent)
    }

    pub fn bimodal_with(c: f64, mu1: f64, mu2: f64, sigma: f64, form: BimodalForm) -> Self {
        ProfileShape::BimodalGaussian {
            c,
            mu1: mu1.min(mu2),
            mu2: mu1.max(mu2),
            sigma,
            form,
        }
    }

    pub fn family(&self) -> ProfileFamily {
        match self {
            ProfileShape::LogNormalKernel { .. } => ProfileFamily::LogNormalKernel,
            ProfileShape::GaussianKernel { .. } => ProfileFamily::GaussianKernel,
            ProfileShape::BimodalGaussian { .. } => ProfileFamily::BimodalGaussian,
        }
    }

    pub fn severity(&self) -> f64 {
        match *self {
            ProfileShape::LogNormalKernel { c, .. }
            | ProfileShape::GaussianKernel { c, .. }
            | ProfileShape::BimodalGaussian { c, .. } => c,
        }
    }

    /// `θ` as a flat vector: `(c, μ, σ)` or `(c, μ₁, μ₂, σ)`.
    pub fn theta(&self) -> Vec<f64> {
        match *self {
            ProfileShape::LogNormalKernel { c, mu, sigma }
            | ProfileShape::GaussianKernel { c, mu, sigma } => vec![c, mu, sigma],
            ProfileShape::BimodalGaussian {
                c, mu1, mu2, sigma, ..
            } => vec![c, mu1, mu2, sigma],
        }
    }

    pub fn from_theta(family: ProfileFamily, form: BimodalForm, theta: &[f64]) -> Result<Self> {
        if theta.len() != family.parameter_count() {
            return Err(Error::InvalidConfig(format!(
                "{} profile takes {} parameters, got {}",
                family.tag(),
                family.parameter_count(),
                theta.len()
            )));
        }
        let shape = match family {
            ProfileFamily::LogNormalKernel => Self::lognormal(theta[0], theta[1], theta[2]),
            ProfileFamily::GaussianKernel => Self::gaussian(theta[0], theta[1], theta[2]),
            ProfileFamily::BimodalGaussian => {
                Self::bimodal_with(theta[0], theta[1], theta[2], theta[3], form)
            }
        };
        shape.validate()?;
        Ok(shape)
    }

    pub fn validate(&self) -> Result<()> {
        let theta = self.theta();
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite profile parameters {theta:?}")));
        }
        let c = theta[0];
        let sigma = theta[theta.len() - 1];
        if c <= 0.0 || sigma <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "profile needs c > 0 and sigma > 0, got c={c}, sigma={sigma}"
            )));
        }
        if let ProfileShape::BimodalGaussian { mu1, mu2, .. } = *self {
            if mu1 > mu2 {
                return Err(Error::InvalidConfig("bimodal centers must be ordered".into()));
            }
        }
        Ok(())
    }

    /// Excess mean on outbreak day `u` (1 on the start day).
    pub fn excess_at(&self, u: f64) -> f64 {
        match *self {
            ProfileShape::LogNormalKernel { c, mu, sigma } => {
                let d = u.ln() - mu;
                c * (-d * d / sigma).exp()
            }
            ProfileShape::GaussianKernel { c, mu, sigma } => {
                let d = u - mu;
                c * (-d * d / sigma).exp()
            }
            ProfileShape::BimodalGaussian {
                c,
                mu1,
                mu2,
                sigma,
                form,
            } => {
                let (d1, d2) = (u - mu1, u - mu2);
                match form {
                    BimodalForm::TwoComponent => {
                        c * ((-d1 * d1 / sigma).exp() + (-d2 * d2 / sigma).exp())
                    }
                    BimodalForm::SingleExponent => c * (-(d1 * d1 + d2 * d2) / sigma).exp(),
                }
            }
        }
    }

    /// `δ_t(t_o, θ)`; zero before the outbreak start.
    pub fn delta(&self, t: i64, start: i64) -> f64 {
        if t < start {
            0.0
        } else {
            self.excess_at((t - start + 1) as f64)
        }
    }
}

/// Observed counts and baseline means over a labeled outbreak window.
#[derive(Debug, Clone, PartialEq)]
pub struct OutbreakSignature {
    pub counts: Vec<u64>,
    pub baseline: Vec<f64>,
    /// Day index of `counts[0]`.
    pub first_day: i64,
    /// Outbreak start day `t_o`.
    pub start: i64,
}

impl OutbreakSignature {
    pub fn new(counts: Vec<u64>, baseline: Vec<f64>, first_day: i64, start: i64) -> Result<Self> {
        let sig = Self {
            counts,
            baseline,
            first_day,
            start,
        };
        sig.validate()?;
        Ok(sig)
    }

    pub fn validate(&self) -> Result<()> {
        if self.counts.len() != self.baseline.len() {
            return Err(Error::RangeMismatch(format!(
                "signature has {} counts but {} baseline values",
                self.counts.len(),
                self.baseline.len()
            )));
        }
        if let Some(bad) = self.baseline.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::NonpositiveLambda(*bad));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn days(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.counts.len() as i64).map(move |i| self.first_day + i)
    }

    /// Counts minus baseline.
    pub fn excess(&self) -> Vec<f64> {
        self.counts
            .iter()
            .zip(&self.baseline)
            .map(|(&o, l)| o as f64 - l)
            .collect()
    }

    /// `Σ_s [o_s ln(λ_s + δ_s) − (λ_s + δ_s)]`, omitting the `ln o_s!` constant.
    pub fn log_likelihood(&self, shape: &ProfileShape) -> f64 {
        self.days()
            .zip(self.counts.iter().zip(&self.baseline))
            .map(|(t, (&o, &l))| {
                let mean = l + shape.delta(t, self.start);
                let o = o as f64;
                if o > 0.0 {
                    o * mean.ln() - mean
                } else {
                    -mean
                }
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub bimodal_form: BimodalForm,
    /// Relative simplex diameter at which a start is considered converged.
    pub x_tolerance: f64,
    pub max_evaluations_per_start: usize,
    /// Fits whose severity lands below this are reported as failed.
    pub min_severity: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            bimodal_form: BimodalForm::TwoComponent,
            x_tolerance: 1e-6,
            max_evaluations_per_start: 2000,
            min_severity: 1e-3,
        }
    }
}

// Box constraints on the internal (log c, μ…, log σ) coordinates.
const LOG_C_RANGE: (f64, f64) = (-25.0, 25.0);
const LOG_SIGMA_RANGE: (f64, f64) = (-20.0, 20.0);
const MU_LIMIT: f64 = 1e4;

/// Maximum-likelihood `θ̂` for one signature: multi-start simplex search in
/// `(ln c, μ…, ln σ)` coordinates from a grid spanning severity, location
/// and width, followed by a restart from the best point.
pub fn fit_theta(
    sig: &OutbreakSignature,
    family: ProfileFamily,
    options: &FitOptions,
) -> Result<ProfileShape> {
    sig.validate()?;
    let k = family.parameter_count();
    if sig.len() < k + 1 {
        return Err(Error::InsufficientData(format!(
            "signature of {} days cannot identify {k} parameters",
            sig.len()
        )));
    }

    let objective = |z: &[f64]| -> f64 {
        match shape_from_internal(family, options.bimodal_form, z) {
            Some(shape) => -sig.log_likelihood(&shape),
            None => f64::INFINITY,
        }
    };

    let starts = start_grid(sig, family);
    let simplex = SimplexOptions {
        x_tolerance: options.x_tolerance,
        max_evaluations: options.max_evaluations_per_start,
        initial_step: initial_steps(sig, family),
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in &starts {
        let r = nelder_mead(objective, start, &simplex);
        if r.value.is_finite() && best.as_ref().is_none_or(|(_, v)| r.value < *v) {
            best = Some((r.x, r.value));
        }
    }
    let Some((mut z, mut value)) = best else {
        return Err(Error::FitFailed("every start diverged".into()));
    };
    let polish = nelder_mead(objective, &z, &simplex);
    if polish.value < value {
        z = polish.x;
        value = polish.value;
    }
    debug_assert!(value.is_finite());

    let shape = shape_from_internal(family, options.bimodal_form, &z)
        .ok_or_else(|| Error::FitFailed("optimum left the feasible region".into()))?;
    if shape.severity() < options.min_severity {
        return Err(Error::FitFailed(format!(
            "no excess signal (severity {:.3e} at its lower bound)",
            shape.severity()
        )));
    }
    Ok(shape)
}

fn shape_from_internal(family: ProfileFamily, form: BimodalForm, z: &[f64]) -> Option<ProfileShape> {
    let log_c = z[0];
    let log_sigma = z[z.len() - 1];
    let mus = &z[1..z.len() - 1];
    let in_range = |v: f64, (lo, hi): (f64, f64)| v.is_finite() && v >= lo && v <= hi;
    if !in_range(log_c, LOG_C_RANGE)
        || !in_range(log_sigma, LOG_SIGMA_RANGE)
        || mus.iter().any(|m| !m.is_finite() || m.abs() > MU_LIMIT)
    {
        return None;
    }
    let (c, sigma) = (log_c.exp(), log_sigma.exp());
    Some(match family {
        ProfileFamily::LogNormalKernel => ProfileShape::lognormal(c, mus[0], sigma),
        ProfileFamily::GaussianKernel => ProfileShape::gaussian(c, mus[0], sigma),
        ProfileFamily::BimodalGaussian => ProfileShape::bimodal_with(c, mus[0], mus[1], sigma, form),
    })
}

/// Outbreak-day range `[u_lo, u_hi]` covered by the signature (u ≥ 1).
fn outbreak_day_span(sig: &OutbreakSignature) -> (f64, f64) {
    let lo = (sig.first_day - sig.start + 1).max(1) as f64;
    let hi = ((sig.first_day + sig.len() as i64 - 1) - sig.start + 1).max(1) as f64;
    (lo, hi.max(lo + 1.0))
}

fn start_grid(sig: &OutbreakSignature, family: ProfileFamily) -> Vec<Vec<f64>> {
    let peak = sig.excess().into_iter().fold(1.0_f64, f64::max);
    let (u_lo, u_hi) = outbreak_day_span(sig);
    let w = sig.len() as f64;
    let fractions = [0.25, 0.5, 0.75];
    let log_cs: Vec<f64> = [0.25, 1.0, 4.0].iter().map(|m| (m * peak).ln()).collect();

    let (mus, log_sigmas): (Vec<f64>, Vec<f64>) = match family {
        ProfileFamily::LogNormalKernel => {
            // Location and width live on the log-day scale.
            let (a, b) = (u_lo.ln(), u_hi.ln());
            let span = b - a;
            (
                fractions.iter().map(|f| a + f * span).collect(),
                [span * span / 64.0, span * span / 16.0, span * span / 4.0]
                    .iter()
                    .map(|s| s.max(1e-3).ln())
                    .collect(),
            )
        }
        _ => (
            fractions.iter().map(|f| u_lo + f * (u_hi - u_lo)).collect(),
            [1.0, w / 4.0, w * w / 4.0]
                .iter()
                .map(|s: &f64| s.max(1e-3).ln())
                .collect(),
        ),
    };

    let mut grid = Vec::new();
    for &lc in &log_cs {
        for &ls in &log_sigmas {
            match family {
                ProfileFamily::BimodalGaussian => {
                    for &m1 in &mus {
                        for &m2 in &mus {
                            grid.push(vec![lc, m1, m2, ls]);
                        }
                    }
                }
                _ => {
                    for &m in &mus {
                        grid.push(vec![lc, m, ls]);
                    }
                }
            }
        }
    }
    grid
}

fn initial_steps(sig: &OutbreakSignature, family: ProfileFamily) -> Vec<f64> {
    let (u_lo, u_hi) = outbreak_day_span(sig);
    let mu_step = match family {
        ProfileFamily::LogNormalKernel => 0.25 * (u_hi.ln() - u_lo.ln()).max(0.1),
        _ => 0.25 * (u_hi - u_lo).max(1.0),
    };
    let mut steps = vec![0.5];
    steps.extend(std::iter::repeat_n(mu_step, family.parameter_count() - 2));
    steps.push(0.5);
    steps
}

/// Discrete-uniform mixing set `{θ̂_1, …, θ̂_n}` of a single family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileBank {
    shapes: Vec<ProfileShape>,
}

impl ProfileBank {
    pub fn new(shapes: Vec<ProfileShape>) -> Result<Self> {
        let Some(first) = shapes.first() else {
            return Err(Error::EmptyBank { attempted: 0 });
        };
        let family = first.family();
        for shape in &shapes {
            shape.validate()?;
            if shape.family() != family {
                return Err(Error::InvalidConfig(format!(
                    "bank mixes {} and {} profiles",
                    family.tag(),
                    shape.family().tag()
                )));
            }
        }
        Ok(Self { shapes })
    }

    pub fn shapes(&self) -> &[ProfileShape] {
        &self.shapes
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn family(&self) -> ProfileFamily {
        self.shapes[0].family()
    }
}

#[derive(Debug, Clone)]
pub struct BankBuild {
    pub bank: ProfileBank,
    /// Signatures whose fit failed, with the reason; excluded from the bank.
    pub failures: Vec<(usize, String)>,
}

/// Fits every signature independently and keeps the successful fits in input
/// order.
pub fn build_bank(
    signatures: &[OutbreakSignature],
    family: ProfileFamily,
    options: &FitOptions,
) -> Result<BankBuild> {
    if signatures.is_empty() {
        return Err(Error::EmptyBank { attempted: 0 });
    }
    let fits: Vec<Result<ProfileShape>> = signatures
        .par_iter()
        .map(|sig| fit_theta(sig, family, options))
        .collect();
    let mut shapes = Vec::with_capacity(fits.len());
    let mut failures = Vec::new();
    for (i, fit) in fits.into_iter().enumerate() {
        match fit {
            Ok(shape) => shapes.push(shape),
            Err(err) => failures.push((i, err.to_string())),
        }
    }
    if shapes.is_empty() {
        return Err(Error::EmptyBank {
            attempted: signatures.len(),
        });
    }
    Ok(BankBuild {
        bank: ProfileBank::new(shapes)?,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kernel_peaks() {
        assert_eq!(ProfileShape::lognormal(5.0, 0.0, 1.0).excess_at(1.0), 5.0);
        assert_eq!(ProfileShape::gaussian(8.0, 4.0, 2.0).excess_at(4.0), 8.0);
    }

    #[test]
    fn bimodal_sum_at_first_center() {
        let v = ProfileShape::bimodal(3.0, 2.0, 6.0, 2.0).excess_at(2.0);
        let expected = 3.0 * (1.0 + (-8.0f64).exp());
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 3.001).abs() < 1e-3);
    }

    #[test]
    fn bimodal_single_exponent_is_unimodal_at_midpoint() {
        let s = ProfileShape::bimodal_with(3.0, 2.0, 6.0, 2.0, BimodalForm::SingleExponent);
        // (u-2)^2 + (u-6)^2 is minimized at u = 4 with value 8.
        assert!((s.excess_at(4.0) - 3.0 * (-4.0f64).exp()).abs() < 1e-15);
        assert!(s.excess_at(4.0) > s.excess_at(2.0));
    }

    #[test]
    fn no_excess_before_start() {
        let s = ProfileShape::gaussian(8.0, 1.0, 2.0);
        assert_eq!(s.delta(9, 10), 0.0);
        assert_eq!(s.delta(10, 10), 8.0);
    }

    #[test]
    fn bimodal_centers_are_canonical() {
        let s = ProfileShape::bimodal(1.0, 9.0, 3.0, 1.0);
        assert_eq!(s.theta(), vec![1.0, 3.0, 9.0, 1.0]);
    }

    #[test]
    fn invalid_shapes_rejected() {
        let bad = ProfileShape::from_theta(ProfileFamily::GaussianKernel, BimodalForm::default(), &[0.0, 1.0, 1.0]);
        assert!(bad.is_err());
        let bad = ProfileShape::from_theta(ProfileFamily::GaussianKernel, BimodalForm::default(), &[1.0, 1.0, -1.0]);
        assert!(bad.is_err());
        let bad = ProfileShape::from_theta(ProfileFamily::BimodalGaussian, BimodalForm::default(), &[1.0, 1.0]);
        assert!(bad.is_err());
    }

    fn noiseless(shape: &ProfileShape, lambda: f64, start: i64, len: usize) -> OutbreakSignature {
        let first_day = start - 2;
        let baseline = vec![lambda; len];
        let counts = (0..len as i64)
            .map(|i| (lambda + shape.delta(first_day + i, start)).round() as u64)
            .collect();
        OutbreakSignature::new(counts, baseline, first_day, start).unwrap()
    }

    fn curve_rmse(a: &ProfileShape, b: &ProfileShape, sig: &OutbreakSignature) -> f64 {
        let sq: f64 = sig
            .days()
            .map(|t| (a.delta(t, sig.start) - b.delta(t, sig.start)).powi(2))
            .sum();
        (sq / sig.len() as f64).sqrt()
    }

    #[test]
    fn recovers_noiseless_gaussian() {
        let truth = ProfileShape::gaussian(40.0, 7.0, 8.0);
        let sig = noiseless(&truth, 20.0, 50, 18);
        let fit = fit_theta(&sig, ProfileFamily::GaussianKernel, &FitOptions::default()).unwrap();
        assert!(curve_rmse(&fit, &truth, &sig) <= 0.05 * 40.0, "{fit:?}");
        assert!(sig.log_likelihood(&fit) >= sig.log_likelihood(&truth) - 1e-6);
    }

    #[test]
    fn shift_invariance_of_fit() {
        let truth = ProfileShape::gaussian(30.0, 5.0, 6.0);
        let a = noiseless(&truth, 15.0, 20, 14);
        let mut b = a.clone();
        b.first_day += 137;
        b.start += 137;
        let fa = fit_theta(&a, ProfileFamily::GaussianKernel, &FitOptions::default()).unwrap();
        let fb = fit_theta(&b, ProfileFamily::GaussianKernel, &FitOptions::default()).unwrap();
        for (x, y) in fa.theta().iter().zip(fb.theta()) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn flat_signature_fails_with_no_signal() {
        let sig = OutbreakSignature::new(vec![20; 12], vec![20.0; 12], 1, 3).unwrap();
        let err = fit_theta(&sig, ProfileFamily::GaussianKernel, &FitOptions::default()).unwrap_err();
        assert!(matches!(err, Error::FitFailed(_)), "{err}");
    }

    #[test]
    fn short_signature_rejected() {
        let sig = OutbreakSignature::new(vec![20; 3], vec![20.0; 3], 1, 1).unwrap();
        assert!(fit_theta(&sig, ProfileFamily::GaussianKernel, &FitOptions::default()).is_err());
    }

    #[test]
    fn bank_sizes() {
        let truth = ProfileShape::gaussian(40.0, 6.0, 8.0);
        let sig = noiseless(&truth, 20.0, 10, 16);
        let one = build_bank(std::slice::from_ref(&sig), ProfileFamily::GaussianKernel, &FitOptions::default()).unwrap();
        assert_eq!(one.bank.len(), 1);
        let dup = build_bank(&[sig.clone(), sig.clone(), sig], ProfileFamily::GaussianKernel, &FitOptions::default()).unwrap();
        assert_eq!(dup.bank.len(), 3);
        assert_eq!(dup.bank.shapes()[0], dup.bank.shapes()[2]);
    }

    #[test]
    fn failed_fits_are_excluded_and_counted() {
        let good = noiseless(&ProfileShape::gaussian(40.0, 6.0, 8.0), 20.0, 10, 16);
        let flat = OutbreakSignature::new(vec![20; 12], vec![20.0; 12], 1, 3).unwrap();
        let built = build_bank(&[flat.clone(), good], ProfileFamily::GaussianKernel, &FitOptions::default()).unwrap();
        assert_eq!(built.bank.len(), 1);
        assert_eq!(built.failures.len(), 1);
        assert_eq!(built.failures[0].0, 0);
        let err = build_bank(&[flat], ProfileFamily::GaussianKernel, &FitOptions::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyBank { attempted: 1 }));
    }

    #[test]
    fn mixed_bank_rejected() {
        let r = ProfileBank::new(vec![ProfileShape::gaussian(1.0, 1.0, 1.0), ProfileShape::lognormal(1.0, 1.0, 1.0)]);
        assert!(r.is_err());
    }

    proptest! {
        #[test]
        fn delta_is_shift_equivariant(c in 0.1f64..100.0, mu in -5.0f64..20.0, sigma in 0.1f64..50.0,
                                      t in 0i64..60, t0 in 0i64..60, k in -1000i64..1000) {
            for shape in [ProfileShape::gaussian(c, mu, sigma), ProfileShape::lognormal(c, mu / 5.0, sigma),
                          ProfileShape::bimodal(c, mu, mu + 3.0, sigma)] {
                prop_assert_eq!(shape.delta(t, t0), shape.delta(t + k, t0 + k));
            }
        }

        #[test]
        fn gaussian_symmetric_about_center(c in 0.1f64..100.0, mu in 1.0f64..20.0, sigma in 0.1f64..50.0, d in 0.0f64..15.0) {
            let s = ProfileShape::gaussian(c, mu, sigma);
            prop_assert!((s.excess_at(mu + d) - s.excess_at(mu - d)).abs() < 1e-12);
        }

        #[test]
        fn coincident_bimodal_is_twice_gaussian(c in 0.1f64..100.0, mu in 1.0f64..20.0, sigma in 0.1f64..50.0, u in 1.0f64..40.0) {
            let b = ProfileShape::bimodal(c, mu, mu, sigma).excess_at(u);
            let g = ProfileShape::gaussian(c, mu, sigma).excess_at(u);
            prop_assert!((b - 2.0 * g).abs() <= 1e-12 * b.max(1.0));
        }

        #[test]
        fn delta_is_nonnegative(c in 0.1f64..100.0, mu in -5.0f64..20.0, sigma in 0.1f64..50.0, t in 0i64..100) {
            prop_assert!(ProfileShape::lognormal(c, mu / 4.0, sigma).delta(t, 10) >= 0.0);
            prop_assert!(ProfileShape::gaussian(c, mu, sigma).delta(t, 10) >= 0.0);
        }
    }
}
