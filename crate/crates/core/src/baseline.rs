// SPDX-License-Identifier: Apache-2.0

//! Poisson log-linear baseline `λ_t = exp(x_t'β)` with weekday and seasonal
//! harmonic covariates, fit by iteratively reweighted least squares.
//!
//! Design-row column order:
//!
//! ```text
//! [intercept]  weekday  sin(2πk₁f) cos(2πk₁f) … sin(2πk_mf) cos(2πk_mf)
//!              weekday·sin(2πj₁f) weekday·cos(2πj₁f) …
//! ```
//!
//! where `k` ranges over the harmonic frequencies (periods per year), `j` over
//! the interaction frequencies and `f` is the day's phase within the year.

use std::f64::consts::TAU;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::calendar::{CalendarDay, CountSeries, DEFAULT_PERIOD_DAYS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignSpec {
    pub harmonic_frequencies: Vec<u32>,
    pub interaction_frequencies: Vec<u32>,
    pub include_intercept: bool,
    pub period_days: f64,
    /// Phase origin for the harmonics; shared between training and testing.
    pub epoch: NaiveDate,
}

impl Default for DesignSpec {
    fn default() -> Self {
        Self::surveillance()
    }
}

impl DesignSpec {
    /// Weekday flag, harmonics with 1, 2, 4, 8 and 16 periods per year, and
    /// weekday interactions with the 1 and 2 period harmonics.
    pub fn surveillance() -> Self {
        Self {
            harmonic_frequencies: vec![1, 2, 4, 8, 16],
            interaction_frequencies: vec![1, 2],
            include_intercept: true,
            period_days: DEFAULT_PERIOD_DAYS,
            epoch: NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid epoch"),
        }
    }

    pub fn intercept_only() -> Self {
        Self {
            harmonic_frequencies: Vec::new(),
            interaction_frequencies: Vec::new(),
            ..Self::surveillance()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period_days.is_finite() && self.period_days > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "period_days must be positive, got {}",
                self.period_days
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &k in &self.harmonic_frequencies {
            if k == 0 || !seen.insert(k) {
                return Err(Error::InvalidConfig(format!(
                    "harmonic frequencies must be distinct and positive (got {k})"
                )));
            }
        }
        for k in &self.interaction_frequencies {
            if !seen.contains(k) {
                return Err(Error::InvalidConfig(format!(
                    "interaction frequency {k} is not a harmonic frequency"
                )));
            }
        }
        Ok(())
    }

    pub fn column_count(&self) -> usize {
        usize::from(self.include_intercept)
            + 1
            + 2 * self.harmonic_frequencies.len()
            + 2 * self.interaction_frequencies.len()
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.column_count());
        if self.include_intercept {
            names.push("intercept".to_string());
        }
        names.push("weekday".to_string());
        for k in &self.harmonic_frequencies {
            names.push(format!("sin{k}"));
            names.push(format!("cos{k}"));
        }
        for k in &self.interaction_frequencies {
            names.push(format!("weekday:sin{k}"));
            names.push(format!("weekday:cos{k}"));
        }
        names
    }

    pub fn days_for(&self, series: &CountSeries) -> Vec<CalendarDay> {
        series.calendar_days(self.epoch, self.period_days)
    }
}

pub fn build_design_row(day: &CalendarDay, spec: &DesignSpec) -> Vec<f64> {
    let mut row = Vec::with_capacity(spec.column_count());
    let flag = if day.weekday { 1.0 } else { 0.0 };
    if spec.include_intercept {
        row.push(1.0);
    }
    row.push(flag);
    for &k in &spec.harmonic_frequencies {
        let (s, c) = (TAU * f64::from(k) * day.year_fraction).sin_cos();
        row.push(s);
        row.push(c);
    }
    for &k in &spec.interaction_frequencies {
        let (s, c) = (TAU * f64::from(k) * day.year_fraction).sin_cos();
        row.push(flag * s);
        row.push(flag * c);
    }
    row
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineModel {
    pub beta: Vec<f64>,
    pub spec: DesignSpec,
    pub fit_deviance: f64,
    pub converged: bool,
}

impl BaselineModel {
    /// A model with fixed coefficients, e.g. the generating truth of a
    /// simulation.
    pub fn from_coefficients(spec: DesignSpec, beta: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if beta.len() != spec.column_count() {
            return Err(Error::InvalidConfig(format!(
                "expected {} coefficients, got {}",
                spec.column_count(),
                beta.len()
            )));
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidConfig("coefficients must be finite".into()));
        }
        Ok(Self {
            beta,
            spec,
            fit_deviance: f64::NAN,
            converged: true,
        })
    }

    pub fn lambda(&self, day: &CalendarDay) -> Result<f64> {
        let value = linear_predictor(&build_design_row(day, &self.spec), &self.beta).exp();
        if value.is_finite() && value > 0.0 {
            Ok(value)
        } else {
            Err(Error::Overflow { day: day.t })
        }
    }
}

pub fn predict_lambda(model: &BaselineModel, days: &[CalendarDay]) -> Result<Vec<f64>> {
    days.iter().map(|d| model.lambda(d)).collect()
}

fn linear_predictor(row: &[f64], beta: &[f64]) -> f64 {
    row.iter().zip(beta).map(|(x, b)| x * b).sum()
}

#[derive(Debug, Clone)]
pub struct IrlsOptions {
    /// Relative deviance change that counts as converged.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Maximum step halvings when an update increases the deviance.
    pub max_halvings: usize,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 100,
            max_halvings: 30,
        }
    }
}

/// A fitted model together with its IRLS diagnostics.
#[derive(Debug, Clone)]
pub struct BaselineFit {
    pub model: BaselineModel,
    /// Deviance at the start value followed by one entry per iteration.
    pub deviance_trace: Vec<f64>,
    /// Means `exp(x_t'β̂)` at the final coefficients, in input order.
    pub fitted: Vec<f64>,
    pub iterations: usize,
}

pub fn fit_baseline(series: &CountSeries, spec: &DesignSpec) -> Result<BaselineModel> {
    let days = spec.days_for(series);
    fit_baseline_days(&days, &series.counts, spec, &IrlsOptions::default()).map(|f| f.model)
}

/// Fits `β` on explicit (day, count) pairs. Order of the pairs is irrelevant.
pub fn fit_baseline_days(
    days: &[CalendarDay],
    counts: &[u64],
    spec: &DesignSpec,
    options: &IrlsOptions,
) -> Result<BaselineFit> {
    spec.validate()?;
    if days.len() != counts.len() {
        return Err(Error::RangeMismatch(format!(
            "{} days but {} counts",
            days.len(),
            counts.len()
        )));
    }
    let p = spec.column_count();
    let n = counts.len();
    if n < 2 * p {
        return Err(Error::InsufficientData(format!(
            "need at least {} days to fit {} columns, got {n}",
            2 * p,
            p
        )));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::DegenerateResponse(
            "all counts are zero; the Poisson MLE does not exist".into(),
        ));
    }

    let rows: Vec<Vec<f64>> = days.iter().map(|d| build_design_row(d, spec)).collect();
    let y: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let mean = total as f64 / n as f64;

    let mut beta = vec![0.0; p];
    if spec.include_intercept {
        beta[0] = (mean + 0.5).ln();
    }
    let mut mu = means(&rows, &beta);
    let mut deviance = poisson_deviance(&y, &mu);
    let mut trace = vec![deviance];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        iterations += 1;
        let proposal = wls_step(&rows, &y, &beta, &mu)?;

        // Newton steps can overshoot far from the optimum; halve back toward
        // the previous coefficients until the deviance does not increase.
        let mut candidate = proposal;
        let mut cand_mu = means(&rows, &candidate);
        let mut cand_dev = poisson_deviance(&y, &cand_mu);
        let mut halvings = 0;
        while !(cand_dev <= deviance) && halvings < options.max_halvings {
            for (c, b) in candidate.iter_mut().zip(&beta) {
                *c = 0.5 * (*c + b);
            }
            cand_mu = means(&rows, &candidate);
            cand_dev = poisson_deviance(&y, &cand_mu);
            halvings += 1;
        }
        if !(cand_dev <= deviance) {
            // No descent direction left at floating precision.
            trace.push(deviance);
            converged = true;
            break;
        }

        let change = (deviance - cand_dev).abs() / (cand_dev.abs() + 0.1);
        beta = candidate;
        mu = cand_mu;
        deviance = cand_dev;
        trace.push(deviance);
        if change < options.tolerance {
            converged = true;
            break;
        }
    }

    let model = BaselineModel {
        beta,
        spec: spec.clone(),
        fit_deviance: deviance,
        converged,
    };
    if !converged {
        return Err(Error::NotConverged {
            iterations,
            deviance,
            model: Box::new(model),
        });
    }
    Ok(BaselineFit {
        model,
        deviance_trace: trace,
        fitted: mu,
        iterations,
    })
}

fn means(rows: &[Vec<f64>], beta: &[f64]) -> Vec<f64> {
    rows.iter()
        .map(|r| linear_predictor(r, beta).exp())
        .collect()
}

/// Weighted least-squares solve of the IRLS working model: weights `μ`,
/// working response `η + (y − μ)/μ`. Solved by SVD so that rank deficiency is
/// detected rather than absorbed by a pseudo-inverse.
fn wls_step(rows: &[Vec<f64>], y: &[f64], beta: &[f64], mu: &[f64]) -> Result<Vec<f64>> {
    let n = rows.len();
    let p = beta.len();
    let mut a = DMatrix::<f64>::zeros(n, p);
    let mut b = DVector::<f64>::zeros(n);
    for (i, row) in rows.iter().enumerate() {
        let m = mu[i];
        let sw = m.sqrt();
        let eta = linear_predictor(row, beta);
        let z = eta + (y[i] - m) / m;
        for (j, x) in row.iter().enumerate() {
            a[(i, j)] = sw * x;
        }
        b[i] = sw * z;
    }
    if !a.iter().all(|v| v.is_finite()) || !b.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularDesign { rank: 0, columns: p });
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * (n.max(p) as f64) * f64::EPSILON;
    let rank = svd.rank(eps);
    if rank < p || smax == 0.0 {
        return Err(Error::SingularDesign { rank, columns: p });
    }
    let solution = svd
        .solve(&b, eps)
        .map_err(|_| Error::SingularDesign { rank, columns: p })?;
    Ok(solution.iter().copied().collect())
}

/// `2 Σ [y log(y/μ) − (y − μ)]`, with the `y log y` term taken as 0 at `y = 0`.
pub fn poisson_deviance(y: &[f64], mu: &[f64]) -> f64 {
    let mut dev = 0.0;
    for (&yi, &mi) in y.iter().zip(mu) {
        if !(mi.is_finite() && mi > 0.0) {
            return f64::INFINITY;
        }
        let term = if yi > 0.0 { yi * (yi / mi).ln() } else { 0.0 };
        dev += term - (yi - mi);
    }
    2.0 * dev
}
