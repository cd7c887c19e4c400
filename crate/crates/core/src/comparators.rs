// SPDX-License-Identifier: Apache-2.0

//! EWMA of truncated standardized residuals against a fixed baseline:
//!
//! ```text
//! r_t = max(o_t − λ_t, 0) / √λ_t
//! a_t = (1 − φ) a_{t−1} + φ r_t,   a_0 = 0
//! ```

use crate::error::{Error, Result};

pub const DEFAULT_PHI: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EwmaState {
    pub phi: f64,
    pub a: f64,
}

impl Default for EwmaState {
    fn default() -> Self {
        Self { phi: DEFAULT_PHI, a: 0.0 }
    }
}

impl EwmaState {
    pub fn new(phi: f64) -> Result<Self> {
        if !(phi > 0.0 && phi <= 1.0) {
            return Err(Error::InvalidConfig(format!("EWMA weight must be in (0, 1], got {phi}")));
        }
        Ok(Self { phi, a: 0.0 })
    }

    /// Advances one day and returns the new score.
    pub fn step(&mut self, count: u64, lambda: f64) -> Result<f64> {
        *self = ewma_step(*self, count, lambda)?;
        Ok(self.a)
    }
}

pub fn truncated_residual(count: u64, lambda: f64) -> f64 {
    (count as f64 - lambda).max(0.0) / lambda.sqrt()
}

pub fn ewma_step(state: EwmaState, count: u64, lambda: f64) -> Result<EwmaState> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::NonpositiveLambda(lambda));
    }
    let r = truncated_residual(count, lambda);
    Ok(EwmaState {
        phi: state.phi,
        a: (1.0 - state.phi) * state.a + state.phi * r,
    })
}

/// Scores a whole stream from `a_0 = 0`.
pub fn ewma_scores(phi: f64, counts: &[u64], lambdas: &[f64]) -> Result<Vec<f64>> {
    if counts.len() != lambdas.len() {
        return Err(Error::RangeMismatch(format!(
            "{} counts but {} baseline values",
            counts.len(),
            lambdas.len()
        )));
    }
    let mut state = EwmaState::new(phi)?;
    counts
        .iter()
        .zip(lambdas)
        .map(|(&o, &l)| state.step(o, l))
        .collect()
}
