// SPDX-License-Identifier: Apache-2.0

//! Sequential outbreak detection in daily count data with the mixture
//! likelihood ratio scan statistic (MLRSS).
//!
//! The pipeline:
//!
//! 1. [`baseline`]: fit a Poisson log-linear baseline `λ_t` on outbreak-free
//!    training counts.
//! 2. [`profiles`]: fit parametric outbreak profiles `δ(θ)` to labeled
//!    training outbreaks, giving a bank `{θ̂_j}`.
//! 3. [`detector`]: for each new day, scan candidate start days with the
//!    bank-averaged likelihood ratio and turn the running maximum into an
//!    alarm score by its recent least-squares slope.
//!
//! [`comparators`] holds the EWMA score, [`simulator`] generates labeled
//! synthetic streams and [`evaluation`] computes delays, false-alarm rates
//! and AMOC curves.

pub mod baseline;
pub mod calendar;
pub mod comparators;
pub mod detector;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod optim;
pub mod profiles;
pub mod scenario;
pub mod simulator;

pub use baseline::{fit_baseline, predict_lambda, BaselineModel, DesignSpec};
pub use calendar::{CalendarDay, CountSeries};
pub use comparators::EwmaState;
pub use detector::{Detector, DetectorConfig, Remediation, ScanResult, ScoreScale};
pub use error::{Error, ErrorKind, Result};
pub use evaluation::{amoc, evaluate, EvaluationReport, Truth};
pub use profiles::{build_bank, fit_theta, OutbreakSignature, ProfileBank, ProfileFamily, ProfileShape};
pub use scenario::{Method, Scenario, Source};
pub use simulator::{simulate, LabeledSeries, SimConfig};
