// SPDX-License-Identifier: Apache-2.0

//! Data-source presets and the synthetic train/test scenarios built on the
//! simulator.
//!
//! | source | profile family   | slope window | score  |
//! |--------|------------------|--------------|--------|
//! | ED     | log-normal       | 7            | EWMA   |
//! | OTC    | Gaussian         | 12           | MLRSS  |
//! | TH     | bimodal Gaussian | 10           | MLRSS  |
//!
//! The generating parameters of the synthetic scenarios are stand-ins chosen
//! to give outbreaks of a few days' onset on a seasonal, weekday-modulated
//! baseline; they are not estimates from real surveillance data.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::baseline::{fit_baseline, predict_lambda, BaselineModel, DesignSpec};
use crate::calendar::CountSeries;
use crate::comparators::ewma_scores;
use crate::detector::{scan_stream, DetectorConfig, ScanResult};
use crate::error::{Error, Result};
use crate::profiles::{build_bank, FitOptions, ProfileBank, ProfileFamily, ProfileShape};
use crate::simulator::{jittered_outbreaks, scenario_horizon, signature_window, simulate, SimConfig};

/// Lookback cap used on multi-outbreak streams. Without a cap the adaptive
/// window stays anchored at the first outbreak's start, whose accumulated
/// evidence then masks every later outbreak.
pub const STUDY_MAX_LOOKBACK: u32 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "ED")]
    Ed,
    #[serde(rename = "OTC")]
    Otc,
    #[serde(rename = "TH")]
    Th,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mlrss,
    Ewma,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Mlrss => "mlrss",
            Method::Ewma => "ewma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub family: ProfileFamily,
    pub slope_window: usize,
    pub method: Method,
}

impl Source {
    pub const ALL: [Source; 3] = [Source::Ed, Source::Otc, Source::Th];

    pub fn preset(self) -> Preset {
        match self {
            Source::Ed => Preset {
                family: ProfileFamily::LogNormalKernel,
                slope_window: 7,
                method: Method::Ewma,
            },
            Source::Otc => Preset {
                family: ProfileFamily::GaussianKernel,
                slope_window: 12,
                method: Method::Mlrss,
            },
            Source::Th => Preset {
                family: ProfileFamily::BimodalGaussian,
                slope_window: 10,
                method: Method::Mlrss,
            },
        }
    }

    pub fn detector_config(self) -> DetectorConfig {
        DetectorConfig {
            slope_window: self.preset().slope_window,
            ..DetectorConfig::default()
        }
    }

    /// Preset detector for streams holding many outbreaks: the scan window
    /// may reach back at most [`STUDY_MAX_LOOKBACK`] days.
    pub fn study_detector_config(self) -> DetectorConfig {
        DetectorConfig {
            max_lookback: Some(STUDY_MAX_LOOKBACK),
            ..self.detector_config()
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Ed => "ED",
            Source::Otc => "OTC",
            Source::Th => "TH",
        })
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ED" => Ok(Source::Ed),
            "OTC" => Ok(Source::Otc),
            "TH" => Ok(Source::Th),
            _ => Err(Error::InvalidConfig(format!("unknown source preset '{s}' (expected ED, OTC or TH)"))),
        }
    }
}

/// SplitMix64 finalizer; derives independent sub-seeds from one seed.
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub source: Source,
    pub spec: DesignSpec,
    pub beta_true: Vec<f64>,
    pub start_date: NaiveDate,
    /// Center of the outbreak-parameter distribution.
    pub central: ProfileShape,
    /// Relative half-width of the uniform jitter applied to each parameter.
    pub jitter: f64,
    pub baseline_training_days: u32,
    pub training_outbreaks: usize,
    pub outbreak_spacing: u32,
    pub lead_in: u32,
}

/// Seasonal log-linear coefficients on the surveillance design, scaled so
/// the weekday mean is close to `level`.
pub fn seasonal_beta(level: f64) -> Vec<f64> {
    vec![
        level.ln() - 0.25, // intercept
        0.3,               // weekday
        0.20, 0.30, // 1 / year
        0.08, -0.05, // 2 / year
        0.03, 0.02, // 4 / year
        0.01, -0.01, // 8 / year
        0.005, 0.005, // 16 / year
        0.05, -0.04, // weekday × 1 / year
        0.02, 0.01, // weekday × 2 / year
    ]
}

impl Scenario {
    pub fn for_source(source: Source) -> Self {
        let (level, central) = match source {
            Source::Ed => (40.0, ProfileShape::lognormal(24.0, 6f64.ln(), 0.6)),
            Source::Otc => (30.0, ProfileShape::gaussian(18.0, 9.0, 24.0)),
            Source::Th => (20.0, ProfileShape::bimodal(12.0, 5.0, 14.0, 8.0)),
        };
        Self {
            source,
            spec: DesignSpec::surveillance(),
            beta_true: seasonal_beta(level),
            start_date: NaiveDate::from_ymd_opt(2010, 1, 4).expect("valid date"),
            central,
            jitter: 0.25,
            baseline_training_days: 3 * 365,
            training_outbreaks: 30,
            outbreak_spacing: 45,
            lead_in: 30,
        }
    }

    pub fn true_baseline(&self) -> Result<BaselineModel> {
        BaselineModel::from_coefficients(self.spec.clone(), self.beta_true.clone())
    }

    /// Outbreak-free stream.
    pub fn null_config(&self, horizon_days: u32, seed: u64) -> SimConfig {
        SimConfig {
            beta_true: self.beta_true.clone(),
            spec: self.spec.clone(),
            start_date: self.start_date,
            horizon_days,
            outbreaks: Vec::new(),
            seed,
        }
    }

    /// Stream with `count` jittered outbreaks every `spacing` days.
    pub fn outbreak_config(&self, count: usize, spacing: u32, seed: u64) -> Result<SimConfig> {
        let outbreaks = jittered_outbreaks(
            &self.central,
            count,
            self.jitter,
            self.lead_in,
            spacing,
            sub_seed(seed, 1),
        )?;
        Ok(SimConfig {
            horizon_days: scenario_horizon(count, self.lead_in, spacing),
            outbreaks,
            seed: sub_seed(seed, 2),
            ..self.null_config(0, 0)
        })
    }

    /// Fits the baseline on an outbreak-free training stream, then a profile
    /// bank on the outbreak signatures of a second training stream.
    pub fn train(&self, seed: u64, options: &FitOptions) -> Result<Trained> {
        let baseline_sim = simulate(&self.null_config(self.baseline_training_days, sub_seed(seed, 10)))?;
        let baseline = fit_baseline(&baseline_sim.series, &self.spec)?;

        let outbreak_sim = simulate(&self.outbreak_config(
            self.training_outbreaks,
            self.outbreak_spacing,
            sub_seed(seed, 11),
        )?)?;
        let lambdas = predict_lambda(&baseline, &self.spec.days_for(&outbreak_sim.series))?;
        let signatures = outbreak_sim
            .outbreaks
            .iter()
            .map(|o| signature_window(&outbreak_sim.series.counts, &lambdas, o).map(|s| s.signature))
            .collect::<Result<Vec<_>>>()?;
        let built = build_bank(&signatures, self.central.family(), options)?;
        Ok(Trained {
            baseline,
            bank: built.bank,
            failed_fits: built.failures.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub baseline: BaselineModel,
    pub bank: ProfileBank,
    pub failed_fits: usize,
}

/// Scan detector over a whole series with baseline means from `baseline`.
pub fn run_mlrss(
    series: &CountSeries,
    baseline: &BaselineModel,
    bank: &ProfileBank,
    config: &DetectorConfig,
) -> Result<Vec<ScanResult>> {
    let lambdas = predict_lambda(baseline, &baseline.spec.days_for(series))?;
    scan_stream(config, bank, &series.counts, &lambdas)
}

pub fn run_ewma(series: &CountSeries, baseline: &BaselineModel, phi: f64) -> Result<Vec<f64>> {
    let lambdas = predict_lambda(baseline, &baseline.spec.days_for(series))?;
    ewma_scores(phi, &series.counts, &lambdas)
}
