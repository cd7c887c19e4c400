// SPDX-License-Identifier: Apache-2.0

//! Run configuration: one TOML document whose tables mirror the module
//! configuration blocks. Command-line flags override the matching keys.
//!
//! ```toml
//! preset = "OTC"          # ED, OTC, TH or custom
//! seed = 42
//!
//! [design]                # baseline design (defaults: surveillance design)
//! harmonic_frequencies = [1, 2, 4, 8, 16]
//!
//! [profiles]              # used by the custom preset and by every fit
//! family = "gaussian"
//! bimodal_form = "two-component"
//!
//! [detector]
//! slope_window = 12
//! gamma = 23.0
//! max_lookback = 15
//!
//! [ewma]
//! phi = 0.25
//!
//! [simulation]
//! outbreaks = 20
//! spacing = 35
//! null_days = 730
//!
//! [evaluation]
//! buffer_days = 5
//! max_false_alarm_rate = 1.0
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use mlrss_core::comparators::DEFAULT_PHI;
use mlrss_core::evaluation::linear_grid;
use mlrss_core::profiles::FitOptions;
use mlrss_core::scenario::STUDY_MAX_LOOKBACK;
use mlrss_core::{DesignSpec, DetectorConfig, Error, Method, ProfileFamily, Result, Source};

/// A source preset or `custom`, which takes family, slope window and method
/// from the configuration tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Source(Source),
    Custom,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("custom") {
            Ok(Preset::Custom)
        } else {
            s.parse().map(Preset::Source)
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Source(s) => s.fmt(f),
            Preset::Custom => f.write_str("custom"),
        }
    }
}

impl Serialize for Preset {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Preset {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfilesSection {
    /// Family for the custom preset.
    pub family: Option<ProfileFamily>,
    #[serde(flatten)]
    pub fit: FitOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EwmaSection {
    pub phi: f64,
}

impl Default for EwmaSection {
    fn default() -> Self {
        Self { phi: DEFAULT_PHI }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    /// Injected outbreaks in a test stream; 0 simulates an outbreak-free
    /// stream of `null_days`.
    pub outbreaks: usize,
    /// Days between consecutive outbreak starts (before jitter).
    pub spacing: u32,
    /// Length of outbreak-free streams, including the calibration stream.
    pub null_days: u32,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            outbreaks: 20,
            spacing: 35,
            null_days: 730,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    pub buffer_days: u32,
    /// Alarm budget per 100 outbreak-free days used for calibration.
    pub max_false_alarm_rate: f64,
    pub threshold_grid: Option<String>,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        Self {
            buffer_days: mlrss_core::evaluation::DEFAULT_BUFFER_DAYS,
            max_false_alarm_rate: 1.0,
            threshold_grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    /// Scoring method for the custom preset.
    pub method: Option<Method>,
    pub design: DesignSpec,
    pub profiles: ProfilesSection,
    pub detector: Option<DetectorConfig>,
    pub ewma: EwmaSection,
    pub simulation: SimulationSection,
    pub evaluation: EvaluationSection,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| Error::Parse(format!("config {}: {e}", p.display())))
            }
        }
    }

    /// Family, slope window and method after applying the preset.
    pub fn resolve(&self, preset_flag: Option<Preset>) -> Resolved {
        let preset = preset_flag.or(self.preset).unwrap_or(Preset::Custom);
        let mut detector = self.detector.clone().unwrap_or_default();
        match preset {
            Preset::Source(source) => {
                let p = source.preset();
                detector.slope_window = p.slope_window;
                Resolved {
                    source: Some(source),
                    family: p.family,
                    method: p.method,
                    detector,
                }
            }
            Preset::Custom => Resolved {
                source: None,
                family: self.profiles.family.unwrap_or(ProfileFamily::GaussianKernel),
                method: self.method.unwrap_or(Method::Mlrss),
                detector,
            },
        }
    }

    /// Detector for multi-outbreak streams: as [`RunConfig::resolve`], with
    /// the lookback cap applied unless the `[detector]` table is present.
    pub fn study_detector(&self, source: Source) -> DetectorConfig {
        let mut resolved = self.resolve(Some(Preset::Source(source))).detector;
        if self.detector.is_none() {
            resolved.max_lookback = Some(STUDY_MAX_LOOKBACK);
        }
        resolved
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub source: Option<Source>,
    pub family: ProfileFamily,
    pub method: Method,
    pub detector: DetectorConfig,
}

/// Parses `lo:hi:n` (evenly spaced, inclusive) or a comma-separated list.
pub fn parse_threshold_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |why: String| Error::InvalidConfig(format!("threshold grid '{text}': {why}"));
    let number = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("'{}': {e}", s.trim())));
    let grid = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected lo:hi:n".into()));
        }
        let points: usize = parts[2].trim().parse().map_err(|e| bad(format!("point count: {e}")))?;
        if points == 0 {
            return Err(bad("point count must be positive".into()));
        }
        linear_grid(number(parts[0])?, number(parts[1])?, points)
    } else {
        text.split(',').map(number).collect::<Result<Vec<_>>>()?
    };
    if grid.iter().any(|t| t.is_nan()) {
        return Err(bad("NaN threshold".into()));
    }
    Ok(grid)
}
