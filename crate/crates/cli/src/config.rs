//! Declarative experiment configuration, loaded from TOML or JSON and
//! validated before any run starts.

use std::path::{Path, PathBuf};

use iwal_core::threshold::default_c0;
use iwal_core::{ClassSpec, DataDistribution, HypothesisClass, ThresholdConfig, ThresholdMode};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl From<iwal_core::Error> for ConfigError {
    fn from(e: iwal_core::Error) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

/// `c0` as written in the file: a number or the string `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum C0Setting {
    Value(f64),
    Word(AutoWord),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoWord {
    Auto,
}

impl std::str::FromStr for C0Setting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(C0Setting::Word(AutoWord::Auto));
        }
        s.parse::<f64>().map(C0Setting::Value).map_err(|_| format!("expected a number or \"auto\", got {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub c0: C0Setting,
    pub delta: f64,
    /// Largest round for which an automatic or analysis-mode `c0` is checked;
    /// defaults to `rounds`.
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default = "analysis_mode")]
    pub mode: ThresholdMode,
    /// Experimental mode only.
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default)]
    pub c2: Option<f64>,
    #[serde(default)]
    pub degenerate_probability: Option<f64>,
}

fn analysis_mode() -> ThresholdMode {
    ThresholdMode::Analysis
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    /// Checkpoints up to this round calibrate the fitted curve; defaults to
    /// the first half of the schedule.
    #[serde(default)]
    pub calibrate_through: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub stream: DataDistribution,
    pub class: ClassSpec,
    pub threshold: ThresholdSection,
    pub rounds: usize,
    /// Defaults to `[rounds]`.
    #[serde(default)]
    pub checkpoints: Vec<usize>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    #[serde(default = "yes")]
    pub passive: bool,
    #[serde(default)]
    pub bounds: BoundsSection,
}

fn yes() -> bool {
    true
}

/// Command-line values that replace keys from the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub rounds: Option<usize>,
    pub checkpoints: Option<Vec<usize>>,
    pub seeds: Option<Vec<u64>>,
    pub output_dir: Option<PathBuf>,
    pub c0: Option<C0Setting>,
    pub delta: Option<f64>,
    pub horizon: Option<usize>,
}

/// A validated configuration with the class built and `C0` resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub class: HypothesisClass,
    pub threshold: ThresholdConfig,
    pub horizon: usize,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let parse_error = |message: String| ConfigError::Parse { path: path.into(), message };
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| parse_error(e.to_string())),
            _ => toml::from_str(&text).map_err(|e| parse_error(e.to_string())),
        }
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(v) = o.rounds {
            self.rounds = v;
        }
        if let Some(v) = o.checkpoints {
            self.checkpoints = v;
        }
        if let Some(v) = o.seeds {
            self.seeds = v;
        }
        if let Some(v) = o.output_dir {
            self.output_dir = v;
        }
        if let Some(v) = o.c0 {
            self.threshold.c0 = v;
        }
        if let Some(v) = o.delta {
            self.threshold.delta = v;
        }
        if let Some(v) = o.horizon {
            self.threshold.horizon = Some(v);
        }
    }

    pub fn resolve(mut self) -> Result<Resolved, ConfigError> {
        let invalid = |m: String| ConfigError::Invalid(m);
        if self.rounds == 0 {
            return Err(invalid("rounds must be positive".into()));
        }
        if self.checkpoints.is_empty() {
            self.checkpoints = vec![self.rounds];
        }
        if !self.checkpoints.windows(2).all(|w| w[0] < w[1]) {
            return Err(invalid("checkpoints must be strictly increasing".into()));
        }
        if let Some(&c) = self.checkpoints.iter().find(|&&c| c == 0 || c > self.rounds) {
            return Err(invalid(format!("checkpoint {c} outside 1..={}", self.rounds)));
        }
        if self.seeds.is_empty() {
            return Err(invalid("at least one seed is required".into()));
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("seeds must be distinct".into()));
        }
        self.stream.validate()?;
        let class = self.class.build()?;
        class.require_learnable()?;
        if class.dim()? != self.stream.dim()? {
            return Err(invalid(format!(
                "class dimension {} does not match stream dimension {}",
                class.dim()?,
                self.stream.dim()?
            )));
        }

        let t = &self.threshold;
        let horizon = t.horizon.unwrap_or(self.rounds);
        if horizon == 0 {
            return Err(invalid("horizon must be positive".into()));
        }
        let mut threshold = match t.mode {
            ThresholdMode::Analysis => {
                if t.c1.is_some() || t.c2.is_some() {
                    return Err(invalid("c1 and c2 can only be set in experimental mode".into()));
                }
                match t.c0 {
                    C0Setting::Word(AutoWord::Auto) => ThresholdConfig::auto(class.len(), t.delta, horizon)?,
                    C0Setting::Value(c0) => {
                        let cfg = ThresholdConfig::analysis(c0, t.delta)?;
                        cfg.check_envelope(class.len(), horizon)?;
                        cfg
                    }
                }
            }
            ThresholdMode::Experimental => {
                let standard = iwal_core::Constants::standard();
                let c0 = match t.c0 {
                    C0Setting::Value(c0) => c0,
                    C0Setting::Word(AutoWord::Auto) => default_c0(class.len(), t.delta, horizon)?,
                };
                ThresholdConfig::experimental(c0, t.delta, t.c1.unwrap_or(standard.c1), t.c2.unwrap_or(standard.c2))?
            }
        };
        if let Some(p) = t.degenerate_probability {
            threshold = threshold.with_degenerate_probability(p)?;
        }
        Ok(Resolved { config: self, class, threshold, horizon })
    }
}
