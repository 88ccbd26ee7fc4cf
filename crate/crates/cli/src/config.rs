use std::path::{Path, PathBuf};

use lqs_core::{AnalysisConfig, DuInputs, Error, PhaseOffsets, SubArraySelection};
use serde::{Deserialize, Serialize};

/// Where the channel comes from. Relative paths resolve against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSpec {
    Container { path: PathBuf },
    Synth {
        scene: PathBuf,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DuConfig {
    /// m/s; defaults to the fastest sample of the input track.
    pub v_max: Option<f64>,
    /// Hz; defaults to the input carrier.
    pub carrier_freq: Option<f64>,
    pub tau_max: f64,
    pub d_stat_min: f64,
    pub w_max: f64,
    pub ratio_limit: f64,
}

impl Default for DuConfig {
    fn default() -> Self {
        Self {
            v_max: None,
            carrier_freq: None,
            tau_max: 5e-6,
            d_stat_min: 1.19,
            w_max: 15.0,
            ratio_limit: lqs_core::lqs::DEFAULT_DU_RATIO_LIMIT,
        }
    }
}

impl DuConfig {
    pub fn resolve(&self, grid: &lqs_core::SamplingGrid) -> DuInputs {
        DuInputs {
            v_max: self.v_max.unwrap_or_else(|| grid.speed_per_sample.iter().copied().fold(0.0, f64::max)),
            carrier_freq: self.carrier_freq.unwrap_or(grid.carrier_freq),
            tau_max: self.tau_max,
            d_stat_min: self.d_stat_min,
            w_max: self.w_max,
        }
    }
}

fn default_thresholds() -> Vec<f64> {
    vec![0.9]
}

fn default_correlation_offset() -> f64 {
    -10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: InputSpec,
    /// Named sub-array selections; empty means the full array as `full`.
    #[serde(default)]
    pub setups: Vec<SubArraySelection>,
    #[serde(default)]
    pub phase_offsets: Option<PhaseOffsets>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    /// Distance offset at which measure sequences are cross-correlated, m.
    #[serde(default = "default_correlation_offset")]
    pub correlation_offset_m: f64,
    #[serde(default)]
    pub du: DuConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("run config: {e}")))
    }

    /// Reads a config file and resolves its relative paths.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut cfg.input {
            InputSpec::Container { path } => resolve(path),
            InputSpec::Synth { scene, .. } => resolve(scene),
        }
        if let Some(out) = &mut cfg.output_dir {
            resolve(out);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.thresholds.is_empty() {
            return Err(Error::Config("at least one threshold is required".into()));
        }
        for &th in &self.thresholds {
            if !(0.0..=1.0).contains(&th) {
                return Err(Error::Config(format!("threshold must lie in [0, 1], got {th}")));
            }
        }
        if !self.correlation_offset_m.is_finite() {
            return Err(Error::Config("correlation_offset_m must be finite".into()));
        }
        let mut names: Vec<&str> = self.setups.iter().map(|s| s.name.as_str()).collect();
        for name in &names {
            let ok = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
            if !ok || name.starts_with('.') {
                return Err(Error::Config(format!("setup name {name:?} must be a plain file name")));
            }
        }
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("setup names must be unique".into()));
        }
        self.analysis.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::from_json(r#"{"input": {"synth": {"scene": "s.json"}}}"#).unwrap();
        assert_eq!(cfg.thresholds, vec![0.9]);
        assert_eq!(cfg.correlation_offset_m, -10.0);
        assert_eq!(cfg.analysis, AnalysisConfig::default());
        assert_eq!(cfg.analysis.gamma_db, 10.0);
        assert_eq!((cfg.analysis.interval_time, cfg.analysis.interval_freq), (30, 120));
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn rejects_bad_threshold_and_names() {
        let mut cfg = RunConfig::from_json(r#"{"input": {"container": {"path": "x.ctf1"}}, "thresholds": [1.5]}"#).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.thresholds = vec![0.9];
        cfg.setups = vec![SubArraySelection::full("../up", 1, 1)];
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.setups = vec![SubArraySelection::full("a", 1, 1), SubArraySelection::full("a", 1, 1)];
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(RunConfig::from_json(r#"{"input": {"container": {"path": "x"}}, "thresold": [0.9]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"input": {"container": {"path": "x"}}, "analysis": {"gama_db": 3}}"#).is_err());
    }
}
