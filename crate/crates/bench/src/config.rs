//! Experiment files.
//!
//! One experiment per TOML file: a few top-level keys and the optional
//! sections `[params]`, `[backend]` and `[output]`.
//!
//! ```toml
//! algorithm = "qsgd"
//! fixture = "quadratic-noisy"
//! d = 2
//! epsilons = [0.4, 0.2, 0.1]
//! trials = 50
//! seed = 7
//!
//! [backend]
//! mode = "contract"
//! c_qme = 1.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qstoch_core::estimate::{MeanEstimationBackend, NoisePolicy};
use qstoch_core::fixtures::{FixtureKind, FixtureParams};
use qstoch_core::{Algorithm, CostModel};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: Box<toml::de::Error> },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Contract,
    Sample,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    Honest,
    Adversarial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub mode: BackendKind,
    pub policy: Policy,
    pub failure_injection: bool,
    pub failure_radius: Option<f64>,
    pub c_qme: f64,
    pub log_floor: f64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            mode: BackendKind::Contract,
            policy: Policy::Honest,
            failure_injection: false,
            failure_radius: None,
            c_qme: 1.0,
            log_floor: 1.0,
        }
    }
}

impl BackendConfig {
    pub fn build(&self) -> MeanEstimationBackend {
        let base = match (self.mode, self.policy) {
            (BackendKind::Sample, _) => MeanEstimationBackend::sample_based(),
            (BackendKind::Contract, Policy::Honest) => MeanEstimationBackend::contract(NoisePolicy::HonestGaussianClipped),
            (BackendKind::Contract, Policy::Adversarial) => {
                MeanEstimationBackend::contract(NoisePolicy::AdversarialBoundary)
            }
        };
        let base = if self.failure_injection {
            base.with_failures(self.failure_radius)
        } else {
            base
        };
        base.with_cost(CostModel {
            c_qme: self.c_qme,
            log_floor: self.log_floor,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    /// Record wall-clock time per trial; otherwise `wall_ms` is written as 0
    /// so that reruns produce identical files.
    pub timing: bool,
}

/// A single dimension or a list of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dims {
    One(usize),
    Many(Vec<usize>),
}

impl Dims {
    pub fn to_vec(&self) -> Vec<usize> {
        match self {
            Dims::One(d) => vec![*d],
            Dims::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub fixture: FixtureKind,
    pub d: Dims,
    pub epsilons: Vec<f64>,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: FixtureParams,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            source: Box::new(e),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Desk-scale defaults for each algorithm.
    pub fn preset(algorithm: Algorithm) -> Self {
        let mut params = FixtureParams::default();
        let (fixture, d, epsilons, trials) = match algorithm {
            Algorithm::Qvr => (FixtureKind::QuadraticNoisy, Dims::Many(vec![2, 8, 32]), vec![0.4, 0.2, 0.1], 200),
            Algorithm::Acsa => (FixtureKind::BallDistance, Dims::One(2), vec![0.4, 0.2, 0.1, 0.05], 50),
            Algorithm::Qscp => (FixtureKind::BallDistance, Dims::One(2), vec![0.2, 0.1, 0.05, 0.025], 50),
            Algorithm::Qsgd => (FixtureKind::QuadraticNoisy, Dims::One(2), vec![0.4, 0.2, 0.1], 100),
            Algorithm::Qspider => {
                params.scale = 20.0;
                (FixtureKind::SeededSmoothNonconvex, Dims::One(2), vec![0.4, 0.2, 0.1], 100)
            }
            Algorithm::SgdBaseline => (FixtureKind::BallDistance, Dims::One(2), vec![0.4, 0.2, 0.1], 50),
        };
        Self {
            algorithm,
            fixture,
            d,
            epsilons,
            trials,
            seed: 0,
            params,
            backend: BackendConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.d.to_vec()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let dims = self.dims();
        if dims.is_empty() || dims.contains(&0) {
            return bad(format!("dimensions must be positive, got {dims:?}"));
        }
        if self.epsilons.is_empty() {
            return bad("epsilon grid is empty".into());
        }
        if self.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return bad(format!("epsilons must be positive and finite, got {:?}", self.epsilons));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!("epsilon grid must be strictly decreasing, got {:?}", self.epsilons));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.backend.c_qme > 0.0 && self.backend.c_qme.is_finite()) {
            return bad(format!("c_qme must be positive, got {}", self.backend.c_qme));
        }
        if !(self.backend.log_floor >= 0.0) {
            return bad(format!("log_floor must be non-negative, got {}", self.backend.log_floor));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid_and_round_trip() {
        for a in Algorithm::ALL {
            let cfg = ExperimentConfig::preset(a);
            cfg.validate().unwrap();
            let back = ExperimentConfig::from_toml(&cfg.to_toml(), Path::new("preset")).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let base = "algorithm = \"qsgd\"\nfixture = \"quadratic-noisy\"\nd = 2\ntrials = 3\n";
        let p = Path::new("t.toml");
        assert!(ExperimentConfig::from_toml(&format!("{base}epsilons = [0.1, 0.2]\n"), p).is_err());
        assert!(ExperimentConfig::from_toml(&format!("{base}epsilons = []\n"), p).is_err());
        assert!(ExperimentConfig::from_toml(&format!("{base}epsilons = [0.1]\nbogus = 1\n"), p).is_err());
        let ok = ExperimentConfig::from_toml(&format!("{base}epsilons = [0.2, 0.1]\n"), p).unwrap();
        assert_eq!(ok.dims(), vec![2]);
        assert_eq!(ok.backend, BackendConfig::default());
    }
}
