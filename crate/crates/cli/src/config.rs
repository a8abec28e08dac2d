//! JSON experiment configuration.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use adiabat::experiment::{validate_sweep, HolonomySetup, ModelSetup, DEFAULT_CHECKPOINTS, DEFAULT_DT, DEFAULT_SEED};
use adiabat::models::holonomy::{build_orange_path, Gauge};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Holonomy,
    RandomRotating,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// cos(x/2)|0⟩ + e^{−iy} sin(x/2)|1⟩.
    Bloch { x: f64, y: f64 },
    /// Explicit amplitudes as [re, im] pairs; normalized on use.
    Vector(Vec<[f64; 2]>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    #[serde(default = "default_delta_phi")]
    pub delta_phi: f64,
    #[serde(default = "default_split")]
    pub split: [f64; 4],
}

impl Default for PathConfig {
    fn default() -> Self {
        Self { delta_phi: default_delta_phi(), split: default_split() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeConfig {
    #[default]
    EquatorRegular,
    NorthPoleRegular,
}

impl From<GaugeConfig> for Gauge {
    fn from(g: GaugeConfig) -> Self {
        match g {
            GaugeConfig::EquatorRegular => Gauge::EquatorRegular,
            GaugeConfig::NorthPoleRegular => Gauge::NorthPoleRegular,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub gamma_list: Vec<f64>,
    #[serde(rename = "T_list")]
    pub t_list: Vec<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub initial_state: Option<InitialState>,
    #[serde(default)]
    pub path: Option<PathConfig>,
    #[serde(default)]
    pub gauge: GaugeConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub outputs: Option<PathBuf>,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
}

fn default_delta_phi() -> f64 {
    PI / 4.0
}

fn default_split() -> [f64; 4] {
    [0.4, 0.2, 0.4, 0.0]
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_dim() -> usize {
    4
}

fn default_checkpoints() -> usize {
    DEFAULT_CHECKPOINTS
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: Self = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => invalid(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        validate_sweep(&self.gamma_list, &self.t_list, self.dt).map_err(|e| invalid(e.to_string()))?;
        if self.checkpoints == 0 {
            return Err(invalid("checkpoints must be at least 1"));
        }
        match self.model {
            ModelKind::Holonomy => {
                if self.dim != 4 {
                    return Err(invalid(format!("dim: the holonomy model is four-dimensional, got {}", self.dim)));
                }
                let path = self.path.clone().unwrap_or_default();
                build_orange_path(path.delta_phi, 1.0, path.split).map_err(|e| invalid(format!("path: {e}")))?;
            }
            ModelKind::RandomRotating => {
                if self.dim < 2 {
                    return Err(invalid(format!("dim must be at least 2, got {}", self.dim)));
                }
                if self.path.is_some() {
                    return Err(invalid("path: only the holonomy model has a path"));
                }
                if self.gauge != GaugeConfig::default() {
                    return Err(invalid("gauge: only the holonomy model has a gauge choice"));
                }
                if matches!(self.initial_state, Some(InitialState::Bloch { .. })) {
                    return Err(invalid("initial_state: Bloch angles apply to the holonomy model only; give a vector"));
                }
            }
        }
        match &self.initial_state {
            Some(InitialState::Bloch { x, y }) if !(x.is_finite() && y.is_finite()) => {
                return Err(invalid("initial_state: Bloch angles must be finite"));
            }
            Some(InitialState::Vector(v)) => {
                if v.len() != self.dim {
                    return Err(invalid(format!("initial_state: expected {} amplitudes, got {}", self.dim, v.len())));
                }
                if v.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(invalid("initial_state: amplitudes must be finite"));
                }
                if v.iter().all(|[re, im]| *re == 0.0 && *im == 0.0) {
                    return Err(invalid("initial_state: zero vector"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn vector(&self) -> Option<Vec<C64>> {
        match &self.initial_state {
            Some(InitialState::Vector(v)) => Some(v.iter().map(|&[re, im]| C64::new(re, im)).collect()),
            _ => None,
        }
    }

    pub fn model_setup(&self) -> ModelSetup {
        match self.model {
            ModelKind::Holonomy => {
                let path = self.path.clone().unwrap_or_default();
                let mut setup = HolonomySetup {
                    delta_phi: path.delta_phi,
                    split: path.split,
                    gauge: self.gauge.into(),
                    vector: self.vector(),
                    ..HolonomySetup::default()
                };
                if let Some(InitialState::Bloch { x, y }) = self.initial_state {
                    setup.x = x;
                    setup.y = y;
                }
                ModelSetup::Holonomy(setup)
            }
            ModelKind::RandomRotating => {
                ModelSetup::RandomRotating { seed: self.seed, dim: self.dim, state: self.vector() }
            }
        }
    }

    /// (Γ, T) pairs in output order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> =
            self.gamma_list.iter().flat_map(|&g| self.t_list.iter().map(move |&t| (g, t))).collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        out.dedup();
        out
    }
}
