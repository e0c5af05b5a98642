//! Per-command configuration: a TOML or JSON file, then flag overrides.
//! Unknown keys are rejected. Paths to inputs are resolved into the config
//! itself, so a saved snapshot replays without the original files.

use std::path::{Path, PathBuf};

use hombell::bell::Inequality;
use hombell::fock::{BipartiteState, StateRecord};
use hombell::gaussian::{CircuitOptions, PhotonicCircuit};
use hombell::optimize::OptimizeOptions;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::invalid(&path.display().to_string(), e))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(&text).map_err(|e| CliError::invalid(&path.display().to_string(), e))
    } else {
        toml::from_str(&text).map_err(|e| CliError::invalid(&path.display().to_string(), e))
    }
}

/// Inline inequality or a file in the text format; CHSH when neither is set.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InequalitySource {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inequality: Option<Inequality>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inequality_file: Option<PathBuf>,
}

impl InequalitySource {
    pub fn resolve(&mut self) -> CliResult<Inequality> {
        if let Some(path) = self.inequality_file.take() {
            self.inequality =
                Some(Inequality::load(&path).map_err(|e| CliError::invalid(&path.display().to_string(), e))?);
        }
        let ineq = self.inequality.get_or_insert_with(Inequality::chsh);
        ineq.validate()?;
        Ok(ineq.clone())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeConfig {
    pub dim: usize,
    /// Detector efficiency; lossless when absent.
    pub eta: Option<f64>,
    /// Grow the interval count until it stops paying off.
    pub grow_bins: bool,
    pub score_tol: f64,
    pub bell: InequalitySource,
    pub search: OptimizeOptions,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            eta: None,
            grow_bins: false,
            score_tol: 1e-4,
            bell: InequalitySource::default(),
            search: OptimizeOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    #[default]
    Dimension,
    Efficiency,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub kind: SweepKind,
    /// Grid for dimension sweeps.
    pub dims: Vec<usize>,
    /// Grid for efficiency sweeps.
    pub etas: Vec<f64>,
    /// Local dimension of efficiency sweeps.
    pub dim: usize,
    pub bell: InequalitySource,
    pub search: OptimizeOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            kind: SweepKind::Dimension,
            dims: (2..=9).collect(),
            etas: (0..=10).map(|k| 0.5 + 0.05 * k as f64).collect(),
            dim: 7,
            bell: InequalitySource::default(),
            search: OptimizeOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdConfig {
    pub dim: usize,
    pub bracket_tol: f64,
    pub bell: InequalitySource,
    pub search: OptimizeOptions,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            dim: 7,
            bracket_tol: 0.005,
            bell: InequalitySource::default(),
            search: OptimizeOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyConfig {
    pub photons: Vec<usize>,
    pub search: OptimizeOptions,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self {
            photons: vec![2, 3, 4],
            search: OptimizeOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QubitScanConfig {
    pub l_max: usize,
}

impl Default for QubitScanConfig {
    fn default() -> Self {
        Self { l_max: 7 }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrepareConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circuit: Option<PhotonicCircuit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circuit_file: Option<PathBuf>,
}

impl PrepareConfig {
    pub fn resolve(&mut self) -> CliResult<PhotonicCircuit> {
        if let Some(path) = self.circuit_file.take() {
            self.circuit = Some(read_json(&path)?);
        }
        let c = self
            .circuit
            .clone()
            .ok_or_else(|| CliError::Invalid("prepare needs a circuit or circuit_file".into()))?;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FidelityOptConfig {
    pub n_modes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<StateRecord>,
    /// A state record, or a result record from `optimize`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_file: Option<PathBuf>,
    pub circuit: CircuitOptions,
    /// Efficiencies at which the prepared state's Bell score is optimized.
    pub bell_etas: Vec<f64>,
    pub bell: InequalitySource,
    pub bell_search: OptimizeOptions,
}

impl Default for FidelityOptConfig {
    fn default() -> Self {
        Self {
            n_modes: 4,
            target: None,
            target_file: None,
            circuit: CircuitOptions::default(),
            bell_etas: Vec::new(),
            bell: InequalitySource::default(),
            bell_search: OptimizeOptions {
                seeds: 40,
                ..OptimizeOptions::default()
            },
        }
    }
}

impl FidelityOptConfig {
    pub fn resolve_target(&mut self) -> CliResult<BipartiteState<f64>> {
        if let Some(path) = self.target_file.take() {
            let value: serde_json::Value = read_json(&path)?;
            // A result record carries the state under `result.state`.
            let state = value.pointer("/result/state").cloned().unwrap_or(value);
            self.target =
                Some(serde_json::from_value(state).map_err(|e| CliError::invalid(&path.display().to_string(), e))?);
        }
        let record = self
            .target
            .as_ref()
            .ok_or_else(|| CliError::Invalid("fidelity-opt needs a target or target_file".into()))?;
        Ok(BipartiteState::try_from(record)?)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::invalid(&path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid(&path.display().to_string(), e))
}
