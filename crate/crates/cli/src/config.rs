//! TOML run configuration.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ness_core::ansatz::{standard_layout, AnsatzLayout};
use ness_core::lindblad::{Convention, LindbladSpec};
use ness_core::linalg::{pauli_matrix, ComplexMatrix, PauliString, Phase};
use ness_core::models::{Boundary, Model, ModelParams};
use ness_core::optimizer::{CostMode, OptConfig, ShadowConfig};
use ness_core::shadows::EnsembleKind;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub name: Model,
    pub n_sites: usize,
    pub g: f64,
    pub gammas: Vec<f64>,
    pub boundary: Boundary,
    pub convention: Convention,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            name: Model::Ising,
            n_sites: 2,
            g: 1.0,
            gammas: vec![1.0, 0.5],
            boundary: Boundary::Open,
            convention: Convention::StandardGksl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnsatzConfig {
    pub d1: usize,
    pub d2: usize,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        Self { d1: 4, d2: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    #[default]
    Exact,
    Shadow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    pub mode: ModeKind,
    pub n_unitaries: usize,
    pub shots_per_unitary: usize,
    pub ensemble: EnsembleKind,
    /// Reuse one shadow seed for every evaluation.
    pub pinned: bool,
    pub preparation_shots: Option<usize>,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            mode: ModeKind::Exact,
            n_unitaries: 200,
            shots_per_unitary: 10,
            ensemble: EnsembleKind::LocalPauli,
            pinned: false,
            preparation_shots: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub restarts: usize,
    /// Initial angles are uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { restarts: 8, init_scale: PI }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_sweep_parameter")]
    pub parameter: String,
    pub values: Vec<f64>,
    #[serde(default = "default_true")]
    pub warm_start: bool,
}

fn default_sweep_parameter() -> String {
    "g".into()
}

fn default_true() -> bool {
    true
}

/// Sweepable parameters.
pub const SWEEP_PARAMETERS: [&str; 4] = ["g", "gamma1", "gamma2", "gamma3"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradcheckConfig {
    pub samples: usize,
    pub fd_step: f64,
    pub tolerance: f64,
    pub theta_scale: f64,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self { samples: 10, fd_step: 1e-5, tolerance: 1e-6, theta_scale: PI }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShadowbenchConfig {
    pub n_grid: Vec<usize>,
    pub repeats: usize,
    pub shots_per_unitary: usize,
    /// Pauli weight of the two-copy observable in the variance bound; `2 n` when unset.
    pub locality: Option<usize>,
    pub noise: f64,
    pub distill_unitaries: usize,
    pub distill_shots: usize,
    pub distill_repeats: usize,
    pub distill_tuples: usize,
}

impl Default for ShadowbenchConfig {
    fn default() -> Self {
        Self {
            n_grid: vec![200, 800, 3200],
            repeats: 200,
            shots_per_unitary: 1,
            locality: None,
            noise: 0.1,
            distill_unitaries: 1000,
            distill_shots: 10,
            distill_repeats: 40,
            distill_tuples: 10_000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    /// Record wall-clock times; output then differs between identical runs.
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub model: ModelConfig,
    pub ansatz: AnsatzConfig,
    pub cost: CostConfig,
    pub optimizer: OptConfig,
    pub search: SearchConfig,
    pub observables: Vec<String>,
    pub sweep: Option<SweepConfig>,
    pub gradcheck: GradcheckConfig,
    pub shadowbench: ShadowbenchConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            model: ModelConfig::default(),
            ansatz: AnsatzConfig::default(),
            cost: CostConfig::default(),
            optimizer: OptConfig::default(),
            search: SearchConfig::default(),
            observables: vec!["XY".into(), "YY".into(), "ZZ".into()],
            sweep: None,
            gradcheck: GradcheckConfig::default(),
            shadowbench: ShadowbenchConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

fn field_error(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Config(format!("`{field}`: {}", reason.into()))
}

/// Maps a core validation error onto a config error naming the field.
pub(crate) fn scoped(section: &str, err: ness_core::Error) -> CliError {
    match err {
        ness_core::Error::BadParams { field, reason } => {
            let field = if field.starts_with(section) { field } else { format!("{section}.{field}") };
            field_error(&field, reason)
        }
        ness_core::Error::TooLarge(msg) => field_error(section, msg),
        other => CliError::Core(other),
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn model_params(&self) -> ModelParams {
        ModelParams {
            n_sites: self.model.n_sites,
            g: self.model.g,
            gammas: self.model.gammas.clone(),
            boundary: self.model.boundary,
        }
    }

    pub fn spec(&self) -> Result<LindbladSpec, CliError> {
        self.model.name.build(&self.model_params(), self.model.convention).map_err(|e| scoped("model", e))
    }

    pub fn layout(&self) -> Result<AnsatzLayout, CliError> {
        standard_layout(self.model.n_sites, self.ansatz.d1, self.ansatz.d2).map_err(|e| scoped("ansatz", e))
    }

    /// Cost mode with the shadow seed derived from `seed`.
    pub fn cost_mode(&self, seed: u64) -> CostMode {
        match self.cost.mode {
            ModeKind::Exact => CostMode::Exact,
            ModeKind::Shadow => CostMode::Shadow(ShadowConfig {
                n_unitaries: self.cost.n_unitaries,
                shots_per_unitary: self.cost.shots_per_unitary,
                ensemble: self.cost.ensemble,
                seed,
                pinned: self.cost.pinned,
                preparation_shots: self.cost.preparation_shots,
            }),
        }
    }

    pub fn observable_ops(&self) -> Result<Vec<(String, ComplexMatrix)>, CliError> {
        self.observables
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let p: PauliString = s.parse().map_err(|e: ness_core::Error| field_error(&format!("observables[{k}]"), e.to_string()))?;
                if matches!(p.phase(), Phase::PlusI | Phase::MinusI) {
                    return Err(field_error(&format!("observables[{k}]"), format!("`{s}` is not Hermitian")));
                }
                if p.n_qubits() != self.model.n_sites {
                    return Err(field_error(
                        &format!("observables[{k}]"),
                        format!("`{s}` acts on {} sites, model has {}", p.n_qubits(), self.model.n_sites),
                    ));
                }
                Ok((s.clone(), pauli_matrix(&p)))
            })
            .collect()
    }

    /// Copy with one model parameter replaced.
    pub fn with_parameter(&self, parameter: &str, value: f64) -> Result<Self, CliError> {
        let mut cfg = self.clone();
        match parameter {
            "g" => cfg.model.g = value,
            p => {
                let k = SWEEP_PARAMETERS[1..]
                    .iter()
                    .position(|&q| q == p)
                    .ok_or_else(|| field_error("sweep.parameter", format!("unknown parameter `{p}`")))?;
                let families = cfg.model.name.jump_families();
                if k >= families {
                    return Err(field_error("sweep.parameter", format!("{} has no `{p}`", cfg.model.name)));
                }
                if cfg.model.gammas.len() == 1 {
                    cfg.model.gammas = vec![cfg.model.gammas[0]; families];
                }
                cfg.model.gammas[k] = value;
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.spec()?;
        self.layout()?;
        self.observable_ops()?;
        self.optimizer.validate().map_err(|e| scoped("optimizer", e))?;
        if self.search.restarts == 0 {
            return Err(field_error("search.restarts", "must be at least 1"));
        }
        if !(self.search.init_scale >= 0.0 && self.search.init_scale.is_finite()) {
            return Err(field_error("search.init_scale", "must be a nonnegative number"));
        }
        if self.cost.mode == ModeKind::Shadow {
            if self.cost.n_unitaries < 2 {
                return Err(field_error("cost.n_unitaries", "shadow mode needs at least 2 unitaries"));
            }
            if self.cost.shots_per_unitary == 0 {
                return Err(field_error("cost.shots_per_unitary", "must be at least 1"));
            }
            if self.cost.preparation_shots == Some(0) {
                return Err(field_error("cost.preparation_shots", "must be at least 1"));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(field_error("sweep.values", "grid is empty"));
            }
            if let Some(v) = sweep.values.iter().find(|v| !v.is_finite()) {
                return Err(field_error("sweep.values", format!("{v} is not finite")));
            }
            for &v in &sweep.values {
                self.with_parameter(&sweep.parameter, v)?.spec()?;
            }
        }
        let gc = &self.gradcheck;
        if gc.samples == 0 {
            return Err(field_error("gradcheck.samples", "must be at least 1"));
        }
        if !(gc.fd_step > 0.0 && gc.fd_step.is_finite()) {
            return Err(field_error("gradcheck.fd_step", "must be positive"));
        }
        if !(gc.tolerance > 0.0) {
            return Err(field_error("gradcheck.tolerance", "must be positive"));
        }
        let sb = &self.shadowbench;
        if sb.n_grid.is_empty() || sb.n_grid.iter().any(|&n| n < 2) {
            return Err(field_error("shadowbench.n_grid", "needs at least one entry, each at least 2"));
        }
        if sb.repeats < 2 || sb.distill_repeats < 2 {
            return Err(field_error("shadowbench.repeats", "at least 2 repeats are needed for a variance"));
        }
        if sb.shots_per_unitary == 0 || sb.distill_shots == 0 {
            return Err(field_error("shadowbench.shots_per_unitary", "must be at least 1"));
        }
        if !(sb.noise > 0.0 && sb.noise < 1.0) {
            return Err(field_error("shadowbench.noise", "must lie in (0, 1)"));
        }
        if sb.distill_unitaries < 4 || sb.distill_tuples == 0 {
            return Err(field_error("shadowbench.distill_unitaries", "need at least 4 unitaries and 1 tuple"));
        }
        if sb.locality == Some(0) {
            return Err(field_error("shadowbench.locality", "must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
        let cfg = RunConfig::from_toml_str("", "inline").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn full_config_parses() {
        let text = r#"
seed = 11
observables = ["XX", "XZ"]

[model]
name = "heisenberg"
g = 0.5
gammas = [1.0]
convention = "standard"

[ansatz]
d1 = 2
d2 = 2

[cost]
mode = "shadow"
n_unitaries = 50
ensemble = "global_clifford"

[optimizer]
method = "gradient_descent"
epsilon = 1e-8

[sweep]
values = [0.0, 1.0]
"#;
        let cfg = RunConfig::from_toml_str(text, "inline").unwrap();
        assert_eq!(cfg.model.name, Model::Heisenberg);
        assert_eq!(cfg.cost.ensemble, EnsembleKind::GlobalClifford);
        assert!(cfg.sweep.as_ref().unwrap().warm_start);
        assert_eq!(cfg.sweep.as_ref().unwrap().parameter, "g");
    }

    #[test]
    fn unknown_fields_name_the_location() {
        let err = RunConfig::from_toml_str("[model]\nname = \"ising\"\ncoupling = 2\n", "cfg.toml").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("coupling") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn wrong_gamma_length_names_the_field() {
        let err = RunConfig::from_toml_str("[model]\ngammas = [1.0, 0.5, 0.1]\n", "cfg.toml").unwrap_err();
        assert!(err.to_string().contains("model.gammas"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn empty_sweep_and_bad_observables_are_rejected() {
        assert!(RunConfig::from_toml_str("[sweep]\nvalues = []\n", "c").unwrap_err().to_string().contains("sweep.values"));
        assert!(RunConfig::from_toml_str("observables = [\"XYZ\"]\n", "c").unwrap_err().to_string().contains("observables[0]"));
        assert!(RunConfig::from_toml_str("[sweep]\nparameter = \"gamma3\"\nvalues = [1.0]\n", "c").is_err());
    }

    #[test]
    fn parameter_substitution() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.with_parameter("gamma2", 0.25).unwrap().model.gammas, vec![1.0, 0.25]);
        assert_eq!(cfg.with_parameter("g", 1.5).unwrap().model.g, 1.5);
        assert!(cfg.with_parameter("delta", 1.0).is_err());
    }
}
