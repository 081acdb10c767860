//! Cost of an ansatz point under a Lindblad generator.

use serde::{Deserialize, Serialize};

use crate::ansatz::{param_frequency_set, prepare_mixed_state, prepare_mixed_state_sampled, AnsatzLayout, FrequencySet, ParamVector};
use crate::error::{Error, Result};
use crate::lindblad::{cost_exact, LindbladSpec};
use crate::linalg::DensityMatrix;
use crate::rng::{derive_seed, stream_rng};
use crate::shadows::{estimate_cost, EnsembleKind, ShadowSet};

use super::Objective;

const PREPARATION_LABEL: u64 = 0x7072_6570;
const SHADOW_LABEL: u64 = 0x7368_6164;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowConfig {
    pub n_unitaries: usize,
    pub shots_per_unitary: usize,
    #[serde(default)]
    pub ensemble: EnsembleKind,
    pub seed: u64,
    /// Evaluate every point with the same seed instead of reseeding per round.
    #[serde(default)]
    pub pinned: bool,
    /// Sample the intermediate measurement with this many shots instead of dephasing exactly.
    #[serde(default)]
    pub preparation_shots: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CostMode {
    Exact,
    Shadow(ShadowConfig),
}

#[derive(Debug, Clone)]
pub struct CostEvaluator {
    spec: LindbladSpec,
    layout: AnsatzLayout,
    mode: CostMode,
}

impl CostEvaluator {
    pub fn new(spec: LindbladSpec, layout: AnsatzLayout, mode: CostMode) -> Result<Self> {
        if spec.n_qubits() != layout.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} qubits (ansatz)", layout.n_qubits()),
                found: format!("{} qubits (generator)", spec.n_qubits()),
            });
        }
        if let CostMode::Shadow(cfg) = &mode {
            if cfg.n_unitaries < 2 {
                return Err(Error::TooFewShadows { needed: 2, have: cfg.n_unitaries });
            }
            if cfg.shots_per_unitary == 0 {
                return Err(Error::BadParams { field: "shots_per_unitary".into(), reason: "must be at least 1".into() });
            }
            if cfg.preparation_shots == Some(0) {
                return Err(Error::BadParams { field: "preparation_shots".into(), reason: "must be at least 1".into() });
            }
        }
        Ok(Self { spec, layout, mode })
    }

    pub fn exact(spec: LindbladSpec, layout: AnsatzLayout) -> Result<Self> {
        Self::new(spec, layout, CostMode::Exact)
    }

    pub fn spec(&self) -> &LindbladSpec {
        &self.spec
    }

    pub fn layout(&self) -> &AnsatzLayout {
        &self.layout
    }

    pub fn mode(&self) -> &CostMode {
        &self.mode
    }

    /// State with the intermediate measurement dephased exactly.
    pub fn state(&self, theta: &ParamVector) -> Result<DensityMatrix> {
        prepare_mixed_state(&self.layout, theta)
    }

    pub fn cost_params(&self, theta: &ParamVector, round: u64) -> Result<f64> {
        match &self.mode {
            CostMode::Exact => cost_exact(&self.spec, &self.state(theta)?),
            CostMode::Shadow(cfg) => {
                let seed = if cfg.pinned { cfg.seed } else { derive_seed(cfg.seed, SHADOW_LABEL, round) };
                let rho = match cfg.preparation_shots {
                    None => self.state(theta)?,
                    Some(shots) => {
                        let mut rng = stream_rng(derive_seed(seed, PREPARATION_LABEL, 0), 0);
                        prepare_mixed_state_sampled(&self.layout, theta, shots, &mut rng)?
                    }
                };
                let set = ShadowSet::sample(&rho, cfg.ensemble, cfg.n_unitaries, cfg.shots_per_unitary, seed)?;
                estimate_cost(&set, &self.spec)
            }
        }
    }
}

impl Objective for CostEvaluator {
    fn n_params(&self) -> usize {
        self.layout.total_params()
    }

    fn cost(&self, theta: &[f64], round: u64) -> Result<f64> {
        self.cost_params(&ParamVector::from_flat(&self.layout, theta)?, round)
    }

    fn frequency_set(&self, index: usize) -> Result<FrequencySet> {
        param_frequency_set(&self.layout, index)
    }

    fn is_stochastic(&self) -> bool {
        matches!(&self.mode, CostMode::Shadow(cfg) if !cfg.pinned)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::standard_layout;
    use crate::models::{ising_spec, ModelParams};
    use crate::rng::stream_rng;

    fn ising() -> LindbladSpec {
        ising_spec(&ModelParams::new(2, 1.0, vec![1.0, 0.5])).unwrap()
    }

    #[test]
    fn exact_mode_is_repeatable() {
        let layout = standard_layout(2, 2, 2).unwrap();
        let ev = CostEvaluator::exact(ising(), layout.clone()).unwrap();
        let theta = ParamVector::random(&layout, 1.0, &mut stream_rng(60, 0)).to_flat();
        assert_eq!(ev.cost(&theta, 0).unwrap().to_bits(), ev.cost(&theta, 7).unwrap().to_bits());
    }

    #[test]
    fn shadow_mode_reseeds_per_round_unless_pinned() {
        let layout = standard_layout(2, 1, 1).unwrap();
        let theta = ParamVector::random(&layout, 1.0, &mut stream_rng(61, 0)).to_flat();
        let cfg = ShadowConfig { n_unitaries: 20, shots_per_unitary: 2, ensemble: EnsembleKind::LocalPauli, seed: 3, pinned: false, preparation_shots: None };
        let ev = CostEvaluator::new(ising(), layout.clone(), CostMode::Shadow(cfg)).unwrap();
        assert_eq!(ev.cost(&theta, 1).unwrap(), ev.cost(&theta, 1).unwrap());
        assert_ne!(ev.cost(&theta, 1).unwrap(), ev.cost(&theta, 2).unwrap());
        let pinned = CostEvaluator::new(ising(), layout, CostMode::Shadow(ShadowConfig { pinned: true, ..cfg })).unwrap();
        assert_eq!(pinned.cost(&theta, 1).unwrap(), pinned.cost(&theta, 2).unwrap());
    }

    #[test]
    fn sampled_preparation_runs() {
        let layout = standard_layout(2, 1, 1).unwrap();
        let theta = ParamVector::random(&layout, 1.0, &mut stream_rng(62, 0)).to_flat();
        let cfg = ShadowConfig { n_unitaries: 20, shots_per_unitary: 2, ensemble: EnsembleKind::LocalPauli, seed: 3, pinned: false, preparation_shots: Some(50) };
        let ev = CostEvaluator::new(ising(), layout, CostMode::Shadow(cfg)).unwrap();
        assert!(ev.cost(&theta, 0).unwrap().is_finite());
    }

    #[test]
    fn construction_checks() {
        let layout = standard_layout(3, 1, 1).unwrap();
        assert!(matches!(CostEvaluator::exact(ising(), layout), Err(Error::DimensionMismatch { .. })));
        let layout = standard_layout(2, 1, 1).unwrap();
        let cfg = ShadowConfig { n_unitaries: 1, shots_per_unitary: 2, ensemble: EnsembleKind::LocalPauli, seed: 0, pinned: false, preparation_shots: None };
        assert!(matches!(CostEvaluator::new(ising(), layout, CostMode::Shadow(cfg)), Err(Error::TooFewShadows { .. })));
    }
}
