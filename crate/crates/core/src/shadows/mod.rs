//! Randomized measurements and classical shadows.
//!
//! A snapshot records the measurement unitary and the observed basis index; its
//! reconstruction applies the inverse measurement channel. A [`ShadowSet`] holds
//! `N` unitaries with `M` shots each and the per-unitary averaged shadows.

mod budget;
pub mod clifford;
mod distill;
mod estimators;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::sample_index;
use crate::error::{Error, Result};
use crate::linalg::{kron_all, ComplexMatrix, DensityMatrix, Pauli, C64, I, ONE};
use crate::rng::stream_rng;

pub use budget::{
    budget_prefactor, cost_observable, measurement_budget, samples_for_prefactor, variance_bound, Budget,
    MAX_BUDGET_QUBITS,
};
pub use clifford::{CliffordTableau, SignedPauli};
pub use distill::{
    distilled_estimate, distilled_estimate_with, shift_operator, DistillConfig, DistilledEstimate,
    DEFAULT_DISTILL_TUPLES, MAX_DISTILL_ORDER, MAX_SHIFT_DIM,
};
pub use estimators::{
    estimate_cost, estimate_cost_detailed, estimate_cost_expanded, estimate_observable, estimate_quadratic,
    CostEstimate,
};

pub const MAX_CLIFFORD_QUBITS: usize = 4;

/// Format tag written at the top of serialized shadow sets.
pub const SHADOW_FORMAT: &str = "ness-shadows/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    #[default]
    LocalPauli,
    GlobalClifford,
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pauli" | "local_pauli" | "localpauli" => Ok(Self::LocalPauli),
            "clifford" | "global_clifford" | "globalclifford" => Ok(Self::GlobalClifford),
            other => Err(Error::BadParams {
                field: "ensemble".into(),
                reason: format!("unknown ensemble `{other}` (expected pauli or clifford)"),
            }),
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::LocalPauli => "local_pauli",
            Self::GlobalClifford => "global_clifford",
        })
    }
}

/// Single-qubit rotation taking the eigenbasis of `p` to the computational basis.
fn basis_change(p: Pauli) -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match p {
        Pauli::X => ComplexMatrix::from_rows(&[&[ONE * h, ONE * h], &[ONE * h, -ONE * h]]),
        Pauli::Y => ComplexMatrix::from_rows(&[&[ONE * h, -I * h], &[ONE * h, I * h]]),
        Pauli::Z | Pauli::I => ComplexMatrix::identity(2),
    }
}

/// `(d + 1) v v^dagger - I` with `v = U^dagger |b>`.
fn inverted_projector(u: &ComplexMatrix, outcome: usize) -> ComplexMatrix {
    let d = u.rows();
    let v: Vec<C64> = u.row(outcome).iter().map(|z| z.conj()).collect();
    let mut out = ComplexMatrix::outer(&v, &v).scale_real((d + 1) as f64);
    for k in 0..d {
        out[(k, k)] -= ONE;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnitaryDescriptor {
    /// Measurement basis per qubit; `I` is never drawn.
    LocalPauli { bases: Vec<Pauli> },
    GlobalClifford { tableau: CliffordTableau },
}

impl UnitaryDescriptor {
    pub fn random<R: Rng + ?Sized>(ensemble: EnsembleKind, n_qubits: usize, rng: &mut R) -> Self {
        match ensemble {
            EnsembleKind::LocalPauli => Self::LocalPauli {
                bases: (0..n_qubits).map(|_| [Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..3)]).collect(),
            },
            EnsembleKind::GlobalClifford => Self::GlobalClifford { tableau: CliffordTableau::random(n_qubits, rng) },
        }
    }

    pub fn ensemble(&self) -> EnsembleKind {
        match self {
            Self::LocalPauli { .. } => EnsembleKind::LocalPauli,
            Self::GlobalClifford { .. } => EnsembleKind::GlobalClifford,
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Self::LocalPauli { bases } => bases.len(),
            Self::GlobalClifford { tableau } => tableau.n_qubits(),
        }
    }

    /// The unitary applied before the computational-basis measurement.
    pub fn unitary(&self) -> ComplexMatrix {
        match self {
            Self::LocalPauli { bases } => {
                let factors: Vec<ComplexMatrix> = bases.iter().map(|&p| basis_change(p)).collect();
                kron_all(&factors)
            }
            Self::GlobalClifford { tableau } => tableau.unitary(),
        }
    }

    /// `<b| U rho U^dagger |b>` for every `b`.
    pub fn outcome_probabilities(&self, rho: &ComplexMatrix) -> Vec<f64> {
        let u = self.unitary();
        let rotated = u.matmul(rho).matmul_adjoint(&u);
        (0..u.rows()).map(|b| rotated[(b, b)].re.max(0.0)).collect()
    }

    /// Inverse-channel reconstruction for outcome `b`.
    pub fn reconstruct(&self, outcome: usize) -> ComplexMatrix {
        match self {
            Self::LocalPauli { bases } => {
                let n = bases.len();
                let factors: Vec<ComplexMatrix> = bases
                    .iter()
                    .enumerate()
                    .map(|(q, &p)| inverted_projector(&basis_change(p), (outcome >> (n - 1 - q)) & 1))
                    .collect();
                kron_all(&factors)
            }
            Self::GlobalClifford { tableau } => inverted_projector(&tableau.unitary(), outcome),
        }
    }

    fn averaged(&self, outcomes: &[usize]) -> ComplexMatrix {
        let dim = 1usize << self.n_qubits();
        let mut counts = vec![0usize; dim];
        for &b in outcomes {
            counts[b] += 1;
        }
        let u = match self {
            Self::GlobalClifford { tableau } => Some(tableau.unitary()),
            Self::LocalPauli { .. } => None,
        };
        let mut out = ComplexMatrix::zeros(dim, dim);
        for (b, &c) in counts.iter().enumerate().filter(|(_, &c)| c > 0) {
            let shadow = match &u {
                Some(u) => inverted_projector(u, b),
                None => self.reconstruct(b),
            };
            out.axpy(C64::from(c as f64 / outcomes.len() as f64), &shadow);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub unitary: UnitaryDescriptor,
    pub outcome: usize,
}

fn check_ensemble_size(ensemble: EnsembleKind, n_qubits: usize) -> Result<()> {
    if ensemble == EnsembleKind::GlobalClifford && n_qubits > MAX_CLIFFORD_QUBITS {
        return Err(Error::TooLarge(format!(
            "global Clifford shadows support at most {MAX_CLIFFORD_QUBITS} qubits, got {n_qubits}"
        )));
    }
    Ok(())
}

pub fn sample_snapshot<R: Rng + ?Sized>(rho: &DensityMatrix, ensemble: EnsembleKind, rng: &mut R) -> Result<Snapshot> {
    check_ensemble_size(ensemble, rho.n_qubits())?;
    let unitary = UnitaryDescriptor::random(ensemble, rho.n_qubits(), rng);
    let p = unitary.outcome_probabilities(rho.matrix());
    let outcome = sample_index(&p, rng);
    Ok(Snapshot { unitary, outcome })
}

pub fn reconstruct(snapshot: &Snapshot) -> ComplexMatrix {
    snapshot.unitary.reconstruct(snapshot.outcome)
}

/// Average of the reconstructions of `snapshots`.
pub fn mean_shadow(snapshots: &[Snapshot]) -> Result<ComplexMatrix> {
    let first = snapshots.first().ok_or(Error::Empty("snapshot list"))?;
    let dim = 1usize << first.unitary.n_qubits();
    let mut out = ComplexMatrix::zeros(dim, dim);
    let w = C64::from(1.0 / snapshots.len() as f64);
    for s in snapshots {
        let r = reconstruct(s);
        if r.rows() != dim {
            return Err(Error::DimensionMismatch { expected: format!("{dim}x{dim}"), found: format!("{0}x{0}", r.rows()) });
        }
        out.axpy(w, &r);
    }
    Ok(out)
}

/// One measurement unitary and the `M` outcomes observed with it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementBatch {
    pub unitary: UnitaryDescriptor,
    pub outcomes: Vec<usize>,
}

impl MeasurementBatch {
    pub fn snapshots(&self) -> impl Iterator<Item = Snapshot> + '_ {
        self.outcomes.iter().map(|&outcome| Snapshot { unitary: self.unitary.clone(), outcome })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShadowFile", into = "ShadowFile")]
pub struct ShadowSet {
    n_qubits: usize,
    ensemble: EnsembleKind,
    shots_per_unitary: usize,
    master_seed: Option<u64>,
    batches: Vec<MeasurementBatch>,
    shadows: Vec<ComplexMatrix>,
}

impl ShadowSet {
    /// Draws `n_unitaries` unitaries with `shots` outcomes each. Unitary `i` uses
    /// stream `i` of `seed`, so the result does not depend on the thread count.
    pub fn sample(
        rho: &DensityMatrix,
        ensemble: EnsembleKind,
        n_unitaries: usize,
        shots: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_unitaries == 0 {
            return Err(Error::BadParams { field: "n_unitaries".into(), reason: "must be at least 1".into() });
        }
        if shots == 0 {
            return Err(Error::BadParams { field: "shots_per_unitary".into(), reason: "must be at least 1".into() });
        }
        let n = rho.n_qubits();
        check_ensemble_size(ensemble, n)?;
        let batches: Vec<MeasurementBatch> = (0..n_unitaries)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(seed, i as u64);
                let unitary = UnitaryDescriptor::random(ensemble, n, &mut rng);
                let p = unitary.outcome_probabilities(rho.matrix());
                let outcomes = (0..shots).map(|_| sample_index(&p, &mut rng)).collect();
                MeasurementBatch { unitary, outcomes }
            })
            .collect();
        Self::from_batches(n, ensemble, batches, Some(seed))
    }

    /// Rebuilds a set from recorded measurements.
    pub fn from_batches(
        n_qubits: usize,
        ensemble: EnsembleKind,
        batches: Vec<MeasurementBatch>,
        master_seed: Option<u64>,
    ) -> Result<Self> {
        check_ensemble_size(ensemble, n_qubits)?;
        let shots = batches.first().ok_or(Error::Empty("measurement batches"))?.outcomes.len();
        let dim = 1usize << n_qubits;
        for (i, b) in batches.iter().enumerate() {
            if b.unitary.ensemble() != ensemble || b.unitary.n_qubits() != n_qubits {
                return Err(Error::DimensionMismatch {
                    expected: format!("{ensemble} unitary on {n_qubits} qubits"),
                    found: format!("{} unitary on {} qubits (batch {i})", b.unitary.ensemble(), b.unitary.n_qubits()),
                });
            }
            if b.outcomes.len() != shots || shots == 0 {
                return Err(Error::BadParams {
                    field: format!("batches[{i}].outcomes"),
                    reason: format!("expected {shots} outcomes, found {}", b.outcomes.len()),
                });
            }
            if let Some(&bad) = b.outcomes.iter().find(|&&o| o >= dim) {
                return Err(Error::BadParams {
                    field: format!("batches[{i}].outcomes"),
                    reason: format!("outcome {bad} out of range for {n_qubits} qubits"),
                });
            }
        }
        let shadows = batches.par_iter().map(|b| b.unitary.averaged(&b.outcomes)).collect();
        Ok(Self { n_qubits, ensemble, shots_per_unitary: shots, master_seed, batches, shadows })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn ensemble(&self) -> EnsembleKind {
        self.ensemble
    }

    pub fn n_unitaries(&self) -> usize {
        self.batches.len()
    }

    pub fn shots_per_unitary(&self) -> usize {
        self.shots_per_unitary
    }

    pub fn master_seed(&self) -> Option<u64> {
        self.master_seed
    }

    pub fn batches(&self) -> &[MeasurementBatch] {
        &self.batches
    }

    /// Averaged shadows, one per unitary.
    pub fn shadows(&self) -> &[ComplexMatrix] {
        &self.shadows
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShadowFile {
    format: String,
    ensemble: EnsembleKind,
    n_qubits: usize,
    n_unitaries: usize,
    shots_per_unitary: usize,
    master_seed: Option<u64>,
    batches: Vec<MeasurementBatch>,
}

impl From<ShadowSet> for ShadowFile {
    fn from(s: ShadowSet) -> Self {
        Self {
            format: SHADOW_FORMAT.into(),
            ensemble: s.ensemble,
            n_qubits: s.n_qubits,
            n_unitaries: s.batches.len(),
            shots_per_unitary: s.shots_per_unitary,
            master_seed: s.master_seed,
            batches: s.batches,
        }
    }
}

impl TryFrom<ShadowFile> for ShadowSet {
    type Error = Error;

    fn try_from(f: ShadowFile) -> Result<Self> {
        if f.format != SHADOW_FORMAT {
            return Err(Error::BadParams { field: "format".into(), reason: format!("unsupported format `{}`", f.format) });
        }
        if f.n_unitaries != f.batches.len() {
            return Err(Error::BadParams {
                field: "n_unitaries".into(),
                reason: format!("header says {}, file has {} batches", f.n_unitaries, f.batches.len()),
            });
        }
        let set = Self::from_batches(f.n_qubits, f.ensemble, f.batches, f.master_seed)?;
        if set.shots_per_unitary != f.shots_per_unitary {
            return Err(Error::BadParams {
                field: "shots_per_unitary".into(),
                reason: format!("header says {}, batches have {}", f.shots_per_unitary, set.shots_per_unitary),
            });
        }
        Ok(set)
    }
}
