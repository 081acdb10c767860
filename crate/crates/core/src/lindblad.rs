//! Lindblad generator, exact cost, vectorization and the exact steady state.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    frobenius_norm, frobenius_norm_sq, kron, null_space, spectral_norm, ComplexMatrix, DensityMatrix,
    HERMITIAN_TOL, I, NULL_SPACE_RTOL, ONE,
};

/// Largest register accepted by the superoperator routines.
pub const MAX_VECTORIZED_QUBITS: usize = 6;

/// Operator inside the dissipator's anticommutator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `{c^dagger c, rho}`; trace preserving for every jump.
    #[default]
    #[serde(alias = "standard")]
    StandardGksl,
    /// `{c c^dagger, rho}`; only trace preserving for normal jumps.
    #[serde(alias = "paper")]
    PaperLiteral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub op: ComplexMatrix,
    pub rate: f64,
}

/// Hamiltonian plus weighted jump operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct LindbladSpec {
    n_qubits: usize,
    hamiltonian: ComplexMatrix,
    jumps: Vec<Jump>,
    convention: Convention,
    /// `-iH - sum_k (gamma_k / 2) D_k`, so that `L(rho) = K rho + rho K^dagger + sum gamma c rho c^dagger`.
    effective: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    n_qubits: usize,
    hamiltonian: ComplexMatrix,
    jumps: Vec<Jump>,
    #[serde(default)]
    convention: Convention,
}

impl TryFrom<RawSpec> for LindbladSpec {
    type Error = Error;
    fn try_from(r: RawSpec) -> Result<Self> {
        LindbladSpec::new(r.n_qubits, r.hamiltonian, r.jumps, r.convention)
    }
}

impl From<LindbladSpec> for RawSpec {
    fn from(s: LindbladSpec) -> Self {
        RawSpec { n_qubits: s.n_qubits, hamiltonian: s.hamiltonian, jumps: s.jumps, convention: s.convention }
    }
}

impl LindbladSpec {
    pub fn new(n_qubits: usize, hamiltonian: ComplexMatrix, jumps: Vec<Jump>, convention: Convention) -> Result<Self> {
        let dim = 1usize << n_qubits;
        let check_dim = |what: &str, m: &ComplexMatrix| {
            if m.shape() != (dim, dim) {
                Err(Error::DimensionMismatch {
                    expected: format!("{what} of size {dim}x{dim}"),
                    found: format!("{}x{}", m.rows(), m.cols()),
                })
            } else {
                Ok(())
            }
        };
        check_dim("hamiltonian", &hamiltonian)?;
        let scale = hamiltonian.as_slice().iter().map(|z| z.norm()).fold(1.0, f64::max);
        if !hamiltonian.is_hermitian(HERMITIAN_TOL * scale) {
            return Err(Error::NotHermitian { asymmetry: hamiltonian.hermitian_deviation() });
        }
        for (k, j) in jumps.iter().enumerate() {
            check_dim("jump operator", &j.op)?;
            if !(j.rate >= 0.0 && j.rate.is_finite()) {
                return Err(Error::BadParams {
                    field: format!("jumps[{k}].rate"),
                    reason: format!("rate {} must be finite and nonnegative", j.rate),
                });
            }
        }
        let mut effective = hamiltonian.scale(-I);
        for j in &jumps {
            let d = anticommutator_operator(&j.op, convention);
            effective.axpy(C64::new(-0.5 * j.rate, 0.0), &d);
        }
        Ok(Self { n_qubits, hamiltonian, jumps, convention, effective })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Same operators under another anticommutator convention.
    pub fn with_convention(&self, convention: Convention) -> Self {
        Self::new(self.n_qubits, self.hamiltonian.clone(), self.jumps.clone(), convention)
            .expect("operators already validated")
    }
}

fn anticommutator_operator(c: &ComplexMatrix, convention: Convention) -> ComplexMatrix {
    match convention {
        Convention::StandardGksl => c.dagger().matmul(c),
        Convention::PaperLiteral => c.matmul_adjoint(c),
    }
}

fn check_operand(spec: &LindbladSpec, rho: &ComplexMatrix) -> Result<()> {
    let dim = spec.dim();
    if rho.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch {
            expected: format!("{dim}x{dim}"),
            found: format!("{}x{}", rho.rows(), rho.cols()),
        });
    }
    Ok(())
}

/// `L(rho) = -i[H, rho] + sum_k (gamma_k / 2)(2 c_k rho c_k^dagger - {D_k, rho})`.
///
/// Linear in `rho`, so it is also applied to non-physical operators such as shadow snapshots.
pub fn apply_lindbladian(spec: &LindbladSpec, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_operand(spec, rho)?;
    Ok(apply_unchecked(spec, rho))
}

pub(crate) fn apply_unchecked(spec: &LindbladSpec, rho: &ComplexMatrix) -> ComplexMatrix {
    let k_rho = spec.effective.matmul(rho);
    let mut out = &k_rho + &k_rho_dagger(rho, &spec.effective);
    for j in &spec.jumps {
        if j.rate == 0.0 {
            continue;
        }
        let term = j.op.matmul(rho).matmul_adjoint(&j.op);
        out.axpy(C64::new(j.rate, 0.0), &term);
    }
    out
}

/// `rho K^dagger`
fn k_rho_dagger(rho: &ComplexMatrix, k: &ComplexMatrix) -> ComplexMatrix {
    rho.matmul_adjoint(k)
}

/// `||L(rho)||_F^2`
pub fn cost_exact(spec: &LindbladSpec, rho: &DensityMatrix) -> Result<f64> {
    Ok(frobenius_norm_sq(&apply_lindbladian(spec, rho.matrix())?))
}

/// Superoperator in the column-stacking convention `vec(A rho B) = (B^T kron A) vec(rho)`.
pub fn vectorized_lindbladian(spec: &LindbladSpec) -> Result<ComplexMatrix> {
    if spec.n_qubits > MAX_VECTORIZED_QUBITS {
        return Err(Error::TooLarge(format!(
            "vectorized Lindbladian on {} qubits (limit {MAX_VECTORIZED_QUBITS})",
            spec.n_qubits
        )));
    }
    let id = ComplexMatrix::identity(spec.dim());
    let k = &spec.effective;
    let mut m = kron(&id, k);
    m += &kron(&k.conj(), &id);
    for j in &spec.jumps {
        if j.rate == 0.0 {
            continue;
        }
        m.axpy(C64::new(j.rate, 0.0), &kron(&j.op.conj(), &j.op));
    }
    Ok(m)
}

/// Unique steady state from the null space of the vectorized generator.
pub fn exact_steady_state(spec: &LindbladSpec) -> Result<DensityMatrix> {
    let m = vectorized_lindbladian(spec)?;
    let dim = spec.dim();
    let scale = spectral_norm(&m);
    if scale == 0.0 {
        return Err(Error::DegenerateSteadySpace { dim: dim * dim });
    }
    let tol = NULL_SPACE_RTOL * scale;
    let kernel = null_space(&m, tol);
    match kernel.len() {
        0 => Err(Error::NoSteadyState { tol }),
        1 => {
            // trace normalization first: it also removes the vector's arbitrary phase
            let x = ComplexMatrix::unvectorize(&kernel[0], dim, dim);
            let tr = x.trace();
            if tr.norm() < 1e-12 {
                return Err(Error::NoSteadyState { tol });
            }
            let rho = x.scale(ONE / tr).hermitian_part();
            DensityMatrix::new(spec.n_qubits, rho)
        }
        d => Err(Error::DegenerateSteadySpace { dim: d }),
    }
}

/// `||L(rho)||_F`
pub fn residual_norm(spec: &LindbladSpec, rho: &DensityMatrix) -> Result<f64> {
    Ok(frobenius_norm(&apply_lindbladian(spec, rho.matrix())?))
}

/// Operator-sum form `L(rho) = sum_i A_i rho B_i^dagger`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSumForm {
    pub terms: Vec<(ComplexMatrix, ComplexMatrix)>,
}

impl KrausSumForm {
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(rho.rows(), rho.cols());
        for (a, b) in &self.terms {
            out += &a.matmul(rho).matmul_adjoint(b);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Terms `(-iH, I)`, `(I, -iH)` and per jump `(sqrt(g) c, sqrt(g) c)`, `(-(g/2) D, I)`, `(I, -(g/2) D)`.
/// Vanishing Hamiltonians and zero-rate jumps contribute no terms.
pub fn kraus_sum_form(spec: &LindbladSpec) -> KrausSumForm {
    let id = ComplexMatrix::identity(spec.dim());
    let mut terms = Vec::new();
    if !spec.hamiltonian.is_zero() {
        let minus_ih = spec.hamiltonian.scale(-I);
        terms.push((minus_ih.clone(), id.clone()));
        terms.push((id.clone(), minus_ih));
    }
    for j in &spec.jumps {
        if j.rate == 0.0 {
            continue;
        }
        let root = j.op.scale_real(j.rate.sqrt());
        terms.push((root.clone(), root));
        let half_d = anticommutator_operator(&j.op, spec.convention).scale_real(-0.5 * j.rate);
        terms.push((half_d.clone(), id.clone()));
        terms.push((id.clone(), half_d));
    }
    KrausSumForm { terms }
}
