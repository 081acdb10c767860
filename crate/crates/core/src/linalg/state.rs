use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::decomp::{herm_eig, matrix_sqrt_psd, HERMITIAN_TOL};
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// A validated n-qubit density matrix: Hermitian, unit trace, PSD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(n_qubits: usize, mat: ComplexMatrix) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if mat.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch {
                expected: format!("{dim}x{dim}"),
                found: format!("{}x{}", mat.rows(), mat.cols()),
            });
        }
        if !mat.is_finite() {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let asym = mat.hermitian_deviation();
        if asym > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {asym:.3e})")));
        }
        let tr = mat.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let min = herm_eig(&mat)?.values[0];
        if min < -HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { n_qubits, mat })
    }

    /// Skips validation. Callers guarantee the invariants by construction.
    pub(crate) fn new_unchecked(n_qubits: usize, mat: ComplexMatrix) -> Self {
        debug_assert_eq!(mat.rows(), 1 << n_qubits);
        Self { n_qubits, mat }
    }

    /// `|psi><psi|` for a normalized state vector.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: "power-of-two length".into(),
                found: dim.to_string(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi: Vec<C64> = amplitudes.iter().map(|z| z / norm).collect();
        Self::new(dim.trailing_zeros() as usize, ComplexMatrix::outer(&psi, &psi))
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Self {
        let dim = 1 << n_qubits;
        let mut mat = ComplexMatrix::zeros(dim, dim);
        mat[(index, index)] = C64::new(1.0, 0.0);
        Self { n_qubits, mat }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        Self { n_qubits, mat: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    /// `(1 - eps) * self + eps * other`
    pub fn mix(&self, other: &Self, eps: f64) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: format!("{} qubits", self.n_qubits),
                found: format!("{} qubits", other.n_qubits),
            });
        }
        let mut m = self.mat.scale_real(1.0 - eps);
        m.axpy(C64::new(eps, 0.0), &other.mat);
        Ok(Self { n_qubits: self.n_qubits, mat: m })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn purity(&self) -> f64 {
        self.mat.trace_product(&self.mat).re
    }

    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        op.trace_product(&self.mat)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        herm_eig(&self.mat).expect("density matrix is Hermitian").values
    }

    /// Conjugation `U rho U^dagger`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self { n_qubits: self.n_qubits, mat: u.matmul(&self.mat).matmul_adjoint(u) }
    }
}

/// Uhlmann fidelity `(tr sqrt(sqrt(sigma) rho sqrt(sigma)))^2`, clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("dim {}", rho.dim()),
            found: format!("dim {}", sigma.dim()),
        });
    }
    let root = matrix_sqrt_psd(sigma.matrix())?;
    let inner = root.matmul(rho.matrix()).matmul(&root).hermitian_part();
    let values = herm_eig(&inner)?.values;
    let tr_sqrt: f64 = values.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok((tr_sqrt * tr_sqrt).clamp(0.0, 1.0))
}

pub fn infidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(1.0 - fidelity(rho, sigma)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_examples() {
        let zero = DensityMatrix::basis_state(1, 0);
        let one = DensityMatrix::basis_state(1, 1);
        let mixed = DensityMatrix::maximally_mixed(1);
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-12);
        // closed form <0|sigma|0> for a pure first argument
        assert!((fidelity(&zero, &mixed).unwrap() - 0.5).abs() < 1e-12);
        assert!((fidelity(&mixed, &zero).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let a = DensityMatrix::maximally_mixed(1);
        let b = DensityMatrix::maximally_mixed(2);
        assert!(matches!(fidelity(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn validation() {
        let bad_trace = ComplexMatrix::identity(2);
        assert!(DensityMatrix::new(1, bad_trace).is_err());
        let negative = ComplexMatrix::diag_real(&[1.5, -0.5]);
        assert!(DensityMatrix::new(1, negative).is_err());
        let wrong_dim = ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
        assert!(DensityMatrix::new(1, wrong_dim).is_err());
        assert!(DensityMatrix::new(1, ComplexMatrix::diag_real(&[0.25, 0.75])).is_ok());
    }

    #[test]
    fn pure_state_normalizes() {
        let rho = DensityMatrix::pure(&[C64::new(3.0, 0.0), C64::new(0.0, 4.0)]).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!((rho.matrix()[(0, 0)].re - 0.36).abs() < 1e-12);
    }
}
