//! Dense complex linear algebra and quantum-state primitives.

mod decomp;
mod matrix;
mod pauli;
mod state;

pub use decomp::{
    herm_eig, herm_eigenvalues, matrix_sqrt_psd, null_space, null_space_relative, singular_values,
    spectral_norm, HermEig, HERMITIAN_TOL, NULL_SPACE_RTOL, PSD_CLAMP,
};
pub use matrix::{frobenius_norm, frobenius_norm_sq, kron, kron_all, vec_norm, ComplexMatrix, I, ONE, ZERO};
pub use pauli::{pauli_matrix, Pauli, PauliString, Phase};
pub use state::{fidelity, infidelity, DensityMatrix};

pub use num_complex::Complex64 as C64;

/// Lowering operator `|0><1|`.
pub fn sigma_minus() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[&[ZERO, ONE], &[ZERO, ZERO]])
}

/// Places a single-site operator on `site` of an `n`-qubit register (site 0 is the leftmost factor).
pub fn embed_site(op: &ComplexMatrix, site: usize, n: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let factors: Vec<&ComplexMatrix> = (0..n).map(|i| if i == site { op } else { &id }).collect();
    kron_all(factors)
}
