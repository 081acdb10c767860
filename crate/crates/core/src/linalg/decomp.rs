//! Spectral routines: Hermitian eigendecomposition, PSD square roots, null spaces.

use nalgebra::{SymmetricEigen, SVD};
use num_complex::Complex64 as C64;

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Tolerance for Hermiticity and the PSD noise floor.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues below this are a hard PSD violation; between it and zero they are clamped.
pub const PSD_CLAMP: f64 = -1e-8;
/// Default relative tolerance for null-space extraction.
pub const NULL_SPACE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct HermEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Columns are the eigenvectors.
    pub vectors: ComplexMatrix,
}

impl HermEig {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V f(diag(lambda)) V^dagger`
    pub fn map_spectrum<F: Fn(f64) -> f64>(&self, f: F) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let mut scaled = v.clone();
        for c in 0..n {
            let fv = f(self.values[c]);
            for r in 0..n {
                scaled[(r, c)] *= fv;
            }
        }
        scaled.matmul_adjoint(v)
    }
}

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            found: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    let scale = a.as_slice().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let asymmetry = a.hermitian_deviation();
    if asymmetry > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
pub fn herm_eig(a: &ComplexMatrix) -> Result<HermEig> {
    check_hermitian(a)?;
    let n = a.rows();
    if n == 0 {
        return Ok(HermEig { values: vec![], vectors: ComplexMatrix::zeros(0, 0) });
    }
    let eig = SymmetricEigen::new(a.hermitian_part().to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermEig { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn herm_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(herm_eig(a)?.values)
}

/// Principal square root of a Hermitian PSD matrix.
pub fn matrix_sqrt_psd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = herm_eig(a)?;
    let scale = eig.values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    if let Some(&min) = eig.values.first() {
        if min < PSD_CLAMP * scale {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
    }
    Ok(eig.map_spectrum(|v| v.max(0.0).sqrt()))
}

/// Singular values in descending order.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = SVD::new(a.to_nalgebra(), false, false).singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Orthonormal basis of right singular vectors whose singular values are at most `tol`.
pub fn null_space(a: &ComplexMatrix, tol: f64) -> Vec<Vec<C64>> {
    let n = a.cols();
    if n == 0 {
        return vec![];
    }
    // wide inputs get zero rows so the SVD sees every right singular direction
    let m = if a.rows() < n {
        ComplexMatrix::from_fn(n, n, |r, c| if r < a.rows() { a[(r, c)] } else { ZERO }).to_nalgebra()
    } else {
        a.to_nalgebra()
    };
    let svd = SVD::new(m, false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol)
        // column k of V is the conjugate of row k of V^dagger
        .map(|(k, _)| (0..n).map(|j| v_t[(k, j)].conj()).collect())
        .collect()
}

/// [`null_space`] with the tolerance scaled by the largest singular value.
pub fn null_space_relative(a: &ComplexMatrix, rtol: f64) -> Vec<Vec<C64>> {
    let smax = spectral_norm(a);
    if smax == 0.0 {
        return null_space(a, 0.0);
    }
    null_space(a, rtol * smax)
}
