//! Shadow estimators for linear and quadratic functionals of the state.

use crate::error::{Error, Result};
use crate::lindblad::{apply_lindbladian, kraus_sum_form, LindbladSpec};
use crate::linalg::{ComplexMatrix, C64, ZERO};

use super::ShadowSet;

fn check_operator(set: &ShadowSet, op: &ComplexMatrix) -> Result<()> {
    let d = set.dim();
    if op.shape() != (d, d) {
        return Err(Error::DimensionMismatch { expected: format!("{d}x{d}"), found: format!("{}x{}", op.rows(), op.cols()) });
    }
    Ok(())
}

fn require_pairs(set: &ShadowSet) -> Result<()> {
    if set.n_unitaries() < 2 {
        return Err(Error::TooFewShadows { needed: 2, have: set.n_unitaries() });
    }
    Ok(())
}

fn pair_norm(n: usize) -> f64 {
    (n * (n - 1)) as f64
}

/// U-statistic `(1/(N(N-1))) sum_{i != j} tr(O1 r_i O2 r_j)` over all ordered pairs.
///
/// The pair sum is `tr(O1 S O2 S) - sum_i tr(O1 r_i O2 r_i)` with `S = sum_i r_i`,
/// so the cost is linear in `N`.
pub fn estimate_quadratic(set: &ShadowSet, o1: &ComplexMatrix, o2: &ComplexMatrix) -> Result<C64> {
    require_pairs(set)?;
    check_operator(set, o1)?;
    check_operator(set, o2)?;
    let d = set.dim();
    let mut total = ComplexMatrix::zeros(d, d);
    let mut diagonal = ZERO;
    for r in set.shadows() {
        total += r;
        diagonal += o1.matmul(r).trace_product(&o2.matmul(r));
    }
    let full = o1.matmul(&total).trace_product(&o2.matmul(&total));
    Ok((full - diagonal) / pair_norm(set.n_unitaries()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    pub value: f64,
    /// Imaginary part of the pair sum; roundoff only.
    pub imaginary: f64,
}

/// Pair average of `tr(L(r_i) L(r_j)^dagger)` over `i != j`.
pub fn estimate_cost_detailed(set: &ShadowSet, spec: &LindbladSpec) -> Result<CostEstimate> {
    require_pairs(set)?;
    let d = set.dim();
    let mut total = ComplexMatrix::zeros(d, d);
    let mut diagonal = ZERO;
    for r in set.shadows() {
        let l = apply_lindbladian(spec, r)?;
        diagonal += l.trace_product(&l.dagger());
        total += &l;
    }
    let z = (total.trace_product(&total.dagger()) - diagonal) / pair_norm(set.n_unitaries());
    Ok(CostEstimate { value: z.re, imaginary: z.im })
}

pub fn estimate_cost(set: &ShadowSet, spec: &LindbladSpec) -> Result<f64> {
    let est = estimate_cost_detailed(set, spec)?;
    if est.imaginary.abs() > 1e-9 * (1.0 + est.value.abs()) {
        log::warn!("cost estimate has imaginary residue {:.3e}", est.imaginary);
    } else {
        log::debug!("cost estimate imaginary residue {:.3e}", est.imaginary);
    }
    Ok(est.value)
}

/// Cost as a sum of quadratic estimates over operator-sum term pairs:
/// `sum_{ij} tr(A_j^dagger A_i r B_i^dagger B_j r')`.
pub fn estimate_cost_expanded(set: &ShadowSet, spec: &LindbladSpec) -> Result<C64> {
    require_pairs(set)?;
    if spec.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} qubits", set.n_qubits()),
            found: format!("{} qubits", spec.n_qubits()),
        });
    }
    let terms = kraus_sum_form(spec).terms;
    let mut acc = ZERO;
    for (ai, bi) in &terms {
        for (aj, bj) in &terms {
            acc += estimate_quadratic(set, &aj.dagger().matmul(ai), &bi.dagger().matmul(bj))?;
        }
    }
    Ok(acc)
}

/// Mean of `Re tr(O r_i)`.
pub fn estimate_observable(set: &ShadowSet, op: &ComplexMatrix) -> Result<f64> {
    if set.n_unitaries() == 0 {
        return Err(Error::Empty("shadow set"));
    }
    check_operator(set, op)?;
    let sum: f64 = set.shadows().iter().map(|r| op.trace_product(r).re).sum();
    Ok(sum / set.n_unitaries() as f64)
}
