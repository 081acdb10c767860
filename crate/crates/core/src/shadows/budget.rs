//! Measurement budgets for the quadratic cost estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{kraus_sum_form, LindbladSpec};
use crate::linalg::{frobenius_norm_sq, kron, spectral_norm, ComplexMatrix};

use super::{shift_operator, EnsembleKind};

pub const MAX_BUDGET_QUBITS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub samples: u64,
    /// `x` in `N = x / (eps^2 delta)`.
    pub prefactor: f64,
    pub operator_norm: f64,
    /// `tr(O^dagger O)`
    pub hs_norm_sq: f64,
    pub ensemble: EnsembleKind,
}

/// Two-copy observable `O = sum_ij (B_i^dagger B_j (x) A_j^dagger A_i) S` with
/// `tr(O rho (x) rho) = ||L(rho)||_F^2`.
pub fn cost_observable(spec: &LindbladSpec) -> Result<ComplexMatrix> {
    if spec.n_qubits() > MAX_BUDGET_QUBITS {
        return Err(Error::TooLarge(format!(
            "two-copy observable supports at most {MAX_BUDGET_QUBITS} qubits, got {}",
            spec.n_qubits()
        )));
    }
    let d = spec.dim();
    let terms = kraus_sum_form(spec).terms;
    let mut sum = ComplexMatrix::zeros(d * d, d * d);
    for (ai, bi) in &terms {
        for (aj, bj) in &terms {
            sum += &kron(&bi.dagger().matmul(bj), &aj.dagger().matmul(ai));
        }
    }
    Ok(sum.matmul(&shift_operator(2, d)?))
}

fn check_tolerances(eps: f64, delta: f64) -> Result<()> {
    for (name, v) in [("epsilon", eps), ("delta", delta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::BadTolerance(format!("{name} must lie in (0, 1), got {v}")));
        }
    }
    Ok(())
}

/// `ceil(x / (eps^2 delta))`, ignoring relative roundoff below 1e-9.
pub fn samples_for_prefactor(x: f64, eps: f64, delta: f64) -> Result<u64> {
    check_tolerances(eps, delta)?;
    let v = x / (eps * eps * delta);
    Ok((v - 1e-9 * v).ceil().max(0.0) as u64)
}

/// `(x, ||O||_inf, tr(O^dagger O))` for the given ensemble.
pub fn budget_prefactor(spec: &LindbladSpec, locality: usize, ensemble: EnsembleKind) -> Result<(f64, f64, f64)> {
    if locality == 0 {
        return Err(Error::BadParams { field: "locality".into(), reason: "must be at least 1".into() });
    }
    let o = cost_observable(spec)?;
    let op_norm = spectral_norm(&o);
    let hs = frobenius_norm_sq(&o);
    let x = match ensemble {
        EnsembleKind::LocalPauli => 4f64.powi(locality as i32) * op_norm * op_norm,
        EnsembleKind::GlobalClifford => (9.0 + 6.0 / spec.dim() as f64).sqrt() * hs,
    };
    Ok((x, op_norm, hs))
}

pub fn measurement_budget(
    spec: &LindbladSpec,
    locality: usize,
    eps: f64,
    delta: f64,
    ensemble: EnsembleKind,
) -> Result<Budget> {
    check_tolerances(eps, delta)?;
    let (x, operator_norm, hs_norm_sq) = budget_prefactor(spec, locality, ensemble)?;
    Ok(Budget { samples: samples_for_prefactor(x, eps, delta)?, prefactor: x, operator_norm, hs_norm_sq, ensemble })
}

/// Variance bound `4x^2/N^2 + 4x/N` of the pair estimator with `N` shadows.
pub fn variance_bound(x: f64, n: usize) -> f64 {
    let n = n as f64;
    4.0 * x * x / (n * n) + 4.0 * x / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{cost_exact, Convention};
    use crate::linalg::{sigma_minus, DensityMatrix, C64, ONE};
    use crate::models::{heisenberg_spec, ising_spec, ModelParams};
    use crate::rng::stream_rng;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn unit_constant_example() {
        assert_eq!(samples_for_prefactor(16.0, 0.1, 0.1).unwrap(), 16_000);
        assert_eq!(samples_for_prefactor(16.0, 0.05, 0.1).unwrap(), 64_000);
        assert_eq!(samples_for_prefactor(16.0, 0.1, 0.05).unwrap(), 32_000);
    }

    #[test]
    fn bad_tolerances() {
        for (e, d) in [(0.0, 0.1), (1.0, 0.1), (0.1, 0.0), (0.1, 1.5), (f64::NAN, 0.1)] {
            assert!(matches!(samples_for_prefactor(1.0, e, d), Err(Error::BadTolerance(_))));
        }
    }

    #[test]
    fn two_copy_observable_reproduces_the_cost() {
        let mut rng = stream_rng(40, 0);
        for spec in [
            ising_spec(&ModelParams::new(2, 0.4, vec![1.0, 0.5])).unwrap(),
            heisenberg_spec(&ModelParams::new(2, 1.3, vec![1.0])).unwrap(),
        ] {
            let o = cost_observable(&spec).unwrap();
            for _ in 0..5 {
                let a = ComplexMatrix::from_fn(4, 4, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                let m = a.matmul_adjoint(&a);
                let tr = m.trace();
                let rho = DensityMatrix::new(2, m.scale(ONE / tr).hermitian_part()).unwrap();
                let two = kron(rho.matrix(), rho.matrix());
                let v = o.trace_product(&two);
                let c = cost_exact(&spec, &rho).unwrap();
                assert!((v.re - c).abs() < 1e-10 && v.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn damping_budget() {
        let spec = LindbladSpec::new(1, ComplexMatrix::zeros(2, 2), vec![crate::lindblad::Jump { op: sigma_minus(), rate: 1.0 }], Convention::StandardGksl).unwrap();
        let b = measurement_budget(&spec, 2, 0.1, 0.1, EnsembleKind::LocalPauli).unwrap();
        assert!((b.prefactor - 16.0 * b.operator_norm * b.operator_norm).abs() < 1e-12);
        assert_eq!(b.samples, samples_for_prefactor(b.prefactor, 0.1, 0.1).unwrap());
        let c = measurement_budget(&spec, 2, 0.1, 0.1, EnsembleKind::GlobalClifford).unwrap();
        assert!((c.prefactor - 12f64.sqrt() * c.hs_norm_sq).abs() < 1e-12);
    }

    #[test]
    fn variance_bound_formula() {
        assert!((variance_bound(2.0, 4) - (4.0 * 4.0 / 16.0 + 2.0)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn budget_is_monotone(x in 0.1f64..100.0, e1 in 0.01f64..0.99, e2 in 0.01f64..0.99, d1 in 0.01f64..0.99, d2 in 0.01f64..0.99) {
            let (elo, ehi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let (dlo, dhi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            prop_assert!(samples_for_prefactor(x, elo, dlo).unwrap() >= samples_for_prefactor(x, ehi, dlo).unwrap());
            prop_assert!(samples_for_prefactor(x, elo, dlo).unwrap() >= samples_for_prefactor(x, elo, dhi).unwrap());
        }
    }
}
