//! Shadow distillation with cyclic shift operators.
//!
//! `tr[(A_1 (x) ... (x) A_k) S_k] = tr(A_1 A_2 ... A_k)`, so every term is a
//! product of `2m` small matrices and the `dim^(2m)` space is never built.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE, ZERO};
use crate::rng::{derive_seed, stream_rng};

use super::ShadowSet;

pub const MAX_DISTILL_ORDER: usize = 3;
pub const DEFAULT_DISTILL_TUPLES: usize = 10_000;
pub const MAX_SHIFT_DIM: usize = 4096;

/// Permutation `S |b_1 b_2 ... b_m> = |b_2 ... b_m b_1>` on `dim^m` states.
pub fn shift_operator(m: usize, dim: usize) -> Result<ComplexMatrix> {
    if m == 0 || dim == 0 {
        return Err(Error::BadParams { field: "m".into(), reason: "order and dimension must be positive".into() });
    }
    let total = (dim as u128).checked_pow(m as u32).filter(|&t| t <= MAX_SHIFT_DIM as u128).ok_or_else(|| {
        Error::TooLarge(format!("shift operator on {dim}^{m} states exceeds {MAX_SHIFT_DIM}"))
    })? as usize;
    let lead = total / dim;
    let mut s = ComplexMatrix::zeros(total, total);
    for b in 0..total {
        // drop the leading digit b_1 and append it at the end
        let shifted = (b % lead) * dim + b / lead;
        s[(shifted, b)] = ONE;
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistillConfig {
    /// Index tuples averaged per term; all tuples are used when there are fewer.
    pub max_tuples: usize,
    pub seed: u64,
}

impl Default for DistillConfig {
    fn default() -> Self {
        Self { max_tuples: DEFAULT_DISTILL_TUPLES, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistilledEstimate {
    pub value: f64,
    pub numerator: C64,
    pub denominator: f64,
    pub numerator_tuples: usize,
    pub exhaustive: bool,
}

fn ordered_tuple_count(n: usize, k: usize) -> Option<usize> {
    (0..k).try_fold(1usize, |acc, i| acc.checked_mul(n - i))
}

fn enumerate_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !cur.contains(&i) {
                cur.push(i);
                rec(n, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Distinct ordered index tuples: every one of them when few enough, otherwise a random sample.
fn index_tuples(n: usize, k: usize, max_tuples: usize, seed: u64) -> (Vec<Vec<usize>>, bool) {
    match ordered_tuple_count(n, k) {
        Some(c) if c <= max_tuples => (enumerate_tuples(n, k), true),
        _ => {
            let mut rng = stream_rng(seed, k as u64);
            ((0..max_tuples).map(|_| index::sample(&mut rng, n, k).into_vec()).collect(), false)
        }
    }
}

fn chain_trace(factors: &[&ComplexMatrix]) -> C64 {
    let (last, rest) = factors.split_last().expect("non-empty chain");
    match rest.split_first() {
        None => last.trace(),
        Some((first, mid)) => {
            let head = mid.iter().fold((*first).clone(), |acc, f| acc.matmul(f));
            head.trace_product(last)
        }
    }
}

/// Estimate of `tr(O1 rho^m O2 rho^m) / tr(rho^m)^2` with default tuple settings.
pub fn distilled_estimate(set: &ShadowSet, o1: &ComplexMatrix, o2: &ComplexMatrix, m: usize) -> Result<f64> {
    let seed = derive_seed(set.master_seed().unwrap_or(0), 0x6469_7374, m as u64);
    Ok(distilled_estimate_with(set, o1, o2, m, &DistillConfig { seed, ..DistillConfig::default() })?.value)
}

pub fn distilled_estimate_with(
    set: &ShadowSet,
    o1: &ComplexMatrix,
    o2: &ComplexMatrix,
    m: usize,
    config: &DistillConfig,
) -> Result<DistilledEstimate> {
    if m == 0 {
        return Err(Error::BadParams { field: "m".into(), reason: "distillation order must be at least 1".into() });
    }
    if m > MAX_DISTILL_ORDER {
        return Err(Error::TooLarge(format!("distillation order {m} exceeds {MAX_DISTILL_ORDER}")));
    }
    if config.max_tuples == 0 {
        return Err(Error::BadParams { field: "max_tuples".into(), reason: "must be at least 1".into() });
    }
    let n = set.n_unitaries();
    if n < 2 * m {
        return Err(Error::TooFewShadows { needed: 2 * m, have: n });
    }
    let d = set.dim();
    for o in [o1, o2] {
        if o.shape() != (d, d) {
            return Err(Error::DimensionMismatch { expected: format!("{d}x{d}"), found: format!("{}x{}", o.rows(), o.cols()) });
        }
    }
    let shadows = set.shadows();

    let (num_tuples, exhaustive) = index_tuples(n, 2 * m, config.max_tuples, config.seed);
    let mut numerator = ZERO;
    for t in &num_tuples {
        let mut chain: Vec<&ComplexMatrix> = Vec::with_capacity(2 * m + 2);
        chain.push(o1);
        chain.extend(t[..m].iter().map(|&i| &shadows[i]));
        chain.push(o2);
        chain.extend(t[m..].iter().map(|&i| &shadows[i]));
        numerator += chain_trace(&chain);
    }
    numerator /= num_tuples.len() as f64;

    let (den_tuples, _) = index_tuples(n, m, config.max_tuples, config.seed ^ 0x5eed);
    let mut power_trace = ZERO;
    for t in &den_tuples {
        let chain: Vec<&ComplexMatrix> = t.iter().map(|&i| &shadows[i]).collect();
        power_trace += chain_trace(&chain);
    }
    let power_trace = (power_trace / den_tuples.len() as f64).re;
    let denominator = power_trace * power_trace;

    Ok(DistilledEstimate {
        value: numerator.re / denominator,
        numerator,
        denominator,
        numerator_tuples: num_tuples.len(),
        exhaustive,
    })
}
