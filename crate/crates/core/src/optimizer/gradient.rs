//! Shift-rule and finite-difference derivatives.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::FrequencySet;
use crate::error::{Error, Result};
use crate::linalg::{C64, I};

use super::Objective;

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Spacing halvings tried before giving up on a singular shift system.
const MAX_SPACING_RETRIES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    /// Four-point rule on Pauli rotations, Vandermonde rule elsewhere.
    #[default]
    ParamShift,
    /// Vandermonde rule on every parameter.
    GeneralShift,
    FiniteDiff,
}

fn shifted(theta: &[f64], j: usize, s: f64) -> Vec<f64> {
    let mut t = theta.to_vec();
    t[j] += s;
    t
}

fn check_index<O: Objective + ?Sized>(objective: &O, theta: &[f64], j: usize) -> Result<()> {
    if theta.len() != objective.n_params() {
        return Err(Error::ParamLengthMismatch { block: "theta", expected: objective.n_params(), found: theta.len() });
    }
    if j >= theta.len() {
        return Err(Error::BadParams { field: "param_index".into(), reason: format!("{j} out of range 0..{}", theta.len()) });
    }
    Ok(())
}

/// `[C(+pi/4) - C(-pi/4)] - (sqrt2 - 1)/2 [C(+pi/2) - C(-pi/2)]` along `j`.
pub fn grad_param_shift<O: Objective + ?Sized>(objective: &O, theta: &[f64], j: usize, round: u64) -> Result<f64> {
    check_index(objective, theta, j)?;
    let freqs = objective.frequency_set(j)?;
    if !freqs.is_pauli_rotation() {
        return Err(Error::WrongFrequencySet { index: j, frequencies: freqs.values().to_vec() });
    }
    let c = |s: f64| objective.cost(&shifted(theta, j, s), round);
    let inner = c(FRAC_PI_4)? - c(-FRAC_PI_4)?;
    let outer = c(FRAC_PI_2)? - c(-FRAC_PI_2)?;
    Ok(inner - 0.5 * (SQRT_2 - 1.0) * outer)
}

/// Linear shift rule `dC/dtheta = sum_j weights[j] C(theta + shifts[j])` for a frequency set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftRule {
    pub shifts: Vec<f64>,
    pub weights: Vec<f64>,
    pub spacing: f64,
}

impl ShiftRule {
    /// Shifts `m * alpha` for `m = -(L-1)/2 ..= (L-1)/2`; weights from the Vandermonde system
    /// `Delta_{jk} = exp(i s_j w_k)`.
    pub fn new(freqs: &FrequencySet, alpha: f64) -> Result<Self> {
        let w = freqs.values();
        let l = w.len();
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::SingularSystem { spacing: alpha });
        }
        let nodes: Vec<C64> = w.iter().map(|&g| (I * alpha * g).exp()).collect();
        let min_gap = nodes
            .iter()
            .enumerate()
            .flat_map(|(p, a)| nodes[p + 1..].iter().map(move |b| (a - b).norm()))
            .fold(f64::INFINITY, f64::min);
        if min_gap < 1e-8 {
            return Err(Error::SingularSystem { spacing: alpha });
        }
        let shifts: Vec<f64> = (0..l).map(|j| (j as f64 - (l - 1) as f64 / 2.0) * alpha).collect();
        // weights solve Delta^T x = i w
        let delta_t = DMatrix::from_fn(l, l, |k, j| (I * shifts[j] * w[k]).exp());
        let rhs = nalgebra::DVector::from_iterator(l, w.iter().map(|&g| I * g));
        let x = delta_t.lu().solve(&rhs).ok_or(Error::SingularSystem { spacing: alpha })?;
        if x.iter().any(|z| !z.is_finite()) {
            return Err(Error::SingularSystem { spacing: alpha });
        }
        Ok(Self { shifts, weights: x.iter().map(|z| z.re).collect(), spacing: alpha })
    }

    /// Spacing `pi / (2 max|w|)`; for `{0, +-1, +-2}` this is `pi/4`.
    pub fn default_spacing(freqs: &FrequencySet) -> f64 {
        FRAC_PI_2 / freqs.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Default spacing, halved while the system is singular.
    pub fn for_frequencies(freqs: &FrequencySet) -> Result<Self> {
        let mut alpha = Self::default_spacing(freqs);
        let mut last = None;
        for _ in 0..=MAX_SPACING_RETRIES {
            match Self::new(freqs, alpha) {
                Ok(rule) => return Ok(rule),
                Err(e @ Error::SingularSystem { .. }) => {
                    last = Some(e);
                    alpha /= 2.0;
                }
                Err(e) => return Err(e),
            }
        }
        Err(last.unwrap_or(Error::SingularSystem { spacing: alpha }))
    }

    /// Applies the rule; shifts with negligible weight are skipped.
    pub fn apply<F: Fn(f64) -> Result<f64>>(&self, f: F) -> Result<f64> {
        let scale = self.weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        let mut acc = 0.0;
        for (&s, &w) in self.shifts.iter().zip(&self.weights) {
            if w.abs() > 1e-14 * scale {
                acc += w * f(s)?;
            }
        }
        Ok(acc)
    }
}

pub fn grad_general_shift<O: Objective + ?Sized>(
    objective: &O,
    theta: &[f64],
    j: usize,
    freqs: &FrequencySet,
    round: u64,
) -> Result<f64> {
    check_index(objective, theta, j)?;
    ShiftRule::for_frequencies(freqs)?.apply(|s| objective.cost(&shifted(theta, j, s), round))
}

pub fn grad_finite_diff<O: Objective + ?Sized>(objective: &O, theta: &[f64], j: usize, h: f64, round: u64) -> Result<f64> {
    check_index(objective, theta, j)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::BadParams { field: "fd_step".into(), reason: format!("step must be positive, got {h}") });
    }
    Ok((objective.cost(&shifted(theta, j, h), round)? - objective.cost(&shifted(theta, j, -h), round)?) / (2.0 * h))
}

fn grad_component<O: Objective + ?Sized>(objective: &O, theta: &[f64], j: usize, mode: GradientMode, round: u64) -> Result<f64> {
    match mode {
        GradientMode::FiniteDiff => grad_finite_diff(objective, theta, j, FD_STEP, round),
        GradientMode::GeneralShift => grad_general_shift(objective, theta, j, &objective.frequency_set(j)?, round),
        GradientMode::ParamShift => {
            let freqs = objective.frequency_set(j)?;
            if freqs.is_pauli_rotation() {
                grad_param_shift(objective, theta, j, round)
            } else {
                grad_general_shift(objective, theta, j, &freqs, round)
            }
        }
    }
}

/// Full gradient; components are evaluated in parallel.
pub fn grad_full<O: Objective + ?Sized>(objective: &O, theta: &[f64], mode: GradientMode, round: u64) -> Result<Vec<f64>> {
    if theta.len() != objective.n_params() {
        return Err(Error::ParamLengthMismatch { block: "theta", expected: objective.n_params(), found: theta.len() });
    }
    (0..theta.len()).into_par_iter().map(|j| grad_component(objective, theta, j, mode, round)).collect()
}
