//! Gradient-based minimization of the steady-state cost.

mod evaluator;
mod gradient;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzLayout, FrequencySet, ParamVector};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

pub use evaluator::{CostEvaluator, CostMode, ShadowConfig};
pub use gradient::{grad_finite_diff, grad_full, grad_general_shift, grad_param_shift, GradientMode, ShiftRule, FD_STEP};

/// A cost over a flat parameter vector.
///
/// `round` selects the random stream of stochastic objectives; evaluations
/// sharing a round share their randomness.
pub trait Objective: Sync {
    fn n_params(&self) -> usize;
    fn cost(&self, theta: &[f64], round: u64) -> Result<f64>;
    fn frequency_set(&self, index: usize) -> Result<FrequencySet>;
    fn is_stochastic(&self) -> bool {
        false
    }
}

type CostFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Objective from a closure, mainly for tests and synthetic costs.
pub struct FnObjective {
    n_params: usize,
    freqs: Vec<FrequencySet>,
    f: CostFn,
}

impl FnObjective {
    /// `freqs` holds one set per parameter, or a single set shared by all.
    pub fn new(n_params: usize, freqs: Vec<FrequencySet>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { n_params, freqs, f: Box::new(f) }
    }
}

impl Objective for FnObjective {
    fn n_params(&self) -> usize {
        self.n_params
    }

    fn cost(&self, theta: &[f64], _round: u64) -> Result<f64> {
        Ok((self.f)(theta))
    }

    fn frequency_set(&self, index: usize) -> Result<FrequencySet> {
        let k = if self.freqs.len() == 1 { 0 } else { index };
        self.freqs.get(k).cloned().ok_or_else(|| Error::BadParams {
            field: "param_index".into(),
            reason: format!("{index} out of range 0..{}", self.n_params),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Bfgs,
    GradientDescent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptConfig {
    pub method: Method,
    /// Initial step of the gradient-descent line search.
    pub learning_rate: f64,
    /// Stop once the cost drops below this value.
    pub epsilon: f64,
    pub max_iters: usize,
    pub gradient: GradientMode,
    /// Iterations with relative cost change below 1e-12 before giving up.
    pub stall_window: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            method: Method::Bfgs,
            learning_rate: 0.1,
            epsilon: 1e-9,
            max_iters: 2000,
            gradient: GradientMode::ParamShift,
            stall_window: 50,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::BadParams { field: "epsilon".into(), reason: format!("must be positive, got {}", self.epsilon) });
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::BadParams {
                field: "learning_rate".into(),
                reason: format!("must be positive, got {}", self.learning_rate),
            });
        }
        if self.stall_window == 0 {
            return Err(Error::BadParams { field: "stall_window".into(), reason: "must be at least 1".into() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    CostBelowEps,
    MaxIters,
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptRun {
    pub theta_star: Vec<f64>,
    pub final_cost: f64,
    /// Cost at the start point and after every accepted step.
    pub cost_history: Vec<f64>,
    /// Gradient norm at every point where a gradient was taken.
    pub grad_norm_history: Vec<f64>,
    pub terminated_by: Termination,
    pub iterations: usize,
    pub wall_time_secs: f64,
}

impl OptRun {
    pub fn theta(&self, layout: &AnsatzLayout) -> Result<ParamVector> {
        ParamVector::from_flat(layout, &self.theta_star)
    }
}

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
const STALL_RTOL: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct InverseHessian {
    n: usize,
    h: Vec<f64>,
    fresh: bool,
}

impl InverseHessian {
    fn new(n: usize) -> Self {
        let mut s = Self { n, h: vec![0.0; n * n], fresh: true };
        s.reset();
        s
    }

    fn reset(&mut self) {
        self.h.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            self.h[i * self.n + i] = 1.0;
        }
        self.fresh = true;
    }

    fn direction(&self, g: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| -dot(&self.h[i * self.n..(i + 1) * self.n], g)).collect()
    }

    fn update(&mut self, s: &[f64], y: &[f64]) {
        let n = self.n;
        let sy = dot(s, y);
        if !(sy > 1e-12 * norm(s) * norm(y)) {
            return;
        }
        if self.fresh {
            // scale the identity before the first update
            let gamma = sy / dot(y, y);
            self.h.iter_mut().for_each(|v| *v *= gamma);
            self.fresh = false;
        }
        let rho = 1.0 / sy;
        let hy: Vec<f64> = (0..n).map(|i| dot(&self.h[i * n..(i + 1) * n], y)).collect();
        let yhy = dot(y, &hy);
        // H += rho((1 + rho yHy) s s^T - Hy s^T - s (Hy)^T)
        for i in 0..n {
            for j in 0..n {
                self.h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
            }
        }
    }
}

/// Minimizes `objective` from `theta0` until the cost drops below `epsilon`,
/// `max_iters` steps are taken, or progress stalls.
pub fn run_optimization<O: Objective + ?Sized>(objective: &O, config: &OptConfig, theta0: &[f64]) -> Result<OptRun> {
    config.validate()?;
    if theta0.len() != objective.n_params() {
        return Err(Error::ParamLengthMismatch { block: "theta", expected: objective.n_params(), found: theta0.len() });
    }
    let start = Instant::now();
    let n = theta0.len();
    let mut x = theta0.to_vec();
    let mut f = objective.cost(&x, 0)?;
    let mut cost_history = vec![f];
    let mut grad_norm_history = Vec::new();
    let mut hess = InverseHessian::new(n);
    let mut stall = 0usize;
    let mut iterations = 0usize;
    let mut grad: Option<Vec<f64>> = None;

    let finish = |x: Vec<f64>, f: f64, ch, gh, t, it| OptRun {
        theta_star: x,
        final_cost: f,
        cost_history: ch,
        grad_norm_history: gh,
        terminated_by: t,
        iterations: it,
        wall_time_secs: start.elapsed().as_secs_f64(),
    };

    let terminated_by = loop {
        if f < config.epsilon {
            break Termination::CostBelowEps;
        }
        if iterations >= config.max_iters {
            break Termination::MaxIters;
        }
        let round = iterations as u64;
        if objective.is_stochastic() && iterations > 0 {
            f = objective.cost(&x, round)?;
            grad = None;
        }
        let g = match grad.take() {
            Some(g) => g,
            None => {
                let g = grad_full(objective, &x, config.gradient, round)?;
                grad_norm_history.push(norm(&g));
                g
            }
        };

        let (mut d, initial_step) = match config.method {
            Method::Bfgs => (hess.direction(&g), 1.0),
            Method::GradientDescent => (g.iter().map(|v| -v).collect::<Vec<_>>(), config.learning_rate),
        };
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            hess.reset();
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        if slope == 0.0 {
            break Termination::Stalled;
        }

        let mut step = initial_step;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            let ft = objective.cost(&trial, round)?;
            if ft <= f + ARMIJO_C1 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        let Some((x_new, f_new)) = accepted else {
            if config.method == Method::Bfgs && !hess.fresh {
                hess.reset();
                grad = Some(g);
                continue;
            }
            break Termination::Stalled;
        };

        let rel = (f - f_new).abs() / f.abs().max(f64::MIN_POSITIVE);
        stall = if rel < STALL_RTOL { stall + 1 } else { 0 };

        if config.method == Method::Bfgs && f_new >= config.epsilon && !objective.is_stochastic() {
            let g_new = grad_full(objective, &x_new, config.gradient, round + 1)?;
            grad_norm_history.push(norm(&g_new));
            let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            hess.update(&s, &y);
            grad = Some(g_new);
        }
        x = x_new;
        f = f_new;
        cost_history.push(f);
        if stall >= config.stall_window {
            break Termination::Stalled;
        }
    };
    log::debug!("optimization finished after {iterations} iterations: cost {f:.3e} ({terminated_by:?})");
    Ok(finish(x, f, cost_history, grad_norm_history, terminated_by, iterations))
}

/// Random start points, point `k` drawn from stream `k` of `seed`.
pub fn random_starts(layout: &AnsatzLayout, count: usize, scale: f64, seed: u64) -> Vec<Vec<f64>> {
    (0..count).map(|k| ParamVector::random(layout, scale, &mut stream_rng(seed, k as u64)).to_flat()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiStart {
    pub runs: Vec<OptRun>,
    /// Index of the lowest final cost; the earliest wins ties.
    pub best: usize,
}

impl MultiStart {
    pub fn best_run(&self) -> &OptRun {
        &self.runs[self.best]
    }
}

/// Runs every start point in parallel and keeps all results.
pub fn run_multistart<O: Objective + ?Sized>(objective: &O, config: &OptConfig, starts: &[Vec<f64>]) -> Result<MultiStart> {
    if starts.is_empty() {
        return Err(Error::Empty("start points"));
    }
    let runs: Vec<OptRun> = starts.par_iter().map(|t| run_optimization(objective, config, t)).collect::<Result<_>>()?;
    let best = runs
        .iter()
        .enumerate()
        .fold(0, |b, (k, r)| if r.final_cost < runs[b].final_cost { k } else { b });
    Ok(MultiStart { runs, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{standard_layout, INIT_SCALE};
    use crate::lindblad::{exact_steady_state, LindbladSpec};
    use crate::linalg::infidelity;
    use crate::models::{ising_spec, ModelParams};
    use crate::rng::stream_rng;

    fn ising(g: f64) -> LindbladSpec {
        ising_spec(&ModelParams::new(2, g, vec![1.0, 0.5])).unwrap()
    }

    fn bowl() -> FnObjective {
        FnObjective::new(2, vec![FrequencySet::pauli_rotation()], |t: &[f64]| {
            (1.0 - t[0].cos()) + 2.0 * (1.0 - (t[1] - 0.3).cos()) + 0.5 * (1.0 - (2.0 * t[0]).cos())
        })
    }

    #[test]
    fn starting_at_the_optimum_returns_immediately() {
        let run = run_optimization(&bowl(), &OptConfig::default(), &[0.0, 0.3]).unwrap();
        assert_eq!(run.terminated_by, Termination::CostBelowEps);
        assert_eq!(run.cost_history.len(), 1);
        assert_eq!(run.iterations, 0);
    }

    #[test]
    fn both_methods_minimize_a_trigonometric_bowl() {
        for method in [Method::Bfgs, Method::GradientDescent] {
            let cfg = OptConfig { method, learning_rate: 0.5, epsilon: 1e-12, max_iters: 5000, ..OptConfig::default() };
            let run = run_optimization(&bowl(), &cfg, &[0.9, -0.8]).unwrap();
            assert_eq!(run.terminated_by, Termination::CostBelowEps, "{method:?}");
            assert!((run.theta_star[1] - 0.3).abs() < 1e-5);
        }
    }

    #[test]
    fn gradient_descent_never_increases_the_cost() {
        let layout = standard_layout(2, 1, 1).unwrap();
        let ev = CostEvaluator::exact(ising(0.5), layout.clone()).unwrap();
        let theta0 = ParamVector::random(&layout, 1.0, &mut stream_rng(70, 0)).to_flat();
        let cfg = OptConfig { method: Method::GradientDescent, learning_rate: 1.0, max_iters: 60, ..OptConfig::default() };
        let run = run_optimization(&ev, &cfg, &theta0).unwrap();
        assert!(run.cost_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(run.cost_history.last().unwrap() < &run.cost_history[0]);
    }

    #[test]
    fn max_iters_and_bad_config() {
        let run = run_optimization(&bowl(), &OptConfig { max_iters: 1, ..OptConfig::default() }, &[1.0, 1.0]).unwrap();
        assert_eq!(run.terminated_by, Termination::MaxIters);
        assert_eq!(run.iterations, 1);
        assert!(run_optimization(&bowl(), &OptConfig { epsilon: 0.0, ..OptConfig::default() }, &[1.0, 1.0]).is_err());
        assert!(run_optimization(&bowl(), &OptConfig::default(), &[1.0]).is_err());
    }

    #[test]
    fn shift_gradients_match_finite_differences_on_the_ansatz() {
        let layout = standard_layout(2, 2, 2).unwrap();
        let ev = CostEvaluator::exact(ising(1.0), layout.clone()).unwrap();
        let mut rng = stream_rng(71, 0);
        for _ in 0..5 {
            let theta = ParamVector::random(&layout, 3.0, &mut rng).to_flat();
            let shift = grad_full(&ev, &theta, GradientMode::ParamShift, 0).unwrap();
            let general = grad_full(&ev, &theta, GradientMode::GeneralShift, 0).unwrap();
            let fd = grad_full(&ev, &theta, GradientMode::FiniteDiff, 0).unwrap();
            for j in 0..theta.len() {
                assert!((shift[j] - fd[j]).abs() < 1e-6, "param {j}: {} vs {}", shift[j], fd[j]);
                assert!((shift[j] - general[j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn four_point_rule_rejects_cry_parameters() {
        let layout = standard_layout(2, 1, 1).unwrap();
        let ev = CostEvaluator::exact(ising(1.0), layout.clone()).unwrap();
        let cry = (0..layout.total_params()).find(|&j| !ev.frequency_set(j).unwrap().is_pauli_rotation()).unwrap();
        let theta = vec![0.2; layout.total_params()];
        assert!(matches!(grad_param_shift(&ev, &theta, cry, 0), Err(Error::WrongFrequencySet { .. })));
    }

    #[test]
    fn single_parameter_gradient() {
        let f = FnObjective::new(1, vec![FrequencySet::pauli_rotation()], |t: &[f64]| (2.0 * t[0]).sin());
        let g = grad_full(&f, &[0.4], GradientMode::ParamShift, 0).unwrap();
        assert_eq!(g, vec![grad_param_shift(&f, &[0.4], 0, 0).unwrap()]);
    }

    #[test]
    fn multistart_is_deterministic_and_finds_the_steady_state() {
        let layout = standard_layout(2, 2, 2).unwrap();
        let spec = ising(0.5);
        let ev = CostEvaluator::exact(spec.clone(), layout.clone()).unwrap();
        let starts = random_starts(&layout, 4, std::f64::consts::PI, 5);
        let cfg = OptConfig::default();
        let a = run_multistart(&ev, &cfg, &starts).unwrap();
        let b = run_multistart(&ev, &cfg, &starts).unwrap();
        for (ra, rb) in a.runs.iter().zip(&b.runs) {
            assert_eq!(ra.theta_star, rb.theta_star);
            assert_eq!(ra.cost_history, rb.cost_history);
        }
        let best = a.best_run();
        let rho = ev.state(&best.theta(&layout).unwrap()).unwrap();
        let oracle = exact_steady_state(&spec).unwrap();
        assert!(infidelity(&rho, &oracle).unwrap() < 1e-4, "cost {}", best.final_cost);
    }

    #[test]
    fn start_points_are_reproducible() {
        let layout = standard_layout(2, 1, 1).unwrap();
        assert_eq!(random_starts(&layout, 3, INIT_SCALE, 9), random_starts(&layout, 3, INIT_SCALE, 9));
        let s = random_starts(&layout, 3, INIT_SCALE, 9);
        assert!(s.iter().flatten().all(|v| v.abs() <= INIT_SCALE));
        assert_ne!(s[0], s[1]);
    }
}
