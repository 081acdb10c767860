//! Subcommand implementations.

use std::time::Instant;

use serde::Serialize;

use ness_core::ansatz::{build_unitary, Block, ParamVector};
use ness_core::lindblad::{cost_exact, exact_steady_state, residual_norm, LindbladSpec};
use ness_core::linalg::{herm_eigenvalues, infidelity, ComplexMatrix, DensityMatrix, C64};
use ness_core::optimizer::{
    grad_finite_diff, grad_full, random_starts, run_multistart, run_optimization, CostEvaluator, CostMode, GradientMode,
    OptRun, Termination,
};
use ness_core::rng::{derive_seed, stream_rng};
use ness_core::shadows::{
    budget_prefactor, distilled_estimate_with, estimate_cost, estimate_observable, variance_bound, DistillConfig,
    EnsembleKind, ShadowSet,
};

use crate::config::{ModeKind, RunConfig};
use crate::error::CliError;
use crate::output::{num, write_json, CsvSink, Provenance};

const STARTS_LABEL: u64 = 0x7374_6172;
const COST_SHADOW_LABEL: u64 = 0x636f_7374;
const OBSERVABLE_LABEL: u64 = 0x6f62_7376;
const SWEEP_LABEL: u64 = 0x7377_6570;
const GRADCHECK_LABEL: u64 = 0x6772_6164;
const BENCH_STATE_LABEL: u64 = 0x6265_6e63;
const BENCH_VARIANCE_LABEL: u64 = 0x7661_7269;
const BENCH_DISTILL_LABEL: u64 = 0x6469_7374;

#[derive(Debug, Clone, Serialize)]
pub struct ObservableValue {
    pub name: String,
    /// `tr(O rho(theta*))`
    pub exact: f64,
    /// Same quantity from a fresh shadow set; shadow mode only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shadow: Option<f64>,
    /// Value in the exact steady state.
    pub steady_state: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub theta_star: Vec<f64>,
    /// Objective value at `theta_star` as seen by the optimizer.
    pub final_cost: f64,
    pub exact_cost: f64,
    pub infidelity: f64,
    pub terminated_by: Termination,
    pub iterations: usize,
    pub restarts: usize,
    pub best_restart: usize,
    pub warm_started: bool,
    pub cost_history: Vec<f64>,
    pub grad_norm_history: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
    pub observables: Vec<ObservableValue>,
}

#[derive(Serialize)]
struct SolveFile<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a>,
    result: &'a RunSummary,
}

fn expectation(rho: &DensityMatrix, op: &ComplexMatrix) -> f64 {
    rho.expectation(op).re
}

fn evaluator(cfg: &RunConfig, spec: LindbladSpec, seed: u64) -> Result<CostEvaluator, CliError> {
    Ok(CostEvaluator::new(spec, cfg.layout()?, cfg.cost_mode(derive_seed(seed, COST_SHADOW_LABEL, 0)))?)
}

fn multistart(ev: &CostEvaluator, cfg: &RunConfig, seed: u64) -> Result<(OptRun, usize, usize), CliError> {
    let starts = random_starts(ev.layout(), cfg.search.restarts, cfg.search.init_scale, derive_seed(seed, STARTS_LABEL, 0));
    let ms = run_multistart(ev, &cfg.optimizer, &starts)?;
    log::info!(
        "restart costs: {:?}",
        ms.runs.iter().map(|r| format!("{:.2e}", r.final_cost)).collect::<Vec<_>>()
    );
    Ok((ms.best_run().clone(), ms.runs.len(), ms.best))
}

/// One optimization for `cfg` against its exact steady state.
pub fn solve_point(cfg: &RunConfig, seed: u64, warm: Option<&[f64]>) -> Result<RunSummary, CliError> {
    let clock = Instant::now();
    let spec = cfg.spec()?;
    let oracle = exact_steady_state(&spec)?;
    let ops = cfg.observable_ops()?;
    let ev = evaluator(cfg, spec.clone(), seed)?;

    let mut warm_started = false;
    let mut picked = None;
    if let Some(theta0) = warm {
        let run = run_optimization(&ev, &cfg.optimizer, theta0)?;
        if run.terminated_by == Termination::CostBelowEps {
            warm_started = true;
            picked = Some((run, 1, 0));
        } else {
            log::info!("warm start stopped at cost {:.3e} ({:?}); running restarts", run.final_cost, run.terminated_by);
        }
    }
    let (run, restarts, best_restart) = match picked {
        Some(p) => p,
        None => multistart(&ev, cfg, seed)?,
    };

    let theta = run.theta(ev.layout())?;
    let rho = ev.state(&theta)?;
    let exact_cost = cost_exact(&spec, &rho)?;
    let infid = infidelity(&rho, &oracle)?.clamp(0.0, 1.0);
    let shadow_set = match ev.mode() {
        CostMode::Shadow(sc) => Some(ShadowSet::sample(
            &rho,
            sc.ensemble,
            sc.n_unitaries,
            sc.shots_per_unitary,
            derive_seed(seed, OBSERVABLE_LABEL, 0),
        )?),
        CostMode::Exact => None,
    };
    let observables = ops
        .iter()
        .map(|(name, op)| {
            Ok(ObservableValue {
                name: name.clone(),
                exact: expectation(&rho, op),
                shadow: shadow_set.as_ref().map(|s| estimate_observable(s, op)).transpose()?,
                steady_state: expectation(&oracle, op),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let wall = clock.elapsed().as_secs_f64();
    Ok(RunSummary {
        final_cost: run.final_cost,
        exact_cost,
        infidelity: infid,
        terminated_by: run.terminated_by,
        iterations: run.iterations,
        restarts,
        best_restart,
        warm_started,
        wall_time_secs: cfg.output.timing.then_some(wall),
        observables,
        theta_star: run.theta_star,
        cost_history: run.cost_history,
        grad_norm_history: run.grad_norm_history,
    })
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let summary = solve_point(cfg, cfg.seed, None)?;
    log::info!("cost {:.3e}, infidelity {:.3e}", summary.exact_cost, summary.infidelity);
    write_json(
        cfg.output.path.as_deref(),
        &SolveFile { provenance: Provenance::new("solve", cfg), result: &summary },
    )?;
    Ok(summary)
}

/// One row per grid point, written as soon as the point finishes.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<Vec<RunSummary>, CliError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("`sweep`: section missing".into()))?;
    let mut header = vec![sweep.parameter.clone(), "cost".into(), "infidelity".into()];
    header.extend(cfg.observables.iter().cloned());
    header.extend(["iterations".into(), "terminated_by".into(), "wall_time_secs".into()]);
    let mut sink = CsvSink::create(cfg.output.path.as_deref(), &Provenance::new("sweep", cfg), &header)?;

    let mut out = Vec::with_capacity(sweep.values.len());
    let mut previous: Option<Vec<f64>> = None;
    for (k, &value) in sweep.values.iter().enumerate() {
        let point = cfg.with_parameter(&sweep.parameter, value)?;
        let warm = if sweep.warm_start { previous.as_deref() } else { None };
        let s = solve_point(&point, derive_seed(cfg.seed, SWEEP_LABEL, k as u64), warm)?;
        log::info!("{} = {value}: cost {:.3e}, infidelity {:.3e}", sweep.parameter, s.exact_cost, s.infidelity);
        let mut row = vec![num(value), num(s.exact_cost), num(s.infidelity)];
        row.extend(s.observables.iter().map(|o| num(o.exact)));
        row.extend([
            s.iterations.to_string(),
            serde_json::to_value(s.terminated_by)?.as_str().unwrap_or_default().to_string(),
            s.wall_time_secs.map(num).unwrap_or_default(),
        ]);
        sink.row(&row)?;
        previous = Some(s.theta_star.clone());
        out.push(s);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixParts {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixParts {
    fn of(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| (0..m.rows()).map(|r| m.row(r).iter().map(f).collect()).collect();
        Self { re: rows(|z| z.re), im: rows(|z| z.im) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub n_qubits: usize,
    pub residual: f64,
    pub eigenvalues: Vec<f64>,
    pub purity: f64,
    pub state: MatrixParts,
    pub observables: Vec<(String, f64)>,
}

#[derive(Serialize)]
struct OracleFile<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a>,
    result: &'a OracleReport,
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<OracleReport, CliError> {
    let spec = cfg.spec()?;
    let rho = exact_steady_state(&spec)?;
    let report = OracleReport {
        n_qubits: spec.n_qubits(),
        residual: residual_norm(&spec, &rho)?,
        eigenvalues: herm_eigenvalues(rho.matrix())?,
        purity: rho.purity(),
        state: MatrixParts::of(rho.matrix()),
        observables: cfg.observable_ops()?.iter().map(|(n, op)| (n.clone(), expectation(&rho, op))).collect(),
    };
    log::info!("steady state residual {:.3e}", report.residual);
    write_json(cfg.output.path.as_deref(), &OracleFile { provenance: Provenance::new("oracle", cfg), result: &report })?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckReport {
    pub gradient: GradientMode,
    pub fd_step: f64,
    pub n_params: usize,
    pub samples: usize,
    /// Largest component deviation at each sample point.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Serialize)]
struct GradcheckFile<'a> {
    #[serde(flatten)]
    provenance: Provenance<'a>,
    result: &'a GradcheckReport,
}

/// Compares the configured gradient against central differences.
pub fn cmd_gradcheck(cfg: &RunConfig) -> Result<GradcheckReport, CliError> {
    if cfg.cost.mode != ModeKind::Exact {
        return Err(CliError::Config("`cost.mode`: gradcheck needs exact mode".into()));
    }
    let gc = &cfg.gradcheck;
    let ev = evaluator(cfg, cfg.spec()?, cfg.seed)?;
    let layout = ev.layout().clone();
    let seed = derive_seed(cfg.seed, GRADCHECK_LABEL, 0);
    let mut deviations = Vec::with_capacity(gc.samples);
    for r in 0..gc.samples {
        let theta = ParamVector::random(&layout, gc.theta_scale, &mut stream_rng(seed, r as u64)).to_flat();
        let g = grad_full(&ev, &theta, cfg.optimizer.gradient, 0)?;
        let mut dev = 0.0f64;
        for (j, gj) in g.iter().enumerate() {
            dev = dev.max((gj - grad_finite_diff(&ev, &theta, j, gc.fd_step, 0)?).abs());
        }
        deviations.push(dev);
    }
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    let report = GradcheckReport {
        gradient: cfg.optimizer.gradient,
        fd_step: gc.fd_step,
        n_params: layout.total_params(),
        samples: gc.samples,
        deviations,
        max_deviation,
        tolerance: gc.tolerance,
        pass: max_deviation <= gc.tolerance,
    };
    write_json(cfg.output.path.as_deref(), &GradcheckFile { provenance: Provenance::new("gradcheck", cfg), result: &report })?;
    if !report.pass {
        return Err(CliError::Threshold(format!(
            "gradient deviation {max_deviation:.3e} exceeds {:.3e}",
            gc.tolerance
        )));
    }
    Ok(report)
}

/// One line of the shadow benchmark table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchRow {
    pub test: &'static str,
    pub parameter: &'static str,
    pub value: f64,
    pub mean: Option<f64>,
    pub std_error: Option<f64>,
    pub reference: Option<f64>,
    pub bias: Option<f64>,
    pub variance: Option<f64>,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
    pub pass: bool,
}

impl BenchRow {
    pub const HEADER: [&'static str; 11] =
        ["test", "parameter", "value", "mean", "std_error", "reference", "bias", "variance", "bound", "ratio", "pass"];

    fn fields(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        vec![
            self.test.into(),
            self.parameter.into(),
            num(self.value),
            opt(self.mean),
            opt(self.std_error),
            opt(self.reference),
            opt(self.bias),
            opt(self.variance),
            opt(self.bound),
            opt(self.ratio),
            self.pass.to_string(),
        ]
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// `(1 - eps) |psi><psi| + eps (I - |psi><psi|) / (d - 1)`
fn noisy_pure_state(psi: &[C64], n_qubits: usize, eps: f64) -> Result<(DensityMatrix, ComplexMatrix), CliError> {
    let d = psi.len();
    let proj = ComplexMatrix::outer(psi, psi);
    let rest = &ComplexMatrix::identity(d) - &proj;
    let rho = &proj.scale_real(1.0 - eps) + &rest.scale_real(eps / (d as f64 - 1.0));
    Ok((DensityMatrix::new(n_qubits, rho)?, proj))
}

/// `tr(O rho^m O rho^m) / tr(rho^m)^2`
fn distilled_dense(rho: &ComplexMatrix, obs: &ComplexMatrix, m: usize) -> f64 {
    let mut p = ComplexMatrix::identity(rho.rows());
    for _ in 0..m {
        p = p.matmul(rho);
    }
    obs.matmul(&p).matmul(obs).trace_product(&p).re / p.trace().re.powi(2)
}

pub fn shadowbench_rows(cfg: &RunConfig) -> Result<Vec<BenchRow>, CliError> {
    let sb = &cfg.shadowbench;
    let spec = cfg.spec()?;
    let layout = cfg.layout()?;
    let n = spec.n_qubits();
    let ensemble = cfg.cost.ensemble;
    let mut rows = Vec::new();

    let theta = ParamVector::random(&layout, cfg.search.init_scale, &mut stream_rng(derive_seed(cfg.seed, BENCH_STATE_LABEL, 0), 0));
    let ev = CostEvaluator::exact(spec.clone(), layout.clone())?;
    let rho = ev.state(&theta)?;
    let reference = cost_exact(&spec, &rho)?;
    let locality = sb.locality.unwrap_or(2 * n);
    let (x, _, _) = budget_prefactor(&spec, locality, ensemble)?;
    let mut variances: Vec<(usize, f64)> = Vec::new();
    for (k, &size) in sb.n_grid.iter().enumerate() {
        let seed = derive_seed(cfg.seed, BENCH_VARIANCE_LABEL, k as u64);
        let estimates = (0..sb.repeats)
            .map(|r| {
                let set = ShadowSet::sample(&rho, ensemble, size, sb.shots_per_unitary, derive_seed(seed, r as u64, 0))?;
                estimate_cost(&set, &spec)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let (mean, var) = mean_var(&estimates);
        let se = (var / sb.repeats as f64).sqrt();
        let bound = variance_bound(x, size);
        let bias = mean - reference;
        rows.push(BenchRow {
            test: "cost",
            parameter: "N",
            value: size as f64,
            mean: Some(mean),
            std_error: Some(se),
            reference: Some(reference),
            bias: Some(bias),
            variance: Some(var),
            bound: Some(bound),
            ratio: None,
            pass: bias.abs() <= 3.0 * se && var <= bound,
        });
        if let Some(&(prev_n, prev_var)) = variances.last() {
            let ratio = var / prev_var;
            let ideal = prev_n as f64 / size as f64;
            rows.push(BenchRow {
                test: "variance_ratio",
                parameter: "N",
                value: size as f64,
                ratio: Some(ratio),
                reference: Some(ideal),
                pass: (0.6 * ideal..=1.6 * ideal).contains(&ratio),
                ..Default::default()
            });
        }
        variances.push((size, var));
    }

    // pure target with depolarizing-style noise spread over its complement
    let psi = build_unitary(&layout, Block::Uv, &theta)?.column(0);
    let (noisy, proj) = noisy_pure_state(&psi, n, sb.noise)?;
    let obs = &proj.scale_real(2.0) - &ComplexMatrix::identity(psi.len());
    let ideal = 1.0;
    let seed = derive_seed(cfg.seed, BENCH_DISTILL_LABEL, 0);
    let mut estimates = [Vec::new(), Vec::new()];
    for r in 0..sb.distill_repeats {
        let set = ShadowSet::sample(&noisy, ensemble, sb.distill_unitaries, sb.distill_shots, derive_seed(seed, r as u64, 0))?;
        for (m, est) in estimates.iter_mut().enumerate() {
            let dc = DistillConfig { max_tuples: sb.distill_tuples, seed: derive_seed(seed, r as u64, m as u64 + 1) };
            est.push(distilled_estimate_with(&set, &obs, &obs, m + 1, &dc)?.value);
        }
    }
    let mut biases = Vec::new();
    for (m, est) in estimates.iter().enumerate() {
        let (mean, var) = mean_var(est);
        let se = (var / est.len() as f64).sqrt();
        let dense = distilled_dense(noisy.matrix(), &obs, m + 1);
        biases.push(mean - ideal);
        rows.push(BenchRow {
            test: "distill",
            parameter: "m",
            value: (m + 1) as f64,
            mean: Some(mean),
            std_error: Some(se),
            reference: Some(dense),
            bias: Some(mean - ideal),
            variance: Some(var),
            pass: (mean - dense).abs() <= 3.0 * se + 1e-12,
            ..Default::default()
        });
    }
    let ratio = biases[1].abs() / biases[0].abs();
    rows.push(BenchRow {
        test: "distill_bias_ratio",
        parameter: "noise",
        value: sb.noise,
        ratio: Some(ratio),
        pass: ratio < 0.3,
        ..Default::default()
    });
    Ok(rows)
}

/// Shadow-estimator bias, variance scaling and distillation, as a long-format CSV.
pub fn cmd_shadowbench(cfg: &RunConfig) -> Result<Vec<BenchRow>, CliError> {
    if cfg.cost.ensemble == EnsembleKind::GlobalClifford {
        log::info!("global Clifford ensemble: locality setting ignored");
    }
    let header: Vec<String> = BenchRow::HEADER.iter().map(|s| s.to_string()).collect();
    let mut sink = CsvSink::create(cfg.output.path.as_deref(), &Provenance::new("shadowbench", cfg), &header)?;
    let rows = shadowbench_rows(cfg)?;
    for row in &rows {
        sink.row(&row.fields())?;
    }
    let failed: Vec<String> = rows.iter().filter(|r| !r.pass).map(|r| format!("{} {}={}", r.test, r.parameter, r.value)).collect();
    if !failed.is_empty() {
        return Err(CliError::Threshold(failed.join(", ")));
    }
    Ok(rows)
}
