//! Two-block mixed-state ansatz.
//!
//! The distribution block `U_D` prepares `sum_b lambda_b |b>` from `|0...0>`; a
//! computational-basis measurement turns it into the ensemble `{p_b = |lambda_b|^2}`;
//! the rotation block `U_V` then maps `|b>` to the eigenvectors of
//! `rho = sum_b p_b U_V |b><b| U_V^dagger`.

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Ry,
    Rz,
    Cry,
    Cz,
}

/// Which circuit block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    /// Eigenvalue distribution.
    Ud,
    /// Basis rotation.
    Uv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
    /// Global index into the flattened `(theta_d, theta_v)` vector.
    pub param: Option<usize>,
}

impl Gate {
    fn rotation(kind: GateKind, target: usize, param: usize) -> Self {
        Self { kind, target, control: None, param: Some(param) }
    }
}

/// Set of frequencies `{gamma_k}` such that the cost is `sum_k beta_k exp(i gamma_k theta)`
/// along one parameter. Sorted ascending and symmetric about zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySet(Vec<f64>);

impl FrequencySet {
    pub fn new(mut freqs: Vec<f64>) -> Result<Self> {
        if freqs.is_empty() || freqs.iter().any(|f| !f.is_finite()) {
            return Err(Error::BadParams { field: "frequencies".into(), reason: "empty or non-finite".into() });
        }
        freqs.sort_by(f64::total_cmp);
        freqs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let symmetric = freqs
            .iter()
            .zip(freqs.iter().rev())
            .all(|(a, b)| (a + b).abs() < 1e-12);
        if !symmetric {
            return Err(Error::BadParams {
                field: "frequencies".into(),
                reason: format!("set {freqs:?} is not symmetric about zero"),
            });
        }
        Ok(Self(freqs))
    }

    /// `{0, +-1, +-2}`: a Pauli rotation entering a cost quadratic in `rho`.
    pub fn pauli_rotation() -> Self {
        Self(vec![-2.0, -1.0, 0.0, 1.0, 2.0])
    }

    /// `{0, +-1/2, ..., +-2}`: a controlled rotation, whose generator has spectrum `{0, +-1/2}`.
    pub fn controlled_rotation() -> Self {
        Self((-4..=4).map(|k| k as f64 * 0.5).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.last().copied().unwrap_or(0.0).abs()
    }

    pub fn is_pauli_rotation(&self) -> bool {
        *self == Self::pauli_rotation()
    }
}

/// Circuit structure for both blocks. Regenerable from `(n_qubits, d1, d2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LayoutSpec", into = "LayoutSpec")]
pub struct AnsatzLayout {
    n_qubits: usize,
    d1: usize,
    d2: usize,
    ud_gates: Vec<Gate>,
    uv_gates: Vec<Gate>,
    n_params_d: usize,
    n_params_v: usize,
}

/// Serialized form of a layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutSpec {
    pub n_qubits: usize,
    pub d1: usize,
    pub d2: usize,
}

impl TryFrom<LayoutSpec> for AnsatzLayout {
    type Error = Error;
    fn try_from(s: LayoutSpec) -> Result<Self> {
        standard_layout(s.n_qubits, s.d1, s.d2)
    }
}

impl From<AnsatzLayout> for LayoutSpec {
    fn from(l: AnsatzLayout) -> Self {
        LayoutSpec { n_qubits: l.n_qubits, d1: l.d1, d2: l.d2 }
    }
}

/// Builds the standard layout.
///
/// Each `U_D` repetition is an RY column followed by a CRY ladder with control
/// `i` and target `i + 1`. Each `U_V` repetition is an RY-RZ column followed by a
/// CZ ladder; one extra RY-RZ column closes the block.
pub fn standard_layout(n_qubits: usize, d1: usize, d2: usize) -> Result<AnsatzLayout> {
    for (field, v) in [("n_qubits", n_qubits), ("d1", d1), ("d2", d2)] {
        if v == 0 {
            return Err(Error::BadParams { field: field.into(), reason: "must be at least 1".into() });
        }
    }
    if n_qubits > 12 {
        return Err(Error::TooLarge(format!("{n_qubits} qubits")));
    }
    let mut next = 0usize;
    let mut take = || {
        next += 1;
        next - 1
    };

    let mut ud_gates = Vec::new();
    for _ in 0..d1 {
        for q in 0..n_qubits {
            ud_gates.push(Gate::rotation(GateKind::Ry, q, take()));
        }
        for q in 0..n_qubits.saturating_sub(1) {
            ud_gates.push(Gate { kind: GateKind::Cry, target: q + 1, control: Some(q), param: Some(take()) });
        }
    }
    let n_params_d = ud_gates.len();

    let mut uv_gates = Vec::new();
    let mut rotation_column = |gates: &mut Vec<Gate>| {
        for q in 0..n_qubits {
            gates.push(Gate::rotation(GateKind::Ry, q, take()));
            gates.push(Gate::rotation(GateKind::Rz, q, take()));
        }
    };
    for _ in 0..d2 {
        rotation_column(&mut uv_gates);
        for q in 0..n_qubits.saturating_sub(1) {
            uv_gates.push(Gate { kind: GateKind::Cz, target: q + 1, control: Some(q), param: None });
        }
    }
    rotation_column(&mut uv_gates);
    let n_params_v = uv_gates.iter().filter(|g| g.param.is_some()).count();

    Ok(AnsatzLayout { n_qubits, d1, d2, ud_gates, uv_gates, n_params_d, n_params_v })
}

impl AnsatzLayout {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    pub fn gates(&self, block: Block) -> &[Gate] {
        match block {
            Block::Ud => &self.ud_gates,
            Block::Uv => &self.uv_gates,
        }
    }

    pub fn n_params(&self, block: Block) -> usize {
        match block {
            Block::Ud => self.n_params_d,
            Block::Uv => self.n_params_v,
        }
    }

    pub fn total_params(&self) -> usize {
        self.n_params_d + self.n_params_v
    }

    /// The gate carrying global parameter `index`.
    pub fn gate_for_param(&self, index: usize) -> Option<&Gate> {
        self.ud_gates
            .iter()
            .chain(&self.uv_gates)
            .find(|g| g.param == Some(index))
    }

    pub fn spec(&self) -> LayoutSpec {
        LayoutSpec { n_qubits: self.n_qubits, d1: self.d1, d2: self.d2 }
    }
}

/// Joint parameters `(theta_d, theta_v)` in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub theta_d: Vec<f64>,
    pub theta_v: Vec<f64>,
}

impl ParamVector {
    pub fn zeros(layout: &AnsatzLayout) -> Self {
        Self { theta_d: vec![0.0; layout.n_params_d], theta_v: vec![0.0; layout.n_params_v] }
    }

    pub fn from_flat(layout: &AnsatzLayout, flat: &[f64]) -> Result<Self> {
        if flat.len() != layout.total_params() {
            return Err(Error::ParamLengthMismatch {
                block: "theta",
                expected: layout.total_params(),
                found: flat.len(),
            });
        }
        let (d, v) = flat.split_at(layout.n_params_d);
        Ok(Self { theta_d: d.to_vec(), theta_v: v.to_vec() })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.theta_d.iter().chain(&self.theta_v).copied().collect()
    }

    pub fn len(&self) -> usize {
        self.theta_d.len() + self.theta_v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Uniform in `[-scale, scale]` per angle.
    pub fn random<R: Rng + ?Sized>(layout: &AnsatzLayout, scale: f64, rng: &mut R) -> Self {
        let mut draw = |k: usize| (0..k).map(|_| rng.gen_range(-scale..=scale)).collect::<Vec<_>>();
        let theta_d = draw(layout.n_params_d);
        let theta_v = draw(layout.n_params_v);
        Self { theta_d, theta_v }
    }

    pub fn check(&self, layout: &AnsatzLayout) -> Result<()> {
        if self.theta_d.len() != layout.n_params_d {
            return Err(Error::ParamLengthMismatch {
                block: "theta_d",
                expected: layout.n_params_d,
                found: self.theta_d.len(),
            });
        }
        if self.theta_v.len() != layout.n_params_v {
            return Err(Error::ParamLengthMismatch {
                block: "theta_v",
                expected: layout.n_params_v,
                found: self.theta_v.len(),
            });
        }
        Ok(())
    }
}

/// Default scale for random initial angles.
pub const INIT_SCALE: f64 = 0.1;

fn ry(theta: f64) -> [C64; 4] {
    let (s, c) = (theta / 2.0).sin_cos();
    [C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)]
}

fn rz(theta: f64) -> [C64; 4] {
    let (s, c) = (theta / 2.0).sin_cos();
    [C64::new(c, -s), ZERO, ZERO, C64::new(c, s)]
}

/// Applies `gate` to the rows of a `2^n x ncols` row-major buffer (a state vector when `ncols == 1`).
fn apply_gate(data: &mut [C64], ncols: usize, n: usize, gate: &Gate, theta: f64) {
    let tmask = 1usize << (n - 1 - gate.target);
    let cmask = gate.control.map_or(0, |c| 1usize << (n - 1 - c));
    let dim = 1usize << n;
    match gate.kind {
        GateKind::Cz => {
            for r in 0..dim {
                if r & tmask != 0 && r & cmask != 0 {
                    for z in &mut data[r * ncols..(r + 1) * ncols] {
                        *z = -*z;
                    }
                }
            }
        }
        GateKind::Ry | GateKind::Rz | GateKind::Cry => {
            let g = match gate.kind {
                GateKind::Rz => rz(theta),
                _ => ry(theta),
            };
            for r0 in 0..dim {
                if r0 & tmask != 0 || (cmask != 0 && r0 & cmask == 0) {
                    continue;
                }
                let r1 = r0 | tmask;
                for c in 0..ncols {
                    let a = data[r0 * ncols + c];
                    let b = data[r1 * ncols + c];
                    data[r0 * ncols + c] = g[0] * a + g[1] * b;
                    data[r1 * ncols + c] = g[2] * a + g[3] * b;
                }
            }
        }
    }
}

fn block_params<'a>(layout: &AnsatzLayout, block: Block, params: &'a ParamVector) -> Result<(&'a [f64], usize)> {
    params.check(layout)?;
    Ok(match block {
        Block::Ud => (&params.theta_d, 0),
        Block::Uv => (&params.theta_v, layout.n_params_d),
    })
}

fn run_block(layout: &AnsatzLayout, block: Block, angles: &[f64], offset: usize, data: &mut [C64], ncols: usize) {
    for gate in layout.gates(block) {
        let theta = gate.param.map_or(0.0, |p| angles[p - offset]);
        apply_gate(data, ncols, layout.n_qubits, gate, theta);
    }
}

/// Dense unitary of one block.
pub fn build_unitary(layout: &AnsatzLayout, block: Block, params: &ParamVector) -> Result<ComplexMatrix> {
    let (angles, offset) = block_params(layout, block, params)?;
    let dim = layout.dim();
    let mut u = ComplexMatrix::identity(dim);
    run_block(layout, block, angles, offset, u.as_mut_slice(), dim);
    Ok(u)
}

/// Amplitudes of `U_D |0...0>`.
pub fn distribution_amplitudes(layout: &AnsatzLayout, theta_d: &[f64]) -> Result<Vec<C64>> {
    if theta_d.len() != layout.n_params_d {
        return Err(Error::ParamLengthMismatch {
            block: "theta_d",
            expected: layout.n_params_d,
            found: theta_d.len(),
        });
    }
    let mut psi = vec![ZERO; layout.dim()];
    psi[0] = ONE;
    run_block(layout, Block::Ud, theta_d, 0, &mut psi, 1);
    Ok(psi)
}

/// Outcome probabilities `p_b` of the intermediate measurement.
pub fn distribution(layout: &AnsatzLayout, theta_d: &[f64]) -> Result<Vec<f64>> {
    Ok(distribution_amplitudes(layout, theta_d)?.iter().map(|a| a.norm_sqr()).collect())
}

/// `U diag(p) U^dagger`, symmetrized.
fn rotate_diagonal(u: &ComplexMatrix, p: &[f64]) -> ComplexMatrix {
    let dim = p.len();
    let mut scaled = u.clone();
    for r in 0..dim {
        for (c, &w) in p.iter().enumerate() {
            scaled[(r, c)] *= w;
        }
    }
    scaled.matmul_adjoint(u).hermitian_part()
}

/// Mixed state with the intermediate measurement simulated exactly as a dephasing.
pub fn prepare_mixed_state(layout: &AnsatzLayout, theta: &ParamVector) -> Result<DensityMatrix> {
    theta.check(layout)?;
    let p = distribution(layout, &theta.theta_d)?;
    let u = build_unitary(layout, Block::Uv, theta)?;
    Ok(DensityMatrix::new_unchecked(layout.n_qubits, rotate_diagonal(&u, &p)))
}

/// Draws `b` with probability `p_b`.
pub fn sample_basis_index<R: Rng + ?Sized>(layout: &AnsatzLayout, theta_d: &[f64], rng: &mut R) -> Result<usize> {
    let p = distribution(layout, theta_d)?;
    Ok(sample_index(&p, rng))
}

pub(crate) fn sample_index<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen::<f64>() * p.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, &w) in p.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // roundoff at the top of the range: last index with weight
    p.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Shot-faithful preparation: `shots` intermediate measurements, empirical weights.
pub fn prepare_mixed_state_sampled<R: Rng + ?Sized>(
    layout: &AnsatzLayout,
    theta: &ParamVector,
    shots: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if shots == 0 {
        return Err(Error::Empty("shots"));
    }
    theta.check(layout)?;
    let p = distribution(layout, &theta.theta_d)?;
    let mut counts = vec![0usize; p.len()];
    for _ in 0..shots {
        counts[sample_index(&p, rng)] += 1;
    }
    let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / shots as f64).collect();
    let u = build_unitary(layout, Block::Uv, theta)?;
    Ok(DensityMatrix::new_unchecked(layout.n_qubits, rotate_diagonal(&u, &freq)))
}

/// Frequency support of the cost along one parameter.
pub fn param_frequency_set(layout: &AnsatzLayout, index: usize) -> Result<FrequencySet> {
    let gate = layout.gate_for_param(index).ok_or_else(|| Error::BadParams {
        field: "param_index".into(),
        reason: format!("{index} out of range 0..{}", layout.total_params()),
    })?;
    Ok(match gate.kind {
        GateKind::Cry => FrequencySet::controlled_rotation(),
        _ => FrequencySet::pauli_rotation(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, herm_eigenvalues, kron};
    use crate::rng::stream_rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn parameter_counts() {
        let l = standard_layout(1, 1, 1).unwrap();
        assert_eq!((l.n_params(Block::Ud), l.n_params(Block::Uv)), (1, 4));
        assert!(l.gates(Block::Ud).iter().chain(l.gates(Block::Uv)).all(|g| g.control.is_none()));
        let l = standard_layout(2, 4, 4).unwrap();
        assert_eq!((l.n_params(Block::Ud), l.n_params(Block::Uv)), (12, 20));
        let l = standard_layout(3, 1, 1).unwrap();
        assert_eq!((l.n_params(Block::Ud), l.n_params(Block::Uv)), (5, 12));
        assert!(standard_layout(0, 1, 1).is_err());
        assert!(standard_layout(2, 0, 1).is_err());
    }

    #[test]
    fn param_indices_are_contiguous() {
        let l = standard_layout(3, 2, 3).unwrap();
        let mut idx: Vec<usize> = l
            .gates(Block::Ud)
            .iter()
            .chain(l.gates(Block::Uv))
            .filter_map(|g| g.param)
            .collect();
        idx.sort();
        assert_eq!(idx, (0..l.total_params()).collect::<Vec<_>>());
        for g in l.gates(Block::Ud).iter().chain(l.gates(Block::Uv)) {
            assert!(g.target < 3);
            if let Some(c) = g.control {
                assert_ne!(c, g.target);
                assert!(c < g.target);
            }
        }
    }

    #[test]
    fn zero_angles() {
        let l = standard_layout(2, 2, 2).unwrap();
        let z = ParamVector::zeros(&l);
        assert_eq!(build_unitary(&l, Block::Ud, &z).unwrap(), ComplexMatrix::identity(4));
        // two CZ ladders on 2 qubits cancel
        let uv = build_unitary(&l, Block::Uv, &z).unwrap();
        assert!(uv.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        let l3 = standard_layout(2, 1, 1).unwrap();
        let uv = build_unitary(&l3, Block::Uv, &ParamVector::zeros(&l3)).unwrap();
        assert_eq!(uv, ComplexMatrix::diag_real(&[1.0, 1.0, 1.0, -1.0]));
        let rho = prepare_mixed_state(&l, &z).unwrap();
        assert_eq!(rho, DensityMatrix::basis_state(2, 0));
    }

    #[test]
    fn ry_pi_flips() {
        let l = standard_layout(1, 1, 1).unwrap();
        let amps = distribution_amplitudes(&l, &[PI]).unwrap();
        assert!(amps[0].norm() < 1e-15 && (amps[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn half_mixture_on_one_qubit() {
        let l = standard_layout(1, 1, 1).unwrap();
        let theta = ParamVector { theta_d: vec![FRAC_PI_2], theta_v: vec![0.0; 4] };
        let rho = prepare_mixed_state(&l, &theta).unwrap();
        assert!(rho.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn gate_conventions() {
        // CRY with control 0, target 1 equals |0><0| x I + |1><1| x RY
        let l = standard_layout(2, 1, 1).unwrap();
        let mut theta = ParamVector::zeros(&l);
        theta.theta_d[2] = 0.7;
        let u = build_unitary(&l, Block::Ud, &theta).unwrap();
        let ry = ComplexMatrix::from_vec(2, 2, ry(0.7).to_vec()).unwrap();
        let p0 = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let p1 = ComplexMatrix::diag_real(&[0.0, 1.0]);
        let expected = &kron(&p0, &ComplexMatrix::identity(2)) + &kron(&p1, &ry);
        assert!(u.max_abs_diff(&expected) < 1e-15);

        // RZ on qubit 1 alone: exp(-i theta Z / 2)
        let mut theta = ParamVector::zeros(&l);
        theta.theta_v[3] = 0.4; // RZ of qubit 1 in the first column
        let u = build_unitary(&l, Block::Uv, &theta).unwrap();
        let rz = ComplexMatrix::from_vec(2, 2, rz(0.4).to_vec()).unwrap();
        let cz = ComplexMatrix::diag_real(&[1.0, 1.0, 1.0, -1.0]);
        let expected = cz.matmul(&kron(&ComplexMatrix::identity(2), &rz));
        assert!(u.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn random_unitarity_and_spectrum() {
        let l = standard_layout(2, 3, 3).unwrap();
        let mut rng = stream_rng(11, 0);
        for _ in 0..20 {
            let theta = ParamVector::random(&l, PI, &mut rng);
            for block in [Block::Ud, Block::Uv] {
                let u = build_unitary(&l, block, &theta).unwrap();
                let res = frobenius_norm(&(&u.dagger().matmul(&u) - &ComplexMatrix::identity(4)));
                assert!(res < 1e-12);
            }
            let rho = prepare_mixed_state(&l, &theta).unwrap();
            let mut p = distribution(&l, &theta.theta_d).unwrap();
            p.sort_by(f64::total_cmp);
            let ev = herm_eigenvalues(rho.matrix()).unwrap();
            for (a, b) in ev.iter().zip(&p) {
                assert!((a - b).abs() < 1e-10);
            }
            let purity: f64 = p.iter().map(|x| x * x).sum();
            assert!((rho.purity() - purity).abs() < 1e-10);
        }
    }

    #[test]
    fn deterministic_build() {
        let l = standard_layout(3, 2, 2).unwrap();
        let theta = ParamVector::random(&l, 1.0, &mut stream_rng(3, 3));
        let a = build_unitary(&l, Block::Uv, &theta).unwrap();
        let b = build_unitary(&l, Block::Uv, &theta).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn length_mismatch() {
        let l = standard_layout(2, 1, 1).unwrap();
        let bad = ParamVector { theta_d: vec![0.0; 2], theta_v: vec![0.0; 8] };
        assert!(matches!(build_unitary(&l, Block::Ud, &bad), Err(Error::ParamLengthMismatch { .. })));
        assert!(matches!(prepare_mixed_state(&l, &bad), Err(Error::ParamLengthMismatch { .. })));
    }

    #[test]
    fn sampling() {
        let l = standard_layout(1, 1, 1).unwrap();
        let mut rng = stream_rng(5, 0);
        for _ in 0..100 {
            assert_eq!(sample_basis_index(&l, &[0.0], &mut rng).unwrap(), 0);
            assert_eq!(sample_basis_index(&l, &[PI], &mut rng).unwrap(), 1);
        }
        let draws = 100_000;
        let zeros = (0..draws)
            .filter(|_| sample_basis_index(&l, &[FRAC_PI_2], &mut rng).unwrap() == 0)
            .count();
        assert!((zeros as f64 / draws as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn sampled_mode_converges() {
        let l = standard_layout(2, 1, 1).unwrap();
        let theta = ParamVector::random(&l, 1.0, &mut stream_rng(9, 0));
        let exact = prepare_mixed_state(&l, &theta).unwrap();
        let sampled = prepare_mixed_state_sampled(&l, &theta, 200_000, &mut stream_rng(9, 1)).unwrap();
        assert!(exact.matrix().max_abs_diff(sampled.matrix()) < 0.01);
    }

    #[test]
    fn frequency_sets() {
        let l = standard_layout(2, 1, 1).unwrap();
        assert_eq!(param_frequency_set(&l, 0).unwrap(), FrequencySet::pauli_rotation());
        assert_eq!(param_frequency_set(&l, 2).unwrap().values(), &[-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(param_frequency_set(&l, 5).unwrap(), FrequencySet::pauli_rotation());
        assert!(param_frequency_set(&l, 99).is_err());
        let l1 = standard_layout(1, 2, 2).unwrap();
        for j in 0..l1.total_params() {
            assert!(param_frequency_set(&l1, j).unwrap().is_pauli_rotation());
        }
        assert!(FrequencySet::new(vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn layout_serde_roundtrip() {
        let l = standard_layout(2, 4, 4).unwrap();
        let json = serde_json::to_string(&l).unwrap();
        assert_eq!(json, r#"{"n_qubits":2,"d1":4,"d2":4}"#);
        let back: AnsatzLayout = serde_json::from_str(&json).unwrap();
        assert_eq!(back, l);
    }
}
