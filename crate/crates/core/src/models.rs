//! Dissipative spin-chain benchmarks: transverse-field Ising and Heisenberg.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{Convention, Jump, LindbladSpec};
use crate::linalg::{embed_site, kron_all, sigma_minus, ComplexMatrix, Pauli, C64, I};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Ising,
    Heisenberg,
}

impl Model {
    /// Number of jump families, i.e. the expected length of `gammas`.
    pub fn jump_families(self) -> usize {
        match self {
            Model::Ising => 2,
            Model::Heisenberg => 3,
        }
    }

    pub fn build(self, params: &ModelParams, convention: Convention) -> Result<LindbladSpec> {
        let spec = match self {
            Model::Ising => ising_spec(params)?,
            Model::Heisenberg => heisenberg_spec(params)?,
        };
        Ok(if convention == spec.convention() { spec } else { spec.with_convention(convention) })
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ising" => Ok(Model::Ising),
            "heisenberg" => Ok(Model::Heisenberg),
            other => Err(Error::BadParams { field: "model.name".into(), reason: format!("unknown model `{other}`") }),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Ising => "ising",
            Model::Heisenberg => "heisenberg",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_sites: usize,
    /// Transverse-field amplitude.
    pub g: f64,
    /// One strength per jump family; a single value is shared by all families.
    pub gammas: Vec<f64>,
    #[serde(default)]
    pub boundary: Boundary,
}

impl ModelParams {
    pub fn new(n_sites: usize, g: f64, gammas: Vec<f64>) -> Self {
        Self { n_sites, g, gammas, boundary: Boundary::Open }
    }

    fn validate(&self, families: usize) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::BadParams { field: "n_sites".into(), reason: "chain needs at least 2 sites".into() });
        }
        if self.n_sites > 10 {
            return Err(Error::TooLarge(format!("{} sites", self.n_sites)));
        }
        if self.gammas.len() != families && self.gammas.len() != 1 {
            return Err(Error::BadParams {
                field: "gammas".into(),
                reason: format!("expected 1 or {families} values, got {}", self.gammas.len()),
            });
        }
        if let Some(g) = self.gammas.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
            return Err(Error::BadParams { field: "gammas".into(), reason: format!("{g} is not a nonnegative rate") });
        }
        if !self.g.is_finite() {
            return Err(Error::BadParams { field: "g".into(), reason: "must be finite".into() });
        }
        Ok(())
    }

    /// Per-family strengths with a single value broadcast.
    pub fn rates(&self, families: usize) -> Vec<f64> {
        if self.gammas.len() == 1 {
            vec![self.gammas[0]; families]
        } else {
            self.gammas.clone()
        }
    }

    fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_sites;
        let mut bonds: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic {
            bonds.push((n - 1, 0));
        }
        bonds
    }
}

fn two_site(a: &ComplexMatrix, i: usize, b: &ComplexMatrix, j: usize, n: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let factors: Vec<&ComplexMatrix> = (0..n)
        .map(|k| if k == i { a } else if k == j { b } else { &id })
        .collect();
    kron_all(factors)
}

fn field_term(params: &ModelParams, h: &mut ComplexMatrix) {
    let x = Pauli::X.matrix();
    for i in 0..params.n_sites {
        h.axpy(C64::new(params.g, 0.0), &embed_site(&x, i, params.n_sites));
    }
}

/// `H = 1/2 sum Z_i Z_{i+1} + g sum X_i`, jumps `(sigma^-_i, gamma_1)` and `(Z_i, gamma_2)`.
pub fn ising_spec(params: &ModelParams) -> Result<LindbladSpec> {
    params.validate(Model::Ising.jump_families())?;
    let n = params.n_sites;
    let dim = 1 << n;
    let z = Pauli::Z.matrix();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (i, j) in params.bonds() {
        h.axpy(C64::new(0.5, 0.0), &two_site(&z, i, &z, j, n));
    }
    field_term(params, &mut h);

    let rates = params.rates(2);
    let lower = sigma_minus();
    let mut jumps = Vec::with_capacity(2 * n);
    for i in 0..n {
        jumps.push(Jump { op: embed_site(&lower, i, n), rate: rates[0] });
        jumps.push(Jump { op: embed_site(&z, i, n), rate: rates[1] });
    }
    LindbladSpec::new(n, h, jumps, Convention::default())
}

/// Single-site lowering operators along z, y and x.
///
/// With `|0>` as the damped-to state these are `(X + iY)/2`, `(X + iZ)/2` and
/// `(Z + iY)/2`: the usual `(X - iY)/2`, `(X - iZ)/2`, `(-Z - iY)/2` family
/// conjugated by `X`, which relabels `|0> <-> |1>` and leaves the Hamiltonian unchanged.
/// The first one is exactly [`sigma_minus`].
pub fn heisenberg_jump_ops() -> [ComplexMatrix; 3] {
    let (x, y, z) = (Pauli::X.matrix(), Pauli::Y.matrix(), Pauli::Z.matrix());
    let along_z = (&x + &y.scale(I)).scale_real(0.5);
    let along_y = (&x + &z.scale(I)).scale_real(0.5);
    let along_x = (&z + &y.scale(I)).scale_real(0.5);
    [along_z, along_y, along_x]
}

/// `H = sum (ZZ + YY + XX) + g sum X_i`, three damping jumps per site.
pub fn heisenberg_spec(params: &ModelParams) -> Result<LindbladSpec> {
    params.validate(Model::Heisenberg.jump_families())?;
    let n = params.n_sites;
    let dim = 1 << n;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (i, j) in params.bonds() {
        for p in [Pauli::Z, Pauli::Y, Pauli::X] {
            let m = p.matrix();
            h += &two_site(&m, i, &m, j, n);
        }
    }
    field_term(params, &mut h);

    let ops = heisenberg_jump_ops();
    let mut jumps = Vec::with_capacity(3 * n);
    for i in 0..n {
        for (op, rate) in ops.iter().zip(params.rates(3)) {
            jumps.push(Jump { op: embed_site(op, i, n), rate });
        }
    }
    LindbladSpec::new(n, h, jumps, Convention::default())
}
