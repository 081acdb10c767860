//! Uniformly random n-qubit Clifford unitaries via symplectic tableaus.
//!
//! A Clifford `C` is stored as the images `C X_j C^dagger` and `C Z_j C^dagger`,
//! each a signed Hermitian Pauli. Sampling draws a uniform symplectic basis
//! pair by pair, projecting random vectors onto the symplectic complement of
//! the pairs chosen so far, plus uniform signs. That is uniform over the
//! Clifford group modulo global phase.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{ComplexMatrix, C64, I, ONE, ZERO};

/// Signed Hermitian Pauli `(-1)^sign * prod_k i^{x_k z_k} X^{x_k} Z^{z_k}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedPauli {
    pub x: Vec<bool>,
    pub z: Vec<bool>,
    pub sign: bool,
}

impl SignedPauli {
    fn n(&self) -> usize {
        self.x.len()
    }

    /// Applies the operator to a state vector; qubit 0 is the most significant bit.
    fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let n = self.n();
        let mut flip = 0usize;
        for k in 0..n {
            if self.x[k] {
                flip |= 1 << (n - 1 - k);
            }
        }
        let mut out = vec![ZERO; psi.len()];
        for (b, amp) in psi.iter().enumerate() {
            // Z part acts first, then X; per qubit Y = i X Z
            let mut phase = if self.sign { -ONE } else { ONE };
            for k in 0..n {
                let bit = (b >> (n - 1 - k)) & 1 == 1;
                if self.z[k] && bit {
                    phase = -phase;
                }
                if self.x[k] && self.z[k] {
                    phase *= I;
                }
            }
            out[b ^ flip] += phase * amp;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CliffordTableau {
    /// `C X_j C^dagger`
    pub x_images: Vec<SignedPauli>,
    /// `C Z_j C^dagger`
    pub z_images: Vec<SignedPauli>,
}

fn symplectic(a: &[bool], b: &[bool]) -> bool {
    let n = a.len() / 2;
    let mut acc = false;
    for k in 0..n {
        acc ^= (a[k] & b[n + k]) ^ (a[n + k] & b[k]);
    }
    acc
}

fn project(u: &mut [bool], pairs: &[(Vec<bool>, Vec<bool>)]) {
    for (v, w) in pairs {
        let with_w = symplectic(u, w);
        let with_v = symplectic(u, v);
        for k in 0..u.len() {
            u[k] ^= (with_w & v[k]) ^ (with_v & w[k]);
        }
    }
}

fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<bool> {
    (0..len).map(|_| rng.gen()).collect()
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        let unit = |k: usize, is_x: bool| {
            let mut x = vec![false; n];
            let mut z = vec![false; n];
            if is_x {
                x[k] = true;
            } else {
                z[k] = true;
            }
            SignedPauli { x, z, sign: false }
        };
        Self { x_images: (0..n).map(|k| unit(k, true)).collect(), z_images: (0..n).map(|k| unit(k, false)).collect() }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut pairs: Vec<(Vec<bool>, Vec<bool>)> = Vec::with_capacity(n);
        for _ in 0..n {
            let v = loop {
                let mut u = random_bits(2 * n, rng);
                project(&mut u, &pairs);
                if u.iter().any(|&b| b) {
                    break u;
                }
            };
            let w = loop {
                let mut u = random_bits(2 * n, rng);
                project(&mut u, &pairs);
                if symplectic(&v, &u) {
                    break u;
                }
            };
            pairs.push((v, w));
        }
        let to_pauli = |bits: &[bool], sign: bool| SignedPauli { x: bits[..n].to_vec(), z: bits[n..].to_vec(), sign };
        let x_images = pairs.iter().map(|(v, _)| to_pauli(v, rng.gen())).collect();
        let z_images = pairs.iter().map(|(_, w)| to_pauli(w, rng.gen())).collect();
        Self { x_images, z_images }
    }

    pub fn n_qubits(&self) -> usize {
        self.x_images.len()
    }

    /// Whether the images satisfy the Pauli commutation relations.
    pub fn is_symplectic(&self) -> bool {
        let n = self.n_qubits();
        let bits = |p: &SignedPauli| p.x.iter().chain(&p.z).copied().collect::<Vec<bool>>();
        let xs: Vec<_> = self.x_images.iter().map(bits).collect();
        let zs: Vec<_> = self.z_images.iter().map(bits).collect();
        (0..n).all(|j| {
            (0..n).all(|k| {
                !symplectic(&xs[j], &xs[k]) && !symplectic(&zs[j], &zs[k]) && symplectic(&xs[j], &zs[k]) == (j == k)
            })
        })
    }

    /// Dense unitary, defined up to a global phase.
    pub fn unitary(&self) -> ComplexMatrix {
        let n = self.n_qubits();
        let dim = 1usize << n;
        // C|0> is the joint +1 eigenvector of the Z images
        let project = |psi: Vec<C64>| {
            self.z_images.iter().fold(psi, |acc, p| {
                let moved = p.apply(&acc);
                acc.iter().zip(&moved).map(|(a, b)| (a + b) * 0.5).collect()
            })
        };
        let mut root = None;
        for b in 0..dim {
            let mut e = vec![ZERO; dim];
            e[b] = ONE;
            let psi = project(e);
            let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                root = Some(psi.into_iter().map(|z| z / norm).collect::<Vec<_>>());
                break;
            }
        }
        let root = root.expect("stabilizer group has a common eigenvector");
        let mut u = ComplexMatrix::zeros(dim, dim);
        for b in 0..dim {
            let mut col = root.clone();
            for j in 0..n {
                if (b >> (n - 1 - j)) & 1 == 1 {
                    col = self.x_images[j].apply(&col);
                }
            }
            for (r, z) in col.into_iter().enumerate() {
                u[(r, b)] = z;
            }
        }
        u
    }
}
