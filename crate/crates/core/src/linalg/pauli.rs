use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::matrix::{kron_all, ComplexMatrix, I, ONE, ZERO};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        match self {
            Pauli::I => ComplexMatrix::identity(2),
            Pauli::X => ComplexMatrix::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]]),
            Pauli::Y => ComplexMatrix::from_rows(&[&[ZERO, -I], &[I, ZERO]]),
            Pauli::Z => ComplexMatrix::diag_real(&[1.0, -1.0]),
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// One of the four unit phases `{+1, -1, +i, -i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Phase {
    #[default]
    PlusOne,
    MinusOne,
    PlusI,
    MinusI,
}

impl Phase {
    pub fn value(self) -> C64 {
        match self {
            Phase::PlusOne => ONE,
            Phase::MinusOne => -ONE,
            Phase::PlusI => I,
            Phase::MinusI => -I,
        }
    }
}

/// Tensor product of single-qubit Paulis; the first letter acts on the most significant qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    letters: Vec<Pauli>,
    phase: Phase,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, phase: Phase) -> Self {
        Self { letters, phase }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::new(vec![Pauli::I; n_qubits], Phase::PlusOne)
    }

    /// A single non-identity letter on `site` of an `n_qubits` register.
    pub fn single(n_qubits: usize, site: usize, p: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n_qubits];
        letters[site] = p;
        Self::new(letters, Phase::PlusOne)
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Embeds the string into a larger register starting at `offset`.
    pub fn embed(&self, n_qubits: usize, offset: usize) -> Result<Self> {
        if offset + self.n_qubits() > n_qubits {
            return Err(Error::DimensionMismatch {
                expected: format!("at most {} qubits from offset {offset}", n_qubits - offset.min(n_qubits)),
                found: format!("{} qubits", self.n_qubits()),
            });
        }
        let mut letters = vec![Pauli::I; n_qubits];
        letters[offset..offset + self.n_qubits()].copy_from_slice(&self.letters);
        Ok(Self::new(letters, self.phase))
    }
}

pub fn pauli_matrix(p: &PauliString) -> ComplexMatrix {
    let factors: Vec<ComplexMatrix> = p.letters.iter().map(|l| l.matrix()).collect();
    let m = kron_all(&factors);
    match p.phase {
        Phase::PlusOne => m,
        ph => m.scale(ph.value()),
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Accepts an optional leading `+`, `-`, `i`, `+i` or `-i` followed by letters from `IXYZ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MinusI, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (Phase::PlusI, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (Phase::PlusI, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MinusOne, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (Phase::PlusOne, rest)
        } else {
            (Phase::PlusOne, s)
        };
        if body.is_empty() {
            return Err(Error::BadParams { field: "pauli".into(), reason: format!("empty Pauli string `{s}`") });
        }
        let letters = body
            .chars()
            .map(|c| {
                Pauli::from_char(c).ok_or_else(|| Error::BadParams {
                    field: "pauli".into(),
                    reason: format!("invalid letter `{c}` in `{s}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(letters, phase))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            Phase::PlusOne => "",
            Phase::MinusOne => "-",
            Phase::PlusI => "i",
            Phase::MinusI => "-i",
        };
        write!(f, "{prefix}")?;
        for l in &self.letters {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::kron;

    #[test]
    fn single_and_identity() {
        let z: PauliString = "Z".parse().unwrap();
        assert_eq!(pauli_matrix(&z), ComplexMatrix::diag_real(&[1.0, -1.0]));
        assert_eq!(pauli_matrix(&PauliString::identity(3)), ComplexMatrix::identity(8));
    }

    #[test]
    fn xx_is_antidiagonal() {
        let xx: PauliString = "XX".parse().unwrap();
        let m = pauli_matrix(&xx);
        assert_eq!(m, kron(&Pauli::X.matrix(), &Pauli::X.matrix()));
        for r in 0..4 {
            for c in 0..4 {
                let expected = if r + c == 3 { ONE } else { ZERO };
                assert_eq!(m[(r, c)], expected);
            }
        }
    }

    #[test]
    fn phases_and_display() {
        let p: PauliString = "-iXZ".parse().unwrap();
        assert_eq!(p.phase(), Phase::MinusI);
        assert_eq!(p.to_string(), "-iXZ");
        assert_eq!(p.weight(), 2);
        let m = pauli_matrix(&p);
        assert_eq!(m[(0, 2)], -I);
        assert!("XQ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }

    #[test]
    fn single_site_embedding() {
        let p = PauliString::single(3, 1, Pauli::Y);
        assert_eq!(p.to_string(), "IYI");
        let q: PauliString = "XY".parse().unwrap();
        assert_eq!(q.embed(4, 1).unwrap().to_string(), "IXYI");
        assert!(q.embed(2, 1).is_err());
    }
}
