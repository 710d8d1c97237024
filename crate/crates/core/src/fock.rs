//! Truncated Fock space of one boson θ and two two-level fermion modes V, N.
//!
//! States are labelled `|n, n_V, n_N⟩` with `n ∈ 0..=n_max` and ordered
//! lexicographically, so the basis index is `4n + 2n_V + n_N`. The boson is
//! truncated hard at `n_max` (`θ†|n_max⟩ = 0`).
//!
//! V and N carry no Jordan–Wigner string: each squares to zero and satisfies
//! `{V, V†} = 1`, but V and N commute with each other. The Lee Hamiltonian
//! only contains the bilinears `N†V` and `V†N`, whose matrix elements are the
//! same under either convention; the commuting choice is the one under which
//! the operator-ordered closed-form metric `θNV† f(N_θ) − f(N_θ) θ†N†V` is
//! Hermitian.

use serde::{Deserialize, Serialize};

use crate::error::{MetricError, Result};
use crate::matrix::{ComplexMatrix, C64, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "[usize; 3]", try_from = "[usize; 3]")]
pub struct Occupation {
    pub n: usize,
    pub v: u8,
    pub nn: u8,
}

impl Occupation {
    pub fn new(n: usize, v: u8, nn: u8) -> Self {
        Self { n, v, nn }
    }

    /// `n + n_V + n_N`, whose parity is the parity eigenvalue.
    pub fn total(&self) -> usize {
        self.n + self.v as usize + self.nn as usize
    }
}

impl From<Occupation> for [usize; 3] {
    fn from(o: Occupation) -> Self {
        [o.n, o.v as usize, o.nn as usize]
    }
}

impl TryFrom<[usize; 3]> for Occupation {
    type Error = MetricError;

    fn try_from(t: [usize; 3]) -> Result<Self> {
        if t[1] > 1 || t[2] > 1 {
            return Err(MetricError::InvalidParameter(format!("fermion occupation out of range in {t:?}")));
        }
        Ok(Occupation::new(t[0], t[1] as u8, t[2] as u8))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Theta,
    V,
    N,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockBasis {
    n_max: usize,
    states: Vec<Occupation>,
}

impl FockBasis {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(MetricError::InvalidParameter(
                "n_max must be at least 1 so that an interacting sector fits".into(),
            ));
        }
        let mut states = Vec::with_capacity(4 * (n_max + 1));
        for n in 0..=n_max {
            for v in 0..=1 {
                for nn in 0..=1 {
                    states.push(Occupation::new(n, v, nn));
                }
            }
        }
        Ok(Self { n_max, states })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn state(&self, k: usize) -> Occupation {
        self.states[k]
    }

    pub fn index_of(&self, occ: Occupation) -> Option<usize> {
        (occ.n <= self.n_max && occ.v <= 1 && occ.nn <= 1).then(|| 4 * occ.n + 2 * occ.v as usize + occ.nn as usize)
    }

    /// Basis export: array of `[n, n_V, n_N]` triples.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.states).expect("occupations serialize")
    }

    fn matrix_of(&self, act: impl Fn(Occupation) -> Option<(Occupation, f64)>) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim());
        for (col, &occ) in self.states.iter().enumerate() {
            if let Some((out, amp)) = act(occ) {
                if let Some(row) = self.index_of(out) {
                    m[(row, col)] = C64::new(amp, 0.0);
                }
            }
        }
        m
    }
}

/// Matrix of θ, V or N (or their adjoints when `dagger` is set).
pub fn ladder_matrix(basis: &FockBasis, mode: Mode, dagger: bool) -> ComplexMatrix {
    let lower = basis.matrix_of(|o| match mode {
        Mode::Theta => (o.n > 0).then(|| (Occupation { n: o.n - 1, ..o }, (o.n as f64).sqrt())),
        Mode::V => (o.v == 1).then_some((Occupation { v: 0, ..o }, 1.0)),
        Mode::N => (o.nn == 1).then_some((Occupation { nn: 0, ..o }, 1.0)),
    });
    if dagger {
        lower.adjoint()
    } else {
        lower
    }
}

pub fn number_operator(basis: &FockBasis, mode: Mode) -> ComplexMatrix {
    let diag: Vec<f64> = basis
        .states()
        .iter()
        .map(|o| match mode {
            Mode::Theta => o.n as f64,
            Mode::V => o.v as f64,
            Mode::N => o.nn as f64,
        })
        .collect();
    ComplexMatrix::from_real_diagonal(&diag)
}

/// Parity `(−1)^(n + n_V + n_N)`: all three modes are odd.
pub fn parity_matrix(basis: &FockBasis) -> ComplexMatrix {
    let diag: Vec<C64> = basis.states().iter().map(|o| if o.total() % 2 == 0 { ONE } else { -ONE }).collect();
    ComplexMatrix::from_diagonal(&diag)
}

/// `|occ⟩` as a coordinate vector.
pub fn basis_vector(basis: &FockBasis, occ: Occupation) -> Option<Vec<C64>> {
    let k = basis.index_of(occ)?;
    let mut v = vec![ZERO; basis.dim()];
    v[k] = ONE;
    Some(v)
}
