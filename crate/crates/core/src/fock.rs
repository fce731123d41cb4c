//! Truncated harmonic-oscillator helpers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Annihilation operator `a` on `{|0⟩, …, |n−1⟩}`.
pub fn annihilation(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(
        n,
        n,
        |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 },
    )
}

/// Dimensionless position `X = a + a†`.
pub fn position(n: usize) -> DMatrix<f64> {
    let a = annihilation(n);
    &a + a.transpose()
}

/// Spectral decomposition of `X`, used to build `exp(i r X) = D(i r)`.
#[derive(Clone, Debug)]
pub struct PositionBasis {
    vectors: DMatrix<f64>,
    values: DVector<f64>,
}

impl PositionBasis {
    pub fn new(n: usize) -> Self {
        let eig = SymmetricEigen::new(position(n));
        PositionBasis {
            vectors: eig.eigenvectors,
            values: eig.eigenvalues,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `exp(i r X)`, the displacement `D(i r)` in the truncated space.
    pub fn exp_i(&self, r: f64) -> DMatrix<C64> {
        let n = self.dim();
        let v = self.vectors.map(|x| C64::new(x, 0.0));
        let mut scaled = v.clone();
        for k in 0..n {
            let ph = C64::from_polar(1.0, r * self.values[k]);
            for i in 0..n {
                scaled[(i, k)] *= ph;
            }
        }
        &scaled * v.transpose()
    }
}

/// Coherent state `|α⟩` truncated to `n` levels (not renormalised).
pub fn coherent_state(alpha: C64, n: usize) -> DVector<C64> {
    let mut out = DVector::zeros(n);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for k in 0..n {
        out[k] = c;
        c *= alpha / ((k + 1) as f64).sqrt();
    }
    out
}

/// Population in the top `k` Fock levels of a state vector.
pub fn tail_population(state: &[C64], k: usize) -> f64 {
    let n = state.len();
    state[n.saturating_sub(k)..]
        .iter()
        .map(|c| c.norm_sqr())
        .sum()
}

/// Error out when the truncated tail carries more than `limit` population.
pub fn check_tail(dim: usize, tail: f64, limit: f64) -> Result<()> {
    if tail > limit || !tail.is_finite() {
        Err(Error::Truncation { dim, tail })
    } else {
        Ok(())
    }
}

/// `⟨ψ|a|ψ⟩` for a single-mode state.
pub fn mean_annihilation(state: &[C64]) -> C64 {
    (1..state.len())
        .map(|k| state[k - 1].conj() * state[k] * (k as f64).sqrt())
        .sum()
}
