//! Banded Cholesky factorization of symmetric Toeplitz Gram matrices.

use crate::{Error, Result};

/// Diagonal loadings tried, in order, when the plain factorization fails.
const LOADINGS: [f64; 9] = [1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1];

/// Lower-triangular factor `L` with `L Lᵀ = T + δI`, where `T` is the
/// `n × n` symmetric Toeplitz matrix whose first row is the tap vector
/// (zero beyond the band) and `δ` the diagonal loading that was needed.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bandwidth: usize,
    // Row-major: entry (i, i - d) at i * (bandwidth + 1) + d.
    data: Vec<f64>,
    loading: f64,
}

impl BandedCholesky {
    /// Factors the Toeplitz matrix built from `taps`, escalating diagonal
    /// loading from 1e-9 when the matrix is not numerically positive
    /// definite.
    pub fn toeplitz(taps: &[f64], n: usize) -> Result<Self> {
        if taps.is_empty() || n == 0 {
            return Err(Error::Length {
                what: "Gram matrix dimension",
                expected: 1,
                got: 0,
            });
        }
        if let Some(f) = Self::try_factor(taps, n, 0.0) {
            return Ok(f);
        }
        for &delta in &LOADINGS {
            if let Some(f) = Self::try_factor(taps, n, delta) {
                log::warn!(
                    "ISI Gram matrix not positive definite; factored with diagonal loading {delta:e}"
                );
                return Ok(f);
            }
        }
        Err(Error::NotPositiveDefinite(LOADINGS[LOADINGS.len() - 1]))
    }

    fn try_factor(taps: &[f64], n: usize, loading: f64) -> Option<Self> {
        let bw = (taps.len() - 1).min(n - 1);
        let w = bw + 1;
        let mut data = vec![0.0; n * w];
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = taps[i - j];
                if i == j {
                    s += loading;
                }
                // Σ_k L[i][k] L[j][k] over the shared band.
                for k in lo.max(j.saturating_sub(bw))..j {
                    s -= data[i * w + (i - k)] * data[j * w + (j - k)];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return None;
                    }
                    data[i * w] = s.sqrt();
                } else {
                    data[i * w + (i - j)] = s / data[j * w];
                }
            }
        }
        Some(Self {
            n,
            bandwidth: bw,
            data,
            loading,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Diagonal loading added to make the factorization succeed (0 if none).
    pub fn loading(&self) -> f64 {
        self.loading
    }

    /// `L[i][j]`; zero outside the band and above the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i || i - j > self.bandwidth {
            0.0
        } else {
            self.data[i * (self.bandwidth + 1) + (i - j)]
        }
    }

    /// `L x`.
    pub fn mul_lower(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        let w = self.bandwidth + 1;
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.bandwidth);
                (lo..=i).map(|j| self.data[i * w + (i - j)] * x[j]).sum()
            })
            .collect()
    }

    /// Solves `L x = b` by forward substitution.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let w = self.bandwidth + 1;
        let mut x = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bandwidth);
            let mut s = b[i];
            for j in lo..i {
                s -= self.data[i * w + (i - j)] * x[j];
            }
            x[i] = s / self.data[i * w];
        }
        x
    }
}
