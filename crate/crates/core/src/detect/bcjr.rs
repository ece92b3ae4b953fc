//! Log-MAP BCJR on a whitened (Forney) ISI model.
//!
//! The matched-filter samples obey `y = G a + w`, `w ~ N(0, σ²G)`, with `G`
//! the banded Toeplitz Gram matrix of the taps. Writing `G = C Cᵀ` with `C`
//! upper triangular, `z = C⁻¹ y = Cᵀ a + n` has white noise and a causal,
//! banded channel matrix `Cᵀ`. Since a symmetric Toeplitz matrix is
//! persymmetric, `C = J L J` where `L` is the ordinary lower Cholesky factor
//! and `J` the exchange matrix, so one banded factorization serves.

use super::DetectorConfig;
use crate::linalg::BandedCholesky;
use crate::polar::LlrVector;
use crate::{Error, Result};

/// Frame-length specific causal model `z_k = Σ_{m=0}^{ν} h_{k,m} b_{k−m} + n_k`.
#[derive(Debug, Clone)]
pub struct WhitenedModel {
    factor: BandedCholesky,
    memory: usize,
    // Row k holds h_{k,0..=memory}.
    coeffs: Vec<f64>,
    // Energy of the coefficients dropped by truncation, per row.
    residual: Vec<f64>,
}

impl WhitenedModel {
    pub fn new(taps: &[f64], n: usize, nu_max: Option<usize>) -> Result<Self> {
        let factor = BandedCholesky::toeplitz(taps, n)?;
        let full = factor.bandwidth();
        let memory = nu_max.map_or(full, |v| v.min(full));
        let w = memory + 1;
        let mut coeffs = vec![0.0; n * w];
        let mut residual = vec![0.0; n];
        for k in 0..n {
            let col = n - 1 - k;
            for m in 0..=full.min(k) {
                // Cᵀ[k][k−m] = L[n−1−k+m][n−1−k].
                let h = factor.get(col + m, col);
                if m <= memory {
                    coeffs[k * w + m] = h;
                } else {
                    residual[k] += h * h;
                }
            }
        }
        Ok(Self {
            factor,
            memory,
            coeffs,
            residual,
        })
    }

    pub fn frame_len(&self) -> usize {
        self.factor.dim()
    }

    /// Trellis memory `ν`.
    pub fn memory(&self) -> usize {
        self.memory
    }

    /// Diagonal loading used to factor the Gram matrix.
    pub fn loading(&self) -> f64 {
        self.factor.loading()
    }

    /// `h_{k,0..=ν}`.
    pub fn row(&self, k: usize) -> &[f64] {
        let w = self.memory + 1;
        &self.coeffs[k * w..(k + 1) * w]
    }

    /// Coefficient energy dropped from row `k` by truncation.
    pub fn residual_energy(&self, k: usize) -> f64 {
        self.residual[k]
    }

    /// `z = J L⁻¹ J y`.
    pub fn whiten(&self, y: &[f64]) -> Vec<f64> {
        let rev: Vec<f64> = y.iter().rev().copied().collect();
        let mut z = self.factor.solve_lower(&rev);
        z.reverse();
        z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcjrOutput {
    pub llrs: LlrVector,
    /// Hard symbol decisions (±A).
    pub hard: Vec<f64>,
}

/// BCJR detector prepared for one frame length and noise level.
#[derive(Debug, Clone)]
pub struct BcjrDetector {
    cfg: DetectorConfig,
    model: WhitenedModel,
}

impl BcjrDetector {
    pub fn new(cfg: DetectorConfig, frame_len: usize) -> Result<Self> {
        cfg.validate()?;
        let full = cfg.taps.len().saturating_sub(1).min(frame_len.saturating_sub(1));
        let memory = cfg.nu_max.map_or(full, |v| v.min(full));
        if memory > cfg.state_cap_log2 as usize {
            return Err(Error::TooManyStates {
                memory,
                cap: cfg.state_cap_log2,
            });
        }
        let model = WhitenedModel::new(cfg.taps.as_slice(), frame_len, cfg.nu_max)?;
        Ok(Self { cfg, model })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.cfg
    }

    pub fn model(&self) -> &WhitenedModel {
        &self.model
    }

    pub fn detect(&self, y: &[f64]) -> Result<BcjrOutput> {
        let n = self.model.frame_len();
        if y.len() != n {
            return Err(Error::Length {
                what: "received samples",
                expected: n,
                got: y.len(),
            });
        }
        let z = self.model.whiten(y);
        let amp = self.cfg.modulation.amplitude();
        let nu = self.model.memory();
        let states = 1usize << nu;
        let ext = states << 1;
        let mask = states - 1;

        let mut gamma = vec![0.0; ext];
        let fill_gamma = |k: usize, gamma: &mut [f64]| {
            let h = self.model.row(k);
            let variance = self.cfg.sigma2 + amp * amp * self.model.residual_energy(k);
            let inv = 0.5 / variance;
            let total: f64 = h.iter().sum();
            // Bit m of e set ⇔ b_{k−m} = −A; reuse gamma as scratch for Σ h over set bits.
            gamma[0] = 0.0;
            for e in 1..ext {
                gamma[e] = gamma[e & (e - 1)] + h[e.trailing_zeros() as usize];
            }
            for g in gamma.iter_mut() {
                let mean = amp * (total - 2.0 * *g);
                let d = z[k] - mean;
                *g = -d * d * inv;
            }
        };

        // alpha[k] holds α after observing z_0..z_{k−1}.
        let mut alpha = vec![f64::NEG_INFINITY; (n + 1) * states];
        alpha[0] = 0.0;
        for k in 0..n {
            fill_gamma(k, &mut gamma);
            let (prev, next) = alpha.split_at_mut((k + 1) * states);
            let prev = &prev[k * states..];
            let next = &mut next[..states];
            let mut best = f64::NEG_INFINITY;
            for (s, out) in next.iter_mut().enumerate() {
                let e0 = s;
                let e1 = s | states;
                let v = max_star(prev[e0 >> 1] + gamma[e0], prev[e1 >> 1] + gamma[e1]);
                *out = v;
                best = best.max(v);
            }
            for v in next.iter_mut() {
                *v -= best;
            }
        }

        let mut beta = vec![0.0; states];
        let mut beta_prev = vec![0.0; states];
        let mut llrs = vec![0.0; n];
        for k in (0..n).rev() {
            fill_gamma(k, &mut gamma);
            let a = &alpha[k * states..(k + 1) * states];
            let mut zero = f64::NEG_INFINITY;
            let mut one = f64::NEG_INFINITY;
            for e in 0..ext {
                let m = a[e >> 1] + gamma[e] + beta[e & mask];
                if e & 1 == 0 {
                    zero = max_star(zero, m);
                } else {
                    one = max_star(one, m);
                }
            }
            llrs[k] = zero - one;

            let mut best = f64::NEG_INFINITY;
            for (s, out) in beta_prev.iter_mut().enumerate() {
                let e = s << 1;
                let v = max_star(
                    gamma[e] + beta[e & mask],
                    gamma[e | 1] + beta[(e | 1) & mask],
                );
                *out = v;
                best = best.max(v);
            }
            for v in beta_prev.iter_mut() {
                *v -= best;
            }
            std::mem::swap(&mut beta, &mut beta_prev);
        }

        let clamp = self.cfg.llr_clamp;
        let llrs = LlrVector::new(llrs.into_iter().map(|l| l.clamp(-clamp, clamp)).collect());
        let hard = llrs
            .as_slice()
            .iter()
            .map(|&l| if l >= 0.0 { amp } else { -amp })
            .collect();
        Ok(BcjrOutput { llrs, hard })
    }
}

/// One-shot BCJR detection; builds the whitened model for `y.len()`.
pub fn bcjr_detect(y: &[f64], cfg: &DetectorConfig) -> Result<BcjrOutput> {
    BcjrDetector::new(cfg.clone(), y.len())?.detect(y)
}

/// Jacobian logarithm `log(eˣ + eʸ)`.
#[inline]
fn max_star(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    let d = hi - lo;
    // e^{-40} is below f64 resolution relative to hi for any sane metric.
    if !(d < 40.0) {
        hi
    } else {
        hi + (-d).exp().ln_1p()
    }
}
