//! Bits-to-symbols mapping and the two equivalent channel paths.
//!
//! The waveform path synthesizes the oversampled FTN pulse train, adds white
//! Gaussian noise, applies the matched filter and samples every `τT`. The
//! discrete path jumps straight to the sampled model
//! `y_k = Σ_n a_n G_{|k-n|+1} + w_k`, with `w` colored to covariance `σ²G`
//! through a banded Cholesky factor. Both operate on one real dimension;
//! complex constellations are carried as two independent real streams.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::BandedCholesky;
use crate::polar::LlrVector;
use crate::pulse::{rrc_pulse, IsiTaps, PulseSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    #[default]
    Bpsk,
    Qpsk,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> u32 {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk => 2,
        }
    }

    /// Number of real dimensions carried per symbol.
    pub fn dimensions(self) -> usize {
        self.bits_per_symbol() as usize
    }

    /// Per-dimension constellation amplitude for unit symbol energy.
    pub fn amplitude(self) -> f64 {
        match self {
            Modulation::Bpsk => 1.0,
            Modulation::Qpsk => FRAC_1_SQRT_2,
        }
    }
}

/// BPSK: bit 0 → +1, bit 1 → −1. QPSK (Gray): `(b₀, b₁)` →
/// `((1 − 2b₀) + j(1 − 2b₁)) / √2`.
pub fn map_bits(bits: &[u8], modulation: Modulation) -> Result<Vec<Complex64>> {
    let sign = |b: u8| 1.0 - 2.0 * f64::from(b & 1);
    match modulation {
        Modulation::Bpsk => Ok(bits.iter().map(|&b| Complex64::new(sign(b), 0.0)).collect()),
        Modulation::Qpsk => {
            if bits.len() % 2 != 0 {
                return Err(Error::OddQpsk(bits.len()));
            }
            Ok(bits
                .chunks_exact(2)
                .map(|p| Complex64::new(sign(p[0]), sign(p[1])) * FRAC_1_SQRT_2)
                .collect())
        }
    }
}

/// Splits symbols into per-dimension real streams (I, then Q for QPSK).
pub fn split_dimensions(symbols: &[Complex64], modulation: Modulation) -> Vec<Vec<f64>> {
    match modulation {
        Modulation::Bpsk => vec![symbols.iter().map(|s| s.re).collect()],
        Modulation::Qpsk => vec![
            symbols.iter().map(|s| s.re).collect(),
            symbols.iter().map(|s| s.im).collect(),
        ],
    }
}

/// Interleaves per-dimension bit LLRs back into coded-bit order.
pub fn merge_llrs(per_dim: Vec<Vec<f64>>) -> LlrVector {
    match per_dim.len() {
        1 => LlrVector::new(per_dim.into_iter().next().unwrap_or_default()),
        _ => {
            let n = per_dim[0].len();
            let mut out = Vec::with_capacity(n * per_dim.len());
            for k in 0..n {
                for dim in &per_dim {
                    out.push(dim[k]);
                }
            }
            LlrVector::new(out)
        }
    }
}

/// `σ² = N₀/2` for unit symbol energy: `E_b = 1 / (rate · bits_per_symbol)`.
pub fn ebn0_to_sigma2(ebn0_db: f64, code_rate: f64, bits_per_symbol: u32) -> Result<f64> {
    if !(code_rate > 0.0 && code_rate <= 1.0) {
        return Err(Error::CodeRate(code_rate));
    }
    if !(1..=2).contains(&bits_per_symbol) {
        return Err(Error::BitsPerSymbol(bits_per_symbol));
    }
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    Ok(1.0 / (2.0 * code_rate * f64::from(bits_per_symbol) * ebn0))
}

/// Noise level of one simulated point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub ebn0_db: f64,
    pub sigma2: f64,
    pub rng_seed: u64,
}

impl NoiseSpec {
    pub fn new(ebn0_db: f64, code_rate: f64, modulation: Modulation, rng_seed: u64) -> Result<Self> {
        let sigma2 = ebn0_to_sigma2(ebn0_db, code_rate, modulation.bits_per_symbol())?;
        Ok(Self {
            ebn0_db,
            sigma2,
            rng_seed,
        })
    }

    /// A noiseless channel, for validation.
    pub fn noiseless() -> Self {
        Self {
            ebn0_db: f64::INFINITY,
            sigma2: 0.0,
            rng_seed: 0,
        }
    }
}

/// One codeword's trip through the link.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Frame {
    pub info_bits: Vec<u8>,
    pub coded_bits: Vec<u8>,
    pub symbols: Vec<Complex64>,
    pub rx_samples: Vec<Complex64>,
    pub soft_estimates: Vec<Complex64>,
    pub llrs: Vec<f64>,
    pub decoded_bits: Vec<u8>,
}

/// Oversampled real baseband waveform on the grid `t_i = τ + (i − pad)·τ/Q`,
/// so that symbol `n` (1-based) peaks at sample `pad + (n − 1)·Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    spec: PulseSpec,
    symbols: usize,
}

impl Waveform {
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn spec(&self) -> &PulseSpec {
        &self.spec
    }

    pub fn symbol_count(&self) -> usize {
        self.symbols
    }

    /// Time of sample `i`, in units of `T`.
    pub fn time(&self, i: usize) -> f64 {
        let pad = self.spec.half_width() as f64;
        self.spec.tau() + (i as f64 - pad) * self.spec.grid_step()
    }

    /// `Σ s_i² · Δt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>() * self.spec.grid_step()
    }

    fn expected_len(spec: &PulseSpec, symbols: usize) -> usize {
        2 * spec.half_width() + symbols.saturating_sub(1) * spec.oversampling() + 1
    }
}

fn pulse_table(spec: &PulseSpec) -> Vec<f64> {
    let pad = spec.half_width() as i64;
    let dt = spec.grid_step();
    (-pad..=pad).map(|j| rrc_pulse(j as f64 * dt, spec)).collect()
}

/// `s(t) = Σ_n a_n p(t − nτT)` on the oversampled grid.
pub fn ftn_modulate(symbols: &[f64], spec: &PulseSpec) -> Waveform {
    let q = spec.oversampling();
    let table = pulse_table(spec);
    let mut samples = vec![0.0; Waveform::expected_len(spec, symbols.len())];
    for (n, &a) in symbols.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let start = n * q;
        for (s, &p) in samples[start..start + table.len()].iter_mut().zip(&table) {
            *s += a * p;
        }
    }
    Waveform {
        samples,
        spec: *spec,
        symbols: symbols.len(),
    }
}

/// Adds white Gaussian noise of two-sided density `σ²` per dimension: each
/// grid sample gets variance `σ²/Δt`, so the matched-filter samples carry
/// noise of covariance `σ²·g((k − m)τT)`.
pub fn add_awgn<R: Rng + ?Sized>(waveform: &mut Waveform, noise: &NoiseSpec, rng: &mut R) {
    if noise.sigma2 == 0.0 {
        return;
    }
    let std = (noise.sigma2 / waveform.spec.grid_step()).sqrt();
    for s in &mut waveform.samples {
        let z: f64 = rng.sample(StandardNormal);
        *s += std * z;
    }
}

/// Correlates with `p` (scaled by the grid period) and samples at `t = kτT`,
/// `k = 1..=N`.
pub fn matched_filter_sample(waveform: &Waveform, spec: &PulseSpec) -> Result<Vec<f64>> {
    if waveform.spec != *spec {
        return Err(Error::Config(
            "waveform was synthesized with a different pulse".into(),
        ));
    }
    let expected = Waveform::expected_len(spec, waveform.symbols);
    if waveform.samples.len() != expected {
        return Err(Error::Length {
            what: "waveform samples",
            expected,
            got: waveform.samples.len(),
        });
    }
    let q = spec.oversampling();
    let dt = spec.grid_step();
    let table = pulse_table(spec);
    Ok((0..waveform.symbols)
        .map(|k| {
            let start = k * q;
            waveform.samples[start..start + table.len()]
                .iter()
                .zip(&table)
                .map(|(r, p)| r * p)
                .sum::<f64>()
                * dt
        })
        .collect())
}

/// Sampled ISI channel for frames of a fixed length.
#[derive(Debug, Clone)]
pub struct DiscreteChannel {
    taps: IsiTaps,
    factor: BandedCholesky,
}

impl DiscreteChannel {
    pub fn new(taps: &IsiTaps, frame_len: usize) -> Result<Self> {
        let factor = BandedCholesky::toeplitz(taps.as_slice(), frame_len)?;
        Ok(Self {
            taps: taps.clone(),
            factor,
        })
    }

    pub fn taps(&self) -> &IsiTaps {
        &self.taps
    }

    pub fn frame_len(&self) -> usize {
        self.factor.dim()
    }

    /// Diagonal loading the Gram factor needed (0 when positive definite).
    pub fn loading(&self) -> f64 {
        self.factor.loading()
    }

    /// Noiseless part `Σ_n a_n G_{|k−n|+1}`.
    pub fn convolve(&self, symbols: &[f64]) -> Vec<f64> {
        isi_convolve(symbols, self.taps.as_slice())
    }

    pub fn transmit<R: Rng + ?Sized>(
        &self,
        symbols: &[f64],
        noise: &NoiseSpec,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        if symbols.len() != self.frame_len() {
            return Err(Error::Length {
                what: "symbols",
                expected: self.frame_len(),
                got: symbols.len(),
            });
        }
        let mut y = self.convolve(symbols);
        if noise.sigma2 > 0.0 {
            let white: Vec<f64> = (0..y.len()).map(|_| rng.sample(StandardNormal)).collect();
            let colored = self.factor.mul_lower(&white);
            let std = noise.sigma2.sqrt();
            for (v, c) in y.iter_mut().zip(colored) {
                *v += std * c;
            }
        }
        Ok(y)
    }
}

/// One-shot discrete channel; prefer [`DiscreteChannel`] when simulating many
/// frames so the Gram factor is computed once.
pub fn discrete_channel<R: Rng + ?Sized>(
    symbols: &[f64],
    taps: &IsiTaps,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<Vec<f64>> {
    DiscreteChannel::new(taps, symbols.len())?.transmit(symbols, noise, rng)
}

/// Two-sided symmetric tap convolution with zero symbols outside the frame.
pub fn isi_convolve(symbols: &[f64], taps: &[f64]) -> Vec<f64> {
    let n = symbols.len();
    (0..n)
        .map(|k| {
            let lo = k.saturating_sub(taps.len() - 1);
            let hi = (k + taps.len()).min(n);
            (lo..hi).map(|j| symbols[j] * taps[k.abs_diff(j)]).sum()
        })
        .collect()
}
