//! Root-raised-cosine pulse, its autocorrelation and the sampled FTN ISI taps.
//!
//! Time is measured in units of the Nyquist symbol period `T = 1`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::{Error, Result};

pub const DEFAULT_BETA: f64 = 0.3;
pub const DEFAULT_SPAN_SYMBOLS: usize = 128;
pub const DEFAULT_OVERSAMPLING: usize = 8;
pub const DEFAULT_TAP_THRESHOLD: f64 = 1e-3;

/// Minimum fraction of the pulse energy the truncated pulse must keep.
const ENERGY_FLOOR: f64 = 1.0 - 1e-6;
/// Grid used for the energy check at construction, in samples per `T`.
const ENERGY_GRID: usize = 32;
/// Half-width of the window around a removable singularity inside which the
/// analytic limit is returned instead of the ratio.
const SINGULAR_WINDOW: f64 = 1e-9;

/// Waveform parameters of the FTN transmitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    beta: f64,
    tau: f64,
    span_symbols: usize,
    oversampling: usize,
    // 1/√E of the truncated pulse, so the windowed pulse has unit energy.
    norm: f64,
}

impl PulseSpec {
    pub fn new(beta: f64, tau: f64, span_symbols: usize, oversampling: usize) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidPulse(format!("roll-off {beta} outside (0, 1]")));
        }
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::InvalidPulse(format!("time packing {tau} outside (0, 1]")));
        }
        if span_symbols == 0 {
            return Err(Error::InvalidPulse("span must be at least one symbol".into()));
        }
        if oversampling < 4 {
            return Err(Error::InvalidPulse(format!(
                "oversampling {oversampling} below the minimum of 4"
            )));
        }
        let mut spec = Self {
            beta,
            tau,
            span_symbols,
            oversampling,
            norm: 1.0,
        };
        let energy = spec.truncated_energy();
        if energy < ENERGY_FLOOR {
            return Err(Error::InvalidPulse(format!(
                "span of {span_symbols} symbols keeps only {energy:.9} of the pulse energy"
            )));
        }
        spec.norm = energy.sqrt().recip();
        Ok(spec)
    }

    pub fn with_defaults(beta: f64, tau: f64) -> Result<Self> {
        Self::new(beta, tau, DEFAULT_SPAN_SYMBOLS, DEFAULT_OVERSAMPLING)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn span_symbols(&self) -> usize {
        self.span_symbols
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    /// Waveform grid period `τT / Q`.
    pub fn grid_step(&self) -> f64 {
        self.tau / self.oversampling as f64
    }

    /// One-sided pulse support in grid samples.
    pub fn half_width(&self) -> usize {
        (self.span_symbols as f64 / self.grid_step()).ceil() as usize
    }

    /// Energy of the truncated, unnormalized pulse by trapezoidal quadrature.
    pub fn truncated_energy(&self) -> f64 {
        let span = self.span_symbols as f64;
        let n = self.span_symbols * ENERGY_GRID;
        let dt = span / n as f64;
        // Even integrand: integrate one side and double; the endpoint at the
        // truncation edge gets half weight.
        let mut sum = 0.5 * rrc_unwindowed(0.0, self.beta).powi(2);
        for i in 1..n {
            sum += rrc_unwindowed(i as f64 * dt, self.beta).powi(2);
        }
        sum += 0.5 * rrc_unwindowed(span, self.beta).powi(2);
        2.0 * sum * dt
    }
}

/// Root-raised-cosine amplitude `p(t)`, zero beyond the span and scaled so
/// the truncated pulse has unit energy.
pub fn rrc_pulse(t: f64, spec: &PulseSpec) -> f64 {
    if t.abs() > spec.span_symbols as f64 {
        return 0.0;
    }
    spec.norm * rrc_unwindowed(t, spec.beta)
}

fn rrc_unwindowed(t: f64, beta: f64) -> f64 {
    let t = t.abs();
    if t < SINGULAR_WINDOW {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let quarter = 1.0 / (4.0 * beta);
    if (t - quarter).abs() < SINGULAR_WINDOW {
        let arg = PI / (4.0 * beta);
        return beta * FRAC_1_SQRT_2
            * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

/// Pulse autocorrelation `g(t) = ∫ p(x) p(x - t) dx`.
///
/// For a unit-energy RRC pulse this is the raised-cosine Nyquist pulse with
/// the same roll-off, evaluated in closed form.
pub fn autocorrelation_g(t: f64, spec: &PulseSpec) -> f64 {
    raised_cosine(t, spec.beta)
}

fn raised_cosine(t: f64, beta: f64) -> f64 {
    let t = t.abs();
    if t < SINGULAR_WINDOW {
        return 1.0;
    }
    let sinc = (PI * t).sin() / (PI * t);
    let half = 1.0 / (2.0 * beta);
    if (t - half).abs() < SINGULAR_WINDOW {
        return PI / 4.0 * (PI * half).sin() / (PI * half);
    }
    sinc * (PI * beta * t).cos() / (1.0 - (2.0 * beta * t).powi(2))
}

/// Sampled ISI taps `G_l = g((l-1)τT)`, `l = 1..=L`. `G_1 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsiTaps {
    g: Vec<f64>,
}

impl IsiTaps {
    /// Wraps an explicit tap vector, mainly for tests and custom channels.
    pub fn from_vec(g: Vec<f64>) -> Result<Self> {
        if g.is_empty() || !(g[0] > 0.0) || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPulse(
                "tap vector must be finite with a positive leading tap".into(),
            ));
        }
        Ok(Self { g })
    }

    /// Tap count `L`.
    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    /// Zero-based view: `as_slice()[d] = g(d·τT)`.
    pub fn as_slice(&self) -> &[f64] {
        &self.g
    }

    /// Interference energy `Σ_{l≥2} G_l²`.
    pub fn interference_energy(&self) -> f64 {
        self.g[1..].iter().map(|v| v * v).sum()
    }
}

/// Samples `g` at multiples of `τT` and keeps taps up to the last one whose
/// magnitude reaches `tap_threshold`. `L` never exceeds `span / τ`.
pub fn isi_taps(spec: &PulseSpec, tap_threshold: f64) -> Result<IsiTaps> {
    if !(tap_threshold > 0.0 && tap_threshold < 1.0) {
        return Err(Error::TapThreshold(tap_threshold));
    }
    let cap = ((spec.span_symbols as f64 / spec.tau).floor() as usize).max(1);
    let g: Vec<f64> = (0..cap)
        .map(|d| autocorrelation_g(d as f64 * spec.tau, spec))
        .collect();
    let last = g
        .iter()
        .rposition(|v| v.abs() >= tap_threshold)
        .unwrap_or(0);
    Ok(IsiTaps {
        g: g[..=last].to_vec(),
    })
}
