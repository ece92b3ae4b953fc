//! Sequence estimation on the sampled FTN model.

mod bcjr;
mod sss;

pub use bcjr::{bcjr_detect, BcjrDetector, BcjrOutput, WhitenedModel};
pub use sss::sss_gbk_estimate;

use serde::{Deserialize, Serialize};

use crate::modem::Modulation;
use crate::polar::{LlrVector, LLR_MAX};
use crate::pulse::IsiTaps;
use crate::{Error, Result};

/// Default trellis size cap, as a power of two.
pub const DEFAULT_STATE_CAP_LOG2: u32 = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    /// Successive symbol-by-symbol estimation with go-back-K.
    Sss,
    /// Log-MAP forward–backward on the whitened ISI trellis.
    Bcjr,
}

impl DetectorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Sss => "sss",
            DetectorKind::Bcjr => "bcjr",
        }
    }
}

/// How soft estimates are turned into LLRs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LlrScaling {
    /// `2·A·â/σ²` with the channel noise variance.
    #[default]
    Nominal,
    /// Replaces `σ²` with the decision-directed variance of `â` around its
    /// hard decisions, which also absorbs residual ISI.
    Empirical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    pub kind: DetectorKind,
    /// Go-back window `K`.
    pub go_back: usize,
    pub taps: IsiTaps,
    /// Per-dimension noise variance `σ²`.
    pub sigma2: f64,
    pub llr_clamp: f64,
    pub modulation: Modulation,
    /// BCJR memory truncation `ν_max`; `None` keeps `ν = L − 1`.
    pub nu_max: Option<usize>,
    pub state_cap_log2: u32,
    pub llr_scaling: LlrScaling,
}

impl DetectorConfig {
    pub fn new(kind: DetectorKind, taps: IsiTaps, sigma2: f64) -> Self {
        Self {
            kind,
            go_back: 1,
            taps,
            sigma2,
            llr_clamp: LLR_MAX,
            modulation: Modulation::Bpsk,
            nu_max: None,
            state_cap_log2: DEFAULT_STATE_CAP_LOG2,
            llr_scaling: LlrScaling::Nominal,
        }
    }

    pub fn with_go_back(mut self, k: usize) -> Self {
        self.go_back = k;
        self
    }

    pub fn with_nu_max(mut self, nu_max: Option<usize>) -> Self {
        self.nu_max = nu_max;
        self
    }

    pub fn with_modulation(mut self, modulation: Modulation) -> Self {
        self.modulation = modulation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2 > 0.0) {
            return Err(Error::NoiseVariance(self.sigma2));
        }
        // With a single tap there is nothing to go back over.
        let taps = self.taps.len();
        if self.kind == DetectorKind::Sss && taps > 1 && self.go_back >= taps {
            return Err(Error::GoBack {
                k: self.go_back,
                taps,
            });
        }
        Ok(())
    }
}

/// Soft symbol values and the hard decisions used for cancellation.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftEstimates {
    pub soft: Vec<f64>,
    pub hard: Vec<f64>,
}

/// Nearest constellation point of one real dimension; a tie at 0 goes to
/// the positive point.
pub fn quantize(value: f64, modulation: Modulation) -> f64 {
    let a = modulation.amplitude();
    if value >= 0.0 {
        a
    } else {
        -a
    }
}

/// Per-bit LLRs `clamp(2·A·â/σ², ±LLR_MAX)`, bit 0 ↔ positive amplitude.
pub fn soft_to_llr(est: &SoftEstimates, cfg: &DetectorConfig) -> LlrVector {
    let amp = cfg.modulation.amplitude();
    let variance = match cfg.llr_scaling {
        LlrScaling::Nominal => cfg.sigma2,
        LlrScaling::Empirical => {
            let n = est.soft.len().max(1) as f64;
            let v = est
                .soft
                .iter()
                .zip(&est.hard)
                .map(|(s, h)| (s - h).powi(2))
                .sum::<f64>()
                / n;
            if v > 0.0 {
                v
            } else {
                cfg.sigma2
            }
        }
    };
    let scale = 2.0 * amp / variance;
    LlrVector::new(
        est.soft
            .iter()
            .map(|&s| (scale * s).clamp(-cfg.llr_clamp, cfg.llr_clamp))
            .collect(),
    )
}

/// A detector prepared for a fixed frame length.
#[derive(Debug, Clone)]
pub enum Detector {
    Sss(DetectorConfig),
    Bcjr(BcjrDetector),
}

/// Per-dimension detector output.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// Soft symbol values (SSS) or `A·tanh(LLR/2)` (BCJR).
    pub soft: Vec<f64>,
    pub llrs: LlrVector,
}

impl Detector {
    pub fn new(cfg: DetectorConfig, frame_len: usize) -> Result<Self> {
        cfg.validate()?;
        match cfg.kind {
            DetectorKind::Sss => Ok(Detector::Sss(cfg)),
            DetectorKind::Bcjr => Ok(Detector::Bcjr(BcjrDetector::new(cfg, frame_len)?)),
        }
    }

    pub fn config(&self) -> &DetectorConfig {
        match self {
            Detector::Sss(cfg) => cfg,
            Detector::Bcjr(d) => d.config(),
        }
    }

    pub fn detect(&self, y: &[f64]) -> Result<Detection> {
        match self {
            Detector::Sss(cfg) => {
                let est = sss_gbk_estimate(y, cfg)?;
                let llrs = soft_to_llr(&est, cfg);
                Ok(Detection {
                    soft: est.soft,
                    llrs,
                })
            }
            Detector::Bcjr(d) => {
                let out = d.detect(y)?;
                let amp = d.config().modulation.amplitude();
                let soft = out
                    .llrs
                    .as_slice()
                    .iter()
                    .map(|l| amp * (0.5 * l).tanh())
                    .collect();
                Ok(Detection {
                    soft,
                    llrs: out.llrs,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_bpsk() {
        assert_eq!(quantize(0.3, Modulation::Bpsk), 1.0);
        assert_eq!(quantize(-1.7, Modulation::Bpsk), -1.0);
        assert_eq!(quantize(0.0, Modulation::Bpsk), 1.0);
        assert_eq!(quantize(-0.2, Modulation::Qpsk), -Modulation::Qpsk.amplitude());
    }

    #[test]
    fn llr_formula() {
        let taps = IsiTaps::from_vec(vec![1.0]).unwrap();
        let cfg = DetectorConfig::new(DetectorKind::Sss, taps, 0.5);
        let est = SoftEstimates {
            soft: vec![0.0, 1.0, -1e6],
            hard: vec![1.0, 1.0, -1.0],
        };
        let llr = soft_to_llr(&est, &cfg);
        assert_eq!(llr.as_slice(), &[0.0, 4.0, -LLR_MAX]);
    }

    #[test]
    fn llr_sign_follows_soft_value() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let taps = IsiTaps::from_vec(vec![1.0]).unwrap();
        let cfg = DetectorConfig::new(DetectorKind::Sss, taps, 0.37);
        let soft: Vec<f64> = (0..10_000).map(|_| rng.random_range(-3.0..3.0)).collect();
        let hard = soft.iter().map(|&s| quantize(s, Modulation::Bpsk)).collect();
        let llr = soft_to_llr(&SoftEstimates { soft: soft.clone(), hard }, &cfg);
        for (s, l) in soft.iter().zip(llr.as_slice()) {
            assert_eq!(s.signum(), l.signum());
        }
    }

    #[test]
    fn empirical_scaling_keeps_signs() {
        let taps = IsiTaps::from_vec(vec![1.0]).unwrap();
        let mut cfg = DetectorConfig::new(DetectorKind::Sss, taps, 0.5);
        cfg.llr_scaling = LlrScaling::Empirical;
        let est = SoftEstimates {
            soft: vec![0.8, -1.2, 1.1, -0.9],
            hard: vec![1.0, -1.0, 1.0, -1.0],
        };
        let llr = soft_to_llr(&est, &cfg);
        // Variance 0.025 → scale 80.
        assert!((llr.as_slice()[0] - 64.0).abs() < 1e-9);
        assert!(llr.as_slice()[1] < 0.0);
    }

    #[test]
    fn config_validation() {
        let taps = IsiTaps::from_vec(vec![1.0, 0.2, 0.1]).unwrap();
        let cfg = DetectorConfig::new(DetectorKind::Sss, taps.clone(), 0.5).with_go_back(3);
        assert!(matches!(cfg.validate(), Err(Error::GoBack { k: 3, taps: 3 })));
        let cfg = DetectorConfig::new(DetectorKind::Bcjr, taps, 0.0);
        assert!(matches!(cfg.validate(), Err(Error::NoiseVariance(_))));
    }
}
