use thiserror::Error;

use crate::sim::BerRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("tap threshold {0} must lie strictly between 0 and 1")]
    TapThreshold(f64),

    #[error("code length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("erasure probability {0} must lie strictly between 0 and 1")]
    ErasureProbability(f64),

    #[error("message length {m} exceeds code length {n}")]
    MessageTooLong { m: usize, n: usize },

    #[error("expected {expected} {what}, got {got}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("QPSK mapping needs an even number of bits, got {0}")]
    OddQpsk(usize),

    #[error("code rate {0} must lie in (0, 1]")]
    CodeRate(f64),

    #[error("bits per symbol must be 1 or 2, got {0}")]
    BitsPerSymbol(u32),

    #[error("noise variance must be positive, got {0}")]
    NoiseVariance(f64),

    #[error("go-back window K = {k} must be smaller than the tap count L = {taps}")]
    GoBack { k: usize, taps: usize },

    #[error(
        "trellis memory {memory} needs 2^{memory} states, above the cap of 2^{cap}; \
         reduce the memory with nu_max"
    )]
    TooManyStates { memory: usize, cap: u32 },

    #[error("Gram matrix is not positive definite even with diagonal loading {0:e}")]
    NotPositiveDefinite(f64),

    #[error("invalid simulation config: {0}")]
    Config(String),

    #[error("frame {frame}: {source}")]
    Frame {
        frame: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("sweep stopped after {} completed point(s): {source}", completed.len())]
    PartialSweep {
        completed: Vec<BerRecord>,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
