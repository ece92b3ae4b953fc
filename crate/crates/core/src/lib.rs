//! Polar-coded faster-than-Nyquist (FTN) signaling over AWGN.
//!
//! The crate models the whole link of a coded FTN system:
//!
//! ```text
//! u ─► polar encoder ─► bits→symbols ─► FTN pulse train ─► AWGN ─► matched filter
//!                                                                     │ sample every τT
//! û ◄─ SC decoder ◄─ LLRs ◄─ sequence estimator (SSSgbKSE or BCJR) ◄──┘
//! ```
//!
//! * [`pulse`] root-raised-cosine pulse, its autocorrelation and the ISI taps.
//! * [`polar`] BEC construction, encoding and successive cancellation decoding.
//! * [`modem`] symbol mapping, waveform and discrete channel paths.
//! * [`detect`] the go-back-K successive symbol-by-symbol estimator and a
//!   log-MAP BCJR benchmark on the whitened ISI model.
//! * [`sim`] the Monte-Carlo BER engine with CSV output.

pub mod detect;
pub mod error;
pub mod linalg;
pub mod modem;
pub mod polar;
pub mod pulse;
pub mod sim;

pub use error::{Error, Result};
