//! Monte-Carlo BER engine.
//!
//! Every frame draws from its own ChaCha stream keyed by the point seed and
//! the frame index, and per-frame results are reduced in frame order, so the
//! records do not depend on the number of worker threads.

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detect::{Detector, DetectorConfig, DetectorKind, LlrScaling, DEFAULT_STATE_CAP_LOG2};
use crate::modem::{
    add_awgn, ftn_modulate, map_bits, matched_filter_sample, merge_llrs, split_dimensions,
    DiscreteChannel, Frame, Modulation, NoiseSpec,
};
use crate::polar::{FNode, PolarCode, LLR_MAX};
use crate::pulse::{
    isi_taps, IsiTaps, PulseSpec, DEFAULT_BETA, DEFAULT_OVERSAMPLING, DEFAULT_SPAN_SYMBOLS,
    DEFAULT_TAP_THRESHOLD,
};
use crate::{Error, Result};

pub const DEFAULT_MIN_BIT_ERRORS: u64 = 100;
pub const DEFAULT_MAX_FRAMES: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Coding {
    /// Raw BPSK/QPSK frames of `frame_len` bits.
    Uncoded { frame_len: usize },
    Polar { n: usize, m: usize, epsilon: f64 },
}

impl Coding {
    pub fn label(&self) -> &'static str {
        match self {
            Coding::Uncoded { .. } => "none",
            Coding::Polar { .. } => "polar",
        }
    }

    /// `(N, M)`: coded and information bits per frame.
    pub fn lengths(&self) -> (usize, usize) {
        match *self {
            Coding::Uncoded { frame_len } => (frame_len, frame_len),
            Coding::Polar { n, m, .. } => (n, m),
        }
    }

    pub fn rate(&self) -> f64 {
        let (n, m) = self.lengths();
        m as f64 / n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelPath {
    /// Oversampled pulse train, white noise, matched filter.
    Waveform,
    /// Sampled tap model with colored noise.
    #[default]
    Discrete,
}

/// Detector choice before the noise level is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorSettings {
    pub kind: DetectorKind,
    pub go_back: usize,
    pub nu_max: Option<usize>,
    pub state_cap_log2: u32,
    pub llr_scaling: LlrScaling,
}

impl DetectorSettings {
    pub fn new(kind: DetectorKind) -> Self {
        Self {
            kind,
            go_back: 1,
            nu_max: None,
            state_cap_log2: DEFAULT_STATE_CAP_LOG2,
            llr_scaling: LlrScaling::Nominal,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub tau: f64,
    pub beta: f64,
    pub modulation: Modulation,
    pub coding: Coding,
    pub detector: DetectorSettings,
    pub ebn0_grid: Vec<f64>,
    pub min_bit_errors: u64,
    pub max_frames: u64,
    pub master_seed: u64,
    pub channel_path: ChannelPath,
    pub tap_threshold: f64,
    pub span_symbols: usize,
    pub oversampling: usize,
    pub fnode: FNode,
    /// Stop a sweep after two consecutive error-free points.
    pub early_abort: bool,
}

impl SimConfig {
    /// Polar N = 1024, rate 1/2, β = 0.3, BPSK, discrete channel, seed 1.
    pub fn new(tau: f64, detector: DetectorKind) -> Self {
        Self {
            tau,
            beta: DEFAULT_BETA,
            modulation: Modulation::Bpsk,
            coding: Coding::Polar {
                n: 1024,
                m: 512,
                epsilon: 0.5,
            },
            detector: DetectorSettings::new(detector),
            ebn0_grid: Vec::new(),
            min_bit_errors: DEFAULT_MIN_BIT_ERRORS,
            max_frames: DEFAULT_MAX_FRAMES,
            master_seed: 1,
            channel_path: ChannelPath::Discrete,
            tap_threshold: DEFAULT_TAP_THRESHOLD,
            span_symbols: DEFAULT_SPAN_SYMBOLS,
            oversampling: DEFAULT_OVERSAMPLING,
            fnode: FNode::MinSum,
            early_abort: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        PulseSpec::new(self.beta, self.tau, self.span_symbols, self.oversampling)?;
        if !(self.tap_threshold > 0.0 && self.tap_threshold < 1.0) {
            return Err(Error::TapThreshold(self.tap_threshold));
        }
        if self.ebn0_grid.is_empty() {
            return Err(Error::Config("Eb/N0 grid is empty".into()));
        }
        if self.ebn0_grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("Eb/N0 grid has non-finite points".into()));
        }
        if self.ebn0_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("Eb/N0 grid must be strictly increasing".into()));
        }
        if self.min_bit_errors == 0 || self.max_frames == 0 {
            return Err(Error::Config("error and frame limits must be positive".into()));
        }
        let (n, m) = self.coding.lengths();
        match self.coding {
            Coding::Uncoded { frame_len } if frame_len == 0 => {
                return Err(Error::Config("frame length must be positive".into()));
            }
            Coding::Polar { n, m, epsilon } => {
                PolarCode::new(n, m, epsilon)?;
                if m == 0 {
                    return Err(Error::Config("polar code carries no information bits".into()));
                }
            }
            _ => {}
        }
        if self.modulation == Modulation::Qpsk && n % 2 != 0 {
            return Err(Error::OddQpsk(n));
        }
        debug_assert!(m <= n);
        Ok(())
    }

    pub fn code_rate(&self) -> f64 {
        self.coding.rate()
    }

    /// Symbols per frame in each real dimension.
    pub fn symbols_per_frame(&self) -> usize {
        self.coding.lengths().0 / self.modulation.dimensions()
    }
}

/// One `(config, Eb/N0)` measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub ebn0_db: f64,
    pub frames: u64,
    pub bits_simulated: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub elapsed: Duration,
    pub seed: u64,
}

impl BerRecord {
    /// Equality ignoring wall-clock time.
    pub fn same_counts(&self, other: &Self) -> bool {
        Self {
            elapsed: Duration::ZERO,
            ..self.clone()
        } == Self {
            elapsed: Duration::ZERO,
            ..other.clone()
        }
    }
}

/// Seed of the point at `ebn0_db`, keyed on the value (to the milli-dB) so
/// that editing the grid leaves other points untouched.
pub fn point_seed(master_seed: u64, ebn0_db: f64) -> u64 {
    let key = (ebn0_db * 1000.0).round() as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(key as u64);
    rng.next_u64()
}

fn frame_rng(point_seed: u64, frame_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(point_seed);
    rng.set_stream(frame_index);
    rng
}

/// `(M/N)·(1/τT) / ((1/2T)(1 + β))` in bit/s/Hz.
pub fn spectral_efficiency(cfg: &SimConfig) -> f64 {
    cfg.code_rate() * (1.0 / cfg.tau) / (0.5 * (1.0 + cfg.beta))
}

/// Precomputed link for one configuration.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SimConfig,
    spec: PulseSpec,
    taps: IsiTaps,
    code: Option<PolarCode>,
    channel: DiscreteChannel,
}

struct Point {
    noise: NoiseSpec,
    detector: Detector,
}

#[derive(Debug, Clone, Copy, Default)]
struct FrameTally {
    bits: u64,
    errors: u64,
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let spec = PulseSpec::new(cfg.beta, cfg.tau, cfg.span_symbols, cfg.oversampling)?;
        let taps = isi_taps(&spec, cfg.tap_threshold)?;
        let code = match cfg.coding {
            Coding::Polar { n, m, epsilon } => Some(PolarCode::new(n, m, epsilon)?),
            Coding::Uncoded { .. } => None,
        };
        let channel = DiscreteChannel::new(&taps, cfg.symbols_per_frame())?;
        Ok(Self {
            cfg,
            spec,
            taps,
            code,
            channel,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn taps(&self) -> &IsiTaps {
        &self.taps
    }

    pub fn pulse(&self) -> &PulseSpec {
        &self.spec
    }

    fn point(&self, ebn0_db: f64) -> Result<Point> {
        let seed = point_seed(self.cfg.master_seed, ebn0_db);
        let noise = NoiseSpec::new(ebn0_db, self.cfg.code_rate(), self.cfg.modulation, seed)?;
        let s = &self.cfg.detector;
        let mut dcfg = DetectorConfig::new(s.kind, self.taps.clone(), noise.sigma2)
            .with_go_back(s.go_back)
            .with_nu_max(s.nu_max)
            .with_modulation(self.cfg.modulation);
        dcfg.state_cap_log2 = s.state_cap_log2;
        dcfg.llr_scaling = s.llr_scaling;
        dcfg.llr_clamp = LLR_MAX;
        let detector = Detector::new(dcfg, self.cfg.symbols_per_frame())?;
        Ok(Point { noise, detector })
    }

    /// Runs one frame end to end and returns every intermediate stage.
    pub fn frame(&self, ebn0_db: f64, frame_index: u64) -> Result<Frame> {
        let point = self.point(ebn0_db)?;
        self.run_frame(&point, frame_index)
    }

    fn run_frame(&self, point: &Point, frame_index: u64) -> Result<Frame> {
        let wrap = |e: Error| Error::Frame {
            frame: frame_index,
            source: Box::new(e),
        };
        let mut rng = frame_rng(point.noise.rng_seed, frame_index);
        let (_, m) = self.cfg.coding.lengths();
        let info_bits: Vec<u8> = (0..m).map(|_| u8::from(rng.random::<bool>())).collect();
        let coded_bits = match &self.code {
            Some(code) => code.encode(&info_bits).map_err(wrap)?,
            None => info_bits.clone(),
        };
        let symbols = map_bits(&coded_bits, self.cfg.modulation).map_err(wrap)?;
        let dims = split_dimensions(&symbols, self.cfg.modulation);

        let mut rx = Vec::with_capacity(dims.len());
        for dim in &dims {
            let y = match self.cfg.channel_path {
                ChannelPath::Discrete => self
                    .channel
                    .transmit(dim, &point.noise, &mut rng)
                    .map_err(wrap)?,
                ChannelPath::Waveform => {
                    let mut w = ftn_modulate(dim, &self.spec);
                    add_awgn(&mut w, &point.noise, &mut rng);
                    matched_filter_sample(&w, &self.spec).map_err(wrap)?
                }
            };
            rx.push(y);
        }

        let mut soft = Vec::with_capacity(rx.len());
        let mut llrs = Vec::with_capacity(rx.len());
        for y in &rx {
            let det = point.detector.detect(y).map_err(wrap)?;
            soft.push(det.soft);
            llrs.push(det.llrs.into_inner());
        }
        let llrs = merge_llrs(llrs);

        let decoded_bits = match &self.code {
            Some(code) => code.decode(&llrs, self.cfg.fnode).map_err(wrap)?.message,
            None => llrs.hard_bits(),
        };

        Ok(Frame {
            info_bits,
            coded_bits,
            symbols,
            rx_samples: zip_dims(&rx),
            soft_estimates: zip_dims(&soft),
            llrs: llrs.into_inner(),
            decoded_bits,
        })
    }

    fn tally(&self, point: &Point, frame_index: u64) -> Result<FrameTally> {
        let f = self.run_frame(point, frame_index)?;
        let errors = f
            .info_bits
            .iter()
            .zip(&f.decoded_bits)
            .filter(|(a, b)| a != b)
            .count() as u64;
        Ok(FrameTally {
            bits: f.info_bits.len() as u64,
            errors,
        })
    }

    /// Simulates frames until `min_bit_errors` or `max_frames` is reached.
    pub fn run_point(&self, ebn0_db: f64) -> Result<BerRecord> {
        let start = Instant::now();
        let point = self.point(ebn0_db)?;
        let chunk = (rayon::current_num_threads() as u64 * 4).max(4);
        let mut frames = 0u64;
        let mut bits = 0u64;
        let mut bit_errors = 0u64;
        let mut frame_errors = 0u64;

        'outer: while frames < self.cfg.max_frames {
            let end = (frames + chunk).min(self.cfg.max_frames);
            let tallies = (frames..end)
                .into_par_iter()
                .map(|i| self.tally(&point, i))
                .collect::<Result<Vec<_>>>()?;
            for t in tallies {
                frames += 1;
                bits += t.bits;
                bit_errors += t.errors;
                frame_errors += u64::from(t.errors > 0);
                if bit_errors >= self.cfg.min_bit_errors {
                    break 'outer;
                }
            }
        }

        Ok(BerRecord {
            ebn0_db,
            frames,
            bits_simulated: bits,
            bit_errors,
            frame_errors,
            ber: bit_errors as f64 / bits as f64,
            fer: frame_errors as f64 / frames as f64,
            elapsed: start.elapsed(),
            seed: point.noise.rng_seed,
        })
    }

    /// Runs the whole grid, streaming each record to `sink` when given.
    pub fn sweep(&self, mut sink: Option<&mut CsvSink>) -> Result<Vec<BerRecord>> {
        let mut records: Vec<BerRecord> = Vec::with_capacity(self.cfg.ebn0_grid.len());
        let mut zero_run = 0;
        for &ebn0 in &self.cfg.ebn0_grid {
            let outcome = self.run_point(ebn0).and_then(|rec| {
                if let Some(sink) = sink.as_deref_mut() {
                    sink.write(&self.cfg, &rec)?;
                }
                Ok(rec)
            });
            let rec = match outcome {
                Ok(rec) => rec,
                Err(e) => {
                    return Err(Error::PartialSweep {
                        completed: records,
                        source: Box::new(e),
                    })
                }
            };
            zero_run = if rec.bit_errors == 0 { zero_run + 1 } else { 0 };
            records.push(rec);
            if self.cfg.early_abort && zero_run >= 2 {
                break;
            }
        }
        Ok(records)
    }
}

fn zip_dims(dims: &[Vec<f64>]) -> Vec<num_complex::Complex64> {
    match dims {
        [i] => i.iter().map(|&v| num_complex::Complex64::new(v, 0.0)).collect(),
        [i, q] => i
            .iter()
            .zip(q)
            .map(|(&a, &b)| num_complex::Complex64::new(a, b))
            .collect(),
        _ => Vec::new(),
    }
}

pub fn run_ber_point(cfg: &SimConfig, ebn0_db: f64) -> Result<BerRecord> {
    let mut cfg = cfg.clone();
    if cfg.ebn0_grid.is_empty() {
        cfg.ebn0_grid.push(ebn0_db);
    }
    Simulator::new(cfg)?.run_point(ebn0_db)
}

pub fn sweep(cfg: &SimConfig, sink: Option<&mut CsvSink>) -> Result<Vec<BerRecord>> {
    Simulator::new(cfg.clone())?.sweep(sink)
}

/// CSV row schema for BER records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub ebn0_db: f64,
    pub tau: f64,
    pub beta: f64,
    pub detector: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub coding: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub bits: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub seed: u64,
}

impl CsvRow {
    pub fn new(cfg: &SimConfig, rec: &BerRecord) -> Self {
        let (n, m) = cfg.coding.lengths();
        let k = match cfg.detector.kind {
            DetectorKind::Sss => cfg.detector.go_back,
            DetectorKind::Bcjr => 0,
        };
        Self {
            ebn0_db: rec.ebn0_db,
            tau: cfg.tau,
            beta: cfg.beta,
            detector: cfg.detector.kind.as_str().to_string(),
            k,
            coding: cfg.coding.label().to_string(),
            n,
            m,
            bits: rec.bits_simulated,
            bit_errors: rec.bit_errors,
            frame_errors: rec.frame_errors,
            ber: rec.ber,
            fer: rec.fer,
            seed: rec.seed,
        }
    }
}

/// Incremental CSV writer; every row is flushed as soon as it is written.
pub struct CsvSink {
    writer: csv::Writer<Box<dyn Write + Send>>,
}

impl CsvSink {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path)?;
        Ok(Self::from_writer(Box::new(file)))
    }

    pub fn from_writer(w: Box<dyn Write + Send>) -> Self {
        Self {
            writer: csv::Writer::from_writer(w),
        }
    }

    pub fn write(&mut self, cfg: &SimConfig, rec: &BerRecord) -> Result<()> {
        self.writer.serialize(CsvRow::new(cfg, rec))?;
        self.writer.flush()?;
        Ok(())
    }
}
