use std::path::PathBuf;

use clap::Parser;

use crate::experiment::{Channel, CodingName, DetectorName, Ebn0, ExperimentSpec, ModName};

/// Polar-coded FTN BER simulator.
///
/// Sweeps Eb/N0 for one or more detectors, writes one CSV row per point and
/// prints a summary with the spectral efficiency and the dB gap between
/// detectors at the target BER.
#[derive(Debug, Clone, Default, Parser)]
#[command(name = "ftn-sim", version)]
pub struct Args {
    /// Packing factor τ in (0, 1].
    #[arg(long, value_parser = parse_tau)]
    pub tau: Option<f64>,

    /// RRC roll-off β in (0, 1] [default: 0.3].
    #[arg(long, value_parser = parse_beta)]
    pub beta: Option<f64>,

    /// Detectors to run, comma separated (e.g. `sss,bcjr`).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub detector: Vec<DetectorName>,

    /// Go-back window of the SSS estimator [default: 1].
    #[arg(long = "K")]
    pub k: Option<usize>,

    /// Keep ISI taps down to this magnitude [default: 1e-3].
    #[arg(long = "L-threshold", value_parser = parse_open_unit)]
    pub l_threshold: Option<f64>,

    /// Truncate the BCJR trellis memory to this many symbols.
    #[arg(long)]
    pub numax: Option<usize>,

    /// Channel code [default: polar].
    #[arg(long, value_enum)]
    pub coding: Option<CodingName>,

    /// Code length, or frame length when uncoded [default: 1024].
    #[arg(long = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<u64>,

    /// Information bits per polar codeword [default: 512].
    #[arg(long = "M", value_parser = clap::value_parser!(u64).range(1..))]
    pub m: Option<u64>,

    /// BEC erasure probability for the polar construction [default: 0.5].
    #[arg(long, value_parser = parse_open_unit)]
    pub epsilon: Option<f64>,

    /// Modulation [default: bpsk].
    #[arg(long = "mod", value_enum)]
    pub modulation: Option<ModName>,

    /// Eb/N0 grid in dB: `start:step:stop`, a comma list, or one value.
    #[arg(long, value_parser = parse_grid)]
    pub ebn0: Option<Ebn0>,

    /// Bit errors to collect per point [default: 100].
    #[arg(long = "min-errors", value_parser = clap::value_parser!(u64).range(1..))]
    pub min_errors: Option<u64>,

    /// Frame budget per point [default: 1000000].
    #[arg(long = "max-frames", value_parser = clap::value_parser!(u64).range(1..))]
    pub max_frames: Option<u64>,

    /// Master seed [default: 1].
    #[arg(long)]
    pub seed: Option<u64>,

    /// Channel path [default: discrete].
    #[arg(long, value_enum)]
    pub channel: Option<Channel>,

    /// CSV output path.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// TOML experiment file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// BER at which crossings and gaps are reported [default: 1e-4].
    #[arg(long = "target-ber", value_parser = parse_open_unit)]
    pub target_ber: Option<f64>,
}

impl Args {
    /// The flags as a partial experiment, to be laid over file values.
    pub fn to_spec(&self) -> ExperimentSpec {
        ExperimentSpec {
            name: None,
            tau: self.tau,
            beta: self.beta,
            detector: (!self.detector.is_empty()).then(|| self.detector.clone()),
            k: self.k,
            l_threshold: self.l_threshold,
            numax: self.numax,
            coding: self.coding,
            n: self.n,
            m: self.m,
            epsilon: self.epsilon,
            modulation: self.modulation,
            ebn0: self.ebn0.clone(),
            min_errors: self.min_errors,
            max_frames: self.max_frames,
            seed: self.seed,
            channel: self.channel,
            out: self.out.clone(),
            target_ber: self.target_ber,
            ..ExperimentSpec::default()
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

pub fn check_tau(v: f64) -> Result<f64, String> {
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("τ = {v} is out of range (0, 1]"))
    }
}

pub fn check_beta(v: f64) -> Result<f64, String> {
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("β = {v} is out of range (0, 1]"))
    }
}

pub fn check_open_unit(v: f64) -> Result<f64, String> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is out of range (0, 1)"))
    }
}

fn parse_tau(s: &str) -> Result<f64, String> {
    check_tau(parse_f64(s)?)
}

fn parse_beta(s: &str) -> Result<f64, String> {
    check_beta(parse_f64(s)?)
}

fn parse_open_unit(s: &str) -> Result<f64, String> {
    check_open_unit(parse_f64(s)?)
}

fn parse_grid(s: &str) -> Result<Ebn0, String> {
    Ok(Ebn0::List(expand_grid(s)?))
}

/// Expands `start:step:stop` (inclusive), `a,b,c` or a single value.
pub fn expand_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (parse_f64(start)?, parse_f64(step)?, parse_f64(stop)?);
            if step <= 0.0 {
                return Err(format!("grid step {step} must be positive"));
            }
            if stop < start {
                return Err(format!("grid stop {stop} is below its start {start}"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 10_000 {
                return Err(format!("grid `{s}` has {count} points"));
            }
            // Rounded so 0.1 steps print as 0.3 and not 0.30000000000000004.
            Ok((0..count)
                .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
                .collect())
        }
        [single] => single.split(',').map(parse_f64).collect(),
        _ => Err(format!("`{s}` is neither start:step:stop nor a comma list")),
    }
}
