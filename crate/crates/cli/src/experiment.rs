//! TOML experiment files and their resolution into simulator configs.
//!
//! ```toml
//! [[experiment]]
//! name = "tau08-coded"
//! tau = 0.8
//! detector = ["sss", "bcjr"]
//! ebn0 = "2:0.5:6"
//! out = "tau08-coded.csv"
//! ```

use std::path::PathBuf;

use clap::ValueEnum;
use ftn_core::detect::{Detector, DetectorConfig, DetectorKind, LlrScaling};
use ftn_core::modem::Modulation;
use ftn_core::polar::FNode;
use ftn_core::pulse::{DEFAULT_BETA, DEFAULT_OVERSAMPLING, DEFAULT_SPAN_SYMBOLS, DEFAULT_TAP_THRESHOLD};
use ftn_core::sim::{ChannelPath, Coding, DetectorSettings, SimConfig, Simulator};
use serde::{Deserialize, Serialize};

use crate::args::{check_beta, check_open_unit, check_tau, expand_grid};

pub const DEFAULT_TARGET_BER: f64 = 1e-4;
pub const DEFAULT_GRID: &str = "0:1:10";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorName {
    Sss,
    Bcjr,
}

impl From<DetectorName> for DetectorKind {
    fn from(d: DetectorName) -> Self {
        match d {
            DetectorName::Sss => DetectorKind::Sss,
            DetectorName::Bcjr => DetectorKind::Bcjr,
        }
    }
}

impl From<DetectorKind> for DetectorName {
    fn from(d: DetectorKind) -> Self {
        match d {
            DetectorKind::Sss => DetectorName::Sss,
            DetectorKind::Bcjr => DetectorName::Bcjr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodingName {
    None,
    Polar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModName {
    Bpsk,
    Qpsk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Waveform,
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FNodeName {
    MinSum,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    Nominal,
    Empirical,
}

/// Eb/N0 grid as written in a file: an explicit list or a `start:step:stop` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ebn0 {
    List(Vec<f64>),
    Text(String),
}

impl Ebn0 {
    pub fn points(&self) -> Result<Vec<f64>, String> {
        match self {
            Ebn0::List(v) => Ok(v.clone()),
            Ebn0::Text(s) => expand_grid(s),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    #[serde(default)]
    pub experiment: Vec<ExperimentSpec>,
}

/// One experiment. Every key is optional so flags and defaults can fill gaps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detector: Option<Vec<DetectorName>>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(rename = "L_threshold", skip_serializing_if = "Option::is_none")]
    pub l_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numax: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coding: Option<CodingName>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(rename = "mod", skip_serializing_if = "Option::is_none")]
    pub modulation: Option<ModName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ebn0: Option<Ebn0>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_errors: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_frames: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<Channel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_ber: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fnode: Option<FNodeName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub llr_scaling: Option<Scaling>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_cap_log2: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oversampling: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub early_abort: Option<bool>,
}

/// A fully resolved experiment: one config per requested detector.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub configs: Vec<SimConfig>,
    pub out: Option<PathBuf>,
    pub target_ber: f64,
}

impl ExperimentSpec {
    /// Replaces every key that `top` sets.
    pub fn overlay(&mut self, top: &ExperimentSpec) {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if top.$f.is_some() {
                    self.$f = top.$f.clone();
                }
            )*};
        }
        take!(
            name, tau, beta, detector, k, l_threshold, numax, coding, n, m, epsilon, modulation,
            ebn0, min_errors, max_frames, seed, channel, out, target_ber, fnode, llr_scaling,
            state_cap_log2, span, oversampling, early_abort
        );
    }

    /// Fills defaults and checks ranges. The error names the offending key.
    pub fn resolve(&self, default_name: &str) -> Result<Experiment, String> {
        let tau = check_tau(self.tau.ok_or("--tau is required")?)?;
        let detectors = match &self.detector {
            Some(d) if !d.is_empty() => d.clone(),
            _ => return Err("--detector is required".into()),
        };
        let mut base = SimConfig::new(tau, DetectorKind::Sss);
        base.beta = check_beta(self.beta.unwrap_or(DEFAULT_BETA))?;

        let coding = self.coding.unwrap_or(CodingName::Polar);
        let n = self.n.unwrap_or(1024) as usize;
        base.coding = match coding {
            CodingName::Polar => Coding::Polar {
                n,
                m: self.m.unwrap_or(n as u64 / 2) as usize,
                epsilon: check_open_unit(self.epsilon.unwrap_or(0.5))
                    .map_err(|e| format!("epsilon: {e}"))?,
            },
            CodingName::None => {
                if self.m.is_some() || self.epsilon.is_some() {
                    return Err("--M and --epsilon only apply to polar coding".into());
                }
                Coding::Uncoded { frame_len: n }
            }
        };
        base.modulation = match self.modulation.unwrap_or(ModName::Bpsk) {
            ModName::Bpsk => Modulation::Bpsk,
            ModName::Qpsk => Modulation::Qpsk,
        };
        base.ebn0_grid = match &self.ebn0 {
            Some(g) => g.points()?,
            None => expand_grid(DEFAULT_GRID)?,
        };
        if let Some(v) = self.min_errors {
            base.min_bit_errors = v;
        }
        if let Some(v) = self.max_frames {
            base.max_frames = v;
        }
        base.master_seed = self.seed.unwrap_or(1);
        base.channel_path = match self.channel.unwrap_or(Channel::Discrete) {
            Channel::Waveform => ChannelPath::Waveform,
            Channel::Discrete => ChannelPath::Discrete,
        };
        base.tap_threshold = check_open_unit(self.l_threshold.unwrap_or(DEFAULT_TAP_THRESHOLD))
            .map_err(|e| format!("L threshold: {e}"))?;
        base.span_symbols = self.span.unwrap_or(DEFAULT_SPAN_SYMBOLS);
        base.oversampling = self.oversampling.unwrap_or(DEFAULT_OVERSAMPLING);
        base.fnode = match self.fnode.unwrap_or(FNodeName::MinSum) {
            FNodeName::MinSum => FNode::MinSum,
            FNodeName::Exact => FNode::Exact,
        };
        base.early_abort = self.early_abort.unwrap_or(true);
        let target_ber = check_open_unit(self.target_ber.unwrap_or(DEFAULT_TARGET_BER))
            .map_err(|e| format!("target BER: {e}"))?;

        let mut configs = Vec::with_capacity(detectors.len());
        for d in detectors {
            let mut cfg = base.clone();
            let mut settings = DetectorSettings::new(d.into());
            settings.go_back = self.k.unwrap_or(1);
            settings.nu_max = self.numax;
            if let Some(cap) = self.state_cap_log2 {
                settings.state_cap_log2 = cap;
            }
            settings.llr_scaling = match self.llr_scaling.unwrap_or(Scaling::Nominal) {
                Scaling::Nominal => LlrScaling::Nominal,
                Scaling::Empirical => LlrScaling::Empirical,
            };
            cfg.detector = settings;
            check_config(&cfg)?;
            configs.push(cfg);
        }
        Ok(Experiment {
            name: self.name.clone().unwrap_or_else(|| default_name.to_string()),
            configs,
            out: self.out.clone(),
            target_ber,
        })
    }
}

/// Builds the simulator and a detector so bad combinations fail before any sweep.
fn check_config(cfg: &SimConfig) -> Result<(), String> {
    let sim = Simulator::new(cfg.clone()).map_err(|e| e.to_string())?;
    let s = &cfg.detector;
    let mut dcfg = DetectorConfig::new(s.kind, sim.taps().clone(), 1.0)
        .with_go_back(s.go_back)
        .with_nu_max(s.nu_max)
        .with_modulation(cfg.modulation);
    dcfg.state_cap_log2 = s.state_cap_log2;
    Detector::new(dcfg, cfg.symbols_per_frame()).map_err(|e| format!("{}: {e}", s.kind.as_str()))?;
    Ok(())
}

impl Experiment {
    /// Every setting spelled out, so the file re-parses to the same configs.
    pub fn to_spec(&self) -> ExperimentSpec {
        let cfg = &self.configs[0];
        let (n, m, coding, epsilon) = match cfg.coding {
            Coding::Polar { n, m, epsilon } => (n, Some(m as u64), CodingName::Polar, Some(epsilon)),
            Coding::Uncoded { frame_len } => (frame_len, None, CodingName::None, None),
        };
        let s = &cfg.detector;
        ExperimentSpec {
            name: Some(self.name.clone()),
            tau: Some(cfg.tau),
            beta: Some(cfg.beta),
            detector: Some(self.configs.iter().map(|c| c.detector.kind.into()).collect()),
            k: Some(s.go_back),
            l_threshold: Some(cfg.tap_threshold),
            numax: s.nu_max,
            coding: Some(coding),
            n: Some(n as u64),
            m,
            epsilon,
            modulation: Some(match cfg.modulation {
                Modulation::Bpsk => ModName::Bpsk,
                Modulation::Qpsk => ModName::Qpsk,
            }),
            ebn0: Some(Ebn0::List(cfg.ebn0_grid.clone())),
            min_errors: Some(cfg.min_bit_errors),
            max_frames: Some(cfg.max_frames),
            seed: Some(cfg.master_seed),
            channel: Some(match cfg.channel_path {
                ChannelPath::Waveform => Channel::Waveform,
                ChannelPath::Discrete => Channel::Discrete,
            }),
            out: self.out.clone(),
            target_ber: Some(self.target_ber),
            fnode: Some(match cfg.fnode {
                FNode::MinSum => FNodeName::MinSum,
                FNode::Exact => FNodeName::Exact,
            }),
            llr_scaling: Some(match s.llr_scaling {
                LlrScaling::Nominal => Scaling::Nominal,
                LlrScaling::Empirical => Scaling::Empirical,
            }),
            state_cap_log2: Some(s.state_cap_log2),
            span: Some(cfg.span_symbols),
            oversampling: Some(cfg.oversampling),
            early_abort: Some(cfg.early_abort),
        }
    }
}

impl ExperimentFile {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> Result<String, toml::ser::Error> {
        toml::to_string(self)
    }
}
