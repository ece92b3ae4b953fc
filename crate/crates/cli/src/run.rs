use std::io::Write;

use anyhow::{Context, Result};
use ftn_core::sim::{spectral_efficiency, BerRecord, Coding, CsvSink, SimConfig, Simulator};
use ftn_core::Error;
use log::{error, info};

use crate::experiment::Experiment;
use crate::report::{crossing, curve};

/// Outcome of one detector sweep inside an experiment.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: SimConfig,
    pub records: Vec<BerRecord>,
    pub error: Option<String>,
}

impl RunOutcome {
    pub fn label(&self) -> String {
        let d = &self.config.detector;
        match d.kind {
            ftn_core::detect::DetectorKind::Sss => format!("sss K={}", d.go_back),
            ftn_core::detect::DetectorKind::Bcjr => match d.nu_max {
                Some(nu) => format!("bcjr ν={nu}"),
                None => "bcjr".to_string(),
            },
        }
    }
}

/// Runs one experiment. Every detector is attempted even if an earlier one
/// fails; completed rows stay in the CSV.
pub fn run_experiment(exp: &Experiment) -> Vec<RunOutcome> {
    let mut sink = match &exp.out {
        Some(path) => match CsvSink::create(path) {
            Ok(s) => Some(s),
            Err(e) => {
                let msg = format!("cannot create {}: {e}", path.display());
                error!("{}: {msg}", exp.name);
                return exp
                    .configs
                    .iter()
                    .map(|c| RunOutcome {
                        config: c.clone(),
                        records: Vec::new(),
                        error: Some(msg.clone()),
                    })
                    .collect();
            }
        },
        None => None,
    };
    exp.configs
        .iter()
        .map(|cfg| {
            info!("{}: sweeping {} over {:?} dB", exp.name, cfg.detector.kind.as_str(), cfg.ebn0_grid);
            let result = Simulator::new(cfg.clone()).and_then(|sim| sim.sweep(sink.as_mut()));
            let (records, error) = match result {
                Ok(r) => (r, None),
                Err(Error::PartialSweep { completed, source }) => (completed, Some(source.to_string())),
                Err(e) => (Vec::new(), Some(e.to_string())),
            };
            if let Some(e) = &error {
                error!("{}: {} stopped: {e}", exp.name, cfg.detector.kind.as_str());
            }
            RunOutcome {
                config: cfg.clone(),
                records,
                error,
            }
        })
        .collect()
}

fn fmt_db(v: Option<f64>) -> String {
    v.map_or_else(|| "not reached".to_string(), |x| format!("{x:.2} dB"))
}

/// Writes the human-readable summary of one experiment.
pub fn write_summary(out: &mut dyn Write, exp: &Experiment, runs: &[RunOutcome]) -> Result<()> {
    let cfg = &exp.configs[0];
    let coding = match cfg.coding {
        Coding::Polar { n, m, .. } => format!("polar N={n} M={m}"),
        Coding::Uncoded { frame_len } => format!("uncoded N={frame_len}"),
    };
    writeln!(
        out,
        "== {}: τ = {}, β = {}, {coding}, SE = {:.3} bit/s/Hz",
        exp.name,
        cfg.tau,
        cfg.beta,
        spectral_efficiency(cfg)
    )?;
    for run in runs {
        writeln!(out, "  {}", run.label())?;
        for r in &run.records {
            writeln!(
                out,
                "    {:>6.2} dB  BER {:.3e}  FER {:.3e}  ({} errors in {} bits)",
                r.ebn0_db, r.ber, r.fer, r.bit_errors, r.bits_simulated
            )?;
        }
        let at = crossing(&curve(&run.records), exp.target_ber);
        writeln!(out, "    Eb/N0 at BER {:e}: {}", exp.target_ber, fmt_db(at))?;
        if let Some(e) = &run.error {
            writeln!(out, "    incomplete: {e}")?;
        }
    }
    if runs.len() >= 2 {
        let crossings: Vec<Option<f64>> = runs
            .iter()
            .map(|r| crossing(&curve(&r.records), exp.target_ber))
            .collect();
        let best = crossings
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| (i, c)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        for (i, run) in runs.iter().enumerate() {
            match (best, crossings[i]) {
                (Some((b, _)), _) if b == i => continue,
                (Some((b, cb)), Some(c)) => writeln!(
                    out,
                    "  gap {} vs {} at BER {:e}: {:.2} dB",
                    run.label(),
                    runs[b].label(),
                    exp.target_ber,
                    c - cb
                )?,
                _ => writeln!(
                    out,
                    "  gap for {} at BER {:e}: not available",
                    run.label(),
                    exp.target_ber
                )?,
            }
        }
    }
    Ok(())
}

/// Runs every experiment and writes summaries. Returns whether every sweep completed.
pub fn run(experiments: &[Experiment], out: &mut dyn Write) -> Result<bool> {
    let mut complete = true;
    for exp in experiments {
        let runs = run_experiment(exp);
        complete &= runs.iter().all(|r| r.error.is_none());
        write_summary(out, exp, &runs).context("writing summary")?;
        if let Some(path) = &exp.out {
            writeln!(out, "  csv: {}", path.display())?;
        }
    }
    Ok(complete)
}
