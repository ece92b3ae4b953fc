//! Command-line front end for the FTN BER simulator.
//!
//! [`parse_args`] turns flags and an optional TOML experiment file into
//! resolved [`Experiment`]s, [`run`] executes their sweeps and prints a
//! summary with spectral efficiency and detector gaps.

pub mod args;
pub mod experiment;
pub mod report;
pub mod run;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

pub use args::Args;
pub use experiment::{Experiment, ExperimentFile, ExperimentSpec};
pub use report::{crossing, gap};
pub use run::run;

fn usage(kind: ErrorKind, msg: impl std::fmt::Display) -> clap::Error {
    Args::command().error(kind, msg)
}

/// Parses flags, merges them over the `--config` file and resolves every
/// experiment. All failures are clap usage errors.
pub fn parse_args<I, T>(argv: I) -> Result<Vec<Experiment>, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv)?;
    let mut specs = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(ErrorKind::Io, format!("cannot read {}: {e}", path.display())))?;
            let file = ExperimentFile::parse(&text)
                .map_err(|e| usage(ErrorKind::InvalidValue, format!("{}: {e}", path.display())))?;
            if file.experiment.is_empty() {
                return Err(usage(
                    ErrorKind::InvalidValue,
                    format!("{} defines no [[experiment]]", path.display()),
                ));
            }
            file.experiment
        }
        None => vec![ExperimentSpec::default()],
    };
    if args.out.is_some() && specs.len() > 1 {
        return Err(usage(
            ErrorKind::ArgumentConflict,
            "--out cannot be shared by several experiments; set `out` in the file instead",
        ));
    }
    let flags = args.to_spec();
    let multiple = specs.len() > 1;
    specs
        .iter_mut()
        .enumerate()
        .map(|(i, spec)| {
            spec.overlay(&flags);
            let default_name = if multiple {
                format!("experiment-{}", i + 1)
            } else {
                "experiment".to_string()
            };
            spec.resolve(&default_name).map_err(|msg| {
                let kind = if msg.ends_with("is required") {
                    ErrorKind::MissingRequiredArgument
                } else {
                    ErrorKind::ValueValidation
                };
                usage(kind, msg)
            })
        })
        .collect()
}
