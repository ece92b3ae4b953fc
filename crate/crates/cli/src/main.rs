use std::io;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("FTN_SIM_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("FTN_SIM_THREADS={raw} is not a count"))?;
    if threads == 0 {
        bail!("FTN_SIM_THREADS must be positive");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("building the worker pool")?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let experiments = ftn_cli::parse_args(std::env::args_os()).unwrap_or_else(|e| e.exit());
    let outcome = configure_threads().and_then(|()| ftn_cli::run(&experiments, &mut io::stdout().lock()));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
