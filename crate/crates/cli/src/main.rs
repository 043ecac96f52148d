//! `ruelle`: command-line front end for the product-potential toolkit.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 a certified check failed.

mod args;
mod commands;
mod output;

use args::Cli;
use clap::Parser;
use commands::Failure;
use output::Metadata;
use ruelle_core::schema::PotentialSpec;
use std::process::ExitCode;

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("RUELLE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Usage(format!(
            "RUELLE_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    configure_threads()?;
    let p = commands::load_potential(&cli.global)?;
    let config = serde_json::json!({
        "global": cli.global,
        "command": cli.command,
        "potential": p.as_ref().map(PotentialSpec::from_potential),
    });
    let meta = Metadata::new(&config, cli.global.seed);
    let report = commands::run(&cli.command, &cli.global, p.as_ref())?;
    let bytes = output::render(&meta, &report, cli.global.format).map_err(Failure::Usage)?;
    output::write_artifact(&bytes, cli.global.out.as_deref())?;
    if let Some(log) = &cli.global.log {
        output::append_log(log, &meta, cli.command.name(), &report)?;
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("ruelle: verification failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("ruelle: {e}");
            ExitCode::from(1)
        }
    }
}
