mod args;
mod commands;
mod manifest;
mod svg;

use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use args::{Cli, Command};
use manifest::RunManifest;

/// CLI-level failures with their exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Mismatch(String),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<metascale::Error>() {
            return if e.is_io() {
                4
            } else if e.is_numeric() {
                3
            } else {
                2
            };
        }
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return match f {
                Failure::Usage(_) | Failure::Schema(_) => 2,
                Failure::Mismatch(_) => 3,
            };
        }
        if cause.is::<std::io::Error>() {
            return 4;
        }
        if let Some(e) = cause.downcast_ref::<serde_json::Error>() {
            return if e.is_io() { 4 } else { 2 };
        }
    }
    2
}

/// The error chain, skipping causes already quoted by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut text = err.to_string();
    for cause in err.chain().skip(1) {
        let c = cause.to_string();
        if !text.contains(&c) {
            text = format!("{text}: {c}");
        }
    }
    text
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("RS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Failure::Usage(format!(
            "RS_THREADS must be a non-negative integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot size the thread pool: {e}")))?;
    Ok(())
}

fn execute(command: &Command) -> Result<RunManifest> {
    let outcome = match command {
        Command::Scale(a) => commands::scale_cmd(a)?,
        Command::Simulate(a) => commands::simulate_cmd(a)?,
        Command::Contaminate(a) => commands::contaminate_cmd(a)?,
        Command::Evaluate(a) => commands::evaluate_cmd(a)?,
        Command::RocPlot(a) => commands::roc_plot_cmd(a)?,
        Command::De(a) => commands::de_cmd(a)?,
    };
    let manifest = RunManifest::record(&command.resolved(), &outcome)?;
    manifest.write(&outcome.manifest_path)?;
    log::info!(
        "{} done, manifest at {}",
        command.name(),
        outcome.manifest_path.display()
    );
    Ok(manifest)
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match (cli.manifest, cli.command) {
        (Some(_), Some(_)) => {
            Err(Failure::Usage("--manifest replays a run and takes no subcommand".into()).into())
        }
        (None, None) => {
            Err(Failure::Usage("a subcommand or --manifest is required (see --help)".into()).into())
        }
        (None, Some(command)) => execute(&command).map(|_| ()),
        (Some(path), None) => {
            let recorded = RunManifest::read(&path)?;
            recorded.check_inputs()?;
            let replayed = execute(&recorded.command)?;
            recorded.check_outputs()?;
            if replayed.outputs != recorded.outputs {
                return Err(
                    Failure::Mismatch("replay wrote a different set of outputs".into()).into(),
                );
            }
            eprintln!(
                "replay of {} matches {} recorded outputs",
                recorded.command.name(),
                recorded.outputs.len()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
