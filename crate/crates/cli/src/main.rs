mod args;
mod manifest;
mod run;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::{Cli, Command};
use manifest::RunManifest;

/// Bad flags or flag combinations; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn is_usage(err: &anyhow::Error) -> bool {
    err.chain()
        .any(|e| e.is::<UsageError>() || e.downcast_ref::<floquet_tm::Error>().is_some_and(floquet_tm::Error::is_usage))
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain()
        .any(|e| e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe))
}

/// `<subcommand>-<first 12 hex digits of the parameter hash>`.
fn default_run_name(command: &Command) -> String {
    let mut stripped = command.clone();
    if let Some(o) = stripped.output_mut() {
        o.out = None;
        o.name = None;
    }
    let json = serde_json::to_vec(&stripped).expect("arguments serialize");
    format!("{}-{}", command.name(), &floquet_tm::io::sha256_hex(&json)[..12])
}

fn output_dir(command: &Command) -> PathBuf {
    let o = command.output().expect("runnable command");
    match &o.out {
        Some(dir) => dir.clone(),
        None => Path::new("out").join(o.name.clone().unwrap_or_else(|| default_run_name(command))),
    }
}

fn run_command(command: &Command) -> Result<()> {
    let outcome = run::execute(command)?;
    let dir = output_dir(command);
    if dir.as_os_str() == "-" {
        let mut stdout = std::io::stdout().lock();
        for a in &outcome.artifacts {
            stdout.write_all(&a.bytes)?;
        }
        return Ok(stdout.flush()?);
    }
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    for a in &outcome.artifacts {
        let path = dir.join(&a.file_name);
        fs::write(&path, &a.bytes).with_context(|| format!("cannot write {}", path.display()))?;
        eprintln!("wrote {}", path.display());
    }
    let names = outcome.artifacts.iter().map(|a| a.file_name.clone()).collect();
    RunManifest::new(command, outcome.config, &dir, names).save(&dir)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Replay(r) => {
            let m = RunManifest::load(&r.manifest)?;
            let mut command = m.parameters;
            if let Some(o) = command.output_mut() {
                o.out = Some(r.out.unwrap_or(m.output_dir));
            }
            run_command(&command)
        }
        command => run_command(&command),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).format_timestamp(None).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage(&e) { 2 } else { 1 })
        }
    }
}
