//! `stdmap-lab`: the command-line front end.
//!
//! Every run writes its outputs into `--out` together with `manifest.json`,
//! which records the effective arguments and the sha256 of each file.

pub mod args;
mod commands;
mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser};
use thiserror::Error;

use args::{Cli, Command};
use output::{OutputDir, RunManifest, MANIFEST};

pub const THREADS_ENV: &str = "STDMAP_LAB_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("{0}")]
    Io(String),
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run(args: Vec<String>) -> i32 {
    match run_args(args) {
        Ok(()) => 0,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            if e.use_stderr() {
                1
            } else {
                0
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{}", Cli::command().render_usage());
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn threads_from_env() -> Result<u64, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => args::parse_count(&v).map_err(|e| CliError::Usage(format!("{THREADS_ENV}: {e}"))),
        Err(_) => Ok(0),
    }
}

/// The arguments that determine the outputs: everything except the program
/// name, `--out` and `--threads`.
fn effective_argv(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--out" || a == "--threads" {
            it.next();
        } else if !(a.starts_with("--out=") || a.starts_with("--threads=")) {
            out.push(a.clone());
        }
    }
    out
}

fn run_args(args: Vec<String>) -> Result<(), CliError> {
    let args = config::expand(args)?;
    let cli = Cli::try_parse_from(&args)?;
    let threads = match cli.threads {
        Some(t) => t,
        None => threads_from_env()?,
    };
    if let Command::Replay(r) = &cli.command {
        return replay(Path::new(&r.manifest), &cli.out);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads as usize)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker threads: {e}")))?;
    let started = output::unix_ms();
    let mut out = OutputDir::create(Path::new(&cli.out))?;
    let text = pool.install(|| match &cli.command {
        Command::Strips(a) => commands::strips(a, &mut out),
        Command::Pushforward(a) => commands::pushforward(a, &mut out),
        Command::Clt(a) => commands::clt(a, &mut out),
        Command::Corr(a) => commands::corr(a, &mut out),
        Command::Diffusion(a) => commands::diffusion(a, &mut out),
        Command::Simulate(a) => commands::simulate(a, &mut out),
        Command::Replay(_) => unreachable!("handled above"),
    })?;
    let manifest = RunManifest {
        tool: "stdmap-lab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: cli.command.name().into(),
        argv: effective_argv(&args),
        config: serde_json::to_value(&cli.command).map_err(|e| CliError::Io(e.to_string()))?,
        seed: cli.command.seed(),
        threads,
        started_unix_ms: started,
        finished_unix_ms: output::unix_ms(),
        outputs: out.files.clone(),
    };
    out.write_json(MANIFEST, &manifest)?;
    print!("{text}");
    Ok(())
}

/// Re-runs a manifest single-threaded into `out` (or `replay/` next to the
/// manifest) and compares every recorded digest.
fn replay(manifest_path: &Path, out: &str) -> Result<(), CliError> {
    let text = std::fs::read_to_string(manifest_path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", manifest_path.display())))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", manifest_path.display())))?;
    let dir = if out == "." {
        manifest_path.parent().unwrap_or(Path::new(".")).join("replay")
    } else {
        PathBuf::from(out)
    };
    let mut args = vec![
        "stdmap-lab".to_string(),
        "--threads".into(),
        "1".into(),
        "--out".into(),
        dir.to_string_lossy().into_owned(),
    ];
    args.extend(manifest.argv.iter().cloned());
    run_args(args)?;
    let mut mismatched = Vec::new();
    for f in &manifest.outputs {
        let bytes = std::fs::read(dir.join(&f.file)).map_err(|e| CliError::Io(format!("{}: {e}", f.file)))?;
        if output::sha256_hex(&bytes) != f.sha256 {
            mismatched.push(f.file.clone());
        }
    }
    if mismatched.is_empty() {
        println!("replay reproduced {} file(s) in {}", manifest.outputs.len(), dir.display());
        Ok(())
    } else {
        Err(CliError::Precondition(format!("replay output differs: {}", mismatched.join(", "))))
    }
}
