// `!(x > y)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod manifest;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use rydberg_core::Error;

use args::{Cli, Command};
use commands::Context;
use manifest::{sha256_hex, unix_now, CacheState, FileRecord, RunManifest, MANIFEST_FILE, MANIFEST_SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("replay mismatch: {0}")]
    Mismatch(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(Error::Parse { .. } | Error::Scenario { .. } | Error::Json(_) | Error::Domain(_)) => 2,
            CliError::Core(Error::Io(_)) | CliError::Io(_) => 4,
            CliError::Core(_) | CliError::Mismatch(_) => 3,
        }
    }
}

const DEFAULT_OUT: &str = "rydberg-out";

fn out_dir(cli: &Cli) -> PathBuf {
    cli.global.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Runs one command, writes its files and manifest, returns the manifest.
fn execute(cli: &Cli) -> Result<RunManifest, CliError> {
    let started = unix_now();
    let clock = Instant::now();
    let ctx = Context::new(cli.global.species_file.as_deref(), cli.global.cache.as_deref())?;
    let entries_before = ctx.cache.len();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.jobs.max(1))
        .build()
        .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    let report = pool.install(|| commands::run(&ctx, &cli.command, cli.global.seed))?;
    ctx.cache.flush()?;

    let dir = out_dir(cli);
    std::fs::create_dir_all(&dir)?;
    let mut outputs = Vec::new();
    for (name, bytes) in &report.files {
        std::fs::write(dir.join(name), bytes)?;
        outputs.push(FileRecord::of(name.as_str(), bytes));
    }
    let mut config = cli.clone();
    config.global.out = Some(dir.clone());
    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        subcommand: cli.command.name().to_string(),
        config,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        species_checksum: ctx.data.checksum().to_string(),
        cache: CacheState {
            path: cli.global.cache.clone(),
            entries_before,
            entries_after: ctx.cache.len(),
        },
        inputs: report.inputs.iter().map(|(f, b)| FileRecord::of(f.as_str(), b)).collect(),
        outputs,
        started_unix_s: started,
        duration_s: clock.elapsed().as_secs_f64(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(Error::from)?;
    bytes.push(b'\n');
    std::fs::write(dir.join(MANIFEST_FILE), bytes)?;

    if cli.global.json {
        println!("{}", serde_json::to_string_pretty(&report.json).map_err(Error::from)?);
    } else {
        print!("{}", report.table);
        println!("wrote {} files to {}", report.files.len() + 1, dir.display());
    }
    Ok(manifest)
}

fn replay(cli: &Cli, path: &Path) -> Result<(), CliError> {
    let recorded = RunManifest::load(path)?;
    for input in &recorded.inputs {
        let bytes = std::fs::read(&input.file)?;
        if sha256_hex(&bytes) != input.sha256 {
            return Err(CliError::Mismatch(format!("input {} changed since the recorded run", input.file)));
        }
    }
    let mut config = recorded.config.clone();
    if cli.global.out.is_some() {
        config.global.out = cli.global.out.clone();
    }
    if cli.global.cache.is_some() {
        config.global.cache = cli.global.cache.clone();
    }
    config.global.json = cli.global.json;
    let fresh = execute(&config)?;
    let mut bad = Vec::new();
    for old in &recorded.outputs {
        match fresh.outputs.iter().find(|f| f.file == old.file) {
            Some(new) if new.sha256 == old.sha256 => {}
            Some(_) => bad.push(format!("{} differs", old.file)),
            None => bad.push(format!("{} missing", old.file)),
        }
    }
    if !bad.is_empty() {
        return Err(CliError::Mismatch(bad.join(", ")));
    }
    if !cli.global.json {
        println!("replay matched {} output files", recorded.outputs.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Replay { manifest } => replay(&cli, manifest),
        _ => execute(&cli).map(|_| ()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
