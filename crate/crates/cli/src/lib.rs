//! Front end for the `dymforge` binary.
//!
//! [`run`] turns parsed arguments into output text and an exit code, so tests
//! can drive the whole pipeline without spawning a process.

pub mod config;
pub mod render;
pub mod suites;

use std::path::PathBuf;

use thiserror::Error;

use config::{Cli, Format, Resolved, RunConfig};
use suites::VerifyParams;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Text produced by one invocation and the exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub code: i32,
}

pub const CACHE_ENV: &str = "DYMFORGE_CACHE";

fn cached_render(cfg: &RunConfig) -> Result<String, CliError> {
    let dir = std::env::var_os(CACHE_ENV).map(PathBuf::from);
    let path = match (dir, render::cache_key(cfg)) {
        (Some(d), Some(k)) => d.join(k),
        _ => return render::render(cfg),
    };
    if let Ok(s) = std::fs::read_to_string(&path) {
        return Ok(s);
    }
    let out = render::render(cfg)?;
    if let Some(d) = path.parent() {
        std::fs::create_dir_all(d)?;
    }
    // write-then-rename keeps concurrent readers from seeing partial files
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, &out)?;
    std::fs::rename(&tmp, &path)?;
    Ok(out)
}

/// Executes a resolved configuration.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (output, code) = match &cfg.command {
        Resolved::Verify { suite } => {
            let params = VerifyParams {
                order: cfg.order,
                family: cfg.family,
                seed: cfg.seed,
            };
            let reports = suites::run_suites(*suite, params);
            let code = if reports.iter().all(|r| r.passed) { 0 } else { 1 };
            let text = match cfg.format {
                Format::Json => serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n",
                _ => suites::format_reports(&reports),
            };
            (text, code)
        }
        _ => (cached_render(cfg)?, 0),
    };
    match &cfg.out {
        Some(p) => {
            std::fs::write(p, &output)?;
            Ok(Outcome {
                output: String::new(),
                code,
            })
        }
        None => Ok(Outcome { output, code }),
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    execute(&RunConfig::resolve(cli)?)
}
