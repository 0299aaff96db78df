//! Configuration, dispatch and artifact emission for the `cosetc` tool.

pub mod commands;
pub mod config;

use std::fs;
use std::io;
use std::path::Path;

use serde_json::json;

pub use commands::{run, Artifact};
pub use config::{emit, parse_config, parse_config_with, Command, ConfigErrors, Format, Overrides, RunConfig};

pub const THREADS_VAR: &str = "COSETC_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigErrors),
    #[error(transparent)]
    Core(#[from] cosetc_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Core(e) => e.kind(),
            CliError::Io(_) => "io",
        }
    }

    pub fn messages(&self) -> Vec<String> {
        match self {
            CliError::Config(e) => e.0.clone(),
            CliError::Core(e) => vec![e.to_string()],
            CliError::Io(e) => vec![e.to_string()],
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let v = json!({ "error": { "kind": self.kind(), "messages": self.messages() } });
        let mut s = serde_json::to_string_pretty(&v).expect("error serializes");
        s.push('\n');
        s
    }
}

/// Size the global worker pool from `COSETC_THREADS`, if set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigErrors(vec![format!("{THREADS_VAR} must be a positive integer, got {v:?}")]))?;
    // A pool may already exist when called twice in one process; the first size wins.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for a in artifacts {
        fs::write(dir.join(&a.name), &a.contents)?;
    }
    Ok(())
}

/// Parse, run and write to the configured directory. Also reports whether
/// anything was written.
pub fn execute(text: &str, overrides: &Overrides) -> Result<(Vec<Artifact>, bool), CliError> {
    let config = parse_config_with(text, overrides)?;
    let artifacts = run(&config)?;
    if let Some(dir) = &config.output.dir {
        write_artifacts(dir, &artifacts)?;
        return Ok((artifacts, true));
    }
    Ok((artifacts, false))
}
