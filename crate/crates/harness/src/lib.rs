//! Configuration, sweep orchestration, persistence and validation for
//! `braidsim-core`.

use std::path::PathBuf;

pub mod analysis;
pub mod config;
pub mod output;
pub mod pflip;
pub mod pool;
pub mod readout;
pub mod sweep;
pub mod validate;

pub use config::Config;

pub const VERSION: &str = concat!("braidsim ", env!("CARGO_PKG_VERSION"));

#[derive(Debug)]
pub enum HarnessError {
    Config(String),
    Io(std::io::Error),
    Numeric(braidsim_core::Error),
    Validation(String),
}

impl HarnessError {
    /// 1 validation failure, 2 configuration or IO error, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Validation(_) => 1,
            HarnessError::Config(_) | HarnessError::Io(_) => 2,
            HarnessError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for HarnessError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HarnessError::Config(m) => write!(f, "configuration error: {m}"),
            HarnessError::Io(e) => write!(f, "io error: {e}"),
            HarnessError::Numeric(e) => write!(f, "numeric failure: {e}"),
            HarnessError::Validation(m) => write!(f, "validation failed: {m}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e)
    }
}

impl From<braidsim_core::Error> for HarnessError {
    fn from(e: braidsim_core::Error) -> Self {
        match e {
            braidsim_core::Error::Config(m) => HarnessError::Config(m),
            other => HarnessError::Numeric(other),
        }
    }
}

/// Everything a command needs besides its output directory.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub config: Config,
    /// Hash of the configuration as loaded, before command-line overrides.
    pub config_hash: String,
    pub config_file: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub seed: u64,
    pub workers: usize,
}

impl RunContext {
    pub fn new(config: Config, config_file: Option<PathBuf>) -> Self {
        Self {
            config_hash: config.hash(),
            config,
            config_file,
            overrides: Vec::new(),
            seed: 0,
            workers: 1,
        }
    }

    pub fn with_path_kind(mut self, kind: config::PathKindName) -> Self {
        if kind != self.config.path.kind {
            self.config.path.kind = kind;
            let name = match kind {
                config::PathKindName::Circular => "circular",
                config::PathKindName::Square => "square",
            };
            self.overrides.push(format!("path.kind={name}"));
        }
        self
    }
}
