//! Configuration, manifests, the verification suite and the commands behind
//! the `xylab` binary.
//!
//! Exit codes: 0 success, 2 usage error, 3 failed check, 4 refused for
//! resources (an enumeration or rejection budget was exceeded), 1 for I/O
//! and other internal failures.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod manifest;
pub mod run;
pub mod verify;

pub use config::{ExperimentConfig, Observable, WindowKind, OUT_DIR_ENV};
pub use manifest::{sha256_hex, OutputDigest, RunManifest, MANIFEST_FILE};
pub use run::{cmd_demo, cmd_estimate, cmd_verify};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("refused: {0}")]
    Resource(String),
    #[error("{0}")]
    Internal(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Resource(_) => EXIT_RESOURCE,
            CliError::Internal(_) | CliError::Io(_) => EXIT_INTERNAL,
        }
    }
}

impl From<xylab::Error> for CliError {
    fn from(e: xylab::Error) -> Self {
        use xylab::Error as E;
        match e {
            E::TooLarge { .. } => CliError::Resource(format!("{e}; use a smaller instance")),
            E::RejectionExhausted { .. } => {
                CliError::Resource(format!("{e} or worm sampler, or raise --max-attempts"))
            }
            E::Json(_) | E::Csv(_) => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Verify,
    Estimate,
    Demo,
}

/// Validates `cfg` and runs `command`, mapping every outcome to an exit
/// code.
pub fn execute(command: Command, cfg: &ExperimentConfig) -> i32 {
    let result = cfg.validate().and_then(|()| match command {
        Command::Verify => cmd_verify(cfg),
        Command::Estimate => cmd_estimate(cfg),
        Command::Demo => cmd_demo(cfg),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("xylab: {e}");
            e.exit_code()
        }
    }
}
