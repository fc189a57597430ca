//! Experiment runner: loads a suite configuration, simulates every
//! strategy/radius cell it names, and writes per-dialogue tables, difference
//! series, SVG plots and verdicts.
//!
//! Exit codes of the `designworld` binary:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | suite completed (whatever the verdicts) |
//! | 1 | configuration or usage error |
//! | 2 | I/O error, including a missing config file |
//! | 3 | internal error |
//! | 4 | unknown strategy or variant name |
//! | 5 | radius outside 1..16 |

use std::path::PathBuf;

pub mod config;
pub mod render;
pub mod suite;

pub use config::{load_config, parse_config, Comparison, SuiteConfig};
pub use render::write_outputs;
pub use suite::{execute_suite, ComparisonResult, SuiteResults};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}", located(*.line, message))]
    Parse { line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("internal error: {0}")]
    Internal(String),
    #[error("{}", located(*.line, &format!("invalid `{field}`: {message}")))]
    UnknownName { line: usize, field: String, message: String },
    #[error("{}", located(*.line, &format!("radius {radius} outside 1..{}", config::MAX_RADIUS)))]
    RadiusOutOfRange { line: usize, radius: u32 },
    #[error("usage: {0}")]
    Usage(String),
}

fn located(line: usize, message: &str) -> String {
    if line == 0 {
        format!("config: {message}")
    } else {
        format!("config line {line}: {message}")
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Usage(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Internal(_) => 3,
            CliError::UnknownName { .. } => 4,
            CliError::RadiusOutOfRange { .. } => 5,
        }
    }
}

impl From<designworld::Error> for CliError {
    fn from(e: designworld::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
