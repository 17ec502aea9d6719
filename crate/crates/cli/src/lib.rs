//! Job runner behind the `elliptheta` binary. A job is parsed from JSON, run
//! against `elliptheta-core` and rendered as a versioned JSON or CSV report.

pub mod commands;
pub mod job;
pub mod output;

use serde::Serialize;
use thiserror::Error;

pub use job::{parse_job, Job, Settings};

pub const SCHEMA: &str = "elliptheta/1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] elliptheta_core::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Core errors that describe a numerical outcome rather than bad input.
pub fn is_numerical(e: &elliptheta_core::Error) -> bool {
    use elliptheta_core::Error::*;
    matches!(
        e,
        NotConverged(_)
            | PoleProximity { .. }
            | PoleHit { .. }
            | OutsideRadius
            | OnBoundary
            | TruncationExceeded(_)
            | PrecisionExhausted
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// Something did not converge or hit a pole; the report is still complete.
    Flagged,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: &'static str,
    pub input: Job,
    pub settings: Settings,
    pub status: Status,
    /// Reasons for `status = flagged`.
    pub flags: Vec<String>,
    pub result: serde_json::Value,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::Flagged => 2,
        }
    }
}

/// Result of a command before it is wrapped into a [`Report`].
pub struct Outcome {
    pub flags: Vec<String>,
    pub result: serde_json::Value,
}

pub fn run(job: &Job, settings: &Settings) -> Result<Report, CliError> {
    let outcome = match commands::dispatch(job, settings) {
        Ok(o) => o,
        Err(CliError::Core(e)) if is_numerical(&e) => Outcome {
            flags: vec![e.to_string()],
            result: serde_json::json!({ "error": e.to_string() }),
        },
        Err(e) => return Err(e),
    };
    let status = if outcome.flags.is_empty() { Status::Ok } else { Status::Flagged };
    Ok(Report {
        schema: SCHEMA,
        command: job.name(),
        input: job.clone(),
        settings: settings.clone(),
        status,
        flags: outcome.flags,
        result: outcome.result,
    })
}
