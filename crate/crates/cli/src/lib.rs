//! Batch front end for `percmap`: argument parsing, command dispatch and
//! output artifacts.
//!
//! Every artifact embeds the [`ExperimentSpec`] that produced it, the tool
//! version and the seed. JSON artifacts have the shape
//! `{"tool", "version", "spec", "result"}`; CSV artifacts start with `#`
//! comment lines carrying the same metadata.

pub mod args;
pub mod commands;

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const TOOL: &str = "percmap";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Default worker count when `--workers` is not given.
pub const WORKERS_ENV: &str = "PERCMAP_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Everything needed to rerun an experiment. The worker count is left out:
/// it cannot change any result, and leaving it out keeps artifacts
/// byte-identical across worker counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub command: String,
    pub parameters: Value,
    pub seed: u64,
    pub samples: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub tool: String,
    pub version: String,
    pub spec: ExperimentSpec,
    pub result: Value,
}

/// What a command produced, before rendering.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Json(Value),
    /// Header line and data rows, without trailing newlines; `notes` become
    /// extra comment lines.
    Csv { header: String, rows: Vec<String>, notes: Vec<String> },
}

/// Rendered output plus whether an acceptance run failed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub text: String,
    pub acceptance_failed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad arguments or parameters outside a command's domain.
    Usage(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<percmap::Error> for CliError {
    fn from(e: percmap::Error) -> Self {
        match e {
            percmap::Error::Domain(_) | percmap::Error::Contract(_) => CliError::Usage(e.to_string()),
            percmap::Error::Consistency(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Renders a payload with its metadata.
pub fn render(spec: &ExperimentSpec, payload: Payload) -> String {
    match payload {
        Payload::Json(result) => {
            let artifact = Artifact { tool: TOOL.into(), version: VERSION.into(), spec: spec.clone(), result };
            let mut s = serde_json::to_string_pretty(&artifact).expect("serializable");
            s.push('\n');
            s
        }
        Payload::Csv { header, rows, notes } => {
            let spec_line = serde_json::to_string(spec).expect("serializable");
            let mut s = format!("# {TOOL} {VERSION}\n# seed: {}\n# spec: {spec_line}\n", spec.seed);
            for n in notes {
                s.push_str(&format!("# {n}\n"));
            }
            s.push_str(&header);
            s.push('\n');
            for r in rows {
                s.push_str(&r);
                s.push('\n');
            }
            s
        }
    }
}

/// Reads the embedded spec back from a JSON or CSV artifact.
pub fn parse_spec(artifact: &str) -> Option<ExperimentSpec> {
    if let Ok(a) = serde_json::from_str::<Artifact>(artifact) {
        return Some(a.spec);
    }
    artifact
        .lines()
        .find_map(|l| l.strip_prefix("# spec: "))
        .and_then(|s| serde_json::from_str(s).ok())
}
