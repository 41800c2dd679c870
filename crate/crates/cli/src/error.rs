use std::fmt;
use std::process::ExitCode;

use cvs_core::fusion::FusionError;
use cvs_core::label_io::LabelError;
use cvs_core::sobel_loss::LossError;
use cvs_core::synth::SynthError;
use serde::Serialize;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

/// Failure of a whole command, reported as one JSON line on stderr.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: String,
    pub message: String,
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    message: &'a str,
}

impl CliError {
    pub fn input(kind: &str, message: impl fmt::Display) -> Self {
        CliError { code: EXIT_INPUT, kind: kind.to_string(), message: message.to_string() }
    }

    pub fn internal(kind: &str, message: impl fmt::Display) -> Self {
        CliError { code: EXIT_INTERNAL, kind: kind.to_string(), message: message.to_string() }
    }

    pub fn json_line(&self) -> String {
        serde_json::to_string(&ErrorLine { error: &self.kind, message: &self.message }).expect("strings serialize")
    }

    pub fn report(&self) -> ExitCode {
        eprintln!("{}", self.json_line());
        ExitCode::from(self.code)
    }
}

impl From<LabelError> for CliError {
    fn from(e: LabelError) -> Self {
        match e {
            LabelError::InvariantViolation(_) => CliError::internal(e.kind(), &e),
            _ => CliError::input(e.kind(), &e),
        }
    }
}

impl From<FusionError> for CliError {
    fn from(e: FusionError) -> Self {
        CliError::input(e.kind(), &e)
    }
}

impl From<LossError> for CliError {
    fn from(e: LossError) -> Self {
        CliError::input(e.kind(), &e)
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::input(e.kind(), &e)
    }
}

impl From<cvs_core::config::ConfigError> for CliError {
    fn from(e: cvs_core::config::ConfigError) -> Self {
        CliError::input("InvalidConfig", &e)
    }
}

pub fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    if e.kind() == std::io::ErrorKind::NotFound {
        CliError::input("MissingFile", format!("{}: {e}", path.display()))
    } else {
        CliError::input("IoFailure", format!("{}: {e}", path.display()))
    }
}

pub type CliResult<T> = Result<T, CliError>;
