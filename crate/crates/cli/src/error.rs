use std::process::ExitCode;

use serde_json::json;
use xenakis_core::ingest::FetchError;
use xenakis_core::pipeline::PipelineError;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_PROVIDER: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub exit: u8,
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn usage(code: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            exit: EXIT_USAGE,
            code: code.into(),
            message: message.into(),
        }
    }

    pub fn input(code: &str, message: impl Into<String>) -> Self {
        Self {
            exit: EXIT_INPUT,
            code: code.into(),
            message: message.into(),
        }
    }

    pub fn io(what: &str, e: std::io::Error) -> Self {
        Self::input("io", format!("{what}: {e}"))
    }

    /// Prints the error on stderr and returns its exit code.
    pub fn report(self, as_json: bool) -> ExitCode {
        if as_json {
            let v = json!({ "code": self.code, "message": self.message.trim_end(), "exit_code": self.exit });
            eprintln!("{v}");
        } else {
            eprintln!("xenakis: {}", self.message.trim_end());
        }
        ExitCode::from(self.exit)
    }
}

impl From<FetchError> for CliError {
    fn from(e: FetchError) -> Self {
        let code = match &e {
            FetchError::InvalidBoundingBox(_) => return Self::usage("bad_bbox", e.to_string()),
            FetchError::InvalidEndpoint(_) => return Self::usage("bad_provider", e.to_string()),
            FetchError::Io(_) => return Self::input("io", e.to_string()),
            FetchError::Network(_) => "provider_unreachable",
            FetchError::RateLimited { .. } => "rate_limited",
            FetchError::Provider { .. } | FetchError::CacheCorrupt { .. } => "provider_error",
        };
        Self {
            exit: EXIT_PROVIDER,
            code: code.into(),
            message: e.to_string(),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Parse(_) => Self::input("malformed_document", e.to_string()),
            _ => Self::usage("bad_params", e.to_string()),
        }
    }
}
