use std::fmt;
use std::path::Path;
use std::process::ExitCode;

use tmss_core::adversaries::AdversaryError;
use tmss_core::homogenize::HomogenizeError;
use tmss_core::instance::InstanceError;
use tmss_core::ktaxi::KtaxiError;
use tmss_core::lipschitz::{LipschitzError, PipelineError};
use tmss_core::wfa::{PotentialError, SimError};
use tmss_core::MetricError;

/// Input problems exit with 1, broken guarantees with 2.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Invariant(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Validation(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(1),
            CliError::Invariant(_) => ExitCode::from(2),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvariantViolated { .. } => CliError::Invariant(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        if e.is_internal() {
            CliError::Invariant(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<KtaxiError> for CliError {
    fn from(e: KtaxiError) -> Self {
        match e {
            KtaxiError::Simulation(s) => s.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

macro_rules! validation_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Validation(e.to_string())
            }
        })*
    };
}

validation_from!(InstanceError, HomogenizeError, AdversaryError, LipschitzError, PotentialError, MetricError);
