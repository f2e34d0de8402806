// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::path::Path;
use wavetriage_core::extract::ExtractError;
use wavetriage_core::feature_select::FeatureSelectError;
use wavetriage_core::fixtures::FixtureError;
use wavetriage_core::ml::MlError;
use wavetriage_core::mutate::MutateError;
use wavetriage_core::orchestrate::OrchestrateError;
use wavetriage_core::rtl::RtlError;
use wavetriage_core::select::SelectError;

/// Each variant maps to one process exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    External(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::External(_) => 3,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "error: {m}"),
            CliError::External(m) => write!(f, "external command failed: {m}"),
        }
    }
}

impl From<OrchestrateError> for CliError {
    fn from(e: OrchestrateError) -> Self {
        match e {
            OrchestrateError::SimulatorNotFound(_) | OrchestrateError::SimulatorCrashed(_) => CliError::External(e.to_string()),
            OrchestrateError::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<MutateError> for CliError {
    fn from(e: MutateError) -> Self {
        match e {
            MutateError::Tool { .. } => CliError::External(e.to_string()),
            MutateError::UnknownModule(_) | MutateError::UnknownBugType(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        })*
    };
}

data_error!(RtlError, SelectError, ExtractError, MlError, FeatureSelectError, FixtureError, serde_json::Error);
