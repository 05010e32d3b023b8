use std::fmt;

use serde::Serialize;

/// Process exit codes. Stable; scripts depend on them.
pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_REFUTATION: u8 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Validation(String),
    Solver(String),
    Refutation(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Solver(_) => EXIT_SOLVER,
            Failure::Refutation(_) => EXIT_REFUTATION,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        let (error, message) = match self {
            Failure::Validation(m) => ("validation", m),
            Failure::Solver(m) => ("solver", m),
            Failure::Refutation(m) => ("refutation", m),
        };
        ErrorRecord { error: error.into(), exit_code: self.exit_code(), message: message.clone() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.record();
        write!(f, "{}: {}", r.error, r.message)
    }
}

impl From<duopoly_core::Error> for Failure {
    fn from(e: duopoly_core::Error) -> Self {
        use duopoly_core::Error;
        match e {
            Error::Validation(_) | Error::Domain(_) => Failure::Validation(e.to_string()),
            Error::NoEquilibriumInRegion(_) | Error::Convergence { .. } => Failure::Solver(e.to_string()),
        }
    }
}

/// Written to stderr as one JSON line whenever a command fails.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ErrorRecord {
    pub error: String,
    pub exit_code: u8,
    pub message: String,
}
