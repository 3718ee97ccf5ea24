//! Exit-code contract of the binary:
//!
//! | code | meaning                                             |
//! |------|-----------------------------------------------------|
//! | 0    | success (for `verify`: every check passed)          |
//! | 1    | verification failure (`verify` with failing checks) |
//! | 2    | configuration error (schema, flags, unusable setup) |
//! | 3    | numerical abort (a computation left its envelope)   |
//!
//! Library errors split accordingly: structurally bad inputs
//! (`InvalidConfig`, `InvalidPath`, `LocalizationViolated`) are
//! configuration errors; everything that happens *during* a run
//! (`StepRejected`, `StabilityLost`, `GermDegenerate`, `GridTooCoarse`,
//! `AdiabaticityLost`) is a numerical abort. I/O failures (unreadable
//! config, unwritable output) are reported as configuration errors.

use gpberry::Error as CoreError;

/// Terminal outcome of a successfully dispatched command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Exit code 0.
    Success,
    /// Exit code 1: `verify` ran to completion with failing checks.
    VerificationFailed,
}

/// A command abort, tagged with its exit code class.
#[derive(Debug)]
pub enum CliError {
    /// Exit code 2.
    Config(String),
    /// Exit code 3.
    Numerical(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match &e {
            CoreError::InvalidConfig { .. }
            | CoreError::InvalidPath { .. }
            | CoreError::LocalizationViolated { .. } => CliError::Config(e.to_string()),
            CoreError::StepRejected { .. }
            | CoreError::StabilityLost { .. }
            | CoreError::GermDegenerate { .. }
            | CoreError::GridTooCoarse { .. }
            | CoreError::AdiabaticityLost { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("io error: {e}"))
    }
}
