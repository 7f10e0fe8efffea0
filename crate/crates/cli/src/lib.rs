//! Subcommands of the `grace` binary: `run`, `bench` and `validate`.

pub mod bench;
pub mod run;
pub mod validate;

use std::fmt;

use grace_core::dynamics::RelaxReport;
use grace_core::Error;

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "GRACE_THREADS";

/// Process exit codes. These are a stable contract.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    /// The command ran but its result did not meet the acceptance check
    /// (only `validate`).
    pub const CHECK_FAILED: u8 = 1;
    pub const PARSE: u8 = 2;
    pub const NUMERIC: u8 = 3;
    pub const IO: u8 = 4;
    pub const RELAXATION: u8 = 5;
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    /// Damped relaxation hit its step limit before the torque criterion.
    Relaxation(RelaxReport),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::Parse { .. }
                | Error::InvalidGrid(_)
                | Error::InvalidMaterial(_)
                | Error::InvalidSchedule { .. }
                | Error::NonUnitAxis { .. }
                | Error::InvalidTimeStep(_)
                | Error::GridMismatch { .. } => exit::PARSE,
                Error::NonFinite { .. } | Error::ZeroMagnitude { .. } => exit::NUMERIC,
                Error::Io { .. } | Error::Resource { .. } => exit::IO,
            },
            CliError::Relaxation(_) => exit::RELAXATION,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Relaxation(r) => write!(
                f,
                "relaxation did not converge: max torque {:.3e} after {} steps",
                r.max_torque, r.steps
            ),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Wraps an I/O failure on `path` as an engine I/O error.
pub fn io_error(path: &std::path::Path, source: std::io::Error) -> CliError {
    CliError::Core(Error::io(path, source))
}

/// Number of rayon worker threads currently in use.
pub fn thread_count() -> usize {
    rayon::current_num_threads()
}
