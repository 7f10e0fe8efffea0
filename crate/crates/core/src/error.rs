use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid material parameters: {0}")]
    InvalidMaterial(String),

    #[error("invalid field schedule: start={start} decay={decay} stop={stop} (need start <= decay <= stop)")]
    InvalidSchedule { start: u64, decay: u64, stop: u64 },

    #[error("grid mismatch: expected {expected}, got {got}")]
    GridMismatch { expected: String, got: String },

    #[error("cell {index} has zero magnetization and cannot be renormalized")]
    ZeroMagnitude { index: usize },

    #[error("anisotropy axis must be a unit vector (|axis| = {norm})")]
    NonUnitAxis { norm: f64 },

    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),

    #[error("non-finite magnetization after step {step} at cell {cell} ({i}, {j}, {k}); time step is probably too large")]
    NonFinite {
        step: u64,
        cell: usize,
        i: usize,
        j: usize,
        k: usize,
    },

    #[error("cannot allocate demag kernel: {bytes} bytes required")]
    Resource { bytes: u128 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
