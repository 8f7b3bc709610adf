use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the numerical core and the experiment driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("fields live on incompatible grids (L={left_length}, n={left_points} vs L={right_length}, n={right_points})")]
    GridMismatch { left_length: f64, left_points: usize, right_length: f64, right_points: usize },

    #[error("invalid soliton configuration: {0}")]
    InvalidSolitons(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient resolution: {modes} retained modes exceed n_points/2 = {limit}")]
    InsufficientResolution { modes: usize, limit: usize },

    #[error("kappa = {kappa} lies inside the spectrum of -L_u (lowest eigenvalue bound {bound})")]
    KappaInSpectrum { kappa: f64, bound: f64 },

    #[error("Hermitian eigensolver failed on a {size}x{size} matrix (max |entry| = {max_entry:e})")]
    Eigensolver { size: usize, max_entry: f64 },

    #[error("eigenvalue constraints not matched by the spectrum: {missing:?}")]
    UnmatchedEigenvalues { missing: Vec<f64> },

    #[error("solution blew up at t = {time} (max |u| = {max_amplitude:e})")]
    BlowUp { time: f64, max_amplitude: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
