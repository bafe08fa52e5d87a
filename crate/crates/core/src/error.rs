use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "edge impedance {z_edge:.3} ohm cannot be matched down to {z_target:.3} ohm by an inset"
    )]
    Unmatchable { z_edge: f64, z_target: f64 },

    #[error("coupling coefficient {0} is over-coupled (must be < 1)")]
    OverCoupled(f64),

    #[error("board too small: {0}")]
    Margin(String),

    #[error("placement error: {0}")]
    Placement(String),

    #[error("solver became unstable at step {step}: non-finite {field} field")]
    Instability { step: usize, field: &'static str },

    #[error(
        "cell-step budget exceeded: run needs at least {needed} cell-steps, budget is {budget}"
    )]
    Budget { needed: u64, budget: u64 },

    #[error("record mismatch: {0}")]
    Mismatch(String),

    #[error("near-field surface is not closed: {0}")]
    OpenSurface(String),

    #[error(
        "energy accounting error: radiated {radiated:.6e} W exceeds accepted {accepted:.6e} W"
    )]
    EnergyAccounting { radiated: f64, accepted: f64 },

    #[error("invalid value for `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}
