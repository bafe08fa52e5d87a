//! Run-file driven pipeline behind the `patchkit` command.

pub mod commands;
mod csvplot;
pub mod manifest;
pub mod runfile;

pub use commands::{
    cmd_design, cmd_masks, cmd_plot, cmd_simulate, cmd_sweep, cmd_tune, Bundle, StageError,
};
pub use runfile::{load_run, parse_run, RawRun, RunConfig};

use patchkit::Error;

/// Process exit code for an error: 2 validation, 3 solver, 4 I/O.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => 4,
        Error::Instability { .. }
        | Error::Budget { .. }
        | Error::Mismatch(_)
        | Error::OpenSurface(_)
        | Error::EnergyAccounting { .. } => 3,
        Error::Domain(_)
        | Error::Unmatchable { .. }
        | Error::OverCoupled(_)
        | Error::Margin(_)
        | Error::Placement(_)
        | Error::Validation { .. }
        | Error::Format(_) => 2,
    }
}
