//! From port and surface records to spectra, bands, patterns and efficiency.

mod bands;
mod dft;
mod ntff;
pub mod spectrum;

pub use bands::{bandwidth, Band, BandReport, DEFAULT_THRESHOLD_DB};
pub use dft::{dft, incident_power, s11_spectrum};
pub use ntff::{
    db_to_efficiency, efficiency_to_db, ntff, radiation_efficiency, Efficiency, FarFieldPattern,
    ENERGY_TOLERANCE,
};
pub use spectrum::{linear_grid, mag_to_db, SParamSpectrum};
