//! Design, coupling analysis, geometry, time-domain simulation and
//! post-processing for microstrip patch antennas.

pub mod consts;
pub mod coupling;
pub mod design;
mod error;
pub mod fdtd;
pub mod geometry;
pub mod plot;
pub mod post;

pub use coupling::{CouplingParams, TuneResult};
pub use design::{DesignRequest, PatchDesign, SubstrateSpec};
pub use error::{Error, Result};
pub use fdtd::{GaussianPulse, PortSpec, SimulationConfig, TimeSeriesRecord};
pub use geometry::{AntennaGeometry, LayerStack, MaterialGrid, SlotSpec};
pub use post::{BandReport, FarFieldPattern, SParamSpectrum};
