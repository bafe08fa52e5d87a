//! Fixtures shared by the benchmarks.

use patchkit::consts::{GHZ, MM};
use patchkit::design::{design_patch, DesignRequest};
use patchkit::geometry::{build_mono, default_board, rasterize, MaterialGrid, RasterOptions};
use patchkit::{PatchDesign, SubstrateSpec};

pub fn table_substrate() -> SubstrateSpec {
    SubstrateSpec::new(3.55, 1.5 * MM, 0.0).expect("valid substrate")
}

pub fn mono_design() -> PatchDesign {
    design_patch(&DesignRequest::new(5.8 * GHZ, table_substrate())).expect("valid design")
}

/// The 5.8 GHz patch on a grid of `cell`.
pub fn mono_grid(cell: f64) -> MaterialGrid {
    let d = mono_design();
    let g = build_mono(&d, default_board(&d)).expect("buildable");
    rasterize(&g, &RasterOptions::new(cell)).expect("rasterizable")
}
