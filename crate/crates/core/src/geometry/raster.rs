use super::{AntennaGeometry, Layer};
use crate::error::{Error, Result};
use crate::fdtd::{Boundaries, Boundary};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dielectric {
    pub eps_r: f64,
    pub loss_tangent: f64,
}

impl Dielectric {
    pub const AIR: Dielectric = Dielectric {
        eps_r: 1.0,
        loss_tangent: 0.0,
    };
}

/// Zero-thickness copper on the node plane `k`. `mask[i * ny + j]` marks cell
/// faces covered by copper.
#[derive(Debug, Clone, PartialEq)]
pub struct CopperSheet {
    pub k: usize,
    pub role: String,
    pub mask: Vec<bool>,
}

/// Feed cross-section on the grid: the strip spans nodes `i_lo..=i_hi` on
/// plane `k`; the board edge is node row `j_edge`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPort {
    pub i_lo: usize,
    pub i_hi: usize,
    pub k: usize,
    pub j_edge: usize,
    pub z_ref: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellLabel {
    Air,
    Dielectric(u8),
    Pec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialGrid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub cell: f64,
    /// Physical position of node (0, 0, 0).
    pub origin: [f64; 3],
    /// Index 0 is always air.
    pub dielectrics: Vec<Dielectric>,
    pub cells: Vec<u8>,
    pub sheets: Vec<CopperSheet>,
    pub boundaries: Boundaries,
    pub port: Option<GridPort>,
    /// Board outline in cells `(i0, j0, i1, j1)`, half-open.
    pub board_cells: (usize, usize, usize, usize),
    pub warnings: Vec<String>,
}

impl MaterialGrid {
    /// Air-filled grid of `nx x ny x nz` cells.
    pub fn empty(nx: usize, ny: usize, nz: usize, cell: f64, boundaries: Boundaries) -> Self {
        MaterialGrid {
            nx,
            ny,
            nz,
            cell,
            origin: [0.0; 3],
            dielectrics: vec![Dielectric::AIR],
            cells: vec![0; nx * ny * nz],
            sheets: Vec::new(),
            boundaries,
            port: None,
            board_cells: (0, 0, nx, ny),
            warnings: Vec::new(),
        }
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.ny + j) * self.nz + k
    }

    pub fn dielectric_at(&self, i: usize, j: usize, k: usize) -> Dielectric {
        self.dielectrics[self.cells[self.cell_index(i, j, k)] as usize]
    }

    /// Fills cells in the half-open index box with `d`.
    pub fn fill(&mut self, lo: [usize; 3], hi: [usize; 3], d: Dielectric) {
        let id = self.intern(d);
        for i in lo[0]..hi[0].min(self.nx) {
            for j in lo[1]..hi[1].min(self.ny) {
                for k in lo[2]..hi[2].min(self.nz) {
                    let idx = self.cell_index(i, j, k);
                    self.cells[idx] = id;
                }
            }
        }
    }

    pub fn intern(&mut self, d: Dielectric) -> u8 {
        if let Some(p) = self.dielectrics.iter().position(|x| *x == d) {
            return p as u8;
        }
        assert!(
            self.dielectrics.len() < 255,
            "too many distinct dielectrics"
        );
        self.dielectrics.push(d);
        (self.dielectrics.len() - 1) as u8
    }

    /// Adds a copper sheet on plane `k` covering the cells `[lo, hi)`.
    pub fn add_sheet_box(&mut self, k: usize, lo: [usize; 2], hi: [usize; 2], role: &str) {
        let mut mask = vec![false; self.nx * self.ny];
        for i in lo[0]..hi[0].min(self.nx) {
            for j in lo[1]..hi[1].min(self.ny) {
                mask[i * self.ny + j] = true;
            }
        }
        self.sheets.push(CopperSheet {
            k,
            role: role.to_string(),
            mask,
        });
    }

    pub fn label(&self, i: usize, j: usize, k: usize) -> CellLabel {
        let on_copper = self
            .sheets
            .iter()
            .any(|s| s.k == k && s.mask[i * self.ny + j]);
        if on_copper || (k == 0 && self.boundaries.z_lo == Boundary::Pec) {
            return CellLabel::Pec;
        }
        match self.cells[self.cell_index(i, j, k)] {
            0 => CellLabel::Air,
            id => CellLabel::Dielectric(id),
        }
    }

    /// Copper cell count of a sheet inside the board outline.
    pub fn board_copper_cells(&self, sheet: usize) -> usize {
        let (i0, j0, i1, j1) = self.board_cells;
        let s = &self.sheets[sheet];
        (i0..i1)
            .flat_map(|i| (j0..j1).map(move |j| (i, j)))
            .filter(|(i, j)| s.mask[i * self.ny + j])
            .count()
    }

    pub fn cell_count(&self) -> u64 {
        (self.nx * self.ny * self.nz) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterOptions {
    pub cell: f64,
    /// Absorber thickness on the lateral faces and the top, cells.
    pub pml: usize,
    /// Air cells between the top copper and the absorber.
    pub air_above: usize,
}

impl RasterOptions {
    pub fn new(cell: f64) -> Self {
        RasterOptions {
            cell,
            pml: 10,
            air_above: 16,
        }
    }
}

fn snap(v: f64, cell: f64, what: &str, warnings: &mut Vec<String>) -> usize {
    let n = (v / cell).round();
    if (n * cell - v).abs() > 1e-6 * cell.max(v) {
        warnings.push(format!(
            "{what} of {:.3} mm is not a multiple of the {:.3} mm cell; snapped to {:.3} mm",
            v * 1e3,
            cell * 1e3,
            n * cell * 1e3
        ));
    }
    n as usize
}

/// Maps a geometry onto a uniform cubic grid. The ground plane becomes the
/// bottom PEC wall; dielectric layers and the feed strip continue into the
/// lateral absorber.
pub fn rasterize(geometry: &AntennaGeometry, opts: &RasterOptions) -> Result<MaterialGrid> {
    let cell = opts.cell;
    if !(cell > 0.0) || !cell.is_finite() {
        return Err(Error::domain(format!(
            "cell size must be positive, got {cell}"
        )));
    }
    let stack = &geometry.stack;
    let board = stack.board;
    let mut warnings = Vec::new();
    for (name, size) in &geometry.features {
        if *size < 2.0 * cell {
            warnings.push(format!(
                "{name} of {:.3} mm spans fewer than two {:.3} mm cells",
                size * 1e3,
                cell * 1e3
            ));
        }
    }

    let nbx = snap(board.width(), cell, "board width", &mut warnings);
    let nby = snap(board.height(), cell, "board length", &mut warnings);
    let pml = opts.pml;
    let nx = nbx + 2 * pml;
    let ny = nby + 2 * pml;

    // Copper plane indices and dielectric spans.
    let mut k = 0usize;
    let mut z = 0.0;
    let mut planes = Vec::new();
    let mut slabs = Vec::new();
    for layer in &stack.layers {
        match layer {
            Layer::Copper { .. } => planes.push(k),
            Layer::Dielectric { substrate } => {
                z += substrate.height;
                let k_next = snap(z, cell, "layer height", &mut warnings);
                if k_next <= k {
                    return Err(Error::domain(format!(
                        "dielectric of {:.3} mm vanishes at a {:.3} mm cell",
                        substrate.height * 1e3,
                        cell * 1e3
                    )));
                }
                slabs.push((k, k_next, *substrate));
                k = k_next;
            }
        }
    }
    let k_top = *planes.last().unwrap_or(&0);
    let nz = k_top + opts.air_above + pml;

    let boundaries = Boundaries {
        x_lo: Boundary::Pml,
        x_hi: Boundary::Pml,
        y_lo: Boundary::Pml,
        y_hi: Boundary::Pml,
        z_lo: Boundary::Pec,
        z_hi: Boundary::Pml,
    };
    let mut grid = MaterialGrid::empty(nx, ny, nz, cell, boundaries);
    grid.origin = [
        board.x0 - pml as f64 * cell,
        board.y0 - pml as f64 * cell,
        0.0,
    ];
    grid.board_cells = (pml, pml, pml + nbx, pml + nby);
    for (k0, k1, s) in slabs {
        grid.fill(
            [0, 0, k0],
            [nx, ny, k1],
            Dielectric {
                eps_r: s.eps_r,
                loss_tangent: s.loss_tangent,
            },
        );
    }

    let x_of = |i: usize| grid.origin[0] + (i as f64 + 0.5) * cell;
    let y_of = |j: usize| grid.origin[1] + (j as f64 + 0.5) * cell;
    let port = geometry.port;
    for (idx, role, shape) in stack.copper_layers() {
        let mut mask = vec![false; nx * ny];
        for i in 0..nx {
            let x = x_of(i);
            for j in 0..ny {
                let y = y_of(j);
                let mut on = shape.contains(x, y);
                // The feed strip runs on into the absorber beyond the board edge.
                if !on && idx == port.copper_layer && y < board.y0 {
                    let half = port.width / 2.0;
                    on = x >= port.x_center - half && x < port.x_center + half;
                }
                mask[i * ny + j] = on;
            }
        }
        grid.sheets.push(CopperSheet {
            k: planes[idx],
            role: role.to_string(),
            mask,
        });
    }

    // Port: strip nodes on the first board row.
    let sheet = &grid.sheets[port.copper_layer];
    let j = pml;
    let copper_cells: Vec<usize> = (0..nx).filter(|&i| sheet.mask[i * ny + j]).collect();
    let (Some(&ia), Some(&ib)) = (copper_cells.first(), copper_cells.last()) else {
        return Err(Error::domain("feed strip vanished during rasterization"));
    };
    if ib + 1 - ia != copper_cells.len() {
        return Err(Error::domain(
            "feed strip is not contiguous at the board edge",
        ));
    }
    grid.port = Some(GridPort {
        i_lo: ia,
        i_hi: ib + 1,
        k: planes[port.copper_layer],
        j_edge: pml,
        z_ref: port.z_ref,
    });
    grid.warnings = warnings;
    Ok(grid)
}
