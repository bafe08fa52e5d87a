//! Yee-grid time-domain solver with CPML absorbers and a microstrip port.

pub mod canonical;
mod record;
mod solver;
mod surface;

pub use record::{read_record, write_record, Termination, TimeSeriesRecord};
pub use solver::Solver;
pub use surface::{FaceRecord, SurfaceRecord, SurfaceSpec};

use std::f64::consts::PI;

use crate::consts::C0;
use crate::error::{Error, Result};
use crate::geometry::MaterialGrid;

/// Default cap on `cells x steps` for one run.
pub const DEFAULT_BUDGET: u64 = 20_000_000_000;
/// Minimum absorber thickness, cells.
pub const MIN_PML: usize = 8;
/// Cells between a far-field surface and the absorber.
pub const SURFACE_CLEARANCE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Pml,
    Pec,
    Pmc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Boundaries {
    pub x_lo: Boundary,
    pub x_hi: Boundary,
    pub y_lo: Boundary,
    pub y_hi: Boundary,
    pub z_lo: Boundary,
    pub z_hi: Boundary,
}

impl Boundaries {
    pub fn all(b: Boundary) -> Self {
        Boundaries {
            x_lo: b,
            x_hi: b,
            y_lo: b,
            y_hi: b,
            z_lo: b,
            z_hi: b,
        }
    }

    /// `(lo, hi)` for axis 0, 1 or 2.
    pub fn axis(&self, a: usize) -> (Boundary, Boundary) {
        match a {
            0 => (self.x_lo, self.x_hi),
            1 => (self.y_lo, self.y_hi),
            _ => (self.z_lo, self.z_hi),
        }
    }
}

/// Gaussian-modulated sine. `bandwidth` is the full width where the spectrum
/// is 20 dB below its peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPulse {
    pub center: f64,
    pub bandwidth: f64,
}

impl GaussianPulse {
    pub fn new(center: f64, bandwidth: f64) -> Self {
        GaussianPulse { center, bandwidth }
    }

    /// Covers `[f_lo, f_hi]` between the -20 dB points.
    pub fn covering(f_lo: f64, f_hi: f64) -> Self {
        GaussianPulse {
            center: 0.5 * (f_lo + f_hi),
            bandwidth: f_hi - f_lo,
        }
    }

    pub fn tau(&self) -> f64 {
        2.0 * 10f64.ln().sqrt() / (PI * self.bandwidth)
    }

    pub fn delay(&self) -> f64 {
        4.0 * self.tau()
    }

    /// Time after which the excitation is negligible.
    pub fn duration(&self) -> f64 {
        2.0 * self.delay()
    }

    pub fn value(&self, t: f64) -> f64 {
        let s = (t - self.delay()) / self.tau();
        (2.0 * PI * self.center * (t - self.delay())).sin() * (-s * s).exp()
    }

    pub fn f_max(&self) -> f64 {
        self.center + 0.5 * self.bandwidth
    }

    pub fn f_min(&self) -> f64 {
        (self.center - 0.5 * self.bandwidth).max(0.0)
    }

    fn validate(&self) -> Result<()> {
        if !(self.center > 0.0 && self.bandwidth > 0.0) {
            return Err(Error::domain(
                "source center and bandwidth must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub cell: f64,
    /// Fraction of the 3D stability limit: `dt = courant_factor * cell / (c * sqrt 3)`.
    pub courant_factor: f64,
    /// Step limit.
    pub timesteps: usize,
    pub pml_thickness: usize,
    pub source: GaussianPulse,
    pub surfaces: Vec<SurfaceSpec>,
    /// Frequencies at which surface fields are accumulated.
    pub surface_freqs: Vec<f64>,
    /// Port-energy decay that ends a run.
    pub decay_db: f64,
    /// Cap on `cells x timesteps`.
    pub budget: u64,
}

impl SimulationConfig {
    pub fn new(cell: f64, source: GaussianPulse) -> Self {
        SimulationConfig {
            cell,
            courant_factor: 0.99,
            timesteps: 40_000,
            pml_thickness: 10,
            source,
            surfaces: Vec::new(),
            surface_freqs: Vec::new(),
            decay_db: 60.0,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn dt(&self) -> f64 {
        self.courant_factor * self.cell / (C0 * 3f64.sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cell > 0.0 && self.cell.is_finite()) {
            return Err(Error::validation("simulation.cell", "must be positive"));
        }
        if !(self.courant_factor > 0.0 && self.courant_factor <= 1.0) {
            return Err(Error::validation(
                "simulation.courant",
                "must lie in (0, 1]",
            ));
        }
        if self.pml_thickness < MIN_PML {
            return Err(Error::validation(
                "simulation.pml",
                format!("at least {MIN_PML} cells required"),
            ));
        }
        if self.timesteps == 0 {
            return Err(Error::validation(
                "simulation.timesteps",
                "must be positive",
            ));
        }
        self.source.validate()?;
        let lambda_min = C0 / self.source.f_max();
        if self.cell > lambda_min / 15.0 * (1.0 + 1e-9) {
            return Err(Error::domain(format!(
                "cell {:.3} mm exceeds lambda/15 = {:.3} mm at the top of the source band",
                self.cell * 1e3,
                lambda_min / 15.0 * 1e3
            )));
        }
        if self.surface_freqs.iter().any(|f| !(*f > 0.0)) {
            return Err(Error::validation(
                "simulation.surface_freqs",
                "must be positive",
            ));
        }
        Ok(())
    }
}

/// Lumped microstrip port: a soft vertical source across the substrate below
/// the strip at row `j_source`, voltage and current sampled at row `j_probe`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortSpec {
    /// Strip edge nodes along x (inclusive).
    pub i_lo: usize,
    pub i_hi: usize,
    /// Node plane of the strip; the port spans `0..k` below it.
    pub k: usize,
    pub j_source: usize,
    pub j_probe: usize,
    /// +1 drives the strip positive with respect to ground.
    pub polarity: f64,
    pub z_ref: f64,
}

impl PortSpec {
    /// Port on the feed strip found by rasterization, source and probe placed
    /// `source_offset` and `probe_offset` rows inside the board edge.
    pub fn from_grid(
        grid: &MaterialGrid,
        source_offset: usize,
        probe_offset: usize,
    ) -> Result<Self> {
        let gp = grid
            .port
            .ok_or_else(|| Error::domain("grid carries no feed port"))?;
        let port = PortSpec {
            i_lo: gp.i_lo,
            i_hi: gp.i_hi,
            k: gp.k,
            j_source: gp.j_edge + source_offset,
            j_probe: gp.j_edge + probe_offset,
            polarity: 1.0,
            z_ref: gp.z_ref,
        };
        port.validate(grid)?;
        Ok(port)
    }

    pub fn validate(&self, grid: &MaterialGrid) -> Result<()> {
        if self.k == 0 || self.k > grid.nz {
            return Err(Error::domain("port must sit above the ground plane"));
        }
        if self.i_lo == 0 || self.i_hi >= grid.nx || self.i_lo > self.i_hi {
            return Err(Error::domain("port strip lies outside the grid"));
        }
        if self.j_probe == 0 || self.j_probe + 1 >= grid.ny || self.j_source >= grid.ny {
            return Err(Error::domain("port rows lie outside the grid"));
        }
        if !(self.z_ref > 0.0) {
            return Err(Error::domain("port reference impedance must be positive"));
        }
        Ok(())
    }

    pub fn center_i(&self) -> usize {
        (self.i_lo + self.i_hi) / 2
    }
}

/// Straight feed line of the same cross-section running through the whole
/// grid: all copper except the ground is replaced by the port strip.
pub fn reference_grid(grid: &MaterialGrid, port: &PortSpec) -> MaterialGrid {
    let mut g = grid.clone();
    g.sheets.retain(|s| s.k == 0);
    g.add_sheet_box(
        port.k,
        [port.i_lo, 0],
        [port.i_hi, grid.ny],
        "reference-line",
    );
    g
}

fn check_grid(grid: &MaterialGrid, config: &SimulationConfig) -> Result<()> {
    config.validate()?;
    if (grid.cell - config.cell).abs() > 1e-12 * config.cell {
        return Err(Error::Mismatch(format!(
            "grid cell {} differs from configured cell {}",
            grid.cell, config.cell
        )));
    }
    // The excitation and one decay block are the least any run can take.
    let (src_end, block) = schedule(config);
    let least = (src_end + block).min(config.timesteps) as u64;
    let needed = grid.cell_count().saturating_mul(least);
    if needed > config.budget {
        return Err(Error::Budget {
            needed,
            budget: config.budget,
        });
    }
    Ok(())
}

/// Last step of the excitation and the length of an energy block.
fn schedule(config: &SimulationConfig) -> (usize, usize) {
    let dt = config.dt();
    let src = config.source;
    let block = ((1.0 / (src.f_min().max(0.1 * src.center) * dt)).ceil() as usize).max(16);
    ((src.duration() / dt).ceil() as usize, block)
}

/// Runs the port-driven simulation until the port energy has decayed by
/// `decay_db` or the step limit is reached.
pub fn run(
    grid: &MaterialGrid,
    config: &SimulationConfig,
    port: &PortSpec,
) -> Result<TimeSeriesRecord> {
    check_grid(grid, config)?;
    port.validate(grid)?;
    let mut solver = Solver::new(grid, config)?;
    let mut surfaces = config
        .surfaces
        .iter()
        .map(|s| SurfaceRecord::new(s, &solver, &config.surface_freqs))
        .collect::<Result<Vec<_>>>()?;
    let dt = solver.dt();
    let src = config.source;
    let (src_end, block) = schedule(config);
    let threshold = 10f64.powf(-config.decay_db / 10.0);
    let cells = grid.cell_count();

    let mut v = Vec::with_capacity(config.timesteps);
    let mut cur = Vec::with_capacity(config.timesteps);
    let mut termination = Termination::StepLimit;
    let (mut acc, mut peak) = (0.0f64, 0.0f64);
    let ic = port.center_i();
    for n in 0..config.timesteps {
        let used = cells.saturating_mul(n as u64 + 1);
        if used > config.budget {
            return Err(Error::Budget {
                needed: used,
                budget: config.budget,
            });
        }
        solver.update_h();
        let t_h = (n as f64 + 0.5) * dt;
        for s in &mut surfaces {
            s.accumulate_h(&solver, t_h);
        }
        let i_port = 0.5
            * (solver.loop_current(port.i_lo, port.i_hi, port.j_probe - 1, port.k)
                + solver.loop_current(port.i_lo, port.i_hi, port.j_probe, port.k));
        solver.update_e();
        let t = (n + 1) as f64 * dt;
        let drive = port.polarity * src.value(t);
        // A positive drive raises the strip, so the field points down.
        for i in port.i_lo..=port.i_hi {
            for k in 0..port.k {
                solver.add_e(2, [i, port.j_source, k], -drive);
            }
        }
        for s in &mut surfaces {
            s.accumulate_e(&solver, t);
        }
        let v_port = solver.column_voltage(ic, port.j_probe, port.k);
        if !v_port.is_finite() || !i_port.is_finite() {
            return Err(Error::Instability {
                step: n,
                field: "port",
            });
        }
        if n % 64 == 63 {
            solver.check_finite(n)?;
        }
        v.push(v_port);
        cur.push(i_port);

        acc += v_port * v_port + (port.z_ref * i_port).powi(2);
        if (n + 1) % block == 0 {
            peak = peak.max(acc);
            if n > src_end && peak > 0.0 && acc <= peak * threshold {
                termination = Termination::Decayed { step: n + 1 };
                break;
            }
            acc = 0.0;
        }
    }
    solver.check_finite(v.len())?;
    Ok(TimeSeriesRecord {
        dt,
        v_offset: 1.0,
        i_offset: 0.5,
        v,
        i: cur,
        z_ref: port.z_ref,
        termination,
        surfaces,
    })
}

/// Incident-wave calibration on a matched line of the same cross-section.
pub fn reference_run(
    grid: &MaterialGrid,
    config: &SimulationConfig,
    port: &PortSpec,
) -> Result<TimeSeriesRecord> {
    let mut cfg = config.clone();
    cfg.surfaces.clear();
    run(&reference_grid(grid, port), &cfg, port)
}
