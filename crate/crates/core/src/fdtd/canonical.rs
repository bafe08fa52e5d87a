//! Small problems with closed-form answers, used to check the solver: a
//! closed cavity, a TEM guide into an absorber, free propagation along an
//! axis and a short current element.

use std::f64::consts::PI;

use super::{
    Boundaries, Boundary, GaussianPulse, SimulationConfig, Solver, SurfaceRecord, SurfaceSpec,
};
use crate::consts::{C0, MM};
use crate::error::Result;
use crate::geometry::MaterialGrid;
use crate::post::{dft, ntff, FarFieldPattern};

/// Drives a soft source on component `axis` at every `src` node and records
/// the same component at each probe. Returns the time step and the records.
pub fn drive(
    grid: &MaterialGrid,
    cfg: &SimulationConfig,
    axis: usize,
    src: &[[usize; 3]],
    probes: &[[usize; 3]],
    steps: usize,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let mut s = Solver::new(grid, cfg)?;
    let dt = s.dt();
    let mut out = vec![Vec::with_capacity(steps); probes.len()];
    for n in 0..steps {
        s.update_h();
        s.update_e();
        let v = cfg.source.value((n + 1) as f64 * dt);
        for p in src {
            s.add_e(axis, *p, v);
        }
        for (o, p) in out.iter_mut().zip(probes) {
            o.push(s.e_at(axis, *p));
        }
    }
    s.check_finite(steps)?;
    Ok((dt, out))
}

fn strongest(samples: &[f64], dt: f64, lo: f64, hi: f64, step: f64) -> f64 {
    let n = ((hi - lo) / step).ceil() as usize + 1;
    let freqs: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
    let spec = dft(samples, dt, 1.0, &freqs);
    let (i, _) =
        spec.iter().enumerate().fold(
            (0, 0.0),
            |b, (i, c)| if c.norm() > b.1 { (i, c.norm()) } else { b },
        );
    freqs[i]
}

/// Strongest `Ey` response between 9 and 13 GHz (1 MHz steps) of a closed
/// conducting 30 x 15 x 15 mm box at 0.5 mm cells, excited and probed at
/// off-center nodes. The lowest mode, TE101, sits near 11.18 GHz.
pub fn cavity_peak() -> Result<f64> {
    let cell = 0.5 * MM;
    let grid = MaterialGrid::empty(60, 30, 30, cell, Boundaries::all(Boundary::Pec));
    let cfg = SimulationConfig::new(cell, GaussianPulse::covering(6e9, 16e9));
    let (dt, rec) = drive(&grid, &cfg, 1, &[[17, 12, 9]], &[[41, 19, 20]], 8000)?;
    Ok(strongest(&rec[0], dt, 9e9, 13e9, 1e6))
}

/// TEM guide along z: conducting x walls, magnetic y walls, absorbers on z.
pub fn tem_guide(nz: usize, cell: f64) -> MaterialGrid {
    let b = Boundaries {
        x_lo: Boundary::Pec,
        x_hi: Boundary::Pec,
        y_lo: Boundary::Pmc,
        y_hi: Boundary::Pmc,
        z_lo: Boundary::Pml,
        z_hi: Boundary::Pml,
    };
    MaterialGrid::empty(4, 4, nz, cell, b)
}

fn sheet(k: usize) -> Vec<[usize; 3]> {
    (0..4)
        .flat_map(|i| (0..=4).map(move |j| [i, j, k]))
        .collect()
}

/// Worst reflection, in dB, of a plane wave hitting the absorber at normal
/// incidence over 2-18 GHz. The wave reflected 10 cells behind the probe is
/// separated by subtracting a guide long enough that nothing returns.
pub fn absorber_reflection_db() -> Result<f64> {
    let cell = 1.0 * MM;
    let cfg = SimulationConfig::new(cell, GaussianPulse::covering(2e9, 18e9));
    let steps = 1500;
    let (dt, a) = drive(
        &tem_guide(60, cell),
        &cfg,
        0,
        &sheet(25),
        &[[2, 2, 35]],
        steps,
    )?;
    let (_, b) = drive(
        &tem_guide(1060, cell),
        &cfg,
        0,
        &sheet(525),
        &[[2, 2, 535]],
        steps,
    )?;
    let freqs: Vec<f64> = (0..=32).map(|i| 2e9 + i as f64 * 0.5e9).collect();
    let total = dft(&a[0], dt, 1.0, &freqs);
    let direct = dft(&b[0], dt, 1.0, &freqs);
    Ok(total
        .iter()
        .zip(&direct)
        .map(|(t, d)| 20.0 * ((t - d).norm() / d.norm()).log10())
        .fold(f64::MIN, f64::max))
}

/// Relative phase-velocity error `|c / v_num - 1|` of a plane wave along a
/// grid axis sampled at `cells_per_wavelength`.
pub fn phase_velocity_error(cells_per_wavelength: f64) -> Result<f64> {
    let cell = 1.0 * MM;
    let f = C0 / (cells_per_wavelength * cell);
    let cfg = SimulationConfig::new(cell, GaussianPulse::covering(0.5 * f, f));
    let probes = [[2, 2, 520], [2, 2, 550]];
    let (dt, rec) = drive(&tem_guide(1060, cell), &cfg, 0, &sheet(500), &probes, 1600)?;
    let a = dft(&rec[0], dt, 1.0, &[f])[0];
    let b = dft(&rec[1], dt, 1.0, &[f])[0];
    let k0 = 2.0 * PI * f / C0;
    let d = 30.0 * cell;
    let raw = (a * b.conj()).arg();
    let turns = ((k0 * d - raw) / (2.0 * PI)).round();
    let k_num = (raw + 2.0 * PI * turns) / d;
    Ok((k0 / k_num - 1.0).abs())
}

/// Far field at `f` of a one-cell vertical current element at `at`, from the
/// tangential fields on `surface`. Without an accepted power the net flux
/// through the surface is the reference.
pub fn current_element(
    grid: &MaterialGrid,
    at: [usize; 3],
    surface: SurfaceSpec,
    f: f64,
) -> Result<FarFieldPattern> {
    let mut c = SimulationConfig::new(grid.cell, GaussianPulse::covering(0.6 * f, 1.4 * f));
    c.pml_thickness = 10;
    let mut s = Solver::new(grid, &c)?;
    let mut rec = SurfaceRecord::new(&surface, &s, &[f])?;
    let dt = s.dt();
    for n in 0..2200 {
        s.update_h();
        rec.accumulate_h(&s, (n as f64 + 0.5) * dt);
        s.update_e();
        let t = (n + 1) as f64 * dt;
        s.add_e(2, at, c.source.value(t));
        rec.accumulate_e(&s, t);
    }
    ntff(&rec, f, None, 2.0)
}

/// Short dipole centered in an open 50-cell box at 1 mm, observed at 7.5 GHz.
pub fn short_dipole() -> Result<FarFieldPattern> {
    let g = MaterialGrid::empty(50, 50, 50, 1.0 * MM, Boundaries::all(Boundary::Pml));
    let box_ = SurfaceSpec {
        lo: [15; 3],
        hi: [35; 3],
        ground_image: false,
        open_below: 0,
    };
    current_element(&g, [25, 25, 25], box_, 7.5e9)
}
