use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Boundary, Solver, SURFACE_CLEARANCE};
use crate::error::{Error, Result};

/// Closed box of grid nodes `lo..=hi` on which tangential fields are
/// transformed to the frequency domain. With `ground_image` the box stands
/// on the conducting floor and its bottom face is supplied by image theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurfaceSpec {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
    pub ground_image: bool,
    /// Side-face cells below this z node are left out of the record. Guided
    /// fields of a laterally infinite substrate and of the feed line cross
    /// the box there; transformed as free-space sources they would radiate.
    pub open_below: usize,
}

impl SurfaceSpec {
    /// Largest box keeping the required clearance from every absorber.
    pub fn inset(dims: (usize, usize, usize), pml: usize, ground_image: bool) -> Self {
        let m = pml + SURFACE_CLEARANCE;
        SurfaceSpec {
            lo: [m, m, if ground_image { 0 } else { m }],
            hi: [dims.0 - m, dims.1 - m, dims.2 - m],
            ground_image,
            open_below: 0,
        }
    }

    pub fn open_below(mut self, k: usize) -> Self {
        self.open_below = k;
        self
    }
}

/// One face of the box: normal along `axis`, at node `node`, covering cells
/// `u` along `(axis+1)%3` and `v` along `(axis+2)%3`. Arrays are indexed
/// `(f * nu + u) * nv + v` and hold tangential fields at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceRecord {
    pub axis: usize,
    pub node: usize,
    pub normal: f64,
    pub u0: usize,
    pub nu: usize,
    pub v0: usize,
    pub nv: usize,
    pub eb: Vec<Complex64>,
    pub ec: Vec<Complex64>,
    pub hb: Vec<Complex64>,
    pub hc: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceRecord {
    pub spec: SurfaceSpec,
    pub freqs: Vec<f64>,
    pub cell: f64,
    pub faces: Vec<FaceRecord>,
    strides: [usize; 3],
}

impl SurfaceRecord {
    pub fn new(spec: &SurfaceSpec, solver: &Solver, freqs: &[f64]) -> Result<Self> {
        let (nx, ny, nz) = solver.dims();
        let n = [nx, ny, nz];
        let bnd = solver.boundaries();
        let clear = solver.pml_thickness() + SURFACE_CLEARANCE;
        for a in 0..3 {
            let (lo_b, hi_b) = bnd.axis(a);
            let (lo, hi) = (spec.lo[a], spec.hi[a]);
            if lo >= hi || hi > n[a] {
                return Err(Error::OpenSurface(format!(
                    "empty or oversized extent on axis {a}"
                )));
            }
            let floor = a == 2 && spec.ground_image;
            if floor {
                if lo != 0 || lo_b != Boundary::Pec {
                    return Err(Error::OpenSurface(
                        "image mode needs the box on a conducting floor".into(),
                    ));
                }
            } else if lo == 0 {
                return Err(Error::OpenSurface(format!(
                    "box touches the low wall on axis {a}"
                )));
            }
            if hi >= n[a] {
                return Err(Error::OpenSurface(format!(
                    "box touches the high wall on axis {a}"
                )));
            }
            if (lo_b == Boundary::Pml && lo < clear) || (hi_b == Boundary::Pml && hi + clear > n[a])
            {
                return Err(Error::Domain(format!(
                    "surface closer than {SURFACE_CLEARANCE} cells to the absorber on axis {a}"
                )));
            }
        }
        if freqs.is_empty() {
            return Err(Error::domain("surface record needs at least one frequency"));
        }
        let z0 = spec.open_below.max(spec.lo[2]);
        if z0 >= spec.hi[2] {
            return Err(Error::OpenSurface("side faces left out entirely".into()));
        }
        let mut faces = Vec::new();
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            for (node, normal) in [(spec.lo[a], -1.0), (spec.hi[a], 1.0)] {
                if a == 2 && normal < 0.0 && spec.ground_image {
                    continue;
                }
                let start = |axis: usize| {
                    if axis == 2 && a != 2 {
                        z0
                    } else {
                        spec.lo[axis]
                    }
                };
                let (u0, v0) = (start(b), start(c));
                let nu = spec.hi[b] - u0;
                let nv = spec.hi[c] - v0;
                let len = freqs.len() * nu * nv;
                faces.push(FaceRecord {
                    axis: a,
                    node,
                    normal,
                    u0,
                    nu,
                    v0,
                    nv,
                    eb: vec![Complex64::new(0.0, 0.0); len],
                    ec: vec![Complex64::new(0.0, 0.0); len],
                    hb: vec![Complex64::new(0.0, 0.0); len],
                    hc: vec![Complex64::new(0.0, 0.0); len],
                });
            }
        }
        Ok(SurfaceRecord {
            spec: *spec,
            freqs: freqs.to_vec(),
            cell: solver.cell(),
            faces,
            strides: [(ny + 1) * (nz + 1), nz + 1, 1],
        })
    }

    fn weights(&self, t: f64, dt: f64) -> Vec<Complex64> {
        self.freqs
            .iter()
            .map(|f| Complex64::from_polar(dt, -2.0 * PI * f * t))
            .collect()
    }

    /// Adds the electric samples at time `t`.
    pub fn accumulate_e(&mut self, solver: &Solver, t: f64) {
        let w = self.weights(t, solver.dt());
        let st = self.strides;
        for face in &mut self.faces {
            let (a, b, c) = (face.axis, (face.axis + 1) % 3, (face.axis + 2) % 3);
            let fb = solver.e(b);
            let fc = solver.e(c);
            let plane = face.node * st[a];
            let cells = face.nu * face.nv;
            for u in 0..face.nu {
                for v in 0..face.nv {
                    let p = plane + (face.u0 + u) * st[b] + (face.v0 + v) * st[c];
                    let eb = 0.5 * (fb[p] + fb[p + st[c]]);
                    let ec = 0.5 * (fc[p] + fc[p + st[b]]);
                    let q = u * face.nv + v;
                    for (f, wf) in w.iter().enumerate() {
                        face.eb[f * cells + q] += wf * eb;
                        face.ec[f * cells + q] += wf * ec;
                    }
                }
            }
        }
    }

    /// Adds the magnetic samples at time `t`.
    pub fn accumulate_h(&mut self, solver: &Solver, t: f64) {
        let w = self.weights(t, solver.dt());
        let st = self.strides;
        for face in &mut self.faces {
            let (a, b, c) = (face.axis, (face.axis + 1) % 3, (face.axis + 2) % 3);
            let fb = solver.h(b);
            let fc = solver.h(c);
            let plane = face.node * st[a];
            let cells = face.nu * face.nv;
            for u in 0..face.nu {
                for v in 0..face.nv {
                    let p = plane + (face.u0 + u) * st[b] + (face.v0 + v) * st[c];
                    let pm = p - st[a];
                    let hb = 0.25 * (fb[p] + fb[pm] + fb[p + st[b]] + fb[pm + st[b]]);
                    let hc = 0.25 * (fc[p] + fc[pm] + fc[p + st[c]] + fc[pm + st[c]]);
                    let q = u * face.nv + v;
                    for (f, wf) in w.iter().enumerate() {
                        face.hb[f * cells + q] += wf * hb;
                        face.hc[f * cells + q] += wf * hc;
                    }
                }
            }
        }
    }

    /// Time-averaged power leaving the box at frequency index `fi`, from the
    /// recorded spectra.
    pub fn outward_flux(&self, fi: usize) -> f64 {
        let da = self.cell * self.cell;
        let mut p = 0.0;
        for face in &self.faces {
            let cells = face.nu * face.nv;
            let r = fi * cells..(fi + 1) * cells;
            let s: f64 = face.eb[r.clone()]
                .iter()
                .zip(&face.hc[r.clone()])
                .zip(face.ec[r.clone()].iter().zip(&face.hb[r]))
                .map(|((eb, hc), (ec, hb))| (eb * hc.conj() - ec * hb.conj()).re)
                .sum();
            p += face.normal * s;
        }
        0.5 * p * da
    }
}
