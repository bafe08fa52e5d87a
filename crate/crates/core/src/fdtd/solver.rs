use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;

use super::{Boundaries, Boundary, SimulationConfig};
use crate::consts::{EPS0, ETA0, MU0};
use crate::error::{Error, Result};
use crate::geometry::MaterialGrid;

const PML_ORDER: f64 = 3.0;
const PML_ALPHA_MAX: f64 = 0.05;
const NONE: usize = usize::MAX;

/// CPML coefficients along one axis. E samples sit on nodes, H samples on
/// half nodes; only absorber positions get a slot.
#[derive(Debug, Clone, Default)]
struct AxisPml {
    e_nodes: Vec<usize>,
    e_b: Vec<f64>,
    e_a: Vec<f64>,
    e_slot: Vec<usize>,
    h_nodes: Vec<usize>,
    h_b: Vec<f64>,
    h_a: Vec<f64>,
    h_slot: Vec<usize>,
}

fn cpml_coefficients(depth: f64, thick: f64, cell: f64, dt: f64) -> (f64, f64) {
    let x = (depth / thick).clamp(0.0, 1.0);
    let sigma_max = 0.8 * (PML_ORDER + 1.0) / (ETA0 * cell);
    let sigma = sigma_max * x.powf(PML_ORDER);
    let alpha = PML_ALPHA_MAX * (1.0 - x);
    let b = (-(sigma + alpha) * dt / EPS0).exp();
    let a = if sigma + alpha > 0.0 {
        sigma / (sigma + alpha) * (b - 1.0)
    } else {
        0.0
    };
    (b, a)
}

impl AxisPml {
    fn new(n: usize, sides: (Boundary, Boundary), thick: usize, cell: f64, dt: f64) -> Self {
        let mut p = AxisPml {
            e_slot: vec![NONE; n + 1],
            h_slot: vec![NONE; n],
            ..Default::default()
        };
        let t = thick as f64;
        let lo = sides.0 == Boundary::Pml;
        let hi = sides.1 == Boundary::Pml;
        // The outermost nodes are the conducting backing and never update.
        for i in 1..n {
            let depth = if lo && i < thick {
                Some((thick - i) as f64)
            } else if hi && i > n - thick {
                Some((i - (n - thick)) as f64)
            } else {
                None
            };
            if let Some(d) = depth {
                let (b, a) = cpml_coefficients(d, t, cell, dt);
                p.e_slot[i] = p.e_nodes.len();
                p.e_nodes.push(i);
                p.e_b.push(b);
                p.e_a.push(a);
            }
        }
        for i in 0..n {
            let x = i as f64 + 0.5;
            let depth = if lo && i < thick {
                Some(t - x)
            } else if hi && i >= n - thick {
                Some(x - (n - thick) as f64)
            } else {
                None
            };
            if let Some(d) = depth {
                let (b, a) = cpml_coefficients(d, t, cell, dt);
                p.h_slot[i] = p.h_nodes.len();
                p.h_nodes.push(i);
                p.h_b.push(b);
                p.h_a.push(a);
            }
        }
        p
    }
}

/// Auxiliary CPML fields of one x plane. For E planes: `x = (Ey, Ez)`,
/// `y = (Ex, Ez)`, `z = (Ex, Ey)`; H planes use the same pairing.
#[derive(Debug, Clone, Default)]
struct PlanePsi {
    x1: Vec<f64>,
    x2: Vec<f64>,
    y1: Vec<f64>,
    y2: Vec<f64>,
    z1: Vec<f64>,
    z2: Vec<f64>,
}

/// Leapfrog state on a uniform grid. Arrays hold `(nx+1)(ny+1)(nz+1)`
/// samples with `k` fastest; the sample `(i, j, k)` of a component sits at
/// the Yee position of that component in cell `(i, j, k)`.
pub struct Solver {
    nx: usize,
    ny: usize,
    nz: usize,
    sz: usize,
    np: usize,
    cell: f64,
    dt: f64,
    e: [Vec<f64>; 3],
    h: [Vec<f64>; 3],
    ids: [Vec<u8>; 3],
    ca: Vec<f64>,
    cb: Vec<f64>,
    eps: Vec<f64>,
    db: f64,
    bnd: Boundaries,
    pml: [AxisPml; 3],
    psi_e: Vec<PlanePsi>,
    psi_h: Vec<PlanePsi>,
    thick: usize,
    step: usize,
}

struct Ctx<'a> {
    nx: usize,
    ny: usize,
    nz: usize,
    sz: usize,
    np: usize,
    ids: &'a [Vec<u8>; 3],
    ca: &'a [f64],
    cb: &'a [f64],
    db: f64,
    bnd: Boundaries,
    pml: &'a [AxisPml; 3],
}

impl Solver {
    pub fn new(grid: &MaterialGrid, config: &SimulationConfig) -> Result<Self> {
        let (nx, ny, nz) = (grid.nx, grid.ny, grid.nz);
        if nx < 2 || ny < 2 || nz < 2 {
            return Err(Error::domain("grid needs at least two cells per axis"));
        }
        let thick = config.pml_thickness;
        for a in 0..3 {
            let n = [nx, ny, nz][a];
            let (lo, hi) = grid.boundaries.axis(a);
            let layers = (lo == Boundary::Pml) as usize + (hi == Boundary::Pml) as usize;
            if layers * thick >= n {
                return Err(Error::domain(format!(
                    "axis {a} has {n} cells, too few for {layers} absorbers of {thick}"
                )));
            }
        }
        let cell = grid.cell;
        let dt = config.dt();
        let sz = nz + 1;
        let np = (ny + 1) * sz;
        let len = (nx + 1) * np;

        // Coefficient table, entry 0 is a perfect conductor.
        let fc = config.source.center;
        let mut table: HashMap<(u64, u64), u8> = HashMap::new();
        let mut ca = vec![0.0];
        let mut cb = vec![0.0];
        let mut eps = vec![1.0];
        let mut intern = |eps_r: f64, sigma: f64| -> u8 {
            *table
                .entry((eps_r.to_bits(), sigma.to_bits()))
                .or_insert_with(|| {
                    let e = EPS0 * eps_r;
                    let loss = sigma * dt / (2.0 * e);
                    ca.push((1.0 - loss) / (1.0 + loss));
                    cb.push(dt / (e * cell) / (1.0 + loss));
                    eps.push(eps_r);
                    assert!(ca.len() <= 256, "too many distinct edge materials");
                    (ca.len() - 1) as u8
                })
        };

        let cell_props: Vec<(f64, f64)> = grid
            .dielectrics
            .iter()
            .map(|d| (d.eps_r, 2.0 * PI * fc * EPS0 * d.eps_r * d.loss_tangent))
            .collect();
        let prop = |i: usize, j: usize, k: usize| -> (f64, f64) {
            let i = i.min(nx - 1);
            let j = j.min(ny - 1);
            let k = k.min(nz - 1);
            cell_props[grid.cells[grid.cell_index(i, j, k)] as usize]
        };
        let avg = |cells: [(usize, usize, usize); 4]| -> (f64, f64) {
            let mut e = 0.0;
            let mut s = 0.0;
            for (i, j, k) in cells {
                let (pe, ps) = prop(i, j, k);
                e += pe;
                s += ps;
            }
            (e / 4.0, s / 4.0)
        };
        let bnd = grid.boundaries;
        let wall = |b: Boundary| b != Boundary::Pmc;

        let mut ids = [vec![0u8; len], vec![0u8; len], vec![0u8; len]];
        for i in 0..=nx {
            let im = i.saturating_sub(1);
            for j in 0..=ny {
                let jm = j.saturating_sub(1);
                for k in 0..=nz {
                    let km = k.saturating_sub(1);
                    let p = (i * (ny + 1) + j) * sz + k;
                    let y_face = (j == 0 && wall(bnd.y_lo)) || (j == ny && wall(bnd.y_hi));
                    let z_face = (k == 0 && wall(bnd.z_lo)) || (k == nz && wall(bnd.z_hi));
                    let x_face = (i == 0 && wall(bnd.x_lo)) || (i == nx && wall(bnd.x_hi));
                    if i < nx && !y_face && !z_face {
                        let (e, s) = avg([(i, jm, km), (i, j, km), (i, jm, k), (i, j, k)]);
                        ids[0][p] = intern(e, s);
                    }
                    if j < ny && !x_face && !z_face {
                        let (e, s) = avg([(im, j, km), (i, j, km), (im, j, k), (i, j, k)]);
                        ids[1][p] = intern(e, s);
                    }
                    if k < nz && !x_face && !y_face {
                        let (e, s) = avg([(im, jm, k), (i, jm, k), (im, j, k), (i, j, k)]);
                        ids[2][p] = intern(e, s);
                    }
                }
            }
        }
        for sheet in &grid.sheets {
            let k = sheet.k;
            if k > nz {
                continue;
            }
            let m = |i: usize, j: usize| sheet.mask[i * ny + j];
            for i in 0..=nx {
                for j in 0..=ny {
                    let p = (i * (ny + 1) + j) * sz + k;
                    if i < nx && ((j > 0 && m(i, j - 1)) || (j < ny && m(i, j))) {
                        ids[0][p] = 0;
                    }
                    if j < ny && ((i > 0 && m(i - 1, j)) || (i < nx && m(i, j))) {
                        ids[1][p] = 0;
                    }
                }
            }
        }

        let pml = [
            AxisPml::new(nx, bnd.axis(0), thick, cell, dt),
            AxisPml::new(ny, bnd.axis(1), thick, cell, dt),
            AxisPml::new(nz, bnd.axis(2), thick, cell, dt),
        ];
        let plane_psi = |x_active: bool, y_n: usize, z_n: usize| PlanePsi {
            x1: if x_active { vec![0.0; np] } else { Vec::new() },
            x2: if x_active { vec![0.0; np] } else { Vec::new() },
            y1: vec![0.0; y_n * sz],
            y2: vec![0.0; y_n * sz],
            z1: vec![0.0; (ny + 1) * z_n],
            z2: vec![0.0; (ny + 1) * z_n],
        };
        let psi_e = (0..=nx)
            .map(|i| {
                plane_psi(
                    pml[0].e_slot[i] != NONE,
                    pml[1].e_nodes.len(),
                    pml[2].e_nodes.len(),
                )
            })
            .collect();
        let psi_h = (0..=nx)
            .map(|i| {
                let active = i < nx && pml[0].h_slot[i] != NONE;
                plane_psi(active, pml[1].h_nodes.len(), pml[2].h_nodes.len())
            })
            .collect();

        Ok(Solver {
            nx,
            ny,
            nz,
            sz,
            np,
            cell,
            dt,
            e: [vec![0.0; len], vec![0.0; len], vec![0.0; len]],
            h: [vec![0.0; len], vec![0.0; len], vec![0.0; len]],
            ids,
            ca,
            cb,
            eps,
            db: dt / (MU0 * cell),
            bnd,
            pml,
            psi_e,
            psi_h,
            thick,
            step: 0,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    pub fn boundaries(&self) -> Boundaries {
        self.bnd
    }

    pub fn pml_thickness(&self) -> usize {
        self.thick
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * (self.ny + 1) + j) * self.sz + k
    }

    /// Electric component `axis` (0 = x).
    pub fn e(&self, axis: usize) -> &[f64] {
        &self.e[axis]
    }

    pub fn h(&self, axis: usize) -> &[f64] {
        &self.h[axis]
    }

    pub fn e_at(&self, axis: usize, at: [usize; 3]) -> f64 {
        self.e[axis][self.index(at[0], at[1], at[2])]
    }

    pub fn h_at(&self, axis: usize, at: [usize; 3]) -> f64 {
        self.h[axis][self.index(at[0], at[1], at[2])]
    }

    /// Soft source: adds to the field unless the edge is a conductor.
    pub fn add_e(&mut self, axis: usize, at: [usize; 3], value: f64) {
        let p = self.index(at[0], at[1], at[2]);
        if self.ids[axis][p] != 0 {
            self.e[axis][p] += value;
        }
    }

    /// Advances H by one step.
    pub fn update_h(&mut self) {
        let ctx = Ctx {
            nx: self.nx,
            ny: self.ny,
            nz: self.nz,
            sz: self.sz,
            np: self.np,
            ids: &self.ids,
            ca: &self.ca,
            cb: &self.cb,
            db: self.db,
            bnd: self.bnd,
            pml: &self.pml,
        };
        let np = self.np;
        let e = &self.e;
        let [hx, hy, hz] = &mut self.h;
        (
            hx.par_chunks_mut(np),
            hy.par_chunks_mut(np),
            hz.par_chunks_mut(np),
            self.psi_h.par_iter_mut(),
        )
            .into_par_iter()
            .enumerate()
            .for_each(|(i, (hx, hy, hz, psi))| ctx.h_plane(i, e, hx, hy, hz, psi));
    }

    /// Advances E by one step.
    pub fn update_e(&mut self) {
        let ctx = Ctx {
            nx: self.nx,
            ny: self.ny,
            nz: self.nz,
            sz: self.sz,
            np: self.np,
            ids: &self.ids,
            ca: &self.ca,
            cb: &self.cb,
            db: self.db,
            bnd: self.bnd,
            pml: &self.pml,
        };
        let np = self.np;
        let h = &self.h;
        let [ex, ey, ez] = &mut self.e;
        (
            ex.par_chunks_mut(np),
            ey.par_chunks_mut(np),
            ez.par_chunks_mut(np),
            self.psi_e.par_iter_mut(),
        )
            .into_par_iter()
            .enumerate()
            .for_each(|(i, (ex, ey, ez, psi))| ctx.e_plane(i, h, ex, ey, ez, psi));
        self.step += 1;
    }

    pub fn check_finite(&self, step: usize) -> Result<()> {
        let bad = |v: &Vec<f64>| v.par_iter().any(|x| !x.is_finite());
        if self.e.iter().any(bad) {
            return Err(Error::Instability {
                step,
                field: "electric",
            });
        }
        if self.h.iter().any(bad) {
            return Err(Error::Instability {
                step,
                field: "magnetic",
            });
        }
        Ok(())
    }

    /// Stored electromagnetic energy, joules (E and H half a step apart).
    pub fn field_energy(&self) -> f64 {
        let v = self.cell.powi(3);
        let mut we = 0.0;
        for a in 0..3 {
            we += self.e[a]
                .iter()
                .zip(&self.ids[a])
                .map(|(x, &id)| self.eps[id as usize] * x * x)
                .sum::<f64>();
        }
        let wh: f64 = self
            .h
            .iter()
            .map(|h| h.iter().map(|x| x * x).sum::<f64>())
            .sum();
        0.5 * v * (EPS0 * we + MU0 * wh)
    }

    /// Voltage of the node column `(i, j)` from the ground to plane `k`:
    /// `-sum Ez * dz`.
    pub fn column_voltage(&self, i: usize, j: usize, k: usize) -> f64 {
        let base = self.index(i, j, 0);
        -self.e[2][base..base + k].iter().sum::<f64>() * self.cell
    }

    /// Current along +y on a strip spanning nodes `i_lo..=i_hi` on plane `k`,
    /// from the H loop at half row `j + 1/2`.
    pub fn loop_current(&self, i_lo: usize, i_hi: usize, j: usize, k: usize) -> f64 {
        let hx = &self.h[0];
        let hz = &self.h[2];
        let mut s = 0.0;
        for i in i_lo..=i_hi {
            s += hx[self.index(i, j, k)] - hx[self.index(i, j, k - 1)];
        }
        s += hz[self.index(i_lo - 1, j, k)] - hz[self.index(i_hi, j, k)];
        s * self.cell
    }
}

impl Ctx<'_> {
    #[allow(clippy::too_many_arguments)]
    fn e_plane(
        &self,
        i: usize,
        h: &[Vec<f64>; 3],
        ex: &mut [f64],
        ey: &mut [f64],
        ez: &mut [f64],
        psi: &mut PlanePsi,
    ) {
        let (nx, ny, nz, sz, np) = (self.nx, self.ny, self.nz, self.sz, self.np);
        let base = i * np;
        let hx = &h[0][base..base + np];
        let hy = &h[1][base..base + np];
        let hz = &h[2][base..base + np];
        let (hym, hzm) = if i > 0 {
            (&h[1][base - np..base], &h[2][base - np..base])
        } else {
            (hy, hz)
        };
        let idx = &self.ids[0][base..base + np];
        let idy = &self.ids[1][base..base + np];
        let idz = &self.ids[2][base..base + np];
        let (ca, cb) = (self.ca, self.cb);
        let interior_x = i > 0 && i < nx;

        if i < nx {
            for j in 1..ny {
                let r = j * sz;
                let (exr, hzr, hzq, hyr, idr) = (
                    &mut ex[r..r + sz],
                    &hz[r..r + sz],
                    &hz[r - sz..r],
                    &hy[r..r + sz],
                    &idx[r..r + sz],
                );
                for k in 1..nz {
                    let id = idr[k] as usize;
                    let curl = (hzr[k] - hzq[k]) - (hyr[k] - hyr[k - 1]);
                    exr[k] = ca[id] * exr[k] + cb[id] * curl;
                }
            }
        }
        if interior_x {
            for j in 0..ny {
                let r = j * sz;
                let (eyr, hxr, hzr, hzmr, idr) = (
                    &mut ey[r..r + sz],
                    &hx[r..r + sz],
                    &hz[r..r + sz],
                    &hzm[r..r + sz],
                    &idy[r..r + sz],
                );
                for k in 1..nz {
                    let id = idr[k] as usize;
                    let curl = (hxr[k] - hxr[k - 1]) - (hzr[k] - hzmr[k]);
                    eyr[k] = ca[id] * eyr[k] + cb[id] * curl;
                }
            }
            for j in 1..ny {
                let r = j * sz;
                let (ezr, hyr, hymr, hxr, hxq, idr) = (
                    &mut ez[r..r + sz],
                    &hy[r..r + sz],
                    &hym[r..r + sz],
                    &hx[r..r + sz],
                    &hx[r - sz..r],
                    &idz[r..r + sz],
                );
                for k in 0..nz {
                    let id = idr[k] as usize;
                    let curl = (hyr[k] - hymr[k]) - (hxr[k] - hxq[k]);
                    ezr[k] = ca[id] * ezr[k] + cb[id] * curl;
                }
            }
        }

        // Magnetic walls: tangential H mirrors with odd symmetry.
        let upd = |f: &mut f64, id: u8, curl: f64| {
            let id = id as usize;
            *f = ca[id] * *f + cb[id] * curl;
        };
        if self.bnd.y_lo == Boundary::Pmc {
            if i < nx {
                for k in 1..nz {
                    upd(&mut ex[k], idx[k], 2.0 * hz[k] - (hy[k] - hy[k - 1]));
                }
            }
            if interior_x {
                for k in 0..nz {
                    upd(&mut ez[k], idz[k], (hy[k] - hym[k]) - 2.0 * hx[k]);
                }
            }
        }
        if self.bnd.y_hi == Boundary::Pmc {
            let r = ny * sz;
            if i < nx {
                for k in 1..nz {
                    let p = r + k;
                    upd(&mut ex[p], idx[p], -2.0 * hz[p - sz] - (hy[p] - hy[p - 1]));
                }
            }
            if interior_x {
                for k in 0..nz {
                    let p = r + k;
                    upd(&mut ez[p], idz[p], (hy[p] - hym[p]) + 2.0 * hx[p - sz]);
                }
            }
        }
        if self.bnd.z_lo == Boundary::Pmc {
            if i < nx {
                for j in 1..ny {
                    let p = j * sz;
                    upd(&mut ex[p], idx[p], (hz[p] - hz[p - sz]) - 2.0 * hy[p]);
                }
            }
            if interior_x {
                for j in 0..ny {
                    let p = j * sz;
                    upd(&mut ey[p], idy[p], 2.0 * hx[p] - (hz[p] - hzm[p]));
                }
            }
        }
        if self.bnd.z_hi == Boundary::Pmc {
            if i < nx {
                for j in 1..ny {
                    let p = j * sz + nz;
                    upd(&mut ex[p], idx[p], (hz[p] - hz[p - sz]) + 2.0 * hy[p - 1]);
                }
            }
            if interior_x {
                for j in 0..ny {
                    let p = j * sz + nz;
                    upd(&mut ey[p], idy[p], -2.0 * hx[p - 1] - (hz[p] - hzm[p]));
                }
            }
        }
        let x_pmc = (i == 0 && self.bnd.x_lo == Boundary::Pmc)
            || (i == nx && self.bnd.x_hi == Boundary::Pmc);
        if x_pmc {
            // On the low wall the outer H is the negated inner sample.
            let (dhz, dhy): (Box<dyn Fn(usize) -> f64>, Box<dyn Fn(usize) -> f64>) = if i == 0 {
                (Box::new(|p| 2.0 * hz[p]), Box::new(|p| 2.0 * hy[p]))
            } else {
                (Box::new(|p| -2.0 * hzm[p]), Box::new(|p| -2.0 * hym[p]))
            };
            for j in 0..ny {
                for k in 1..nz {
                    let p = j * sz + k;
                    upd(&mut ey[p], idy[p], (hx[p] - hx[p - 1]) - dhz(p));
                }
            }
            for j in 1..ny {
                for k in 0..nz {
                    let p = j * sz + k;
                    upd(&mut ez[p], idz[p], dhy(p) - (hx[p] - hx[p - sz]));
                }
            }
        }

        // Absorber corrections.
        let py = &self.pml[1];
        for (s, &j) in py.e_nodes.iter().enumerate() {
            let (b, a) = (py.e_b[s], py.e_a[s]);
            let r = j * sz;
            if i < nx {
                for k in 0..=nz {
                    let p = r + k;
                    let q = &mut psi.y1[s * sz + k];
                    *q = b * *q + a * (hz[p] - hz[p - sz]);
                    ex[p] += cb[idx[p] as usize] * *q;
                }
            }
            for k in 0..nz {
                let p = r + k;
                let q = &mut psi.y2[s * sz + k];
                *q = b * *q + a * (hx[p] - hx[p - sz]);
                ez[p] -= cb[idz[p] as usize] * *q;
            }
        }
        let pz = &self.pml[2];
        let nzs = pz.e_nodes.len();
        if nzs > 0 {
            for j in 0..=ny {
                let r = j * sz;
                for (s, &k) in pz.e_nodes.iter().enumerate() {
                    let (b, a) = (pz.e_b[s], pz.e_a[s]);
                    let p = r + k;
                    if i < nx {
                        let q = &mut psi.z1[j * nzs + s];
                        *q = b * *q + a * (hy[p] - hy[p - 1]);
                        ex[p] -= cb[idx[p] as usize] * *q;
                    }
                    if j < ny {
                        let q = &mut psi.z2[j * nzs + s];
                        *q = b * *q + a * (hx[p] - hx[p - 1]);
                        ey[p] += cb[idy[p] as usize] * *q;
                    }
                }
            }
        }
        let px = &self.pml[0];
        let s = px.e_slot[i];
        if s != NONE {
            let (b, a) = (px.e_b[s], px.e_a[s]);
            for j in 0..=ny {
                for k in 0..=nz {
                    let p = j * sz + k;
                    if j < ny {
                        let q = &mut psi.x1[p];
                        *q = b * *q + a * (hz[p] - hzm[p]);
                        ey[p] -= cb[idy[p] as usize] * *q;
                    }
                    if k < nz {
                        let q = &mut psi.x2[p];
                        *q = b * *q + a * (hy[p] - hym[p]);
                        ez[p] += cb[idz[p] as usize] * *q;
                    }
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn h_plane(
        &self,
        i: usize,
        e: &[Vec<f64>; 3],
        hx: &mut [f64],
        hy: &mut [f64],
        hz: &mut [f64],
        psi: &mut PlanePsi,
    ) {
        let (nx, ny, nz, sz, np) = (self.nx, self.ny, self.nz, self.sz, self.np);
        let db = self.db;
        let base = i * np;
        let ex = &e[0][base..base + np];
        let ey = &e[1][base..base + np];
        let ez = &e[2][base..base + np];
        let next = i < nx;
        let (eyn, ezn) = if next {
            (
                &e[1][base + np..base + 2 * np],
                &e[2][base + np..base + 2 * np],
            )
        } else {
            (ey, ez)
        };

        for j in 0..ny {
            let r = j * sz;
            let (hxr, ezr, ezs, eyr) = (
                &mut hx[r..r + sz],
                &ez[r..r + sz],
                &ez[r + sz..r + 2 * sz],
                &ey[r..r + sz],
            );
            for k in 0..nz {
                let curl = (ezs[k] - ezr[k]) - (eyr[k + 1] - eyr[k]);
                hxr[k] -= db * curl;
            }
        }
        if next {
            for j in 0..=ny {
                let r = j * sz;
                let (hyr, exr, ezr, eznr) = (
                    &mut hy[r..r + sz],
                    &ex[r..r + sz],
                    &ez[r..r + sz],
                    &ezn[r..r + sz],
                );
                for k in 0..nz {
                    let curl = (exr[k + 1] - exr[k]) - (eznr[k] - ezr[k]);
                    hyr[k] -= db * curl;
                }
            }
            for j in 0..ny {
                let r = j * sz;
                let (hzr, eyr, eynr, exr, exs) = (
                    &mut hz[r..r + sz],
                    &ey[r..r + sz],
                    &eyn[r..r + sz],
                    &ex[r..r + sz],
                    &ex[r + sz..r + 2 * sz],
                );
                for k in 0..=nz {
                    let curl = (eynr[k] - eyr[k]) - (exs[k] - exr[k]);
                    hzr[k] -= db * curl;
                }
            }
        }

        let py = &self.pml[1];
        for (s, &j) in py.h_nodes.iter().enumerate() {
            let (b, a) = (py.h_b[s], py.h_a[s]);
            let r = j * sz;
            for k in 0..nz {
                let p = r + k;
                let q = &mut psi.y1[s * sz + k];
                *q = b * *q + a * (ez[p + sz] - ez[p]);
                hx[p] -= db * *q;
            }
            if next {
                for k in 0..=nz {
                    let p = r + k;
                    let q = &mut psi.y2[s * sz + k];
                    *q = b * *q + a * (ex[p + sz] - ex[p]);
                    hz[p] += db * *q;
                }
            }
        }
        let pz = &self.pml[2];
        let nzs = pz.h_nodes.len();
        if nzs > 0 {
            for j in 0..=ny {
                let r = j * sz;
                for (s, &k) in pz.h_nodes.iter().enumerate() {
                    let (b, a) = (pz.h_b[s], pz.h_a[s]);
                    let p = r + k;
                    if j < ny {
                        let q = &mut psi.z1[j * nzs + s];
                        *q = b * *q + a * (ey[p + 1] - ey[p]);
                        hx[p] += db * *q;
                    }
                    if next {
                        let q = &mut psi.z2[j * nzs + s];
                        *q = b * *q + a * (ex[p + 1] - ex[p]);
                        hy[p] -= db * *q;
                    }
                }
            }
        }
        let px = &self.pml[0];
        if next {
            let s = px.h_slot[i];
            if s != NONE {
                let (b, a) = (px.h_b[s], px.h_a[s]);
                for j in 0..=ny {
                    for k in 0..=nz {
                        let p = j * sz + k;
                        if k < nz {
                            let q = &mut psi.x1[p];
                            *q = b * *q + a * (ezn[p] - ez[p]);
                            hy[p] += db * *q;
                        }
                        if j < ny {
                            let q = &mut psi.x2[p];
                            *q = b * *q + a * (eyn[p] - ey[p]);
                            hz[p] -= db * *q;
                        }
                    }
                }
            }
        }
    }
}
