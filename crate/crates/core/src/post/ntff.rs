use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::consts::{C0, ETA0};
use crate::error::{Error, Result};
use crate::fdtd::SurfaceRecord;

/// Radiated power may exceed accepted power by this fraction before it is
/// treated as an accounting error.
pub const ENERGY_TOLERANCE: f64 = 0.05;
/// Floor used when writing zero directivity in decibels.
const DB_FLOOR: f64 = -120.0;

type C = Complex64;

/// Directivity and gain on a regular `(theta, phi)` grid. Samples are stored
/// theta-major: `index = it * phi_deg.len() + ip`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern {
    pub freq: f64,
    pub theta_deg: Vec<f64>,
    pub phi_deg: Vec<f64>,
    /// Linear directivity.
    pub directivity: Vec<f64>,
    /// Linear IEEE gain: directivity times radiation efficiency.
    pub gain: Vec<f64>,
    pub radiated_power: f64,
    pub accepted_power: f64,
    /// Net power leaving the recording surface.
    pub surface_power: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiency {
    pub linear: f64,
    pub db: f64,
}

pub fn efficiency_to_db(eff: f64) -> f64 {
    10.0 * eff.log10()
}

pub fn db_to_efficiency(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn to_db(x: f64) -> f64 {
    if x > 0.0 {
        (10.0 * x.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Radiated over accepted power.
pub fn radiation_efficiency(pattern: &FarFieldPattern) -> Result<Efficiency> {
    let (rad, acc) = (pattern.radiated_power, pattern.accepted_power);
    if !(rad > 0.0 && acc > 0.0) {
        return Err(Error::domain(
            "radiated and accepted power must be positive",
        ));
    }
    if rad > acc * (1.0 + ENERGY_TOLERANCE) {
        return Err(Error::EnergyAccounting {
            radiated: rad,
            accepted: acc,
        });
    }
    let linear = (rad / acc).min(1.0);
    Ok(Efficiency {
        linear,
        db: efficiency_to_db(linear),
    })
}

impl FarFieldPattern {
    fn weights(&self) -> Vec<f64> {
        let nt = self.theta_deg.len();
        let dth = (self.theta_deg[1] - self.theta_deg[0]).to_radians();
        let dph = 2.0 * PI / self.phi_deg.len() as f64;
        self.theta_deg
            .iter()
            .enumerate()
            .map(|(it, t)| {
                let end = if it == 0 || it == nt - 1 { 0.5 } else { 1.0 };
                end * t.to_radians().sin() * dth * dph
            })
            .collect()
    }

    /// Quadrature of `D / 4 pi` over the sphere; 1 for a normalized pattern.
    pub fn normalization(&self) -> f64 {
        let w = self.weights();
        let np = self.phi_deg.len();
        self.directivity
            .iter()
            .enumerate()
            .map(|(n, d)| d * w[n / np])
            .sum::<f64>()
            / (4.0 * PI)
    }

    pub fn directivity_dbi(&self) -> Vec<f64> {
        self.directivity.iter().map(|&d| to_db(d)).collect()
    }

    /// Empty when the pattern has no positive reference power.
    pub fn gain_dbi(&self) -> Vec<f64> {
        self.gain.iter().map(|&g| to_db(g)).collect()
    }

    /// Peak directivity (linear) and its direction in degrees.
    pub fn peak(&self) -> (f64, f64, f64) {
        let np = self.phi_deg.len();
        let (n, d) = self
            .directivity
            .iter()
            .enumerate()
            .fold(
                (0, f64::MIN),
                |best, (n, &d)| if d > best.1 { (n, d) } else { best },
            );
        (d, self.theta_deg[n / np], self.phi_deg[n % np])
    }

    pub fn at(&self, theta_deg: f64, phi_deg: f64) -> Option<(f64, f64)> {
        let it = self
            .theta_deg
            .iter()
            .position(|t| (t - theta_deg).abs() < 1e-9)?;
        let ip = self
            .phi_deg
            .iter()
            .position(|p| (p - phi_deg).abs() < 1e-9)?;
        let n = it * self.phi_deg.len() + ip;
        Some((
            self.directivity[n],
            self.gain.get(n).copied().unwrap_or(f64::NAN),
        ))
    }

    /// Principal-plane cut through `phi_deg` and `phi_deg + 180`, as
    /// `(angle_deg, directivity_dbi, gain_dbi)` with angle in `[-180, 180]`;
    /// negative angles lie on the opposite half plane.
    pub fn cut(&self, phi_deg: f64) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        let opposite = (phi_deg + 180.0) % 360.0;
        for t in self.theta_deg.iter().rev() {
            if *t > 0.0 {
                if let Some((d, g)) = self.at(*t, opposite) {
                    out.push((-t, to_db(d), to_db(g)));
                }
            }
        }
        for t in &self.theta_deg {
            if let Some((d, g)) = self.at(*t, phi_deg) {
                out.push((*t, to_db(d), to_db(g)));
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta_deg,phi_deg,directivity_dbi,gain_dbi\n");
        let np = self.phi_deg.len();
        for (n, d) in self.directivity.iter().enumerate() {
            let gain = self
                .gain
                .get(n)
                .map(|g| format!("{:.6}", to_db(*g)))
                .unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{:.6},{gain}",
                self.theta_deg[n / np],
                self.phi_deg[n % np],
                to_db(*d)
            );
        }
        s
    }
}

/// Equivalent currents of one face (or its image) with the coordinates of
/// its cell centers relative to the phase reference.
struct Sheet {
    axis: usize,
    pa: f64,
    pb: Vec<f64>,
    pc: Vec<f64>,
    j: Vec<[C; 3]>,
    m: Vec<[C; 3]>,
}

fn sheets(surface: &SurfaceRecord, fi: usize) -> Vec<Sheet> {
    let spec = surface.spec;
    let h = surface.cell;
    let center: Vec<f64> = (0..3)
        .map(|a| {
            if a == 2 && spec.ground_image {
                0.0
            } else {
                0.5 * (spec.lo[a] + spec.hi[a]) as f64 * h
            }
        })
        .collect();
    let mut out = Vec::new();
    for face in &surface.faces {
        let (a, b, c) = (face.axis, (face.axis + 1) % 3, (face.axis + 2) % 3);
        let cells = face.nu * face.nv;
        let off = fi * cells;
        let mut j = Vec::with_capacity(cells);
        let mut m = Vec::with_capacity(cells);
        for q in 0..cells {
            let n = face.normal;
            // J = n x H, M = -n x E with n = normal * a-hat.
            let mut jv = [C::new(0.0, 0.0); 3];
            jv[c] = n * face.hb[off + q];
            jv[b] = -n * face.hc[off + q];
            let mut mv = [C::new(0.0, 0.0); 3];
            mv[c] = -n * face.eb[off + q];
            mv[b] = n * face.ec[off + q];
            j.push(jv);
            m.push(mv);
        }
        let sheet = Sheet {
            axis: a,
            pa: face.node as f64 * h - center[a],
            pb: (0..face.nu)
                .map(|u| (face.u0 + u) as f64 * h + 0.5 * h - center[b])
                .collect(),
            pc: (0..face.nv)
                .map(|v| (face.v0 + v) as f64 * h + 0.5 * h - center[c])
                .collect(),
            j,
            m,
        };
        if spec.ground_image {
            // Mirror in the conducting floor z = 0.
            let flip = |v: &mut Vec<f64>| v.iter_mut().for_each(|x| *x = -*x);
            let mut img = Sheet {
                axis: a,
                pa: sheet.pa,
                pb: sheet.pb.clone(),
                pc: sheet.pc.clone(),
                j: sheet.j.iter().map(|v| [-v[0], -v[1], v[2]]).collect(),
                m: sheet.m.iter().map(|v| [v[0], v[1], -v[2]]).collect(),
            };
            match (a, b, c) {
                (2, _, _) => img.pa = -img.pa,
                (_, 2, _) => flip(&mut img.pb),
                _ => flip(&mut img.pc),
            }
            out.push(img);
        }
        out.push(sheet);
    }
    out
}

/// Far-field transform of the recorded surface at `freq` on a grid of
/// `step_deg` degrees. Without `accepted_power` the net surface flux is used,
/// which makes the efficiency a check of the transform itself.
pub fn ntff(
    surface: &SurfaceRecord,
    freq: f64,
    accepted_power: Option<f64>,
    step_deg: f64,
) -> Result<FarFieldPattern> {
    let fi = surface
        .freqs
        .iter()
        .position(|f| (f - freq).abs() <= 1e-9 * freq)
        .ok_or_else(|| Error::Mismatch(format!("surface was not recorded at {freq:e} Hz")))?;
    let expected = if surface.spec.ground_image { 5 } else { 6 };
    if surface.faces.len() != expected {
        return Err(Error::OpenSurface(format!(
            "{} faces recorded, {expected} needed",
            surface.faces.len()
        )));
    }
    if !(step_deg > 0.0) || (180.0 / step_deg).fract().abs() > 1e-9 {
        return Err(Error::domain("angular step must divide 180 degrees"));
    }
    let nt = (180.0 / step_deg).round() as usize + 1;
    let np = (360.0 / step_deg).round() as usize;
    let theta_deg: Vec<f64> = (0..nt).map(|i| i as f64 * step_deg).collect();
    let phi_deg: Vec<f64> = (0..np).map(|i| i as f64 * step_deg).collect();

    let k = 2.0 * PI * freq / C0;
    let sheets = sheets(surface, fi);
    let da = surface.cell * surface.cell;
    let upper_only = surface.spec.ground_image;

    let u: Vec<f64> = (0..nt * np)
        .into_par_iter()
        .map(|n| {
            let th = theta_deg[n / np].to_radians();
            let ph = phi_deg[n % np].to_radians();
            if upper_only && th > 0.5 * PI + 1e-12 {
                return 0.0;
            }
            let (st, ct) = th.sin_cos();
            let (sp, cp) = ph.sin_cos();
            let r = [st * cp, st * sp, ct];
            let mut nv = [C::new(0.0, 0.0); 3];
            let mut lv = [C::new(0.0, 0.0); 3];
            for s in &sheets {
                let (a, b, c) = (s.axis, (s.axis + 1) % 3, (s.axis + 2) % 3);
                let pha = C::from_polar(1.0, k * r[a] * s.pa);
                let phc: Vec<C> =
                    s.pc.iter()
                        .map(|x| C::from_polar(1.0, k * r[c] * x))
                        .collect();
                let nc = s.pc.len();
                for (iu, xb) in s.pb.iter().enumerate() {
                    let mut sj = [C::new(0.0, 0.0); 3];
                    let mut sm = [C::new(0.0, 0.0); 3];
                    let row = iu * nc;
                    for (iv, p) in phc.iter().enumerate() {
                        let jq = &s.j[row + iv];
                        let mq = &s.m[row + iv];
                        for d in 0..3 {
                            sj[d] += jq[d] * p;
                            sm[d] += mq[d] * p;
                        }
                    }
                    let w = pha * C::from_polar(1.0, k * r[b] * xb);
                    for d in 0..3 {
                        nv[d] += sj[d] * w;
                        lv[d] += sm[d] * w;
                    }
                }
            }
            let n_th = nv[0] * ct * cp + nv[1] * ct * sp - nv[2] * st;
            let n_ph = -nv[0] * sp + nv[1] * cp;
            let l_th = lv[0] * ct * cp + lv[1] * ct * sp - lv[2] * st;
            let l_ph = -lv[0] * sp + lv[1] * cp;
            let e1 = (l_ph + ETA0 * n_th) * da;
            let e2 = (l_th - ETA0 * n_ph) * da;
            k * k / (32.0 * PI * PI * ETA0) * (e1.norm_sqr() + e2.norm_sqr())
        })
        .collect();

    let mut pattern = FarFieldPattern {
        freq,
        theta_deg,
        phi_deg,
        directivity: Vec::new(),
        gain: Vec::new(),
        radiated_power: 0.0,
        accepted_power: 0.0,
        surface_power: surface.outward_flux(fi),
        warnings: Vec::new(),
    };
    let w = pattern.weights();
    let prad: f64 = u.iter().enumerate().map(|(n, x)| x * w[n / np]).sum();
    if !(prad > 0.0) {
        return Err(Error::domain("no power reaches the far field"));
    }
    pattern.radiated_power = prad;
    pattern.accepted_power = accepted_power.unwrap_or(pattern.surface_power);
    pattern.directivity = u.iter().map(|x| 4.0 * PI * x / prad).collect();
    if !(pattern.accepted_power > 0.0) {
        pattern
            .warnings
            .push("accepted power is not positive; gain unavailable".into());
        return Ok(pattern);
    }
    let eff = radiation_efficiency(&pattern)?;
    if prad > pattern.accepted_power {
        pattern.warnings.push(format!(
            "radiated power exceeds accepted power by {:.2}%; efficiency capped at 1",
            100.0 * (prad / pattern.accepted_power - 1.0)
        ));
    }
    pattern.gain = pattern.directivity.iter().map(|d| d * eff.linear).collect();
    Ok(pattern)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn efficiency_db_pairs() {
        assert!((db_to_efficiency(-1.5) - 0.708).abs() < 1e-3);
        assert!((db_to_efficiency(-1.3) - 0.741).abs() < 1e-3);
        assert!((efficiency_to_db(0.708) + 1.5).abs() < 0.01);
    }

    fn flat(rad: f64, acc: f64) -> FarFieldPattern {
        FarFieldPattern {
            freq: 1e9,
            theta_deg: vec![0.0, 90.0, 180.0],
            phi_deg: vec![0.0, 180.0],
            directivity: vec![1.0; 6],
            gain: vec![1.0; 6],
            radiated_power: rad,
            accepted_power: acc,
            surface_power: acc,
            warnings: Vec::new(),
        }
    }

    #[test]
    fn efficiency_accounting() {
        let e = radiation_efficiency(&flat(0.7, 1.0)).unwrap();
        assert!((e.linear - 0.7).abs() < 1e-12);
        assert!(matches!(
            radiation_efficiency(&flat(2.0, 1.0)),
            Err(Error::EnergyAccounting { .. })
        ));
        assert!(radiation_efficiency(&flat(0.0, 1.0)).is_err());
    }

    #[test]
    fn isotropic_normalization() {
        let step = 2.0;
        let nt = 91;
        let np = 180;
        let p = FarFieldPattern {
            freq: 1e9,
            theta_deg: (0..nt).map(|i| i as f64 * step).collect(),
            phi_deg: (0..np).map(|i| i as f64 * step).collect(),
            directivity: vec![1.0; nt * np],
            gain: vec![1.0; nt * np],
            radiated_power: 1.0,
            accepted_power: 1.0,
            surface_power: 1.0,
            warnings: Vec::new(),
        };
        assert!((p.normalization() - 1.0).abs() < 1e-3);
        let cut = p.cut(90.0);
        assert_eq!(cut.len(), 2 * nt - 1);
        assert_eq!(cut[0].0, -180.0);
    }
}
