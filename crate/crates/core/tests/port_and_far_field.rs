use patchkit::consts::MM;
use patchkit::design::microstrip_analyze;
use patchkit::fdtd::{
    self, canonical, Boundaries, Boundary, GaussianPulse, PortSpec, SimulationConfig, Solver,
    SurfaceRecord, SurfaceSpec,
};
use patchkit::geometry::{Dielectric, MaterialGrid};
use patchkit::post::{dft, linear_grid, s11_spectrum};
use patchkit::SubstrateSpec;

const CELL: f64 = 0.5 * MM;
const SUB_K: usize = 3;
const STRIP: [usize; 2] = [14, 20];

fn line_grid(ny: usize, strip_end: usize) -> MaterialGrid {
    let b = Boundaries {
        z_lo: Boundary::Pec,
        ..Boundaries::all(Boundary::Pml)
    };
    let mut g = MaterialGrid::empty(34, ny, 24, CELL, b);
    g.fill(
        [0, 0, 0],
        [34, ny, SUB_K],
        Dielectric {
            eps_r: 4.4,
            loss_tangent: 0.0,
        },
    );
    g.add_sheet_box(SUB_K, [STRIP[0], 0], [STRIP[1], strip_end], "feed");
    g
}

fn port(z_ref: f64) -> PortSpec {
    PortSpec {
        i_lo: STRIP[0],
        i_hi: STRIP[1],
        k: SUB_K,
        j_source: 12,
        j_probe: 16,
        polarity: 1.0,
        z_ref,
    }
}

fn cfg() -> SimulationConfig {
    let mut c = SimulationConfig::new(CELL, GaussianPulse::covering(1e9, 6e9));
    c.pml_thickness = 8;
    c
}

#[test]
fn matched_line_reflects_little() {
    let p = port(50.0);
    let short = line_grid(60, 60);
    let long = line_grid(420, 420);
    let a = fdtd::run(&short, &cfg(), &p).unwrap();
    let b = fdtd::run(&long, &cfg(), &p).unwrap();
    assert!(a.termination.decayed() && b.termination.decayed());
    let freqs = linear_grid(1e9, 6e9, 51);
    let len = a.v.len().min(b.v.len());
    let mut a = a;
    let mut b = b;
    a.v.truncate(len);
    a.i.truncate(len);
    b.v.truncate(len);
    b.i.truncate(len);
    let s = s11_spectrum(&a, &b, &freqs).unwrap();
    let worst = s.mag_db().into_iter().fold(f64::MIN, f64::max);
    assert!(worst < -30.0, "line termination reflects {worst:.1} dB");

    // The port impedance agrees with the closed-form line impedance.
    let sub = SubstrateSpec::new(4.4, SUB_K as f64 * CELL, 0.0).unwrap();
    let z_line = microstrip_analyze((STRIP[1] - STRIP[0]) as f64 * CELL, &sub).unwrap();
    let f = [2e9, 3e9, 4e9];
    let v = dft(&b.v, b.dt, b.v_offset, &f);
    let i = dft(&b.i, b.dt, b.i_offset, &f);
    for (vf, i_f) in v.iter().zip(&i) {
        let z = (vf / i_f).re;
        assert!(
            (z / z_line - 1.0).abs() < 0.1,
            "line impedance {z:.1} vs {z_line:.1} ohm"
        );
    }
}

fn open_stub(end: usize) -> (Vec<f64>, Vec<num_complex::Complex64>) {
    let ny = end + 20;
    let ant = line_grid(ny, end);
    let p = port(50.0);
    let c = cfg();
    let r = fdtd::reference_run(&ant, &c, &p).unwrap();
    let a = fdtd::run(&ant, &c, &p).unwrap();
    let freqs = linear_grid(1e9, 4e9, 31);
    let s = s11_spectrum(&a, &r, &freqs).unwrap();
    (freqs, s.s11)
}

#[test]
fn open_stub_reflects_fully_and_doubling_only_delays() {
    let (freqs, short) = open_stub(40);
    let (_, long) = open_stub(64);
    for ((f, a), b) in freqs.iter().zip(&short).zip(&long) {
        assert!(
            (a.norm() - 1.0).abs() < 0.05,
            "|S11| = {:.3} at {f:e}",
            a.norm()
        );
        assert!(
            (a.norm() - b.norm()).abs() < 0.03,
            "{:.3} vs {:.3} at {f:e}",
            a.norm(),
            b.norm()
        );
    }
    // Extra line length adds a phase lag growing linearly with frequency.
    let lag: Vec<f64> = short
        .iter()
        .zip(&long)
        .map(|(a, b)| (a / b).arg())
        .collect();
    let mut unwrapped = vec![lag[0]];
    for w in lag.windows(2) {
        let mut d = w[1] - w[0];
        d -= (d / (2.0 * std::f64::consts::PI)).round() * 2.0 * std::f64::consts::PI;
        unwrapped.push(unwrapped.last().unwrap() + d);
    }
    let slope = (unwrapped[30] - unwrapped[0]) / (freqs[30] - freqs[0]);
    let mid = (unwrapped[15] - unwrapped[0]) / (freqs[15] - freqs[0]);
    assert!((mid / slope - 1.0).abs() < 0.05);
    // Round trip over 24 extra cells at roughly sqrt(3.3) times slower than light.
    let delay = slope / (2.0 * std::f64::consts::PI);
    let expect = 2.0 * 24.0 * CELL * 3.3f64.sqrt() / patchkit::consts::C0;
    assert!(
        (delay / expect - 1.0).abs() < 0.1,
        "delay {delay:e} vs {expect:e}"
    );
}

fn element(
    grid: &MaterialGrid,
    at: [usize; 3],
    box_: SurfaceSpec,
    f: f64,
) -> patchkit::FarFieldPattern {
    canonical::current_element(grid, at, box_, f).unwrap()
}

#[test]
fn short_dipole_pattern() {
    let p = canonical::short_dipole().unwrap();
    let (d, theta, _) = p.peak();
    let d_dbi = 10.0 * d.log10();
    assert!((d_dbi - 1.76).abs() <= 0.3, "peak {d_dbi:.2} dBi");
    assert!((theta - 90.0).abs() <= 10.0, "peak at theta {theta}");
    let (axis, _) = p.at(0.0, 0.0).unwrap();
    assert!(axis < 1e-2 * d, "axial level {axis:e}");
    let (axis, _) = p.at(180.0, 0.0).unwrap();
    assert!(axis < 1e-2 * d, "axial level {axis:e}");
    let ratio = p.radiated_power / p.surface_power;
    assert!((ratio - 1.0).abs() < 0.02, "far field / flux = {ratio:.4}");
    assert!((p.normalization() - 1.0).abs() < 1e-3);
}

#[test]
fn monopole_on_ground_uses_image() {
    let b = Boundaries {
        z_lo: Boundary::Pec,
        ..Boundaries::all(Boundary::Pml)
    };
    let g = MaterialGrid::empty(50, 50, 35, 1.0 * MM, b);
    let spec = SurfaceSpec {
        lo: [15, 15, 0],
        hi: [35, 35, 20],
        ground_image: true,
        open_below: 0,
    };
    let p = element(&g, [25, 25, 0], spec, 7.5e9);
    let (d, theta, _) = p.peak();
    let d_dbi = 10.0 * d.log10();
    assert!((d_dbi - 4.77).abs() <= 0.4, "peak {d_dbi:.2} dBi");
    assert!(theta <= 90.0 && theta >= 70.0, "peak at theta {theta}");
    let below = p.at(120.0, 0.0).unwrap().0;
    assert_eq!(below, 0.0);
    let ratio = p.radiated_power / p.surface_power;
    assert!((ratio - 1.0).abs() < 0.03, "far field / flux = {ratio:.4}");
}

#[test]
fn open_box_and_image_errors() {
    let g = MaterialGrid::empty(40, 40, 40, 1.0 * MM, Boundaries::all(Boundary::Pml));
    let c = SimulationConfig::new(1.0 * MM, GaussianPulse::covering(5e9, 10e9));
    let s = Solver::new(&g, &c).unwrap();
    let image = SurfaceSpec {
        lo: [15, 15, 0],
        hi: [25, 25, 25],
        ground_image: true,
        open_below: 0,
    };
    assert!(matches!(
        SurfaceRecord::new(&image, &s, &[7e9]),
        Err(patchkit::Error::OpenSurface(_))
    ));
    let close = SurfaceSpec {
        lo: [12, 15, 15],
        hi: [25, 25, 25],
        ground_image: false,
        open_below: 0,
    };
    assert!(matches!(
        SurfaceRecord::new(&close, &s, &[7e9]),
        Err(patchkit::Error::Domain(_))
    ));
}

#[test]
fn open_band_trims_only_side_faces() {
    let b = Boundaries {
        z_lo: Boundary::Pec,
        ..Boundaries::all(Boundary::Pml)
    };
    let g = MaterialGrid::empty(50, 50, 35, 1.0 * MM, b);
    let c = SimulationConfig::new(1.0 * MM, GaussianPulse::covering(5e9, 10e9));
    let s = Solver::new(&g, &c).unwrap();
    let spec = SurfaceSpec {
        lo: [15, 15, 0],
        hi: [35, 35, 20],
        ground_image: true,
        open_below: 3,
    };
    let rec = SurfaceRecord::new(&spec, &s, &[7e9]).unwrap();
    assert_eq!(rec.faces.len(), 5);
    for f in &rec.faces {
        let z_extent = match f.axis {
            0 => (f.v0, f.nv),
            1 => (f.u0, f.nu),
            _ => (0, 20),
        };
        let expect = if f.axis == 2 { (0, 20) } else { (3, 17) };
        assert_eq!(z_extent, expect, "axis {}", f.axis);
    }
    let shut = SurfaceSpec {
        open_below: 20,
        ..spec
    };
    assert!(matches!(
        SurfaceRecord::new(&shut, &s, &[7e9]),
        Err(patchkit::Error::OpenSurface(_))
    ));

    // A monopole's field near the floor carries little of the pattern.
    let p = element(
        &g,
        [25, 25, 0],
        SurfaceSpec {
            open_below: 1,
            ..spec
        },
        7.5e9,
    );
    let d_dbi = 10.0 * p.peak().0.log10();
    assert!((d_dbi - 4.77).abs() <= 0.5, "peak {d_dbi:.2} dBi");
}
