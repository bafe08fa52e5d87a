use std::f64::consts::PI;

use num_complex::Complex64;
use patchkit::consts::{C0, MM};
use patchkit::fdtd::{canonical, Boundaries, Boundary, GaussianPulse, SimulationConfig, Solver};
use patchkit::geometry::{Dielectric, MaterialGrid};
use patchkit::post::dft;

fn config(cell: f64, pulse: GaussianPulse) -> SimulationConfig {
    SimulationConfig::new(cell, pulse)
}

fn drive(
    grid: &MaterialGrid,
    cfg: &SimulationConfig,
    axis: usize,
    src: &[[usize; 3]],
    probes: &[[usize; 3]],
    steps: usize,
) -> (f64, Vec<Vec<f64>>) {
    canonical::drive(grid, cfg, axis, src, probes, steps).unwrap()
}

#[test]
fn pec_cavity_te101() {
    let peak = canonical::cavity_peak().unwrap();
    let analytic = 0.5 * C0 * ((1.0 / 0.030f64).powi(2) + (1.0 / 0.015f64).powi(2)).sqrt();
    let err = (peak - analytic).abs() / analytic;
    assert!(
        err < 0.02,
        "peak {peak} vs {analytic} ({:.3}%)",
        100.0 * err
    );
}

#[test]
fn pml_normal_incidence_reflection() {
    let worst = canonical::absorber_reflection_db().unwrap();
    assert!(worst < -40.0, "reflection {worst:.1} dB");
}

#[test]
fn on_axis_dispersion() {
    let err = canonical::phase_velocity_error(15.0).unwrap();
    assert!(err < 0.01, "phase velocity error {:.3}%", 100.0 * err);
    // Yee theory for this Courant number predicts about 0.48 %.
    assert!(err > 0.002);
}

fn open_box(n: usize, cell: f64) -> MaterialGrid {
    MaterialGrid::empty(n, n, n, cell, Boundaries::all(Boundary::Pml))
}

#[test]
fn causality_of_point_source() {
    let cell = 1.0 * MM;
    let n = 40;
    let grid = open_box(n, cell);
    let cfg = config(cell, GaussianPulse::covering(2e9, 18e9));
    let mut s = Solver::new(&grid, &cfg).unwrap();
    let dt = s.dt();
    let c = n / 2;
    for step in 0..45 {
        s.update_h();
        s.update_e();
        let t = (step + 1) as f64 * dt;
        s.add_e(2, [c, c, c], cfg.source.value(t));
        let front = C0 * t / cell + 3.0;
        let (mut inside, mut outside) = (0.0f64, 0.0f64);
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    let r = [i, j, k]
                        .iter()
                        .map(|&x| (x as f64 - c as f64).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    let m = (0..3)
                        .map(|a| s.e_at(a, [i, j, k]).abs())
                        .fold(0.0, f64::max);
                    if r > front {
                        outside = outside.max(m);
                    } else {
                        inside = inside.max(m);
                    }
                }
            }
        }
        assert!(
            outside <= 1e-4 * inside,
            "step {step}: {outside:e} beyond r = {front:.1} cells, peak {inside:e}"
        );
    }
}

#[test]
fn energy_does_not_grow_after_source() {
    let cell = 1.0 * MM;
    let grid = open_box(36, cell);
    let cfg = config(cell, GaussianPulse::covering(3e9, 15e9));
    let mut s = Solver::new(&grid, &cfg).unwrap();
    let dt = s.dt();
    let end = (cfg.source.duration() / dt).ceil() as usize;
    let mut last = f64::INFINITY;
    let mut first = 0.0;
    for n in 0..end + 800 {
        s.update_h();
        s.update_e();
        s.add_e(2, [18, 18, 18], cfg.source.value((n + 1) as f64 * dt));
        if n >= end && (n - end) % 20 == 0 {
            let w = s.field_energy();
            if n == end {
                first = w;
            }
            assert!(
                w <= last * (1.0 + 1e-6),
                "energy grew at step {n}: {w:e} > {last:e}"
            );
            last = w;
        }
    }
    assert!(
        last < 1e-3 * first,
        "absorbers should drain the box: {last:e} vs {first:e}"
    );
}

#[test]
fn reciprocity_in_empty_grid() {
    let cell = 1.0 * MM;
    let grid = open_box(30, cell);
    let cfg = config(cell, GaussianPulse::covering(2e9, 14e9));
    let a = [12, 14, 15];
    let b = [18, 16, 13];
    let (_, ab) = drive(&grid, &cfg, 2, &[a], &[b], 400);
    let (_, ba) = drive(&grid, &cfg, 2, &[b], &[a], 400);
    let peak = ab[0].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = ab[0]
        .iter()
        .zip(&ba[0])
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(diff <= 1e-12 * peak, "difference {diff:e} vs peak {peak:e}");
}

#[test]
fn long_run_stays_finite() {
    let cell = 1.0 * MM;
    let mut grid = MaterialGrid::empty(
        20,
        18,
        16,
        cell,
        Boundaries {
            x_lo: Boundary::Pml,
            x_hi: Boundary::Pmc,
            y_lo: Boundary::Pec,
            y_hi: Boundary::Pml,
            z_lo: Boundary::Pec,
            z_hi: Boundary::Pml,
        },
    );
    grid.fill(
        [0, 0, 0],
        [20, 18, 3],
        Dielectric {
            eps_r: 4.4,
            loss_tangent: 0.02,
        },
    );
    grid.add_sheet_box(3, [4, 4], [9, 9], "patch");
    let mut cfg = config(cell, GaussianPulse::covering(2e9, 12e9));
    cfg.pml_thickness = 8;
    let (_, rec) = drive(&grid, &cfg, 2, &[[6, 6, 1]], &[[7, 7, 1]], 10_000);
    assert!(rec[0].iter().all(|x| x.is_finite()));
}

#[test]
fn worker_count_does_not_change_results() {
    let cell = 1.0 * MM;
    let mut grid = open_box(28, cell);
    grid.fill(
        [0, 0, 0],
        [28, 28, 12],
        Dielectric {
            eps_r: 3.55,
            loss_tangent: 0.01,
        },
    );
    grid.add_sheet_box(12, [10, 10], [18, 20], "patch");
    let cfg = config(cell, GaussianPulse::covering(2e9, 14e9));
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                drive(
                    &grid,
                    &cfg,
                    2,
                    &[[14, 14, 6]],
                    &[[16, 12, 8], [3, 3, 20]],
                    300,
                )
                .1
            })
    };
    let one = run(1);
    let three = run(3);
    for (a, b) in one.iter().zip(&three) {
        assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    assert!(one[0].iter().any(|x| *x != 0.0));
}

#[test]
fn dft_of_solver_record_matches_direct_sum() {
    // Spot check of the transform on a short record.
    let x = [0.0, 1.0, 0.5, -0.25];
    let f = 3e9;
    let dt = 1e-11;
    let got = dft(&x, dt, 1.0, &[f])[0];
    let mut want = Complex64::new(0.0, 0.0);
    for (n, v) in x.iter().enumerate() {
        want += Complex64::from_polar(*v * dt, -2.0 * PI * f * (n as f64 + 1.0) * dt);
    }
    assert!((got - want).norm() < 1e-24);
}
