use nalgebra::{Matrix2, SymmetricEigen};
use num_complex::Complex64;
use patchkit::consts::{GHZ, MM};
use patchkit::coupling::{
    base_coupling, coupling_at_displacement, split_frequencies, surrogate_s11, CouplingLaw,
    MAX_COUPLING,
};
use patchkit::design::{
    design_patch, effective_permittivity, inset_distance, microstrip_analyze,
    microstrip_synthesize, patch_length, patch_width, DesignRequest,
};
use patchkit::geometry::{build_mono, default_board, rasterize, RasterOptions};
use patchkit::post::{bandwidth, linear_grid};
use patchkit::{CouplingParams, SParamSpectrum, SubstrateSpec};
use proptest::prelude::*;

fn substrate(eps_r: f64, h_mm: f64) -> SubstrateSpec {
    SubstrateSpec::new(eps_r, h_mm * MM, 0.0).unwrap()
}

/// Coupled LC tanks with unit inductances and mutual inductance `k`:
/// `det(diag(w1^2, w2^2) - w^2 [[1, k], [k, 1]]) = 0`, reduced to a symmetric
/// standard eigenproblem with `L^(-1/2)`.
fn circuit_split(f1: f64, f2: f64, k: f64) -> (f64, f64) {
    let l = Matrix2::new(1.0, k, k, 1.0);
    let e = SymmetricEigen::new(l);
    let inv_sqrt = e.eigenvectors
        * Matrix2::from_diagonal(&e.eigenvalues.map(|v| 1.0 / v.sqrt()))
        * e.eigenvectors.transpose();
    let d = Matrix2::new(f1 * f1, 0.0, 0.0, f2 * f2);
    let a = inv_sqrt * d * inv_sqrt;
    let ev = SymmetricEigen::new((a + a.transpose()) * 0.5).eigenvalues;
    let (x, y) = (ev[0].min(ev[1]), ev[0].max(ev[1]));
    (x.sqrt(), y.sqrt())
}

#[test]
fn split_example_against_circuit() {
    let (lo, hi) = split_frequencies(1.0 * GHZ, 1.0 * GHZ, 0.1).unwrap();
    let (olo, ohi) = circuit_split(1.0 * GHZ, 1.0 * GHZ, 0.1);
    assert!(((lo - olo) / olo).abs() < 1e-4);
    assert!(((hi - ohi) / ohi).abs() < 1e-4);
    assert!((lo / GHZ - 0.9535).abs() < 1e-4 * 0.9535);
    assert!((hi / GHZ - 1.0541).abs() < 1e-4 * 1.0541);
}

/// Edges snap to the nearest grid plane, so each moves by at most half a
/// cell: the area error is bounded by half the total edge length times the
/// cell and halves with every refinement.
#[test]
fn raster_area_converges_under_refinement() {
    let s = substrate(3.55, 1.5);
    let d = design_patch(&DesignRequest::new(5.8 * GHZ, s)).unwrap();
    let g = build_mono(&d, default_board(&d)).unwrap();
    let shape = g.stack.copper_shape(1).unwrap();
    let exact = shape.area();
    let edges: f64 = shape
        .add
        .iter()
        .chain(&shape.sub)
        .map(|r| 2.0 * (r.width() + r.height()))
        .sum();
    for cell in [1.0 * MM, 0.5 * MM, 0.25 * MM, 0.125 * MM] {
        let grid = rasterize(
            &g,
            &RasterOptions {
                cell,
                pml: 8,
                air_above: 2,
            },
        )
        .unwrap();
        let top = grid.sheets.iter().position(|sh| sh.k > 0).unwrap();
        let area = grid.board_copper_cells(top) as f64 * cell * cell;
        let err = (area - exact).abs();
        assert!(
            err <= 0.5 * edges * cell,
            "cell {cell}: error {err} above envelope"
        );
        if cell <= 0.25 * MM {
            assert!(
                err / exact < 0.05,
                "cell {cell}: relative error {}",
                err / exact
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn eps_eff_lies_between_mean_and_bulk(er in 1.5f64..12.0, h in 0.2f64..5.0, w in 0.5f64..80.0) {
        let e = effective_permittivity(er, h * MM, w * MM).unwrap();
        prop_assert!(e > (er + 1.0) / 2.0 && e < er);
        let wider = effective_permittivity(er, h * MM, 1.1 * w * MM).unwrap();
        prop_assert!(wider > e);
    }

    #[test]
    fn patch_dimensions_shrink_with_frequency(er in 1.5f64..12.0, h in 0.2f64..3.0, f in 1.0f64..8.0, r in 1.01f64..2.0) {
        let s = substrate(er, h);
        prop_assert!(patch_width(r * f * GHZ, er).unwrap() < patch_width(f * GHZ, er).unwrap());
        prop_assert!(patch_length(r * f * GHZ, &s).unwrap() < patch_length(f * GHZ, &s).unwrap());
    }

    #[test]
    fn frequency_scaling(f in 1.0f64..6.0, k in 1.1f64..2.0) {
        let s = substrate(3.55, 1.5);
        let a = design_patch(&DesignRequest::new(f * GHZ, s)).unwrap();
        let b = design_patch(&DesignRequest::new(k * f * GHZ, s)).unwrap();
        prop_assert!((b.lambda0 * k - a.lambda0).abs() < 1e-12 * a.lambda0);
        prop_assert!((b.width * k - a.width).abs() < 1e-12 * a.width);
        // The fringing extension does not scale with frequency.
        prop_assert!((b.length * k - a.length).abs() > 1e-9 * a.length);
        prop_assert!((b.length * k - a.length).abs() < 2.0 * (k + 1.0) * s.height);
    }

    #[test]
    fn inset_is_self_consistent(zp in 60.0f64..400.0, ratio in 0.05f64..0.95, l in 5.0f64..80.0) {
        let z = zp * ratio;
        let x0 = inset_distance(zp, z, l * MM).unwrap();
        prop_assert!(x0 > 0.0 && x0 < l * MM / 2.0);
        let back = zp * (std::f64::consts::PI * x0 / (l * MM)).cos().powi(2);
        prop_assert!(((back - z) / z).abs() < 1e-9);
    }

    #[test]
    fn design_invariants_hold(f in 1.0f64..10.0, er in 2.0f64..10.0, h in 0.5f64..3.0) {
        let d = design_patch(&DesignRequest::new(f * GHZ, substrate(er, h))).unwrap();
        prop_assert!(d.check_invariants().is_ok());
        prop_assert!(d.width > d.length && d.length > 0.0);
        prop_assert!(d.eps_eff > 1.0 && d.eps_eff <= er);
        prop_assert!(d.gap > 0.0 && d.feed_width > 0.0);
    }

    #[test]
    fn microstrip_round_trip(z in 25.0f64..120.0, er in 2.0f64..10.0, h in 0.2f64..3.0) {
        let s = substrate(er, h);
        let w = microstrip_synthesize(z, &s).unwrap();
        let back = microstrip_analyze(w, &s).unwrap();
        prop_assert!(((back - z) / z).abs() < 0.005);
    }

    #[test]
    fn higher_permittivity_narrows_trace(z in 25.0f64..120.0, er in 2.0f64..9.5, h in 0.2f64..3.0) {
        let lo = microstrip_synthesize(z, &substrate(er, h)).unwrap();
        let hi = microstrip_synthesize(z, &substrate(er + 0.5, h)).unwrap();
        prop_assert!(hi < lo);
    }

    #[test]
    fn impedance_falls_with_width(w in 0.05f64..50.0, er in 1.0f64..10.0) {
        let s = SubstrateSpec::new(er.max(1.0 + 1e-9), 1.5 * MM, 0.0).unwrap();
        let a = microstrip_analyze(w * MM, &s).unwrap();
        let b = microstrip_analyze(1.05 * w * MM, &s).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn base_coupling_range(f1 in 0.1f64..20.0, f2 in 0.1f64..20.0) {
        let k = base_coupling(f1 * GHZ, f2 * GHZ).unwrap();
        prop_assert!((0.0..2.0).contains(&k));
        prop_assert_eq!(k == 0.0, f1 == f2);
        prop_assert_eq!(base_coupling(f1, f1).unwrap(), 0.0);
    }

    #[test]
    fn displacement_law_is_monotone_and_linear(k0 in 0.0f64..1.9, alpha in 0.0f64..200.0, d in 0.0f64..0.02, dd in 0.0f64..0.01) {
        let a = coupling_at_displacement(k0, alpha, d);
        let b = coupling_at_displacement(k0, alpha, d + dd);
        prop_assert!(a.value >= 0.0 && b.value >= a.value);
        if !a.clamped {
            prop_assert!((a.value - k0 * alpha * d).abs() <= 1e-15 * (1.0 + k0 * alpha * d));
        } else {
            prop_assert_eq!(a.value, MAX_COUPLING);
        }
    }

    #[test]
    fn splits_repel_and_are_symmetric(f1 in 0.5f64..10.0, f2 in 0.5f64..10.0, k in 0.0f64..0.99) {
        let (lo, hi) = split_frequencies(f1 * GHZ, f2 * GHZ, k).unwrap();
        prop_assert!(lo <= f1.min(f2) * GHZ * (1.0 + 1e-12));
        prop_assert!(hi >= f1.max(f2) * GHZ * (1.0 - 1e-12));
        prop_assert_eq!(split_frequencies(f2 * GHZ, f1 * GHZ, k).unwrap(), (lo, hi));
    }

    #[test]
    fn splits_match_circuit_eigenproblem(f1 in 0.5f64..10.0, f2 in 0.5f64..10.0, k in 0.0f64..0.95) {
        let (lo, hi) = split_frequencies(f1 * GHZ, f2 * GHZ, k).unwrap();
        let (olo, ohi) = circuit_split(f1 * GHZ, f2 * GHZ, k);
        prop_assert!(((lo - olo) / olo).abs() < 1e-6, "{} {}", lo, olo);
        prop_assert!(((hi - ohi) / ohi).abs() < 1e-6, "{} {}", hi, ohi);
    }

    #[test]
    fn surrogate_is_passive_with_dips_at_splits(
        f1 in 1.0f64..4.0,
        ratio in 1.5f64..3.0,
        d in 0.0f64..0.008,
        q in 5.0f64..80.0,
        affine in any::<bool>(),
    ) {
        let mut p = CouplingParams::new(f1 * GHZ, f1 * ratio * GHZ);
        p.d = d;
        p.q1 = q;
        p.q2 = q;
        p.law = if affine { CouplingLaw::Affine } else { CouplingLaw::Linear };
        let grid = linear_grid(0.5 * GHZ, 14.0 * GHZ, 2701);
        let s = surrogate_s11(&p, &grid).unwrap();
        prop_assert!(s.max_magnitude() <= 1.0 + 1e-12);
        let k = p.coupling();
        let (lo, hi) = split_frequencies(p.f1, p.f2, k.value).unwrap();
        prop_assume!(!k.clamped && hi < 12.0 * GHZ);
        let step = grid[1] - grid[0];
        for target in [lo, hi] {
            let (f_min, _) = s.min_in(target - 0.1 * target, target + 0.1 * target).unwrap();
            prop_assert!((f_min - target).abs() <= step, "{} vs {}", f_min, target);
        }
    }

    #[test]
    fn lowering_threshold_never_widens_bands(
        poles in prop::collection::vec((1.0f64..9.0, 0.1f64..0.9), 1..4),
        t1 in -30.0f64..-1.0,
        dt in 0.0f64..15.0,
    ) {
        let freqs = linear_grid(0.5 * GHZ, 10.0 * GHZ, 801);
        let s11: Vec<Complex64> = freqs
            .iter()
            .map(|&f| {
                poles.iter().fold(Complex64::new(1.0, 0.0), |acc, (f0, w)| {
                    let x = Complex64::new(0.0, (f / GHZ - f0) / w);
                    acc * x / (1.0 + x)
                })
            })
            .collect();
        let s = SParamSpectrum::new(freqs, s11, 50.0).unwrap();
        let tight = bandwidth(&s, t1 - dt);
        let loose = bandwidth(&s, t1);
        for b in &tight.bands {
            prop_assert!(loose.bands.iter().any(|o| o.f_low <= b.f_low + 1e-6 && o.f_high >= b.f_high - 1e-6));
            prop_assert!(b.s11_min_db <= t1 - dt);
        }
        for w in loose.bands.windows(2) {
            prop_assert!(w[0].f_high < w[1].f_low);
        }
    }
}
