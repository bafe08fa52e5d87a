//! Quasi-static microstrip analysis and synthesis (zero strip thickness, no
//! dispersion).
//!
//! Analysis uses the Hammerstad wide/narrow strip closed forms. Synthesis
//! starts from the Hammerstad-Jensen A/B branch estimate and then polishes the
//! width so that it is an exact inverse of [`microstrip_analyze`].

use std::f64::consts::PI;

use super::SubstrateSpec;
use crate::consts::ETA0;
use crate::error::{Error, Result};

/// Effective permittivity of a microstrip line of width `w` (quasi-static).
pub fn microstrip_eps_eff(w: f64, substrate: &SubstrateSpec) -> f64 {
    let er = substrate.eps_r;
    let u = w / substrate.height;
    let base = (er + 1.0) / 2.0;
    let slope = (er - 1.0) / 2.0;
    if u <= 1.0 {
        base + slope * ((1.0 + 12.0 / u).powf(-0.5) + 0.04 * (1.0 - u).powi(2))
    } else {
        base + slope * (1.0 + 12.0 / u).powf(-0.5)
    }
}

/// Characteristic impedance of a microstrip line of width `w`.
pub fn microstrip_analyze(w: f64, substrate: &SubstrateSpec) -> Result<f64> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::domain(format!(
            "strip width must be positive, got {w}"
        )));
    }
    let u = w / substrate.height;
    let ee = microstrip_eps_eff(w, substrate);
    let z = if u <= 1.0 {
        60.0 / ee.sqrt() * (8.0 / u + u / 4.0).ln()
    } else {
        ETA0 / (ee.sqrt() * (u + 1.393 + 0.667 * (u + 1.444).ln()))
    };
    Ok(z)
}

/// Closed-form width estimate (Hammerstad-Jensen A/B branches).
pub fn microstrip_width_estimate(z0: f64, substrate: &SubstrateSpec) -> f64 {
    let er = substrate.eps_r;
    let a = z0 / 60.0 * ((er + 1.0) / 2.0).sqrt() + (er - 1.0) / (er + 1.0) * (0.23 + 0.11 / er);
    let narrow = 8.0 * a.exp() / ((2.0 * a).exp() - 2.0);
    let u = if narrow < 2.0 {
        narrow
    } else {
        let b = 377.0 * PI / (2.0 * z0 * er.sqrt());
        2.0 / PI
            * (b - 1.0 - (2.0 * b - 1.0).ln()
                + (er - 1.0) / (2.0 * er) * ((b - 1.0).ln() + 0.39 - 0.61 / er))
    };
    u * substrate.height
}

/// Strip width giving characteristic impedance `z0` on `substrate`.
pub fn microstrip_synthesize(z0: f64, substrate: &SubstrateSpec) -> Result<f64> {
    if !(z0 > 0.0) || !z0.is_finite() {
        return Err(Error::domain(format!(
            "impedance must be positive, got {z0}"
        )));
    }
    let guess = microstrip_width_estimate(z0, substrate);
    let guess = if guess.is_finite() && guess > 0.0 {
        guess
    } else {
        substrate.height
    };

    // Z is strictly decreasing in w: bracket in log(w), then bisect.
    let f = |ln_w: f64| microstrip_analyze(ln_w.exp(), substrate).map(|z| z - z0);
    let mut lo = guess.ln() - 0.1;
    let mut hi = guess.ln() + 0.1;
    let mut expand = 0;
    while f(lo)? < 0.0 {
        lo -= 0.5;
        expand += 1;
        if expand > 200 {
            return Err(Error::domain(format!("cannot bracket width for {z0} ohm")));
        }
    }
    while f(hi)? > 0.0 {
        hi += 0.5;
        expand += 1;
        if expand > 200 {
            return Err(Error::domain(format!("cannot bracket width for {z0} ohm")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::MM;

    fn ro4003() -> SubstrateSpec {
        SubstrateSpec::new(3.55, 1.5 * MM, 0.0).unwrap()
    }

    #[test]
    fn estimate_matches_hand_evaluation() {
        let w = microstrip_width_estimate(50.0, &ro4003());
        assert!((w / MM - 3.355).abs() < 0.005, "{}", w / MM);
    }

    #[test]
    fn fifty_ohm_width() {
        let w = microstrip_synthesize(50.0, &ro4003()).unwrap();
        assert!((w / MM - 3.36).abs() < 0.03, "{}", w / MM);
        let z = microstrip_analyze(3.36 * MM, &ro4003()).unwrap();
        assert!((z - 50.0).abs() < 0.5, "{z}");
    }

    #[test]
    fn continuous_at_branch_point() {
        for er in [1.0, 2.2, 3.55, 6.15, 10.2] {
            let s = SubstrateSpec {
                eps_r: er,
                height: 1.0,
                loss_tangent: 0.0,
            };
            let below = microstrip_analyze(1.0 - 1e-9, &s).unwrap();
            let above = microstrip_analyze(1.0 + 1e-9, &s).unwrap();
            assert!(
                ((below - above) / above).abs() < 0.01,
                "er={er}: {below} vs {above}"
            );
        }
    }

    #[test]
    fn wide_strip_limit() {
        let s = ro4003();
        let mut prev = f64::INFINITY;
        for i in 0..60 {
            let w = 0.1 * MM * 1.25f64.powi(i);
            let z = microstrip_analyze(w, &s).unwrap();
            assert!(z < prev);
            prev = z;
        }
        assert!(prev < 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(microstrip_analyze(0.0, &ro4003()).is_err());
        assert!(microstrip_synthesize(-5.0, &ro4003()).is_err());
    }
}
