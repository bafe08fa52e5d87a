//! Displacement-controlled coupling between two stacked patch resonators and
//! a two-pole surrogate reflection model built on it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::post::spectrum::check_grid;
use crate::post::SParamSpectrum;

/// Largest coupling coefficient reported before clamping.
pub const MAX_COUPLING: f64 = 0.999;

/// Default displacement sensitivity, 1/m.
pub const DEFAULT_ALPHA: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingLaw {
    /// `K(d) = K0 * alpha * d`
    #[default]
    Linear,
    /// `K(d) = K0 * (1 + alpha * d)`
    Affine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    /// Uncoupled resonance of the first patch layer, Hz.
    pub f1: f64,
    /// Uncoupled resonance of the second patch layer, Hz.
    pub f2: f64,
    /// Displacement sensitivity, 1/m.
    pub alpha: f64,
    /// Displacement between the patch centers, m.
    pub d: f64,
    pub q1: f64,
    pub q2: f64,
    pub law: CouplingLaw,
}

impl CouplingParams {
    pub fn new(f1: f64, f2: f64) -> Self {
        CouplingParams {
            f1,
            f2,
            alpha: DEFAULT_ALPHA,
            d: 0.0,
            q1: 30.0,
            q2: 30.0,
            law: CouplingLaw::Linear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("f1", self.f1),
            ("f2", self.f2),
            ("q1", self.q1),
            ("q2", self.q2),
        ] {
            if !(v > 0.0) || v.is_nan() {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::domain(format!(
                "alpha must be non-negative, got {}",
                self.alpha
            )));
        }
        if !self.d.is_finite() {
            return Err(Error::domain("displacement must be finite"));
        }
        Ok(())
    }

    pub fn delta_f(&self) -> f64 {
        self.f1 - self.f2
    }

    pub fn f_mid(&self) -> f64 {
        0.5 * (self.f1 + self.f2)
    }

    pub fn k0(&self) -> f64 {
        base_coupling(self.f1, self.f2).unwrap_or(0.0)
    }

    pub fn coupling(&self) -> Coupling {
        let k0 = self.k0();
        match self.law {
            CouplingLaw::Linear => coupling_at_displacement(k0, self.alpha, self.d),
            CouplingLaw::Affine => clamp_coupling(k0 * (1.0 + self.alpha * self.d.abs())),
        }
    }
}

/// Coupling coefficient after clamping to `[0, MAX_COUPLING]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub value: f64,
    pub clamped: bool,
}

fn clamp_coupling(raw: f64) -> Coupling {
    if raw < 0.0 {
        Coupling {
            value: 0.0,
            clamped: true,
        }
    } else if raw > MAX_COUPLING {
        Coupling {
            value: MAX_COUPLING,
            clamped: true,
        }
    } else {
        Coupling {
            value: raw,
            clamped: false,
        }
    }
}

/// Relative detuning `|f1 - f2| / ((f1 + f2) / 2)`.
pub fn base_coupling(f1: f64, f2: f64) -> Result<f64> {
    if !(f1 > 0.0 && f2 > 0.0) {
        return Err(Error::domain(format!(
            "resonances must be positive, got {f1}, {f2}"
        )));
    }
    Ok((f1 - f2).abs() / (0.5 * (f1 + f2)))
}

/// `K(d) = k0 * alpha * |d|`, clamped into `[0, 1)`.
pub fn coupling_at_displacement(k0: f64, alpha: f64, d: f64) -> Coupling {
    clamp_coupling(k0 * alpha * d.abs())
}

/// Eigenfrequencies of two coupled resonators, ascending.
///
/// Solves `(f^2 - f1^2)(f^2 - f2^2) = k^2 f^4`, the characteristic equation of
/// two LC tanks joined by a mutual inductance (or capacitance) with coupling
/// coefficient `k`. Identical tanks split to `f0 / sqrt(1 +- k)`.
pub fn split_frequencies(f1: f64, f2: f64, k: f64) -> Result<(f64, f64)> {
    if !(f1 > 0.0 && f2 > 0.0) {
        return Err(Error::domain(format!(
            "resonances must be positive, got {f1}, {f2}"
        )));
    }
    if !(k >= 0.0) {
        return Err(Error::domain(format!(
            "coupling must be non-negative, got {k}"
        )));
    }
    if k >= 1.0 {
        return Err(Error::OverCoupled(k));
    }
    let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
    if k == 0.0 {
        return Ok((lo, hi));
    }
    // (1 - k^2) x^2 - (a + b) x + a b = 0 with x = f^2, scaled by hi^2.
    let a = (lo / hi).powi(2);
    let b = 1.0;
    let p = 1.0 - k * k;
    let sum = a + b;
    let disc = ((a - b).powi(2) + 4.0 * k * k * a * b).sqrt();
    let x_hi = (sum + disc) / (2.0 * p);
    // Product of roots is a b / p; avoids cancellation in the small root.
    let x_lo = a * b / (p * x_hi);
    Ok((hi * x_lo.sqrt(), hi * x_hi.sqrt()))
}

fn resonator_reflection(f: f64, f_res: f64, q: f64) -> Complex64 {
    let detune = f / f_res - f_res / f;
    if q.is_infinite() {
        return if detune == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        };
    }
    let x = Complex64::new(0.0, q * detune);
    x / (1.0 + x)
}

/// Fast two-pole reflection preview: the product of two matched single-pole
/// responses at the split frequencies, each with half-power width `f / q`.
pub fn surrogate_s11(params: &CouplingParams, grid: &[f64]) -> Result<SParamSpectrum> {
    params.validate()?;
    check_grid(grid)?;
    let k = params.coupling();
    let (f_lo, f_hi) = split_frequencies(params.f1, params.f2, k.value)?;
    // q1/q2 belong to f1/f2; follow them through the sort.
    let (q_lo, q_hi) = if params.f1 <= params.f2 {
        (params.q1, params.q2)
    } else {
        (params.q2, params.q1)
    };
    let s11 = grid
        .iter()
        .map(|&f| resonator_reflection(f, f_lo, q_lo) * resonator_reflection(f, f_hi, q_hi))
        .collect();
    let mut spectrum = SParamSpectrum::new(grid.to_vec(), s11, 50.0)?;
    if k.clamped {
        spectrum
            .warnings
            .push(format!("coupling clamped to {}", k.value));
    }
    Ok(spectrum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub d: f64,
    pub k: f64,
    pub clamped: bool,
    pub f_low: f64,
    pub f_high: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub displacement: f64,
    pub best: SweepPoint,
    pub sweep: Vec<SweepPoint>,
    /// True when `K` does not vary over the sweep (for example `alpha = 0`).
    pub displacement_independent: bool,
}

impl TuneResult {
    /// `d_m, k, f_low_hz, f_high_hz, objective, clamped`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d_m,k,f_low_hz,f_high_hz,objective,clamped\n");
        for p in &self.sweep {
            out.push_str(&format!(
                "{:.6e},{:.9},{:.9e},{:.9e},{:.9e},{}\n",
                p.d, p.k, p.f_low, p.f_high, p.objective, p.clamped
            ));
        }
        out
    }
}

fn relative_error_sq(split: (f64, f64), targets: (f64, f64)) -> f64 {
    let (t_lo, t_hi) = if targets.0 <= targets.1 {
        targets
    } else {
        (targets.1, targets.0)
    };
    ((split.0 - t_lo) / t_lo).powi(2) + ((split.1 - t_hi) / t_hi).powi(2)
}

/// Grid search for the displacement whose split frequencies best match
/// `targets`. Clamped points are excluded unless every point is clamped; ties
/// go to the smaller displacement.
pub fn tune_displacement(
    targets: (f64, f64),
    params: &CouplingParams,
    d_range: (f64, f64),
    steps: usize,
) -> Result<TuneResult> {
    params.validate()?;
    if !(targets.0 > 0.0 && targets.1 > 0.0) {
        return Err(Error::domain("target frequencies must be positive"));
    }
    let (d_lo, d_hi) = d_range;
    if !(d_hi >= d_lo) || !d_lo.is_finite() || !d_hi.is_finite() {
        return Err(Error::domain("displacement range must be non-empty"));
    }
    if steps < 2 {
        return Err(Error::domain("displacement sweep needs at least two steps"));
    }

    let mut sweep = Vec::with_capacity(steps);
    for i in 0..steps {
        let d = d_lo + (d_hi - d_lo) * i as f64 / (steps - 1) as f64;
        let p = CouplingParams { d, ..*params };
        let k = p.coupling();
        let split = split_frequencies(p.f1, p.f2, k.value)?;
        sweep.push(SweepPoint {
            d,
            k: k.value,
            clamped: k.clamped,
            f_low: split.0,
            f_high: split.1,
            objective: relative_error_sq(split, targets),
        });
    }

    let any_unclamped = sweep.iter().any(|p| !p.clamped);
    let best = *sweep
        .iter()
        .filter(|p| !any_unclamped || !p.clamped)
        .fold(None::<&SweepPoint>, |acc, p| match acc {
            Some(b) if b.objective <= p.objective => Some(b),
            _ => Some(p),
        })
        .expect("sweep is non-empty");
    let k_first = sweep[0].k;
    let displacement_independent = sweep.iter().all(|p| p.k == k_first);
    Ok(TuneResult {
        displacement: best.d,
        best,
        sweep,
        displacement_independent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GHZ: f64 = 1e9;

    #[test]
    fn base_coupling_examples() {
        let k = base_coupling(5.7 * GHZ, 2.3 * GHZ).unwrap();
        assert!((k - 0.85).abs() < 1e-12);
        assert_eq!(base_coupling(3.0, 3.0).unwrap(), 0.0);
        assert_eq!(
            base_coupling(2.3 * GHZ, 5.7 * GHZ).unwrap(),
            base_coupling(5.7 * GHZ, 2.3 * GHZ).unwrap()
        );
        assert!(base_coupling(0.0, 1.0).is_err());
    }

    #[test]
    fn displacement_law() {
        assert_eq!(coupling_at_displacement(0.85, 40.0, 0.0).value, 0.0);
        let k = coupling_at_displacement(0.85, 40.0, 5e-3);
        assert!((k.value - 0.17).abs() < 1e-12 && !k.clamped);
        let k2 = coupling_at_displacement(0.85, 40.0, 10e-3);
        assert!((k2.value - 2.0 * k.value).abs() < 1e-12);
        let big = coupling_at_displacement(0.85, 40.0, 1.0);
        assert!(big.clamped && big.value < 1.0);
    }

    #[test]
    fn affine_variant() {
        let mut p = CouplingParams::new(5.7 * GHZ, 2.3 * GHZ);
        p.law = CouplingLaw::Affine;
        p.alpha = 10.0;
        p.d = 0.0;
        assert!((p.coupling().value - 0.85).abs() < 1e-12);
        p.d = 0.01;
        assert!((p.coupling().value - 0.935).abs() < 1e-12);
    }

    #[test]
    fn split_synchronous() {
        let (lo, hi) = split_frequencies(1.0 * GHZ, 1.0 * GHZ, 0.1).unwrap();
        assert!((lo / (GHZ / 1.1f64.sqrt()) - 1.0).abs() < 1e-12);
        assert!((hi / (GHZ / 0.9f64.sqrt()) - 1.0).abs() < 1e-12);
        assert_eq!(split_frequencies(2.0, 2.0, 0.0).unwrap(), (2.0, 2.0));
        assert!(matches!(
            split_frequencies(1.0, 2.0, 1.0),
            Err(Error::OverCoupled(_))
        ));
    }

    #[test]
    fn surrogate_uncoupled_dips() {
        let mut p = CouplingParams::new(2.0 * GHZ, 5.0 * GHZ);
        p.q1 = f64::INFINITY;
        p.q2 = f64::INFINITY;
        let grid: Vec<f64> = (0..=60).map(|i| (1.0 + 0.1 * i as f64) * GHZ).collect();
        let s = surrogate_s11(&p, &grid).unwrap();
        let zeros: Vec<f64> = s
            .freqs
            .iter()
            .zip(&s.s11)
            .filter(|(_, v)| v.norm() == 0.0)
            .map(|(f, _)| *f)
            .collect();
        assert_eq!(zeros.len(), 2);
        assert!((zeros[0] - 2.0 * GHZ).abs() < 1.0 && (zeros[1] - 5.0 * GHZ).abs() < 1.0);
    }

    #[test]
    fn tune_returns_exact_grid_point() {
        let mut p = CouplingParams::new(2.4 * GHZ, 5.8 * GHZ);
        p.d = 4e-3;
        let k = p.coupling().value;
        let targets = split_frequencies(p.f1, p.f2, k).unwrap();
        let r = tune_displacement(targets, &p, (0.0, 8e-3), 9).unwrap();
        assert_eq!(r.displacement, 4e-3);
        assert!(r.best.objective < 1e-24);
    }

    #[test]
    fn tune_zero_alpha_is_degenerate() {
        let mut p = CouplingParams::new(2.4 * GHZ, 5.8 * GHZ);
        p.alpha = 0.0;
        let r = tune_displacement((2.3 * GHZ, 5.7 * GHZ), &p, (0.0, 8e-3), 17).unwrap();
        assert!(r.displacement_independent);
        assert_eq!(r.displacement, 0.0);
    }
}
