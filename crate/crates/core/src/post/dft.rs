use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::spectrum::check_grid;
use super::SParamSpectrum;
use crate::error::{Error, Result};
use crate::fdtd::TimeSeriesRecord;

/// Direct transform `X(f) = sum x[n] exp(-j 2 pi f t_n) dt` with
/// `t_n = (n + offset) dt`, evaluated at each requested frequency.
pub fn dft(samples: &[f64], dt: f64, offset: f64, freqs: &[f64]) -> Vec<Complex64> {
    freqs
        .par_iter()
        .map(|&f| {
            let w = -2.0 * PI * f * dt;
            let mut acc = Complex64::new(0.0, 0.0);
            for (n, &x) in samples.iter().enumerate() {
                if x != 0.0 {
                    let (s, c) = (w * (n as f64 + offset)).sin_cos();
                    acc += Complex64::new(c * x, s * x);
                }
            }
            acc * dt
        })
        .collect()
}

fn same_timing(a: &TimeSeriesRecord, b: &TimeSeriesRecord) -> Result<()> {
    if (a.dt - b.dt).abs() > 1e-12 * a.dt.abs() {
        return Err(Error::Mismatch(format!(
            "time steps differ: {:e} s vs {:e} s",
            a.dt, b.dt
        )));
    }
    if a.v_offset != b.v_offset || a.i_offset != b.i_offset {
        return Err(Error::Mismatch("sample offsets differ".into()));
    }
    Ok(())
}

/// Excess of `|S11|` over 1 tolerated before a warning is attached.
pub const PASSIVITY_TOLERANCE: f64 = 1e-6;

/// Reflection coefficient at the probe plane, from the antenna record and
/// the matched-line reference carrying the incident wave alone.
pub fn s11_spectrum(
    antenna: &TimeSeriesRecord,
    reference: &TimeSeriesRecord,
    grid: &[f64],
) -> Result<SParamSpectrum> {
    check_grid(grid)?;
    same_timing(antenna, reference)?;
    let inc = dft(&reference.v, reference.dt, reference.v_offset, grid);
    let tot = dft(&antenna.v, antenna.dt, antenna.v_offset, grid);
    let s11: Vec<Complex64> = tot.iter().zip(&inc).map(|(t, i)| (t - i) / i).collect();
    let mut spectrum = SParamSpectrum::new(grid.to_vec(), s11, reference.z_ref)?;
    for (name, r) in [("antenna", antenna), ("reference", reference)] {
        if !r.termination.decayed() {
            spectrum.warnings.push(format!(
                "{name} record had not decayed when the run stopped"
            ));
        }
    }
    let (worst, at) = spectrum
        .s11
        .iter()
        .zip(&spectrum.freqs)
        .map(|(s, f)| (s.norm(), *f))
        .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    if worst > 1.0 + PASSIVITY_TOLERANCE {
        spectrum.warnings.push(format!(
            "|S11| reaches {worst:.4} at {:.4} GHz; a passive port cannot exceed 1",
            at / 1e9
        ));
    }
    let peak = inc.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let weak = inc.iter().filter(|c| c.norm() < 1e-3 * peak).count();
    if weak > 0 {
        spectrum.warnings.push(format!(
            "{weak} grid points lie where the incident spectrum is 60 dB below its peak"
        ));
    }
    Ok(spectrum)
}

/// Incident power spectrum `Re(V I*) / 2` of a matched-line record.
pub fn incident_power(reference: &TimeSeriesRecord, freqs: &[f64]) -> Vec<f64> {
    let v = dft(&reference.v, reference.dt, reference.v_offset, freqs);
    let i = dft(&reference.i, reference.dt, reference.i_offset, freqs);
    v.iter()
        .zip(&i)
        .map(|(v, i)| 0.5 * (v * i.conj()).re)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdtd::Termination;

    fn record(v: Vec<f64>) -> TimeSeriesRecord {
        TimeSeriesRecord {
            dt: 1e-12,
            v_offset: 1.0,
            i_offset: 0.5,
            i: vec![0.0; v.len()],
            v,
            z_ref: 50.0,
            termination: Termination::Decayed { step: 0 },
            surfaces: Vec::new(),
        }
    }

    fn pulse(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let t = (i as f64 - 200.0) / 40.0;
                (0.2 * i as f64).sin() * (-t * t).exp()
            })
            .collect()
    }

    #[test]
    fn self_reference_is_exactly_zero() {
        let r = record(pulse(600));
        let grid: Vec<f64> = (1..50).map(|i| i as f64 * 1e9).collect();
        let s = s11_spectrum(&r, &r, &grid).unwrap();
        assert!(s.s11.iter().all(|c| c.re == 0.0 && c.im == 0.0));
    }

    #[test]
    fn mismatched_steps_are_rejected() {
        let a = record(pulse(100));
        let mut b = a.clone();
        b.dt *= 2.0;
        assert!(matches!(
            s11_spectrum(&a, &b, &[1e9, 2e9]),
            Err(Error::Mismatch(_))
        ));
    }

    #[test]
    fn parseval_holds() {
        let x = pulse(1000);
        let dt = 1e-12;
        let time: f64 = x.iter().map(|v| v * v).sum::<f64>() * dt;
        // One-sided spectrum up to Nyquist on a fine grid.
        let n = 20_000;
        let fmax = 0.5 / dt;
        let df = fmax / n as f64;
        let freqs: Vec<f64> = (0..=n).map(|i| i as f64 * df).collect();
        let spec = dft(&x, dt, 0.0, &freqs);
        let mut freq_energy = 0.0;
        for (i, c) in spec.iter().enumerate() {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            freq_energy += 2.0 * w * c.norm_sqr() * df;
        }
        assert!(
            ((freq_energy - time) / time).abs() < 1e-3,
            "{freq_energy} vs {time}"
        );
    }

    #[test]
    fn shift_theorem() {
        let x = pulse(800);
        let dt = 1e-12;
        let a = dft(&x, dt, 0.0, &[5e9]);
        let b = dft(&x, dt, 3.0, &[5e9]);
        let expect = a[0] * Complex64::from_polar(1.0, -2.0 * PI * 5e9 * 3.0 * dt);
        assert!(
            (b[0] - expect).norm() < 1e-9 * a[0].norm(),
            "{} {}",
            b[0],
            expect
        );
    }
}
