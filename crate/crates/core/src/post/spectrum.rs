use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reflection coefficient sampled on a strictly increasing frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SParamSpectrum {
    pub freqs: Vec<f64>,
    pub s11: Vec<Complex64>,
    pub z_ref: f64,
    pub warnings: Vec<String>,
}

/// `n` evenly spaced frequencies covering `[start, stop]`.
pub fn linear_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "frequency grid needs at least two points");
    let step = (stop - start) / (n - 1) as f64;
    (0..n).map(|i| start + step * i as f64).collect()
}

pub(crate) fn check_grid(freqs: &[f64]) -> Result<()> {
    if freqs.len() < 2 {
        return Err(Error::domain("frequency grid needs at least two points"));
    }
    if freqs.iter().any(|f| !f.is_finite() || *f <= 0.0) {
        return Err(Error::domain("frequency grid must be positive and finite"));
    }
    if freqs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("frequency grid must be strictly increasing"));
    }
    Ok(())
}

impl SParamSpectrum {
    pub fn new(freqs: Vec<f64>, s11: Vec<Complex64>, z_ref: f64) -> Result<Self> {
        check_grid(&freqs)?;
        if freqs.len() != s11.len() {
            return Err(Error::Mismatch(format!(
                "{} frequencies but {} S11 samples",
                freqs.len(),
                s11.len()
            )));
        }
        Ok(SParamSpectrum {
            freqs,
            s11,
            z_ref,
            warnings: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn mag_db(&self) -> Vec<f64> {
        self.s11.iter().map(|s| mag_to_db(s.norm())).collect()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.s11.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Frequency and value (dB) of the deepest point within `[lo, hi]`.
    pub fn min_in(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        self.freqs
            .iter()
            .zip(self.mag_db())
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(f, db)| (*f, db))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Indices of local minima of |S11| (interior points only).
    pub fn dip_indices(&self) -> Vec<usize> {
        let mag: Vec<f64> = self.s11.iter().map(|s| s.norm()).collect();
        (1..mag.len().saturating_sub(1))
            .filter(|&i| mag[i] < mag[i - 1] && mag[i] <= mag[i + 1])
            .collect()
    }

    /// `f_hz, re_s11, im_s11, mag_db`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f_hz,re_s11,im_s11,mag_db\n");
        for (f, s) in self.freqs.iter().zip(&self.s11) {
            let _ = writeln!(
                out,
                "{:.6e},{:.12e},{:.12e},{:.6}",
                f,
                s.re,
                s.im,
                mag_to_db(s.norm())
            );
        }
        out
    }

    pub fn from_csv(text: &str, z_ref: f64) -> Result<Self> {
        let mut freqs = Vec::new();
        let mut s11 = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (n == 0 && line.starts_with("f_hz")) {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() < 3 {
                return Err(Error::Format(format!("line {}: expected 4 columns", n + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Format(format!("line {}: {e}", n + 1)))
            };
            freqs.push(parse(cols[0])?);
            s11.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
        }
        SParamSpectrum::new(freqs, s11, z_ref)
    }
}

pub fn mag_to_db(mag: f64) -> f64 {
    20.0 * mag.max(1e-30).log10()
}
