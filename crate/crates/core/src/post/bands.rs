use super::SParamSpectrum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub f_low: f64,
    pub f_high: f64,
    /// Frequency of the deepest grid sample inside the band.
    pub f_min: f64,
    pub s11_min_db: f64,
}

impl Band {
    pub fn center(&self) -> f64 {
        0.5 * (self.f_low + self.f_high)
    }

    pub fn width(&self) -> f64 {
        self.f_high - self.f_low
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.f_low && f <= self.f_high
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BandReport {
    pub threshold_db: f64,
    pub bands: Vec<Band>,
}

impl BandReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f_low_hz,f_high_hz,f_min_hz,s11_min_db\n");
        for b in &self.bands {
            out.push_str(&format!(
                "{:.6e},{:.6e},{:.6e},{:.4}\n",
                b.f_low, b.f_high, b.f_min, b.s11_min_db
            ));
        }
        out
    }
}

pub const DEFAULT_THRESHOLD_DB: f64 = -10.0;

fn crossing(f0: f64, d0: f64, f1: f64, d1: f64, threshold: f64) -> f64 {
    if d1 == d0 {
        return f0;
    }
    f0 + (threshold - d0) * (f1 - f0) / (d1 - d0)
}

/// Contiguous runs of the spectrum below `threshold_db`, with edges linearly
/// interpolated (in dB) between grid points.
pub fn bandwidth(spectrum: &SParamSpectrum, threshold_db: f64) -> BandReport {
    let f = &spectrum.freqs;
    let db = spectrum.mag_db();
    let mut bands = Vec::new();
    let mut i = 0;
    while i < db.len() {
        if db[i] >= threshold_db {
            i += 1;
            continue;
        }
        let start = i;
        while i < db.len() && db[i] < threshold_db {
            i += 1;
        }
        let end = i - 1;
        let f_low = if start == 0 {
            f[0]
        } else {
            crossing(
                f[start - 1],
                db[start - 1],
                f[start],
                db[start],
                threshold_db,
            )
        };
        let f_high = if end + 1 == db.len() {
            f[end]
        } else {
            crossing(f[end], db[end], f[end + 1], db[end + 1], threshold_db)
        };
        let (k, min_db) = (start..=end)
            .map(|k| (k, db[k]))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        bands.push(Band {
            f_low,
            f_high,
            f_min: f[k],
            s11_min_db: min_db,
        });
    }
    BandReport {
        threshold_db,
        bands,
    }
}
