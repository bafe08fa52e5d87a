//! SVG rendering of the tune and pattern CSV files.

use patchkit::plot::{polar_plot, LinePlot, Series};
use patchkit::{Error, Result};

fn rows(text: &str) -> Result<Vec<Vec<String>>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
        if cols.len() < 4 {
            return Err(Error::Format(format!("line {}: too few columns", n + 1)));
        }
        out.push(cols);
    }
    Ok(out)
}

fn num(s: &str, line: usize) -> Result<f64> {
    s.parse()
        .map_err(|e| Error::Format(format!("row {line}: `{s}`: {e}")))
}

/// `d_m, k, f_low_hz, f_high_hz, objective, clamped`
pub fn tune_csv_plot(title: &str, text: &str) -> Result<String> {
    let (mut lo, mut hi) = (Vec::new(), Vec::new());
    for (n, r) in rows(text)?.iter().enumerate() {
        let d = num(&r[0], n)? * 1e3;
        lo.push((d, num(&r[2], n)? / 1e9));
        hi.push((d, num(&r[3], n)? / 1e9));
    }
    Ok(LinePlot {
        title: title.into(),
        x_label: "Displacement d (mm)".into(),
        y_label: "Frequency (GHz)".into(),
        series: vec![
            Series::line("lower split", lo),
            Series::line("upper split", hi),
        ],
        rule: None,
        y_range: None,
    }
    .to_svg())
}

/// `theta_deg, phi_deg, directivity_dbi, gain_dbi`: cuts at phi = 0 and 90.
pub fn pattern_csv_plot(title: &str, text: &str) -> Result<String> {
    let data = rows(text)?;
    let mut cuts = Vec::new();
    for phi in [0.0, 90.0] {
        let opposite = phi + 180.0;
        let mut pts = Vec::new();
        for (n, r) in data.iter().enumerate() {
            let (t, p, d) = (num(&r[0], n)?, num(&r[1], n)?, num(&r[2], n)?);
            if (p - opposite).abs() < 1e-9 && t > 0.0 {
                pts.push((-t, d));
            } else if (p - phi).abs() < 1e-9 {
                pts.push((t, d));
            }
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        cuts.push((
            if phi == 0.0 {
                "phi = 0 deg"
            } else {
                "phi = 90 deg"
            },
            pts,
        ));
    }
    Ok(polar_plot(title, &cuts, -30.0))
}
