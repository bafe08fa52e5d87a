//! Standalone SVG plots: S11 curves, polar pattern cuts and split frequencies
//! against displacement. Output depends only on the inputs, so identical data
//! renders to identical bytes.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::coupling::TuneResult;
use crate::post::SParamSpectrum;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Draw markers only.
    pub markers: bool,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
            markers: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Dashed horizontal rule with its label.
    pub rule: Option<(f64, String)>,
    pub y_range: Option<(f64, f64)>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Round step from the 1-2-5 ladder giving about `n` intervals.
fn nice_step(span: f64, n: f64) -> f64 {
    let raw = (span / n).max(f64::MIN_POSITIVE);
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let m = if r < 1.5 {
        1.0
    } else if r < 3.5 {
        2.0
    } else if r < 7.5 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo, 6.0);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{:.3}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn header(out: &mut String, w: f64, h: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        w / 2.0,
        esc(title)
    );
}

impl LinePlot {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        let pts = self.series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in pts.filter(|p| p.0.is_finite() && p.1.is_finite()) {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if x0 > x1 {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if let Some((r, _)) = self.rule {
            y0 = y0.min(r);
            y1 = y1.max(r);
        }
        if let Some(r) = self.y_range {
            (y0, y1) = r;
        }
        if x1 - x0 <= 0.0 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 <= 0.0 {
            (y0, y1) = (y0 - 0.5, y1 + 0.5);
        }
        let pad = 0.05 * (y1 - y0);
        (x0, x1, y0 - pad, y1 + pad)
    }

    pub fn to_svg(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y.clamp(y0, y1)) / (y1 - y0) * ph;

        let mut out = String::new();
        header(&mut out, W, H, &self.title);
        let _ = writeln!(
            out,
            r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
        );
        let _ = writeln!(out, r##"<g id="grid" stroke="#ddd" stroke-width="0.5">"##);
        let xt = ticks(x0, x1);
        let yt = ticks(y0, y1);
        for &t in &xt {
            let _ = writeln!(
                out,
                r#"<line x1="{0:.2}" y1="{TOP}" x2="{0:.2}" y2="{1:.2}"/>"#,
                sx(t),
                TOP + ph
            );
        }
        for &t in &yt {
            let _ = writeln!(
                out,
                r#"<line x1="{LEFT}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}"/>"#,
                sy(t),
                LEFT + pw
            );
        }
        let _ = writeln!(out, "</g>");
        let _ = writeln!(out, r#"<g id="ticks">"#);
        for &t in &xt {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                sx(t),
                TOP + ph + 16.0,
                fmt_tick(t)
            );
        }
        for &t in &yt {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 6.0,
                sy(t) + 4.0,
                fmt_tick(t)
            );
        }
        let _ = writeln!(out, "</g>");
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            H - 12.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{0:.1}" text-anchor="middle" transform="rotate(-90 16 {0:.1})">{1}</text>"#,
            TOP + ph / 2.0,
            esc(&self.y_label)
        );
        if let Some((r, label)) = &self.rule {
            let y = sy(*r);
            let _ = writeln!(
                out,
                r##"<line id="rule" x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#555" stroke-dasharray="6 4"/>"##,
                LEFT + pw
            );
            let _ = writeln!(
                out,
                r##"<text x="{:.2}" y="{:.2}" text-anchor="end" fill="#555">{}</text>"##,
                LEFT + pw - 4.0,
                y - 4.0,
                esc(label)
            );
        }
        for (n, s) in self.series.iter().enumerate() {
            let color = COLORS[n % COLORS.len()];
            let finite: Vec<_> = s
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .collect();
            if s.markers {
                let _ = writeln!(out, r#"<g fill="{color}">"#);
                for p in finite {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="2.5"/>"#,
                        sx(p.0),
                        sy(p.1)
                    );
                }
                let _ = writeln!(out, "</g>");
            } else {
                let pts: Vec<String> = finite
                    .iter()
                    .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1)))
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    pts.join(" ")
                );
            }
            let ly = TOP + 16.0 + 16.0 * n as f64;
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{ly:.1}" fill="{color}">{}</text>"#,
                LEFT + 10.0,
                esc(&s.label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

/// S11 magnitude in dB against frequency in GHz with the -10 dB rule.
pub fn s11_plot(title: &str, curves: &[(&str, &SParamSpectrum)]) -> String {
    let series = curves
        .iter()
        .map(|(label, s)| {
            Series::line(
                *label,
                s.freqs.iter().map(|f| f / 1e9).zip(s.mag_db()).collect(),
            )
        })
        .collect();
    LinePlot {
        title: title.into(),
        x_label: "Frequency (GHz)".into(),
        y_label: "|S11| (dB)".into(),
        series,
        rule: Some((-10.0, "-10 dB".into())),
        y_range: None,
    }
    .to_svg()
}

/// Split frequencies against displacement; clamped points are drawn as
/// markers in a separate series.
pub fn split_plot(title: &str, tune: &TuneResult) -> String {
    let pick = |clamped: bool, hi: bool| -> Vec<(f64, f64)> {
        tune.sweep
            .iter()
            .filter(|p| p.clamped == clamped)
            .map(|p| (p.d * 1e3, if hi { p.f_high } else { p.f_low } / 1e9))
            .collect()
    };
    let mut series = vec![
        Series::line("lower split", pick(false, false)),
        Series::line("upper split", pick(false, true)),
    ];
    let clamped: Vec<_> = pick(true, false)
        .into_iter()
        .chain(pick(true, true))
        .collect();
    if !clamped.is_empty() {
        series.push(Series {
            label: "over-coupled (clamped)".into(),
            points: clamped,
            markers: true,
        });
    }
    series.push(Series {
        label: format!("chosen d = {:.2} mm", tune.displacement * 1e3),
        points: vec![
            (tune.displacement * 1e3, tune.best.f_low / 1e9),
            (tune.displacement * 1e3, tune.best.f_high / 1e9),
        ],
        markers: true,
    });
    LinePlot {
        title: title.into(),
        x_label: "Displacement d (mm)".into(),
        y_label: "Frequency (GHz)".into(),
        series,
        rule: None,
        y_range: None,
    }
    .to_svg()
}

/// Polar plot of pattern cuts given as `(angle_deg, level_dbi)` with angle
/// measured from broadside; levels below `floor_db` sit on the center.
pub fn polar_plot(title: &str, cuts: &[(&str, Vec<(f64, f64)>)], floor_db: f64) -> String {
    let size = 520.0;
    let cx = size / 2.0;
    let cy = size / 2.0 + 10.0;
    let r_max = size / 2.0 - 50.0;
    let top = cuts
        .iter()
        .flat_map(|c| c.1.iter().map(|p| p.1))
        .filter(|v| v.is_finite())
        .fold(f64::MIN, f64::max);
    let top = if top == f64::MIN {
        0.0
    } else {
        (top / 5.0).ceil() * 5.0
    };
    let floor = floor_db.min(top - 5.0);
    let radius = |db: f64| ((db.max(floor) - floor) / (top - floor)) * r_max;

    let mut out = String::new();
    header(&mut out, size, size + 20.0, title);
    let _ = writeln!(
        out,
        r##"<g id="grid" fill="none" stroke="#ccc" stroke-width="0.6">"##
    );
    let step = nice_step(top - floor, 4.0);
    let mut ring = top;
    let mut labels = Vec::new();
    while ring > floor + 1e-9 {
        let _ = writeln!(
            out,
            r#"<circle cx="{cx:.1}" cy="{cy:.1}" r="{:.2}"/>"#,
            radius(ring)
        );
        labels.push(ring);
        ring -= step;
    }
    for a in (0..360).step_by(30) {
        let t = (a as f64).to_radians();
        let _ = writeln!(
            out,
            r#"<line x1="{cx:.1}" y1="{cy:.1}" x2="{:.2}" y2="{:.2}"/>"#,
            cx + r_max * t.sin(),
            cy - r_max * t.cos()
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r##"<g id="ring-labels" fill="#666" font-size="10">"##);
    for l in labels {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{} dBi</text>"#,
            cx + 3.0,
            cy - radius(l) - 2.0,
            fmt_tick(l)
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<g id="angles" font-size="10" text-anchor="middle">"#
    );
    for a in (-150..=180).step_by(30) {
        let t = (a as f64).to_radians();
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{a}</text>"#,
            cx + (r_max + 16.0) * t.sin(),
            cy - (r_max + 16.0) * t.cos() + 4.0
        );
    }
    let _ = writeln!(out, "</g>");
    for (n, (label, pts)) in cuts.iter().enumerate() {
        let color = COLORS[n % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(a, db)| {
                let t = a * PI / 180.0;
                let r = radius(if db.is_finite() { db } else { floor });
                format!("{:.2},{:.2}", cx + r * t.sin(), cy - r * t.cos())
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="12" y="{:.1}" fill="{color}">{}</text>"#,
            size + 4.0 - 16.0 * (cuts.len() - 1 - n) as f64,
            esc(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::post::linear_grid;
    use num_complex::Complex64;

    #[test]
    fn s11_plot_has_rule_and_curve() {
        let f = linear_grid(1e9, 2e9, 11);
        let s = SParamSpectrum::new(
            f.clone(),
            f.iter().map(|_| Complex64::new(0.2, 0.0)).collect(),
            50.0,
        )
        .unwrap();
        let svg = s11_plot("demo", &[("a", &s)]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(r#"id="rule""#));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg, s11_plot("demo", &[("a", &s)]));
    }

    #[test]
    fn tick_ladder() {
        assert_eq!(ticks(0.0, 10.0), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(fmt_tick(-0.0), "0");
        assert_eq!(fmt_tick(2.5), "2.5");
    }

    #[test]
    fn polar_escapes_labels() {
        let svg = polar_plot(
            "cut <phi=0>",
            &[("E & H", vec![(0.0, 5.0), (90.0, -3.0)])],
            -30.0,
        );
        assert!(svg.contains("cut &lt;phi=0&gt;"));
        assert!(svg.contains("E &amp; H"));
    }
}
