//! Closed-form rectangular patch dimensioning (transmission-line model) and
//! inset-feed design.

mod microstrip;

use std::f64::consts::PI;
use std::fmt::Write as _;

pub use microstrip::{
    microstrip_analyze, microstrip_eps_eff, microstrip_synthesize, microstrip_width_estimate,
};

use crate::consts::{C0, MM};
use crate::error::{Error, Result};

/// Gap width used for the 5.8 GHz table design.
pub const GAP_PRESET_5800: f64 = 0.38 * MM;
/// Gap width used for the 2.4 GHz table design.
pub const GAP_PRESET_2400: f64 = 0.86 * MM;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubstrateSpec {
    pub eps_r: f64,
    /// Dielectric thickness in meters.
    pub height: f64,
    pub loss_tangent: f64,
}

impl SubstrateSpec {
    pub fn new(eps_r: f64, height: f64, loss_tangent: f64) -> Result<Self> {
        let s = SubstrateSpec {
            eps_r,
            height,
            loss_tangent,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_r > 1.0) || !self.eps_r.is_finite() {
            return Err(Error::domain(format!(
                "eps_r must exceed 1, got {}",
                self.eps_r
            )));
        }
        if !(self.height > 0.0) || !self.height.is_finite() {
            return Err(Error::domain(format!(
                "substrate height must be positive, got {}",
                self.height
            )));
        }
        if !(self.loss_tangent >= 0.0) || !self.loss_tangent.is_finite() {
            return Err(Error::domain(format!(
                "loss tangent must be non-negative, got {}",
                self.loss_tangent
            )));
        }
        Ok(())
    }
}

/// How the inset gap width was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapSource {
    Explicit,
    /// `g = Wt / 3`; no closed form is known for the gap.
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignRequest {
    pub f0: f64,
    pub z_feed: f64,
    pub substrate: SubstrateSpec,
    /// Inset gap width; `None` selects the heuristic default.
    pub gap: Option<f64>,
}

impl DesignRequest {
    pub fn new(f0: f64, substrate: SubstrateSpec) -> Self {
        DesignRequest {
            f0,
            z_feed: 50.0,
            substrate,
            gap: None,
        }
    }

    pub fn with_gap(mut self, gap: f64) -> Self {
        self.gap = Some(gap);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchDesign {
    pub f0: f64,
    pub lambda0: f64,
    pub width: f64,
    pub length: f64,
    pub eps_eff: f64,
    pub z_edge: f64,
    pub inset_distance: f64,
    pub gap: f64,
    pub gap_source: GapSource,
    pub feed_width: f64,
    pub z_feed: f64,
    pub substrate: SubstrateSpec,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive, got {v}")))
    }
}

/// Patch width `c / (2 f0 sqrt((eps_r + 1) / 2))`.
pub fn patch_width(f0: f64, eps_r: f64) -> Result<f64> {
    check_positive("f0", f0)?;
    if !(eps_r > 1.0) || !eps_r.is_finite() {
        return Err(Error::domain(format!("eps_r must exceed 1, got {eps_r}")));
    }
    Ok(C0 / (2.0 * f0 * ((eps_r + 1.0) / 2.0).sqrt()))
}

pub fn effective_permittivity(eps_r: f64, h: f64, w: f64) -> Result<f64> {
    if !(eps_r > 1.0) || !eps_r.is_finite() {
        return Err(Error::domain(format!("eps_r must exceed 1, got {eps_r}")));
    }
    check_positive("h", h)?;
    check_positive("w", w)?;
    Ok((eps_r + 1.0) / 2.0 + (eps_r - 1.0) / 2.0 * (1.0 + 12.0 * h / w).powf(-0.5))
}

/// Resonant length including the fringing-field length extension on both
/// radiating edges.
pub fn patch_length(f0: f64, substrate: &SubstrateSpec) -> Result<f64> {
    check_positive("f0", f0)?;
    substrate.validate()?;
    let h = substrate.height;
    let w = patch_width(f0, substrate.eps_r)?;
    let ee = effective_permittivity(substrate.eps_r, h, w)?;
    let wh = w / h;
    let fringe = 0.824 * h * ((ee + 0.3) / (ee - 0.258)) * ((wh + 0.264) / (wh + 0.8));
    let length = C0 / (2.0 * f0 * ee.sqrt()) - fringe;
    if !(length > 0.0) {
        return Err(Error::domain(format!(
            "computed patch length {length} m is not positive"
        )));
    }
    Ok(length)
}

/// Radiating-edge input resistance from a single slot conductance,
/// `1 / (2 G1)` with `G1 = w / (120 lambda0)`.
pub fn edge_impedance(w: f64, lambda0: f64) -> Result<f64> {
    check_positive("w", w)?;
    check_positive("lambda0", lambda0)?;
    Ok(60.0 * lambda0 / w)
}

/// Inset depth `x0` with `z_edge cos^2(pi x0 / length) = z_target`.
pub fn inset_distance(z_edge: f64, z_target: f64, length: f64) -> Result<f64> {
    check_positive("z_edge", z_edge)?;
    check_positive("z_target", z_target)?;
    check_positive("length", length)?;
    if z_target > z_edge {
        return Err(Error::Unmatchable { z_edge, z_target });
    }
    Ok(length / PI * (z_target / z_edge).sqrt().acos())
}

/// Full pipeline: width, length, edge impedance, inset and feed line.
pub fn design_patch(request: &DesignRequest) -> Result<PatchDesign> {
    check_positive("f0", request.f0)?;
    check_positive("z_feed", request.z_feed)?;
    let substrate = request.substrate;
    substrate.validate()?;

    let lambda0 = C0 / request.f0;
    let width = patch_width(request.f0, substrate.eps_r)?;
    let eps_eff = effective_permittivity(substrate.eps_r, substrate.height, width)?;
    let length = patch_length(request.f0, &substrate)?;
    let z_edge = edge_impedance(width, lambda0)?;
    if request.z_feed >= z_edge {
        return Err(Error::Unmatchable {
            z_edge,
            z_target: request.z_feed,
        });
    }
    let inset = inset_distance(z_edge, request.z_feed, length)?;
    let feed_width = microstrip_synthesize(request.z_feed, &substrate)?;
    let (gap, gap_source) = match request.gap {
        Some(g) => {
            check_positive("gap", g)?;
            (g, GapSource::Explicit)
        }
        None => (feed_width / 3.0, GapSource::Heuristic),
    };

    let design = PatchDesign {
        f0: request.f0,
        lambda0,
        width,
        length,
        eps_eff,
        z_edge,
        inset_distance: inset,
        gap,
        gap_source,
        feed_width,
        z_feed: request.z_feed,
        substrate,
    };
    design.check_invariants()?;
    Ok(design)
}

impl PatchDesign {
    pub fn check_invariants(&self) -> Result<()> {
        if !(self.width > self.length && self.length > 0.0) {
            return Err(Error::domain("patch must satisfy width > length > 0"));
        }
        if !(self.eps_eff > 1.0 && self.eps_eff <= self.substrate.eps_r) {
            return Err(Error::domain("effective permittivity outside (1, eps_r]"));
        }
        if !(self.z_edge > self.z_feed) {
            return Err(Error::domain("edge impedance must exceed feed impedance"));
        }
        if !(self.inset_distance > 0.0 && self.inset_distance < self.length / 2.0) {
            return Err(Error::domain("inset distance outside (0, length/2)"));
        }
        if !(self.gap > 0.0 && self.feed_width > 0.0) {
            return Err(Error::domain("gap and feed width must be positive"));
        }
        Ok(())
    }

    /// Weaker check used by the geometry builders: an edge-fed patch
    /// (`inset_distance == 0`) is buildable.
    pub fn check_buildable(&self) -> Result<()> {
        if !(self.width > 0.0 && self.length > 0.0) {
            return Err(Error::domain("patch dimensions must be positive"));
        }
        if !(self.inset_distance >= 0.0 && self.inset_distance < self.length / 2.0) {
            return Err(Error::domain("inset distance outside [0, length/2)"));
        }
        if !(self.gap > 0.0 && self.feed_width > 0.0) {
            return Err(Error::domain("gap and feed width must be positive"));
        }
        Ok(())
    }

    /// Rows in table order: symbol, description, value, unit. Lengths are in
    /// millimeters rounded to 0.1 mm, impedances to 1 ohm.
    pub fn table_rows(&self) -> Vec<(&'static str, &'static str, String, &'static str)> {
        let mm = |v: f64| format!("{:.1}", v / MM);
        let gap_desc = match self.gap_source {
            GapSource::Explicit => "Gap width",
            GapSource::Heuristic => "Gap width (heuristic Wt/3)",
        };
        vec![
            (
                "f",
                "Mean frequency of the range",
                format!("{}", self.f0 / 1e9),
                "GHz",
            ),
            (
                "Zo",
                "Antenna input impedance",
                format!("{:.0}", self.z_feed),
                "ohm",
            ),
            (
                "Er",
                "Dielectric constant of the substrate",
                format!("{}", self.substrate.eps_r),
                "",
            ),
            ("H", "Substrate height", mm(self.substrate.height), "mm"),
            ("lambda", "Wavelength", mm(self.lambda0), "mm"),
            ("PW", "Patch width", mm(self.width), "mm"),
            ("PL", "Patch length", mm(self.length), "mm"),
            (
                "Zp",
                "Patch input impedance",
                format!("{:.0}", self.z_edge),
                "ohm",
            ),
            (
                "X0",
                "Distance to match input impedance",
                mm(self.inset_distance),
                "mm",
            ),
            ("G", gap_desc, format!("{:.2}", self.gap / MM), "mm"),
            ("Wt", "Microstrip feeder width", mm(self.feed_width), "mm"),
        ]
    }

    /// `symbol = value unit` lines in table order.
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        for (sym, _, value, unit) in self.table_rows() {
            if unit.is_empty() {
                let _ = writeln!(out, "{sym} = {value}");
            } else {
                let _ = writeln!(out, "{sym} = {value} {unit}");
            }
        }
        out
    }

    /// Full-precision CSV (SI units).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("symbol,description,value,unit\n");
        let rows: [(&str, &str, f64, &str); 12] = [
            ("f", "resonant frequency", self.f0, "Hz"),
            ("Zo", "feed impedance", self.z_feed, "ohm"),
            ("Er", "relative permittivity", self.substrate.eps_r, ""),
            ("H", "substrate height", self.substrate.height, "m"),
            ("lambda", "free-space wavelength", self.lambda0, "m"),
            ("PW", "patch width", self.width, "m"),
            ("PL", "patch length", self.length, "m"),
            ("eps_eff", "effective permittivity", self.eps_eff, ""),
            ("Zp", "edge impedance", self.z_edge, "ohm"),
            ("X0", "inset distance", self.inset_distance, "m"),
            ("G", "gap width", self.gap, "m"),
            ("Wt", "feed width", self.feed_width, "m"),
        ];
        for (sym, desc, v, unit) in rows {
            let _ = writeln!(out, "{sym},{desc},{v:.12e},{unit}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::GHZ;

    fn sub() -> SubstrateSpec {
        SubstrateSpec::new(3.55, 1.5 * MM, 0.0).unwrap()
    }

    #[test]
    fn width_matches_tables() {
        assert!((patch_width(5.8 * GHZ, 3.55).unwrap() / MM - 17.1).abs() <= 0.05);
        assert!((patch_width(2.4 * GHZ, 3.55).unwrap() / MM - 41.4).abs() <= 0.05);
    }

    #[test]
    fn width_air_limit() {
        let f0 = 3.0 * GHZ;
        let w = patch_width(f0, 1.0 + 1e-9).unwrap();
        assert!((w - C0 / (2.0 * f0)).abs() / w < 1e-8);
    }

    #[test]
    fn eps_eff_hand_values() {
        let e1 = effective_permittivity(3.55, 1.5 * MM, 17.146 * MM).unwrap();
        let e2 = effective_permittivity(3.55, 1.5 * MM, 41.437 * MM).unwrap();
        assert!((e1 - 3.166).abs() <= 0.002, "{e1}");
        assert!((e2 - 3.340).abs() <= 0.002, "{e2}");
        let wide = effective_permittivity(3.55, 1.5 * MM, 1e6).unwrap();
        assert!((wide - 3.55).abs() < 1e-3);
    }

    #[test]
    fn length_matches_tables() {
        let l1 = patch_length(5.8 * GHZ, &sub()).unwrap();
        let l2 = patch_length(2.4 * GHZ, &sub()).unwrap();
        assert!((l1 / MM - 13.1).abs() <= 0.05, "{}", l1 / MM);
        assert!((l2 / MM - 32.7).abs() <= 0.05, "{}", l2 / MM);
    }

    #[test]
    fn length_below_half_guided_wavelength() {
        for f in [1.0, 2.4, 5.8, 10.0] {
            let f0 = f * GHZ;
            let s = sub();
            let w = patch_width(f0, s.eps_r).unwrap();
            let ee = effective_permittivity(s.eps_r, s.height, w).unwrap();
            assert!(patch_length(f0, &s).unwrap() < C0 / (2.0 * f0 * ee.sqrt()));
        }
    }

    #[test]
    fn length_rejects_nonphysical() {
        // Extremely thick substrate: the fringing correction swallows the patch.
        let thick = SubstrateSpec::new(1.05, 0.5, 0.0).unwrap();
        assert!(matches!(
            patch_length(10.0 * GHZ, &thick),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn edge_impedance_values() {
        let z1 = edge_impedance(17.1 * MM, 51.7 * MM).unwrap();
        let z2 = edge_impedance(41.4 * MM, 125.0 * MM).unwrap();
        assert!((z1 - 181.4).abs() < 0.05 && (z1 - 182.0).abs() <= 1.0);
        assert!((z2 - 181.2).abs() < 0.05 && (z2 - 181.0).abs() <= 1.0);
        assert_eq!(edge_impedance(0.5, 1.0).unwrap(), 120.0);
        assert!(edge_impedance(0.0, 1.0).is_err());
    }

    #[test]
    fn inset_values() {
        let x2 = inset_distance(181.0, 50.0, 32.7 * MM).unwrap();
        assert!((x2 / MM - 10.6).abs() <= 0.05, "{}", x2 / MM);
        // Table-rounded inputs land at 4.2495 mm, just outside 0.05 mm of the
        // table's 4.3 mm entry.
        let x1 = inset_distance(182.0, 50.0, 13.1 * MM).unwrap();
        assert!((x1 / MM - 4.2495).abs() < 1e-4, "{}", x1 / MM);
        assert_eq!(inset_distance(75.0, 75.0, 0.01).unwrap(), 0.0);
        assert!(matches!(
            inset_distance(50.0, 60.0, 0.01),
            Err(Error::Unmatchable { .. })
        ));
    }

    #[test]
    fn design_pipeline_2400() {
        let d =
            design_patch(&DesignRequest::new(2.4 * GHZ, sub()).with_gap(GAP_PRESET_2400)).unwrap();
        assert!((d.width / MM - 41.4).abs() <= 0.05);
        assert!((d.length / MM - 32.7).abs() <= 0.05);
        assert!((d.lambda0 / MM - 125.0).abs() <= 0.1);
        assert!((d.z_edge - 181.0).abs() <= 1.0);
        assert!((d.inset_distance / MM - 10.6).abs() <= 0.05);
        assert!((d.feed_width / MM - 2.9).abs() <= 0.5);
        assert_eq!(d.gap_source, GapSource::Explicit);
    }

    #[test]
    fn heuristic_gap() {
        let d = design_patch(&DesignRequest::new(2.4 * GHZ, sub())).unwrap();
        assert_eq!(d.gap_source, GapSource::Heuristic);
        assert!((d.gap - d.feed_width / 3.0).abs() < 1e-15);
        assert!(d.table_rows().iter().any(|r| r.1.contains("heuristic")));
    }

    #[test]
    fn record_row_order() {
        let d =
            design_patch(&DesignRequest::new(5.8 * GHZ, sub()).with_gap(GAP_PRESET_5800)).unwrap();
        let rec = d.to_record();
        let syms: Vec<&str> = rec
            .lines()
            .map(|l| l.split(" = ").next().unwrap())
            .collect();
        assert_eq!(
            syms,
            ["f", "Zo", "Er", "H", "lambda", "PW", "PL", "Zp", "X0", "G", "Wt"]
        );
        assert!(rec.contains("PW = 17.1 mm"));
        assert!(rec.contains("lambda = 51.7 mm"));
        assert_eq!(d.to_csv().lines().count(), 13);
    }
}
