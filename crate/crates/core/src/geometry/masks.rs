use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{AntennaGeometry, Layer, Rect, Shape};
use crate::error::{Error, Result};

/// Frame around the board on every mask, millimeters.
const FRAME_MM: f64 = 6.0;
const CROSS_MM: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MaskFile {
    pub layer: usize,
    pub role: String,
    pub path: PathBuf,
}

fn mm(v: f64) -> String {
    let s = format!("{:.4}", v * 1e3);
    // Avoid "-0.0000".
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        "0.0000".into()
    } else {
        s
    }
}

/// SVG for copper layer `layer` (0 is ground). Millimeter user units, y up on
/// the board maps to y down in the image; copper is black.
pub fn render_mask_svg(geometry: &AntennaGeometry, layer: usize) -> Result<String> {
    let (_, role, shape) = geometry
        .stack
        .copper_layers()
        .nth(layer)
        .ok_or_else(|| Error::domain(format!("no copper layer {layer}")))?;
    let board = geometry.stack.board;
    let frame = FRAME_MM * 1e-3;
    let left = board.x0 - frame;
    let top = board.y1 + frame;
    let w = board.width() + 2.0 * frame;
    let h = board.height() + 2.0 * frame;
    let sx = |x: f64| mm(x - left);
    let sy = |y: f64| mm(top - y);

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}mm" height="{1}mm" viewBox="0 0 {0} {1}">"#,
        mm(w),
        mm(h)
    );
    let _ = writeln!(out, "<title>copper layer {layer}: {role}</title>");
    let _ = writeln!(
        out,
        r##"<rect id="outline" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#808080" stroke-width="0.05"/>"##,
        sx(board.x0),
        sy(board.y1),
        mm(board.width()),
        mm(board.height())
    );
    let _ = writeln!(out, r##"<g id="copper" fill="#000000" stroke="none">"##);
    for r in shape.disjoint_rects() {
        let _ = writeln!(
            out,
            r#"<path d="M{} {}H{}V{}H{}Z"/>"#,
            sx(r.x0),
            sy(r.y0),
            sx(r.x1),
            sy(r.y1),
            sx(r.x0)
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r##"<g id="alignment" fill="none" stroke="#000000" stroke-width="0.2">"##
    );
    let half = CROSS_MM * 1e-3 / 2.0;
    for &(x, y) in &geometry.alignment_marks {
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            sx(x - half),
            sy(y),
            sx(x + half),
            sy(y)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            sx(x),
            sy(y - half),
            sx(x),
            sy(y + half)
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

fn attr<'a>(tag: &'a str, name: &str) -> Option<&'a str> {
    let key = format!("{name}=\"");
    let start = tag.find(&key)? + key.len();
    let end = tag[start..].find('"')? + start;
    Some(&tag[start..end])
}

fn num(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Format(format!("bad number `{s}`: {e}")))
}

/// Reads the copper rectangles of a mask produced by [`render_mask_svg`] back
/// into board coordinates (meters).
pub fn parse_mask_svg(text: &str) -> Result<Shape> {
    let outline = text
        .lines()
        .find(|l| l.contains(r#"id="outline""#))
        .ok_or_else(|| Error::Format("mask has no outline".into()))?;
    let ox = num(attr(outline, "x").unwrap_or("0"))?;
    let oy = num(attr(outline, "y").unwrap_or("0"))?;
    let oh = num(attr(outline, "height").unwrap_or("0"))?;
    // Board origin (x0, y0) sits at image (ox, oy + oh).
    let bx = |v: f64| (v - ox) * 1e-3;
    let by = |v: f64| (oy + oh - v) * 1e-3;

    let mut shape = Shape::default();
    let mut in_copper = false;
    for line in text.lines() {
        if line.contains(r#"id="copper""#) {
            in_copper = true;
            continue;
        }
        if in_copper && line.starts_with("</g>") {
            break;
        }
        if !in_copper || !line.starts_with("<path") {
            continue;
        }
        let d = attr(line, "d").ok_or_else(|| Error::Format("path without d".into()))?;
        let nums: Vec<f64> = d
            .split(|c: char| c.is_ascii_alphabetic() || c == ' ')
            .filter(|s| !s.is_empty())
            .map(num)
            .collect::<Result<_>>()?;
        if nums.len() != 5 {
            return Err(Error::Format(format!("unexpected path `{d}`")));
        }
        shape = shape.union(Rect::new(
            bx(nums[0]),
            by(nums[1]),
            bx(nums[2]),
            by(nums[3]),
        ));
    }
    Ok(shape)
}

/// Writes one SVG per copper layer plus `manifest.txt` listing every layer
/// bottom to top as `layer, role, thickness_mm, file`.
pub fn export_masks(geometry: &AntennaGeometry, dir: &Path) -> Result<Vec<MaskFile>> {
    geometry.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    let mut manifest = String::from("layer, role, thickness_mm, file\n");
    let mut copper_index = 0;
    for (n, layer) in geometry.stack.layers.iter().enumerate() {
        match layer {
            Layer::Copper { role, .. } => {
                let name = format!("copper{copper_index}_{role}.svg");
                let path = dir.join(&name);
                let svg = render_mask_svg(geometry, copper_index)?;
                std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
                let _ = writeln!(manifest, "{n}, {role}, 0.000, {name}");
                files.push(MaskFile {
                    layer: copper_index,
                    role: role.clone(),
                    path,
                });
                copper_index += 1;
            }
            Layer::Dielectric { substrate } => {
                let _ = writeln!(
                    manifest,
                    "{n}, dielectric(er={}), {:.3}, -",
                    substrate.eps_r,
                    substrate.height * 1e3
                );
            }
        }
    }
    let path = dir.join("manifest.txt");
    std::fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::{GHZ, MM};
    use crate::design::{design_patch, DesignRequest, SubstrateSpec, GAP_PRESET_5800};
    use crate::geometry::{build_mono, default_board};

    #[test]
    fn svg_round_trip_preserves_area() {
        let s = SubstrateSpec::new(3.55, 1.5 * MM, 0.0).unwrap();
        let d = design_patch(&DesignRequest::new(5.8 * GHZ, s).with_gap(GAP_PRESET_5800)).unwrap();
        let g = build_mono(&d, default_board(&d)).unwrap();
        let svg = render_mask_svg(&g, 1).unwrap();
        let back = parse_mask_svg(&svg).unwrap();
        let a = g.stack.copper_shape(1).unwrap().area();
        assert!((back.area() - a).abs() / a < 1e-5);
        assert_eq!(svg.matches("<line").count(), 8);
    }
}
