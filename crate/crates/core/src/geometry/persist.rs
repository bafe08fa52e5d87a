//! Versioned plain-text geometry file.
//!
//! ```text
//! patchkit-geometry 1
//! kind = mono
//! board = x0 y0 x1 y1
//! dielectric = eps_r height loss_tangent
//! copper = role
//! add = x0 y0 x1 y1
//! sub = x0 y0 x1 y1
//! port = x_center width copper_layer z_ref
//! mark = x y
//! feature = size name...
//! center = x y
//! ```
//! All lengths in meters, printed with round-trip precision.

use std::fmt::Write as _;

use super::{AntennaGeometry, FeedPort, GeometryKind, Layer, LayerStack, Rect, Shape};
use crate::design::SubstrateSpec;
use crate::error::{Error, Result};

const MAGIC: &str = "patchkit-geometry";
const VERSION: u32 = 1;

pub fn write_geometry(g: &AntennaGeometry) -> String {
    let mut out = String::new();
    let b = g.stack.board;
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "kind = {}", g.kind.name());
    let _ = writeln!(out, "board = {} {} {} {}", b.x0, b.y0, b.x1, b.y1);
    for layer in &g.stack.layers {
        match layer {
            Layer::Dielectric { substrate: s } => {
                let _ = writeln!(
                    out,
                    "dielectric = {} {} {}",
                    s.eps_r, s.height, s.loss_tangent
                );
            }
            Layer::Copper { role, shape } => {
                let _ = writeln!(out, "copper = {role}");
                for r in &shape.add {
                    let _ = writeln!(out, "add = {} {} {} {}", r.x0, r.y0, r.x1, r.y1);
                }
                for r in &shape.sub {
                    let _ = writeln!(out, "sub = {} {} {} {}", r.x0, r.y0, r.x1, r.y1);
                }
            }
        }
    }
    let p = g.port;
    let _ = writeln!(
        out,
        "port = {} {} {} {}",
        p.x_center, p.width, p.copper_layer, p.z_ref
    );
    for (x, y) in &g.alignment_marks {
        let _ = writeln!(out, "mark = {x} {y}");
    }
    for (name, size) in &g.features {
        let _ = writeln!(out, "feature = {size} {name}");
    }
    for (x, y) in &g.patch_centers {
        let _ = writeln!(out, "center = {x} {y}");
    }
    out
}

fn floats(line: usize, v: &str, n: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = v
        .split_whitespace()
        .take(n)
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| Error::Format(format!("line {line}: {e}")))
        })
        .collect::<Result<_>>()?;
    if vals.len() != n {
        return Err(Error::Format(format!("line {line}: expected {n} numbers")));
    }
    Ok(vals)
}

pub fn read_geometry(text: &str) -> Result<AntennaGeometry> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Format("empty geometry file".into()))?;
    let mut hp = header.split_whitespace();
    if hp.next() != Some(MAGIC) {
        return Err(Error::Format("not a patchkit geometry file".into()));
    }
    let version: u32 = hp
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Format("missing version".into()))?;
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported geometry version {version}"
        )));
    }

    let mut kind = None;
    let mut board = None;
    let mut layers: Vec<Layer> = Vec::new();
    let mut port = None;
    let mut marks = Vec::new();
    let mut features = Vec::new();
    let mut centers = Vec::new();
    for (n, raw) in lines {
        let line = n + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let (key, value) = raw
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| Error::Format(format!("line {line}: expected `key = value`")))?;
        match key {
            "kind" => {
                kind =
                    Some(GeometryKind::parse(value).ok_or_else(|| {
                        Error::Format(format!("line {line}: unknown kind `{value}`"))
                    })?)
            }
            "board" => {
                let v = floats(line, value, 4)?;
                board = Some(Rect::new(v[0], v[1], v[2], v[3]));
            }
            "dielectric" => {
                let v = floats(line, value, 3)?;
                layers.push(Layer::Dielectric {
                    substrate: SubstrateSpec {
                        eps_r: v[0],
                        height: v[1],
                        loss_tangent: v[2],
                    },
                });
            }
            "copper" => layers.push(Layer::Copper {
                role: value.to_string(),
                shape: Shape::default(),
            }),
            "add" | "sub" => {
                let v = floats(line, value, 4)?;
                let r = Rect::new(v[0], v[1], v[2], v[3]);
                match layers.last_mut() {
                    Some(Layer::Copper { shape, .. }) => {
                        if key == "add" {
                            shape.add.push(r)
                        } else {
                            shape.sub.push(r)
                        }
                    }
                    _ => {
                        return Err(Error::Format(format!(
                            "line {line}: rectangle outside a copper layer"
                        )))
                    }
                }
            }
            "port" => {
                let v = floats(line, value, 4)?;
                port = Some(FeedPort {
                    x_center: v[0],
                    width: v[1],
                    copper_layer: v[2] as usize,
                    z_ref: v[3],
                });
            }
            "mark" => {
                let v = floats(line, value, 2)?;
                marks.push((v[0], v[1]));
            }
            "center" => {
                let v = floats(line, value, 2)?;
                centers.push((v[0], v[1]));
            }
            "feature" => {
                let (size, name) = value
                    .split_once(' ')
                    .ok_or_else(|| Error::Format(format!("line {line}: bad feature")))?;
                let size = floats(line, size, 1)?[0];
                features.push((name.to_string(), size));
            }
            other => {
                return Err(Error::Format(format!("line {line}: unknown key `{other}`")));
            }
        }
    }
    let geometry = AntennaGeometry {
        kind: kind.ok_or_else(|| Error::Format("missing kind".into()))?,
        stack: LayerStack {
            layers,
            board: board.ok_or_else(|| Error::Format("missing board".into()))?,
        },
        port: port.ok_or_else(|| Error::Format("missing port".into()))?,
        alignment_marks: marks,
        features,
        patch_centers: centers,
    };
    geometry.validate()?;
    Ok(geometry)
}
