//! Layered antenna geometry: the inset-fed mono patch, the U-slotted patch
//! and the displaced stacked pair, plus rasterization onto a simulation grid
//! and per-layer mask export.

mod masks;
mod persist;
mod raster;
mod shape;

pub use masks::{export_masks, parse_mask_svg, render_mask_svg, MaskFile};
pub use persist::{read_geometry, write_geometry};
pub use raster::{
    rasterize, CellLabel, CopperSheet, Dielectric, GridPort, MaterialGrid, RasterOptions,
};
pub use shape::{Rect, Shape};

use crate::design::{PatchDesign, SubstrateSpec};
use crate::error::{Error, Result};

/// Geometric tolerance used for containment checks, meters.
const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryKind {
    Mono,
    Slotted,
    Stacked,
}

impl GeometryKind {
    pub fn name(&self) -> &'static str {
        match self {
            GeometryKind::Mono => "mono",
            GeometryKind::Slotted => "slotted",
            GeometryKind::Stacked => "stacked",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mono" => Some(GeometryKind::Mono),
            "slotted" => Some(GeometryKind::Slotted),
            "stacked" => Some(GeometryKind::Stacked),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    /// Zero-thickness perfect conductor.
    Copper {
        role: String,
        shape: Shape,
    },
    Dielectric {
        substrate: SubstrateSpec,
    },
}

/// Layers ordered bottom to top. The bottom layer is the ground plane.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
    pub board: Rect,
}

impl LayerStack {
    pub fn copper_layers(&self) -> impl Iterator<Item = (usize, &str, &Shape)> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                Layer::Copper { role, shape } => Some((role.as_str(), shape)),
                _ => None,
            })
            .enumerate()
            .map(|(i, (r, s))| (i, r, s))
    }

    pub fn copper_count(&self) -> usize {
        self.copper_layers().count()
    }

    /// Height of each copper layer above the ground plane, meters.
    pub fn copper_heights(&self) -> Vec<f64> {
        let mut z = 0.0;
        let mut out = Vec::new();
        for l in &self.layers {
            match l {
                Layer::Copper { .. } => out.push(z),
                Layer::Dielectric { substrate } => z += substrate.height,
            }
        }
        out
    }

    pub fn total_height(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Dielectric { substrate } => substrate.height,
                _ => 0.0,
            })
            .sum()
    }

    pub fn copper_shape(&self, index: usize) -> Option<&Shape> {
        self.copper_layers().nth(index).map(|(_, _, s)| s)
    }

    pub fn validate(&self) -> Result<()> {
        let first_is_ground = matches!(self.layers.first(), Some(Layer::Copper { .. }));
        if !first_is_ground {
            return Err(Error::domain(
                "bottom layer must be the copper ground plane",
            ));
        }
        for pair in self.layers.windows(2) {
            let alternates = matches!(
                pair,
                [Layer::Copper { .. }, Layer::Dielectric { .. }]
                    | [Layer::Dielectric { .. }, Layer::Copper { .. }]
            );
            if !alternates {
                return Err(Error::domain("copper and dielectric layers must alternate"));
            }
        }
        for l in &self.layers {
            match l {
                Layer::Dielectric { substrate } => substrate.validate()?,
                Layer::Copper { shape, role } => {
                    for r in &shape.add {
                        if !self.board.encloses(r, TOL) {
                            return Err(Error::Placement(format!(
                                "copper on layer `{role}` leaves the board outline"
                            )));
                        }
                        if !(r.area() > 0.0) {
                            return Err(Error::domain("copper rectangles need positive area"));
                        }
                    }
                }
            }
        }
        let ground = self.copper_shape(0).expect("ground exists");
        if (ground.area() - self.board.area()).abs() > 1e-9 * self.board.area() {
            return Err(Error::domain("ground plane must cover the full board"));
        }
        Ok(())
    }
}

/// Side-entry microstrip feed. The strip leaves the board at `y = board.y0`
/// and runs in +y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedPort {
    pub x_center: f64,
    pub width: f64,
    /// Index into the copper layers (0 is ground).
    pub copper_layer: usize,
    pub z_ref: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntennaGeometry {
    pub kind: GeometryKind,
    pub stack: LayerStack,
    pub port: FeedPort,
    /// Alignment cross centers, shared by every mask layer.
    pub alignment_marks: Vec<(f64, f64)>,
    /// Smallest features, used for resolution warnings.
    pub features: Vec<(String, f64)>,
    /// Patch centers per copper layer (ground omitted).
    pub patch_centers: Vec<(f64, f64)>,
}

impl AntennaGeometry {
    pub fn validate(&self) -> Result<()> {
        self.stack.validate()?;
        let shape = self
            .stack
            .copper_shape(self.port.copper_layer)
            .ok_or_else(|| Error::domain("port references a missing copper layer"))?;
        if self.port.copper_layer == 0 {
            return Err(Error::domain("port cannot sit on the ground plane"));
        }
        let y = self.stack.board.y0 + TOL;
        if !shape.contains(self.port.x_center, y) {
            return Err(Error::domain("port does not lie on a copper trace"));
        }
        Ok(())
    }
}

/// Slot carved into the patch to add a second resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotSpec {
    /// Centerline length, meters.
    pub total_length: f64,
    pub width: f64,
    /// 0 (straight) or 2 (U-shape).
    pub bend_count: usize,
    /// Minimum distance between slot and patch edges.
    pub clearance: f64,
}

impl SlotSpec {
    pub fn u_slot(total_length: f64, width: f64) -> Self {
        SlotSpec {
            total_length,
            width,
            bend_count: 2,
            clearance: 1e-3,
        }
    }
}

/// Dielectric template for the stacked build, bottom to top.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackTemplate {
    pub lower: SubstrateSpec,
    pub upper: SubstrateSpec,
    /// Keep the inset notches on the fed upper patch.
    pub upper_inset: bool,
}

impl StackTemplate {
    pub fn from_substrate(s: SubstrateSpec) -> Self {
        StackTemplate {
            lower: s,
            upper: s,
            upper_inset: true,
        }
    }
}

/// Board around a `w x l` footprint with a `margin` on every side, origin at
/// the lower-left corner.
pub fn board_with_margin(w: f64, l: f64, margin: f64) -> Rect {
    Rect::new(0.0, 0.0, w + 2.0 * margin, l + 2.0 * margin)
}

/// Default board: a quarter free-space wavelength of clearance on all sides.
pub fn default_board(design: &PatchDesign) -> Rect {
    board_with_margin(design.width, design.length, design.lambda0 / 4.0)
}

fn alignment_marks(board: &Rect) -> Vec<(f64, f64)> {
    let o = 3e-3;
    vec![
        (board.x0 - o, board.y0 - o),
        (board.x1 + o, board.y0 - o),
        (board.x0 - o, board.y1 + o),
        (board.x1 + o, board.y1 + o),
    ]
}

fn check_margin(board: &Rect, patch: &Rect, margin: f64) -> Result<()> {
    let slack = [
        patch.x0 - board.x0,
        board.x1 - patch.x1,
        patch.y0 - board.y0,
        board.y1 - patch.y1,
    ];
    let worst = slack.iter().cloned().fold(f64::INFINITY, f64::min);
    if worst < margin - 1e-9 {
        return Err(Error::Margin(format!(
            "patch clearance {:.3} mm is below the required {:.3} mm",
            worst * 1e3,
            margin * 1e3
        )));
    }
    Ok(())
}

/// Inset-fed patch copper: patch minus two notches, plus the feed strip from
/// the board edge. `patch` is the patch rectangle with the feed entering at
/// `patch.y0`.
fn inset_patch(design: &PatchDesign, patch: Rect, board: &Rect, with_inset: bool) -> Shape {
    let (cx, _) = patch.center();
    let half_feed = design.feed_width / 2.0;
    let mut shape = Shape::rect(patch);
    if patch.y0 > board.y0 {
        shape = shape.union(Rect::new(
            cx - half_feed,
            board.y0,
            cx + half_feed,
            patch.y0,
        ));
    }
    if with_inset && design.inset_distance > 0.0 {
        let x0 = design.inset_distance;
        let g = design.gap;
        shape = shape
            .subtract(Rect::new(
                cx - half_feed - g,
                patch.y0,
                cx - half_feed,
                patch.y0 + x0,
            ))
            .subtract(Rect::new(
                cx + half_feed,
                patch.y0,
                cx + half_feed + g,
                patch.y0 + x0,
            ));
    }
    shape
}

fn ground(board: Rect) -> Layer {
    Layer::Copper {
        role: "ground".into(),
        shape: Shape::rect(board),
    }
}

fn base_features(design: &PatchDesign) -> Vec<(String, f64)> {
    vec![
        ("feed width".into(), design.feed_width),
        ("inset gap".into(), design.gap),
    ]
}

/// Single-substrate inset-fed patch, centered on `board`.
pub fn build_mono(design: &PatchDesign, board: Rect) -> Result<AntennaGeometry> {
    design.check_buildable()?;
    let (cx, cy) = board.center();
    let patch = Rect::centered(cx, cy, design.width, design.length);
    check_margin(&board, &patch, design.lambda0 / 4.0)?;
    let top = inset_patch(design, patch, &board, true);
    let geometry = AntennaGeometry {
        kind: GeometryKind::Mono,
        stack: LayerStack {
            layers: vec![
                ground(board),
                Layer::Dielectric {
                    substrate: design.substrate,
                },
                Layer::Copper {
                    role: "patch".into(),
                    shape: top,
                },
            ],
            board,
        },
        port: FeedPort {
            x_center: cx,
            width: design.feed_width,
            copper_layer: 1,
            z_ref: design.z_feed,
        },
        alignment_marks: alignment_marks(&board),
        features: base_features(design),
        patch_centers: vec![(cx, cy)],
    };
    geometry.validate()?;
    Ok(geometry)
}

/// Rectangles making up a slot of centerline length `slot.total_length`,
/// placed inside `patch`. `keepout` is the inset region near the feed.
fn slot_rects(slot: &SlotSpec, patch: &Rect, keepout: &Rect) -> Result<Vec<Rect>> {
    let w = slot.width;
    let c = slot.clearance;
    let (cx, _) = patch.center();
    let rects = match slot.bend_count {
        0 => {
            let y = patch.y1 - c - w / 2.0;
            vec![Rect::new(
                cx - slot.total_length / 2.0,
                y - w / 2.0,
                cx + slot.total_length / 2.0,
                y + w / 2.0,
            )]
        }
        2 => {
            // Base parallel to the patch width near the far edge; arms run
            // back toward the feed.
            let base = (patch.width() - 2.0 * c - w).min(slot.total_length);
            let arm = (slot.total_length - base) / 2.0;
            let yb = patch.y1 - c - w / 2.0;
            let xl = cx - base / 2.0;
            let xr = cx + base / 2.0;
            vec![
                Rect::new(xl - w / 2.0, yb - w / 2.0, xr + w / 2.0, yb + w / 2.0),
                Rect::new(xl - w / 2.0, yb - arm, xl + w / 2.0, yb + w / 2.0),
                Rect::new(xr - w / 2.0, yb - arm, xr + w / 2.0, yb + w / 2.0),
            ]
        }
        n => {
            return Err(Error::Placement(format!(
                "slots with {n} bends are not supported (use 0 or 2)"
            )))
        }
    };
    let inner = Rect::new(patch.x0 + c, patch.y0 + c, patch.x1 - c, patch.y1 - c);
    for r in &rects {
        if !inner.encloses(r, TOL) {
            return Err(Error::Placement(format!(
                "{:.1} mm slot does not fold inside the patch with {:.1} mm clearance",
                slot.total_length * 1e3,
                c * 1e3
            )));
        }
        let hits_inset = r.x0 < keepout.x1 && r.x1 > keepout.x0 && r.y0 < keepout.y1 + c;
        if hits_inset {
            return Err(Error::Placement("slot collides with the inset feed".into()));
        }
    }
    Ok(rects)
}

/// Mono geometry with a (folded) slot removed from the patch.
pub fn build_slotted(
    design: &PatchDesign,
    slot: &SlotSpec,
    board: Rect,
) -> Result<AntennaGeometry> {
    if !(slot.total_length >= 0.0) {
        return Err(Error::domain("slot length must be non-negative"));
    }
    let mut geometry = build_mono(design, board)?;
    if slot.total_length == 0.0 {
        return Ok(geometry);
    }
    if !(slot.width > 0.0) {
        return Err(Error::domain("slot width must be positive"));
    }
    let (cx, cy) = board.center();
    let patch = Rect::centered(cx, cy, design.width, design.length);
    let half = design.feed_width / 2.0 + design.gap;
    let keepout = Rect::new(
        cx - half,
        patch.y0,
        cx + half,
        patch.y0 + design.inset_distance,
    );
    let rects = slot_rects(slot, &patch, &keepout)?;
    if let Some(Layer::Copper { shape, .. }) = geometry.stack.layers.get_mut(2) {
        shape.sub.extend(rects);
    }
    geometry.kind = GeometryKind::Slotted;
    geometry.features.push(("slot width".into(), slot.width));
    geometry.validate()?;
    Ok(geometry)
}

/// Realized centerline length of the slot built for `slot` (exact).
pub fn slot_centerline_length(slot: &SlotSpec, patch_width: f64) -> f64 {
    match slot.bend_count {
        2 => {
            let base = (patch_width - 2.0 * slot.clearance - slot.width).min(slot.total_length);
            base + 2.0 * (slot.total_length - base) / 2.0
        }
        _ => slot.total_length,
    }
}

/// Board for a stacked pair: quarter-wave margin at the lower resonance
/// around the larger patch, widened by the displacement.
pub fn default_stacked_board(lower: &PatchDesign, upper: &PatchDesign, dy: f64) -> Rect {
    let lambda_max = lower.lambda0.max(upper.lambda0);
    let w = lower.width.max(upper.width);
    let l = lower.length.max(upper.length) + 2.0 * dy.abs();
    board_with_margin(w, l, lambda_max / 4.0)
}

/// Ground, lower (parasitic) patch, upper fed patch. The upper patch center is
/// offset by `dy` along the feed axis from the lower patch center.
pub fn build_stacked(
    lower: &PatchDesign,
    upper: &PatchDesign,
    dy: f64,
    template: &StackTemplate,
    board: Rect,
) -> Result<AntennaGeometry> {
    lower.check_buildable()?;
    upper.check_buildable()?;
    if !(dy.abs() < lower.length / 2.0) {
        return Err(Error::Placement(format!(
            "displacement {:.2} mm must be below half the lower patch length",
            dy * 1e3
        )));
    }
    let (cx, cy) = board.center();
    let lower_rect = Rect::centered(cx, cy, lower.width, lower.length);
    let upper_rect = Rect::centered(cx, cy + dy, upper.width, upper.length);
    if !board.encloses(&upper_rect, TOL) || !board.encloses(&lower_rect, TOL) {
        return Err(Error::Placement("displaced patch leaves the board".into()));
    }
    let margin = lower.lambda0.max(upper.lambda0) / 4.0;
    check_margin(&board, &lower_rect, margin)?;
    let top = inset_patch(upper, upper_rect, &board, template.upper_inset);

    let mut features = base_features(upper);
    if !template.upper_inset {
        features.retain(|(n, _)| n != "inset gap");
    }
    let geometry = AntennaGeometry {
        kind: GeometryKind::Stacked,
        stack: LayerStack {
            layers: vec![
                ground(board),
                Layer::Dielectric {
                    substrate: template.lower,
                },
                Layer::Copper {
                    role: "lower-patch".into(),
                    shape: Shape::rect(lower_rect),
                },
                Layer::Dielectric {
                    substrate: template.upper,
                },
                Layer::Copper {
                    role: "upper-patch".into(),
                    shape: top,
                },
            ],
            board,
        },
        port: FeedPort {
            x_center: cx,
            width: upper.feed_width,
            copper_layer: 2,
            z_ref: upper.z_feed,
        },
        alignment_marks: alignment_marks(&board),
        features,
        patch_centers: vec![(cx, cy), (cx, cy + dy)],
    };
    geometry.validate()?;
    Ok(geometry)
}
