//! Declarative run description: TOML sections for the substrate, target
//! frequencies, geometry choice, overrides, simulation settings and output.

use std::path::{Path, PathBuf};

use patchkit::consts::{GHZ, MM};
use patchkit::coupling::{CouplingLaw, DEFAULT_ALPHA};
use patchkit::fdtd::DEFAULT_BUDGET;
use patchkit::geometry::GeometryKind;
use patchkit::{Error, Result, SubstrateSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRun {
    pub substrate: Option<RawSubstrate>,
    pub targets: Option<RawTargets>,
    pub geometry: Option<RawGeometry>,
    #[serde(default)]
    pub overrides: RawOverrides,
    #[serde(default)]
    pub simulation: RawSimulation,
    #[serde(default)]
    pub output: RawOutput,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSubstrate {
    pub eps_r: Option<f64>,
    pub height_mm: Option<f64>,
    pub loss_tangent: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTargets {
    /// Design frequencies, one or two.
    pub f_ghz: Option<Vec<f64>>,
    /// Band targets for tuning and reporting; defaults to `f_ghz`.
    pub bands_ghz: Option<Vec<f64>>,
    pub z0_ohm: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGeometry {
    pub kind: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOverrides {
    /// Inset gap of the fed patch.
    pub gap_mm: Option<f64>,
    pub slot_length_mm: Option<f64>,
    pub slot_width_mm: Option<f64>,
    pub slot_clearance_mm: Option<f64>,
    /// Fixed stacking displacement; the tuned value is used when absent.
    pub displacement_mm: Option<f64>,
    pub alpha_per_m: Option<f64>,
    pub coupling_law: Option<String>,
    pub q: Option<f64>,
    pub tune_range_mm: Option<Vec<f64>>,
    pub tune_steps: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSimulation {
    pub cell_mm: Option<f64>,
    pub courant: Option<f64>,
    pub max_steps: Option<usize>,
    pub pml_cells: Option<usize>,
    pub air_above_mm: Option<f64>,
    pub decay_db: Option<f64>,
    pub band_ghz: Option<Vec<f64>>,
    pub points: Option<usize>,
    pub far_field: Option<bool>,
    pub pattern_step_deg: Option<f64>,
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub dir: Option<String>,
}

/// Validated run with SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub substrate: SubstrateSpec,
    pub freqs: Vec<f64>,
    pub bands: Vec<f64>,
    pub z0: f64,
    pub kind: GeometryKind,
    pub gap: Option<f64>,
    pub slot_length: f64,
    pub slot_width: f64,
    pub slot_clearance: f64,
    pub displacement: Option<f64>,
    pub alpha: f64,
    pub law: CouplingLaw,
    pub q: f64,
    pub tune_range: (f64, f64),
    pub tune_steps: usize,
    pub sim: SimSettings,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub cell: f64,
    pub courant: f64,
    pub max_steps: usize,
    pub pml: usize,
    /// Air between the top copper and the absorber; a quarter wavelength at
    /// the lowest design frequency when absent.
    pub air_above: Option<f64>,
    pub decay_db: f64,
    /// Analysis and excitation band.
    pub band: (f64, f64),
    pub points: usize,
    pub far_field: bool,
    pub pattern_step_deg: f64,
    pub budget: u64,
}

fn bad(path: &str, msg: impl Into<String>) -> Error {
    Error::validation(path, msg)
}

fn positive(path: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(path, format!("must be positive, got {v}")))
    }
}

fn req<T: Copy>(v: Option<T>, path: &str) -> Result<T> {
    v.ok_or_else(|| bad(path, "missing"))
}

/// Parses a value given on the command line: TOML syntax first, bare string
/// otherwise.
fn parse_value(text: &str) -> toml::Value {
    let doc = format!("v = {text}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t
            .remove("v")
            .unwrap_or_else(|| toml::Value::String(text.into())),
        Err(_) => toml::Value::String(text.into()),
    }
}

/// Applies `section.key=value` edits to a parsed document.
pub fn apply_overrides(doc: &mut toml::Table, sets: &[String]) -> Result<()> {
    for s in sets {
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| bad(s, "expected key=value"))?;
        let parts: Vec<&str> = key.trim().split('.').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(bad(key, "empty key segment"));
        }
        let mut table = &mut *doc;
        for p in &parts[..parts.len() - 1] {
            let entry = table
                .entry(p.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            table = entry
                .as_table_mut()
                .ok_or_else(|| bad(key, format!("`{p}` is not a section")))?;
        }
        table.insert(
            parts[parts.len() - 1].to_string(),
            parse_value(value.trim()),
        );
    }
    Ok(())
}

fn toml_error(e: toml::de::Error) -> Error {
    let msg = e.message().to_string();
    // serde reports the offending field in backticks; surface it as the path.
    let path = msg
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "run".into());
    bad(&path, msg)
}

pub fn parse_run(text: &str, sets: &[String]) -> Result<RawRun> {
    let mut doc: toml::Table = text.parse().map_err(toml_error)?;
    apply_overrides(&mut doc, sets)?;
    RawRun::deserialize(toml::Value::Table(doc)).map_err(toml_error)
}

pub fn load_run(path: &Path, sets: &[String]) -> Result<RawRun> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_run(&text, sets)
}

impl RawRun {
    /// Canonical TOML text of the run, used for the configuration hash. The
    /// output location is left out: it does not affect any result.
    pub fn canonical(&self) -> String {
        let mut run = self.clone();
        run.output.dir = None;
        toml::to_string(&run).unwrap_or_default()
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let s = self
            .substrate
            .as_ref()
            .ok_or_else(|| bad("substrate", "missing section"))?;
        let eps_r = req(s.eps_r, "substrate.eps_r")?;
        if !(eps_r > 1.0) || !eps_r.is_finite() {
            return Err(bad(
                "substrate.eps_r",
                format!("must exceed 1, got {eps_r}"),
            ));
        }
        let height = positive(
            "substrate.height_mm",
            req(s.height_mm, "substrate.height_mm")?,
        )? * MM;
        let tand = s.loss_tangent.unwrap_or(0.0);
        if !(tand >= 0.0) || !tand.is_finite() {
            return Err(bad(
                "substrate.loss_tangent",
                format!("must be non-negative, got {tand}"),
            ));
        }
        let substrate =
            SubstrateSpec::new(eps_r, height, tand).map_err(|e| bad("substrate", e.to_string()))?;

        let t = self
            .targets
            .as_ref()
            .ok_or_else(|| bad("targets", "missing section"))?;
        let f = t
            .f_ghz
            .clone()
            .ok_or_else(|| bad("targets.f_ghz", "missing"))?;
        if f.is_empty() || f.len() > 2 {
            return Err(bad("targets.f_ghz", "expected one or two frequencies"));
        }
        for v in &f {
            positive("targets.f_ghz", *v)?;
        }
        let freqs: Vec<f64> = f.iter().map(|v| v * GHZ).collect();
        let bands: Vec<f64> = match &t.bands_ghz {
            Some(b) => {
                if b.len() != f.len() {
                    return Err(bad(
                        "targets.bands_ghz",
                        "must list as many entries as targets.f_ghz",
                    ));
                }
                for v in b {
                    positive("targets.bands_ghz", *v)?;
                }
                b.iter().map(|v| v * GHZ).collect()
            }
            None => freqs.clone(),
        };
        let z0 = positive("targets.z0_ohm", t.z0_ohm.unwrap_or(50.0))?;

        let g = self
            .geometry
            .as_ref()
            .ok_or_else(|| bad("geometry", "missing section"))?;
        let kind_name = g
            .kind
            .as_deref()
            .ok_or_else(|| bad("geometry.kind", "missing"))?;
        let kind = GeometryKind::parse(kind_name)
            .ok_or_else(|| bad("geometry.kind", format!("unknown kind `{kind_name}`")))?;
        let needed = if kind == GeometryKind::Mono { 1 } else { 2 };
        if freqs.len() != needed {
            return Err(bad(
                "targets.f_ghz",
                format!("{} geometry needs {needed} target frequencies", kind.name()),
            ));
        }

        let o = &self.overrides;
        let gap = o
            .gap_mm
            .map(|v| positive("overrides.gap_mm", v))
            .transpose()?
            .map(|v| v * MM);
        let slot_length = o.slot_length_mm.unwrap_or(35.0);
        if !(slot_length >= 0.0) {
            return Err(bad("overrides.slot_length_mm", "must be non-negative"));
        }
        let slot_width = positive("overrides.slot_width_mm", o.slot_width_mm.unwrap_or(1.0))?;
        let slot_clearance = o.slot_clearance_mm.unwrap_or(1.0);
        if !(slot_clearance >= 0.0) {
            return Err(bad("overrides.slot_clearance_mm", "must be non-negative"));
        }
        if let Some(d) = o.displacement_mm {
            if !d.is_finite() {
                return Err(bad("overrides.displacement_mm", "must be finite"));
            }
        }
        let alpha = o.alpha_per_m.unwrap_or(DEFAULT_ALPHA);
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(bad(
                "overrides.alpha_per_m",
                format!("must be non-negative, got {alpha}"),
            ));
        }
        let law = match o.coupling_law.as_deref().unwrap_or("linear") {
            "linear" => CouplingLaw::Linear,
            "affine" => CouplingLaw::Affine,
            other => {
                return Err(bad(
                    "overrides.coupling_law",
                    format!("unknown law `{other}`"),
                ))
            }
        };
        let q = positive("overrides.q", o.q.unwrap_or(30.0))?;
        let tune_range = match &o.tune_range_mm {
            None => (0.0, 8.0 * MM),
            Some(r) if r.len() == 2 && r[0] >= 0.0 && r[1] >= r[0] && r[1].is_finite() => {
                (r[0] * MM, r[1] * MM)
            }
            Some(_) => {
                return Err(bad(
                    "overrides.tune_range_mm",
                    "expected [lo, hi] with 0 <= lo <= hi",
                ))
            }
        };
        let tune_steps = o.tune_steps.unwrap_or(81);
        if tune_steps < 2 {
            return Err(bad("overrides.tune_steps", "needs at least two steps"));
        }

        let m = &self.simulation;
        let cell = positive("simulation.cell_mm", m.cell_mm.unwrap_or(0.5))? * MM;
        let courant = m.courant.unwrap_or(0.99);
        if !(courant > 0.0 && courant <= 1.0) {
            return Err(bad(
                "simulation.courant",
                format!("must lie in (0, 1], got {courant}"),
            ));
        }
        let pml = m.pml_cells.unwrap_or(10);
        if pml < patchkit::fdtd::MIN_PML {
            return Err(bad(
                "simulation.pml_cells",
                format!("needs at least {} cells", patchkit::fdtd::MIN_PML),
            ));
        }
        let air_above = m
            .air_above_mm
            .map(|v| positive("simulation.air_above_mm", v))
            .transpose()?
            .map(|v| v * MM);
        let decay_db = positive("simulation.decay_db", m.decay_db.unwrap_or(60.0))?;
        let lo = freqs.iter().cloned().fold(f64::MAX, f64::min);
        let hi = freqs.iter().cloned().fold(f64::MIN, f64::max);
        let band = match &m.band_ghz {
            Some(b) if b.len() == 2 && b[0] > 0.0 && b[1] > b[0] => (b[0] * GHZ, b[1] * GHZ),
            Some(_) => {
                return Err(bad(
                    "simulation.band_ghz",
                    "expected [lo, hi] with 0 < lo < hi",
                ))
            }
            None => {
                if needed == 1 {
                    (0.6 * lo, 1.4 * hi)
                } else {
                    (1e9, 8e9)
                }
            }
        };
        for f in freqs.iter().chain(&bands) {
            if *f < band.0 || *f > band.1 {
                return Err(bad(
                    "simulation.band_ghz",
                    format!("band must cover the target {:.3} GHz", f / GHZ),
                ));
            }
        }
        let points = m.points.unwrap_or(701);
        if points < 2 {
            return Err(bad("simulation.points", "needs at least two points"));
        }
        let step = m.pattern_step_deg.unwrap_or(2.0);
        if !(step > 0.0) || (180.0 / step).fract().abs() > 1e-9 {
            return Err(bad("simulation.pattern_step_deg", "must divide 180"));
        }
        let sim = SimSettings {
            cell,
            courant,
            max_steps: m.max_steps.unwrap_or(40_000),
            pml,
            air_above,
            decay_db,
            band,
            points,
            far_field: m.far_field.unwrap_or(true),
            pattern_step_deg: step,
            budget: m.budget.unwrap_or(DEFAULT_BUDGET),
        };
        let out_dir = PathBuf::from(
            self.output
                .dir
                .clone()
                .unwrap_or_else(|| "patchkit-out".into()),
        );
        Ok(RunConfig {
            substrate,
            freqs,
            bands,
            z0,
            kind,
            gap,
            slot_length: slot_length * MM,
            slot_width: slot_width * MM,
            slot_clearance: slot_clearance * MM,
            displacement: o.displacement_mm.map(|d| d * MM),
            alpha,
            law,
            q,
            tune_range,
            tune_steps,
            sim,
            out_dir,
        })
    }
}
