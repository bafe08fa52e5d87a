use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use patchkit::consts::{C0, GHZ, MM};
use patchkit::coupling::{surrogate_s11, tune_displacement, CouplingParams, TuneResult};
use patchkit::design::{design_patch, DesignRequest, PatchDesign};
use patchkit::fdtd::{self, write_record, GaussianPulse, PortSpec, SimulationConfig, SurfaceSpec};
use patchkit::geometry::{
    board_with_margin, build_mono, build_slotted, build_stacked, default_board,
    default_stacked_board, export_masks, rasterize, write_geometry, AntennaGeometry, GeometryKind,
    MaterialGrid, RasterOptions, StackTemplate,
};
use patchkit::plot::{polar_plot, s11_plot, split_plot};
use patchkit::post::{
    bandwidth, dft, incident_power, linear_grid, ntff, radiation_efficiency, s11_spectrum,
    BandReport, Efficiency, FarFieldPattern, SParamSpectrum, DEFAULT_THRESHOLD_DB,
};
use patchkit::{Error, Result, SlotSpec, TimeSeriesRecord};

use crate::manifest::Manifest;
use crate::runfile::{RawRun, RunConfig};

/// Rows from the board edge to the port source and probe.
pub const SOURCE_ROW: usize = 2;
/// Smallest accepted fraction of the incident power used as the gain
/// reference. The port difference carries about 1% of the incident power as
/// error, so below this the accepted power is not known within
/// `ENERGY_TOLERANCE`.
const MIN_ACCEPTED: f64 = 0.2;

pub const PROBE_ROW: usize = 6;

/// Error tagged with the pipeline stage that raised it.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub error: Error,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {}

pub type StageResult<T> = std::result::Result<T, StageError>;

trait Stage<T> {
    fn stage(self, stage: &'static str) -> StageResult<T>;
}

impl<T> Stage<T> for Result<T> {
    fn stage(self, stage: &'static str) -> StageResult<T> {
        self.map_err(|error| StageError { stage, error })
    }
}

fn write(dir: &Path, name: &str, data: impl AsRef<[u8]>) -> Result<PathBuf> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::Io {
            path: parent.to_path_buf(),
            source: e,
        })?;
    }
    std::fs::write(&path, data).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    Ok(path)
}

/// Designs in layer order: the fed patch last.
pub fn designs(cfg: &RunConfig) -> Result<Vec<PatchDesign>> {
    let request = |f: f64, gap: Option<f64>| {
        let mut r = DesignRequest::new(f, cfg.substrate);
        r.z_feed = cfg.z0;
        r.gap = gap;
        r
    };
    let lo = cfg.freqs.iter().cloned().fold(f64::MAX, f64::min);
    let hi = cfg.freqs.iter().cloned().fold(f64::MIN, f64::max);
    match cfg.kind {
        GeometryKind::Mono => Ok(vec![design_patch(&request(cfg.freqs[0], cfg.gap))?]),
        // The slot adds the lower band to the patch sized for the upper one.
        GeometryKind::Slotted => Ok(vec![design_patch(&request(hi, cfg.gap))?]),
        GeometryKind::Stacked => Ok(vec![
            design_patch(&request(lo, None))?,
            design_patch(&request(hi, cfg.gap))?,
        ]),
    }
}

fn coupling_params(cfg: &RunConfig, lower: &PatchDesign, upper: &PatchDesign) -> CouplingParams {
    CouplingParams {
        alpha: cfg.alpha,
        q1: cfg.q,
        q2: cfg.q,
        law: cfg.law,
        ..CouplingParams::new(lower.f0, upper.f0)
    }
}

fn band_targets(cfg: &RunConfig) -> (f64, f64) {
    let mut b = cfg.bands.clone();
    b.sort_by(f64::total_cmp);
    (b[0], b[b.len() - 1])
}

pub fn tune(cfg: &RunConfig, lower: &PatchDesign, upper: &PatchDesign) -> Result<TuneResult> {
    tune_displacement(
        band_targets(cfg),
        &coupling_params(cfg, lower, upper),
        cfg.tune_range,
        cfg.tune_steps,
    )
}

/// Geometry for the run; for stacked runs also the displacement used and the
/// tuning sweep when no displacement was given.
pub fn geometry(
    cfg: &RunConfig,
    designs: &[PatchDesign],
) -> Result<(AntennaGeometry, Option<TuneResult>)> {
    match cfg.kind {
        GeometryKind::Mono => Ok((build_mono(&designs[0], default_board(&designs[0]))?, None)),
        GeometryKind::Slotted => {
            let d = &designs[0];
            let lo = cfg.freqs.iter().cloned().fold(f64::MAX, f64::min);
            let board = board_with_margin(d.width, d.length, C0 / lo / 4.0);
            let slot = SlotSpec {
                clearance: cfg.slot_clearance,
                ..SlotSpec::u_slot(cfg.slot_length, cfg.slot_width)
            };
            Ok((build_slotted(d, &slot, board)?, None))
        }
        GeometryKind::Stacked => {
            let (lower, upper) = (&designs[0], &designs[1]);
            let (dy, tuned) = match cfg.displacement {
                Some(d) => (d, None),
                None => {
                    let t = tune(cfg, lower, upper)?;
                    (t.displacement, Some(t))
                }
            };
            let template = StackTemplate::from_substrate(cfg.substrate);
            let board = default_stacked_board(lower, upper, dy);
            Ok((build_stacked(lower, upper, dy, &template, board)?, tuned))
        }
    }
}

fn design_text(designs: &[PatchDesign]) -> String {
    let mut out = String::new();
    for (n, d) in designs.iter().enumerate() {
        if designs.len() > 1 {
            let _ = writeln!(out, "[patch {}: {:.3} GHz]", n + 1, d.f0 / GHZ);
        }
        out.push_str(&d.to_record());
    }
    out
}

fn design_csv(designs: &[PatchDesign]) -> String {
    let mut out = String::new();
    for (n, d) in designs.iter().enumerate() {
        let csv = d.to_csv();
        if n == 0 {
            out.push_str(&csv);
        } else {
            out.extend(csv.lines().skip(1).map(|l| format!("{l}\n")));
        }
    }
    out
}

/// Prints the table-style record and writes it to the output directory.
pub fn cmd_design(run: &RawRun) -> StageResult<(String, Vec<PathBuf>)> {
    let cfg = run.resolve().stage("validate")?;
    let designs = designs(&cfg).stage("design")?;
    let text = design_text(&designs);
    let mut m = Manifest::new(run);
    m.add(
        &cfg.out_dir,
        write(&cfg.out_dir, "design.txt", &text).stage("write")?,
    );
    m.add(
        &cfg.out_dir,
        write(&cfg.out_dir, "design.csv", design_csv(&designs)).stage("write")?,
    );
    let files = m.finish(&cfg.out_dir).stage("write")?;
    Ok((text, files))
}

pub struct TuneReport {
    pub result: TuneResult,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// Displacement sweep for stacked runs: CSV, split plot and the chosen value.
pub fn cmd_tune(run: &RawRun) -> StageResult<TuneReport> {
    let cfg = run.resolve().stage("validate")?;
    if cfg.kind != GeometryKind::Stacked {
        return Err(Error::validation(
            "geometry.kind",
            "tune needs a stacked geometry",
        ))
        .stage("validate");
    }
    let designs = designs(&cfg).stage("design")?;
    let result = tune(&cfg, &designs[0], &designs[1]).stage("tune")?;
    let summary = tune_summary(&cfg, &result);
    let mut m = Manifest::new(run);
    let dir = &cfg.out_dir;
    m.add(dir, write(dir, "tune.csv", result.to_csv()).stage("write")?);
    m.add(
        dir,
        write(
            dir,
            "tune.svg",
            split_plot("Split frequencies vs displacement", &result),
        )
        .stage("write")?,
    );
    m.add(dir, write(dir, "tune.txt", &summary).stage("write")?);
    let files = m.finish(dir).stage("write")?;
    Ok(TuneReport {
        result,
        summary,
        files,
    })
}

fn tune_summary(cfg: &RunConfig, t: &TuneResult) -> String {
    let (lo, hi) = band_targets(cfg);
    let mut s = String::new();
    let _ = writeln!(s, "targets_ghz = {:.4}, {:.4}", lo / GHZ, hi / GHZ);
    let _ = writeln!(s, "alpha_per_m = {}", cfg.alpha);
    let _ = writeln!(s, "law = {:?}", cfg.law);
    let _ = writeln!(s, "chosen_d_mm = {:.4}", t.displacement / MM);
    let _ = writeln!(s, "k = {:.6}", t.best.k);
    let _ = writeln!(
        s,
        "split_ghz = {:.6}, {:.6}",
        t.best.f_low / GHZ,
        t.best.f_high / GHZ
    );
    let _ = writeln!(s, "objective = {:.6e}", t.best.objective);
    let clamped = t.sweep.iter().filter(|p| p.clamped).count();
    if clamped > 0 {
        let _ = writeln!(
            s,
            "over_coupled_points = {clamped} (excluded from the search)"
        );
    }
    if t.displacement_independent {
        let _ = writeln!(
            s,
            "note = coupling is independent of displacement over this sweep"
        );
    }
    s
}

/// Writes per-layer masks and the layer manifest.
pub fn cmd_masks(run: &RawRun) -> StageResult<Vec<PathBuf>> {
    let cfg = run.resolve().stage("validate")?;
    let designs = designs(&cfg).stage("design")?;
    let (geom, _) = geometry(&cfg, &designs).stage("geometry")?;
    let dir = cfg.out_dir.join("masks");
    let masks = export_masks(&geom, &dir).stage("masks")?;
    let mut files: Vec<PathBuf> = masks.into_iter().map(|m| m.path).collect();
    files.push(dir.join("manifest.txt"));
    Ok(files)
}

pub fn raster_options(cfg: &RunConfig) -> RasterOptions {
    let lo = cfg.freqs.iter().cloned().fold(f64::MAX, f64::min);
    let air = cfg.sim.air_above.unwrap_or(C0 / lo / 4.0);
    RasterOptions {
        cell: cfg.sim.cell,
        pml: cfg.sim.pml,
        air_above: (air / cfg.sim.cell).ceil() as usize,
    }
}

pub fn sim_config(cfg: &RunConfig, grid: &MaterialGrid) -> SimulationConfig {
    let mut c = SimulationConfig::new(
        cfg.sim.cell,
        GaussianPulse::covering(cfg.sim.band.0, cfg.sim.band.1),
    );
    c.courant_factor = cfg.sim.courant;
    c.timesteps = cfg.sim.max_steps;
    c.pml_thickness = cfg.sim.pml;
    c.decay_db = cfg.sim.decay_db;
    c.budget = cfg.sim.budget;
    if cfg.sim.far_field {
        let slab_top = grid.sheets.iter().map(|s| s.k).max().unwrap_or(0);
        c.surfaces = vec![
            SurfaceSpec::inset((grid.nx, grid.ny, grid.nz), cfg.sim.pml, true)
                .open_below(slab_top + 1),
        ];
        c.surface_freqs = cfg.freqs.clone();
    }
    c
}

/// S11 at a single frequency straight from the two records.
fn s11_at(antenna: &TimeSeriesRecord, reference: &TimeSeriesRecord, f: f64) -> Complex64 {
    let inc = dft(&reference.v, reference.dt, reference.v_offset, &[f])[0];
    let tot = dft(&antenna.v, antenna.dt, antenna.v_offset, &[f])[0];
    (tot - inc) / inc
}

pub struct PatternResult {
    pub pattern: FarFieldPattern,
    pub efficiency: Option<Efficiency>,
    pub s11: Complex64,
}

pub struct Bundle {
    pub config: RunConfig,
    pub designs: Vec<PatchDesign>,
    pub tune: Option<TuneResult>,
    pub displacement: Option<f64>,
    pub geometry: AntennaGeometry,
    pub grid_dims: (usize, usize, usize),
    pub antenna: TimeSeriesRecord,
    pub reference: TimeSeriesRecord,
    pub spectrum: SParamSpectrum,
    pub bands: BandReport,
    pub patterns: Vec<PatternResult>,
    pub surrogate: Option<SParamSpectrum>,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn cut_plot(p: &FarFieldPattern, gain: bool) -> String {
    let pick = |phi: f64| -> Vec<(f64, f64)> {
        p.cut(phi)
            .into_iter()
            .map(|(a, d, g)| (a, if gain { g } else { d }))
            .collect()
    };
    let what = if gain { "Gain" } else { "Directivity" };
    polar_plot(
        &format!("{what} at {:.3} GHz", p.freq / GHZ),
        &[("phi = 0 deg", pick(0.0)), ("phi = 90 deg", pick(90.0))],
        -30.0,
    )
}

/// Full pipeline: design, geometry, masks, raster, reference and antenna
/// runs, S11, bands, patterns and plots. The manifest is written last.
pub fn cmd_simulate(run: &RawRun) -> StageResult<Bundle> {
    let cfg = run.resolve().stage("validate")?;
    let dir = cfg.out_dir.clone();
    let mut m = Manifest::new(run);

    let designs = designs(&cfg).stage("design")?;
    m.add(
        &dir,
        write(&dir, "design.txt", design_text(&designs)).stage("write")?,
    );
    m.add(
        &dir,
        write(&dir, "design.csv", design_csv(&designs)).stage("write")?,
    );

    let (geom, tuned) = geometry(&cfg, &designs).stage("geometry")?;
    let displacement = match cfg.kind {
        GeometryKind::Stacked => Some(
            cfg.displacement
                .or(tuned.as_ref().map(|t| t.displacement))
                .unwrap_or(0.0),
        ),
        _ => None,
    };
    if let Some(t) = &tuned {
        m.add(&dir, write(&dir, "tune.csv", t.to_csv()).stage("write")?);
        m.add(
            &dir,
            write(
                &dir,
                "tune.svg",
                split_plot("Split frequencies vs displacement", t),
            )
            .stage("write")?,
        );
        m.add(
            &dir,
            write(&dir, "tune.txt", tune_summary(&cfg, t)).stage("write")?,
        );
    }
    m.add(
        &dir,
        write(&dir, "geometry.txt", write_geometry(&geom)).stage("write")?,
    );
    let masks = export_masks(&geom, &dir.join("masks")).stage("masks")?;
    for mf in masks {
        m.add(&dir, mf.path);
    }
    m.add(&dir, dir.join("masks").join("manifest.txt"));

    let grid = rasterize(&geom, &raster_options(&cfg)).stage("raster")?;
    let sc = sim_config(&cfg, &grid);
    let port = PortSpec::from_grid(&grid, SOURCE_ROW, PROBE_ROW).stage("port")?;
    log::info!(
        "grid {} x {} x {} ({} cells), dt {:.4e} s",
        grid.nx,
        grid.ny,
        grid.nz,
        grid.cell_count(),
        sc.dt()
    );
    let reference = fdtd::reference_run(&grid, &sc, &port).stage("reference run")?;
    log::info!(
        "reference run: {} steps, {:?}",
        reference.steps(),
        reference.termination
    );
    let antenna = fdtd::run(&grid, &sc, &port).stage("antenna run")?;
    log::info!(
        "antenna run: {} steps, {:?}",
        antenna.steps(),
        antenna.termination
    );
    m.add(
        &dir,
        write(&dir, "records/reference.bin", write_record(&reference)).stage("write")?,
    );
    m.add(
        &dir,
        write(&dir, "records/antenna.bin", write_record(&antenna)).stage("write")?,
    );
    m.add(
        &dir,
        write(&dir, "records/reference.csv", reference.to_csv()).stage("write")?,
    );
    m.add(
        &dir,
        write(&dir, "records/antenna.csv", antenna.to_csv()).stage("write")?,
    );

    let freqs = linear_grid(cfg.sim.band.0, cfg.sim.band.1, cfg.sim.points);
    let spectrum = s11_spectrum(&antenna, &reference, &freqs).stage("s11")?;
    let bands = bandwidth(&spectrum, DEFAULT_THRESHOLD_DB);
    m.add(
        &dir,
        write(&dir, "s11.csv", spectrum.to_csv()).stage("write")?,
    );
    m.add(
        &dir,
        write(&dir, "bands.csv", bands.to_csv()).stage("write")?,
    );

    let surrogate = match (cfg.kind, displacement) {
        (GeometryKind::Stacked, Some(d)) => {
            let params = CouplingParams {
                d,
                ..coupling_params(&cfg, &designs[0], &designs[1])
            };
            Some(surrogate_s11(&params, &freqs).stage("surrogate")?)
        }
        _ => None,
    };
    let mut curves = vec![("FDTD", &spectrum)];
    if let Some(s) = &surrogate {
        m.add(
            &dir,
            write(&dir, "surrogate_s11.csv", s.to_csv()).stage("write")?,
        );
        curves.push(("coupled-resonator surrogate", s));
    }
    m.add(
        &dir,
        write(&dir, "s11.svg", s11_plot("S11", &curves)).stage("write")?,
    );

    let mut patterns = Vec::new();
    if let Some(surface) = antenna.surfaces.first() {
        let p_inc = incident_power(&reference, &cfg.freqs);
        for (f, pi) in cfg.freqs.iter().zip(p_inc) {
            let s = s11_at(&antenna, &reference, *f);
            let accepted = pi * (1.0 - s.norm_sqr());
            // Near total reflection the port difference is mostly noise.
            let weak = !(accepted > MIN_ACCEPTED * pi);
            let reference_power = if weak { 0.0 } else { accepted };
            let mut pattern = ntff(surface, *f, Some(reference_power), cfg.sim.pattern_step_deg)
                .stage("far field")?;
            if weak {
                pattern.warnings.push(format!(
                    "port accepts {:.2}% of the incident power, below the {:.0}% needed to reference gain",
                    100.0 * (1.0 - s.norm_sqr()),
                    100.0 * MIN_ACCEPTED
                ));
            }
            let efficiency = match radiation_efficiency(&pattern) {
                _ if pattern.gain.is_empty() => None,
                Ok(e) => Some(e),
                Err(e @ Error::EnergyAccounting { .. }) => return Err(e).stage("far field"),
                Err(e) => {
                    pattern
                        .warnings
                        .push(format!("efficiency unavailable: {e}"));
                    None
                }
            };
            let tag = format!("{:.3}ghz", f / GHZ);
            m.add(
                &dir,
                write(&dir, &format!("pattern_{tag}.csv"), pattern.to_csv()).stage("write")?,
            );
            m.add(
                &dir,
                write(
                    &dir,
                    &format!("pattern_{tag}_directivity.svg"),
                    cut_plot(&pattern, false),
                )
                .stage("write")?,
            );
            if !pattern.gain.is_empty() {
                m.add(
                    &dir,
                    write(
                        &dir,
                        &format!("pattern_{tag}_gain.svg"),
                        cut_plot(&pattern, true),
                    )
                    .stage("write")?,
                );
            }
            patterns.push(PatternResult {
                pattern,
                efficiency,
                s11: s,
            });
        }
    }

    let summary = simulate_summary(
        &cfg,
        &designs,
        displacement,
        &grid,
        &antenna,
        &reference,
        &spectrum,
        &bands,
        &patterns,
    );
    m.add(&dir, write(&dir, "summary.txt", &summary).stage("write")?);
    let files = m.finish(&dir).stage("write")?;
    Ok(Bundle {
        config: cfg,
        designs,
        tune: tuned,
        displacement,
        geometry: geom,
        grid_dims: (grid.nx, grid.ny, grid.nz),
        antenna,
        reference,
        spectrum,
        bands,
        patterns,
        surrogate,
        files,
        summary,
    })
}

#[allow(clippy::too_many_arguments)]
fn simulate_summary(
    cfg: &RunConfig,
    designs: &[PatchDesign],
    displacement: Option<f64>,
    grid: &MaterialGrid,
    antenna: &TimeSeriesRecord,
    reference: &TimeSeriesRecord,
    spectrum: &SParamSpectrum,
    bands: &BandReport,
    patterns: &[PatternResult],
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "kind = {}", cfg.kind.name());
    for d in designs {
        let _ = writeln!(
            s,
            "patch {:.3} GHz: W {:.3} mm, L {:.3} mm, x0 {:.3} mm, g {:.3} mm, Wt {:.3} mm",
            d.f0 / GHZ,
            d.width / MM,
            d.length / MM,
            d.inset_distance / MM,
            d.gap / MM,
            d.feed_width / MM
        );
    }
    if let Some(d) = displacement {
        let _ = writeln!(s, "displacement = {:.4} mm", d / MM);
    }
    let _ = writeln!(
        s,
        "grid = {} x {} x {} cells of {:.3} mm",
        grid.nx,
        grid.ny,
        grid.nz,
        cfg.sim.cell / MM
    );
    for w in &grid.warnings {
        let _ = writeln!(s, "raster warning: {w}");
    }
    let _ = writeln!(
        s,
        "reference steps = {} ({:?})",
        reference.steps(),
        reference.termination
    );
    let _ = writeln!(
        s,
        "antenna steps = {} ({:?})",
        antenna.steps(),
        antenna.termination
    );
    for w in &spectrum.warnings {
        let _ = writeln!(s, "s11 warning: {w}");
    }
    if let Some((f, db)) = spectrum.min_in(cfg.sim.band.0, cfg.sim.band.1) {
        let _ = writeln!(s, "deepest S11 = {db:.3} dB at {:.4} GHz", f / GHZ);
    }
    for i in spectrum.dip_indices() {
        let db = spectrum.mag_db()[i];
        if db < -3.0 {
            let _ = writeln!(s, "dip {:.4} GHz {:.3} dB", spectrum.freqs[i] / GHZ, db);
        }
    }
    if bands.bands.is_empty() {
        let _ = writeln!(s, "no band below {} dB", bands.threshold_db);
    }
    for b in &bands.bands {
        let _ = writeln!(
            s,
            "band {:.4}-{:.4} GHz, min {:.3} dB at {:.4} GHz",
            b.f_low / GHZ,
            b.f_high / GHZ,
            b.s11_min_db,
            b.f_min / GHZ
        );
    }
    for p in patterns {
        let (d, th, ph) = p.pattern.peak();
        let _ = writeln!(
            s,
            "pattern {:.3} GHz: peak directivity {:.3} dBi at theta {} phi {}, |S11| {:.3} dB",
            p.pattern.freq / GHZ,
            10.0 * d.log10(),
            th,
            ph,
            20.0 * p.s11.norm().log10()
        );
        if let Some(e) = p.efficiency {
            let _ = writeln!(
                s,
                "  radiation efficiency {:.4} ({:.3} dB), peak IEEE gain {:.3} dBi, peak realized gain {:.3} dBi",
                e.linear,
                e.db,
                10.0 * (d * e.linear).log10(),
                10.0 * (d * e.linear * (1.0 - p.s11.norm_sqr())).log10()
            );
        }
        for w in &p.pattern.warnings {
            let _ = writeln!(s, "  warning: {w}");
        }
    }
    s
}

/// Outcome of one sweep point.
pub struct SweepRow {
    pub value: String,
    pub dir: PathBuf,
    pub outcome: std::result::Result<(Option<(f64, f64)>, usize), String>,
}

/// Re-runs `simulate` once per value of `param`, each into its own directory,
/// and writes `sweep.csv`.
pub fn cmd_sweep(
    run: &RawRun,
    param: &str,
    values: &[String],
) -> StageResult<(Vec<SweepRow>, PathBuf)> {
    let base = run.resolve().stage("validate")?;
    let mut rows = Vec::new();
    for v in values {
        let dir = base
            .out_dir
            .join(format!("{}_{}", param.replace('.', "_"), v));
        let sets = vec![
            format!("{param}={v}"),
            format!("output.dir=\"{}\"", dir.display()),
        ];
        let mut doc = toml::Table::try_from(run)
            .map_err(|e| Error::Format(e.to_string()))
            .stage("validate")?;
        crate::runfile::apply_overrides(&mut doc, &sets).stage("validate")?;
        let point: RawRun = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| Error::validation(param, e.to_string()))
            .stage("validate")?;
        point.resolve().stage("validate")?;
        let outcome = match cmd_simulate(&point) {
            Ok(b) => Ok((
                b.spectrum.min_in(b.config.sim.band.0, b.config.sim.band.1),
                b.bands.bands.len(),
            )),
            Err(e) => Err(e.to_string()),
        };
        rows.push(SweepRow {
            value: v.clone(),
            dir,
            outcome,
        });
    }
    let mut csv = format!("{param},deepest_f_hz,deepest_db,bands,error\n");
    for r in &rows {
        match &r.outcome {
            Ok((Some((f, db)), n)) => {
                let _ = writeln!(csv, "{},{:.6e},{:.4},{},", r.value, f, db, n);
            }
            Ok((None, n)) => {
                let _ = writeln!(csv, "{},,,{},", r.value, n);
            }
            Err(e) => {
                let _ = writeln!(csv, "{},,,,\"{}\"", r.value, e.replace('"', "'"));
            }
        }
    }
    let path = write(&base.out_dir, "sweep.csv", csv).stage("write")?;
    Ok((rows, path))
}

/// Re-renders a CSV written by this tool as SVG, chosen by its header.
pub fn cmd_plot(csv_path: &Path, out: &Path) -> StageResult<PathBuf> {
    let text = std::fs::read_to_string(csv_path)
        .map_err(|e| Error::Io {
            path: csv_path.to_path_buf(),
            source: e,
        })
        .stage("read")?;
    let header = text.lines().next().unwrap_or("");
    let title = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let svg = if header.starts_with("f_hz") {
        let s = SParamSpectrum::from_csv(&text, 50.0).stage("parse")?;
        s11_plot(&title, &[(title.as_str(), &s)])
    } else if header.starts_with("d_m") {
        crate::csvplot::tune_csv_plot(&title, &text).stage("parse")?
    } else if header.starts_with("theta_deg") {
        crate::csvplot::pattern_csv_plot(&title, &text).stage("parse")?
    } else {
        return Err(Error::Format(format!("unrecognized CSV header `{header}`"))).stage("parse");
    };
    let dir = out.parent().unwrap_or(Path::new("."));
    let name = out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    write(
        if dir.as_os_str().is_empty() {
            Path::new(".")
        } else {
            dir
        },
        &name,
        svg,
    )
    .stage("write")
}
