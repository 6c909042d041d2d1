//! Command implementations behind the CLI and their deterministic text output.
//!
//! Every number is written in its shortest round-trip decimal form, fields
//! appear in a fixed order and no timestamps are recorded, so identical
//! inputs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::analysis::{pearson_correlation, rms_bandwidth_diag, schmidt_decompose, Diagonal};
use crate::biphoton::{joint_spectrum_grid, FrequencyGrid, JointSpectrumGrid, PhaseMode};
use crate::config::{RunConfig, SpanPolicy};
use crate::dispersion::SPEED_OF_LIGHT;
use crate::error::{Error, Result};
use crate::gaussmodel::{
    bandwidth_minus, bandwidth_plus, classify_correlation, design_for_bandwidth,
    gaussian_joint_spectrum, max_bandwidth_plus, separability_waist, Correlation,
    GaussianSpectrumModel, DEFAULT_CORRELATION_TOLERANCE,
};
use crate::phasematch::{effective_pump_inverse_group_velocity, optimal_tilt, SourceConfig};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column header of joint-spectrum CSV files.
pub const GRID_CSV_HEADER: &str = "Λs_nm,Λi_nm,Re,Im,S";

const NM: f64 = 1e-9;
const UM: f64 = 1e-6;

/// Shortest decimal representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    ryu::Buffer::new().format(x).to_string()
}

/// Knobs shared by all commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub n: usize,
    pub span: SpanPolicy,
    /// Phase treatment of written grids and of the headline K/P.
    pub phase: PhaseMode,
    pub tolerance: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            n: crate::biphoton::DEFAULT_GRID_POINTS,
            span: SpanPolicy::Auto,
            phase: PhaseMode::Full,
            tolerance: DEFAULT_CORRELATION_TOLERANCE,
        }
    }
}

impl Options {
    pub fn from_run(run: &RunConfig) -> Self {
        Options {
            n: run.grid_n,
            span: run.span,
            ..Options::default()
        }
    }

    pub fn grid(&self, source: &SourceConfig) -> Result<FrequencyGrid> {
        match self.span {
            SpanPolicy::Auto => FrequencyGrid::auto(source, self.n),
            SpanPolicy::HalfSpanNm(s) => FrequencyGrid::square(s * NM, self.n),
        }
    }
}

/// Ordered `key = value` record under a `[section]` header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Record {
    pub section: String,
    pub fields: Vec<(String, String)>,
}

impl Record {
    pub fn new(section: &str) -> Self {
        Record {
            section: section.to_string(),
            fields: Vec::new(),
        }
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.fields.push((key.to_string(), fmt_f64(value)));
        self
    }

    pub fn text(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = format!("[{}]\n", self.section);
        for (k, v) in &self.fields {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

/// Full-model measurements on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub measured_plus: f64,
    pub measured_minus: f64,
    pub pearson: f64,
    pub schmidt_full: f64,
    pub schmidt_stripped: f64,
}

impl Measurement {
    pub fn purity_full(&self) -> f64 {
        1.0 / self.schmidt_full
    }

    pub fn purity_stripped(&self) -> f64 {
        1.0 / self.schmidt_stripped
    }
}

/// Evaluates the full model with and without the longitudinal phase.
pub fn measure(
    source: &SourceConfig,
    opts: &Options,
) -> Result<(Measurement, JointSpectrumGrid, JointSpectrumGrid)> {
    let grid = opts.grid(source)?;
    let full = joint_spectrum_grid(source, grid, PhaseMode::Full)?;
    let stripped = joint_spectrum_grid(source, grid, PhaseMode::Stripped)?;
    let m = Measurement {
        measured_plus: rms_bandwidth_diag(&full, Diagonal::Plus),
        measured_minus: rms_bandwidth_diag(&full, Diagonal::Minus),
        pearson: pearson_correlation(&full)?,
        schmidt_full: schmidt_decompose(&full)?.schmidt_number,
        schmidt_stripped: schmidt_decompose(&stripped)?.schmidt_number,
    };
    Ok((m, full, stripped))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub phase_matching_angle: f64,
    pub pump_inverse_group_velocity: f64,
    pub signal_inverse_group_velocity: f64,
    pub pump_walkoff: f64,
    pub effective_pump_inverse_group_velocity: f64,
    pub tilt: f64,
    pub optimal_tilt: f64,
    pub waist: f64,
    pub bandwidth_plus: f64,
    pub bandwidth_minus: f64,
    pub max_bandwidth_plus: f64,
    pub separability_waist: f64,
    pub classification: Correlation,
    pub measurement: Measurement,
    pub phase: PhaseMode,
}

impl Summary {
    /// Headline Schmidt number for the selected phase treatment.
    pub fn schmidt_number(&self) -> f64 {
        match self.phase {
            PhaseMode::Full => self.measurement.schmidt_full,
            PhaseMode::Stripped => self.measurement.schmidt_stripped,
        }
    }

    pub fn record(&self) -> Record {
        let m = &self.measurement;
        let mut r = Record::new("summary");
        r.num(
            "phase_matching_angle_deg",
            self.phase_matching_angle.to_degrees(),
        )
        .num(
            "pump_group_index",
            self.pump_inverse_group_velocity * SPEED_OF_LIGHT,
        )
        .num(
            "pump_inverse_group_velocity_s_per_m",
            self.pump_inverse_group_velocity,
        )
        .num(
            "signal_inverse_group_velocity_s_per_m",
            self.signal_inverse_group_velocity,
        )
        .num("pump_walkoff_deg", self.pump_walkoff.to_degrees())
        .num(
            "effective_pump_inverse_group_velocity_s_per_m",
            self.effective_pump_inverse_group_velocity,
        )
        .num("tilt_deg", self.tilt.to_degrees())
        .num("optimal_tilt_deg", self.optimal_tilt.to_degrees())
        .num("waist_um", self.waist / UM)
        .num("bandwidth_plus_nm", self.bandwidth_plus / NM)
        .num("bandwidth_minus_nm", self.bandwidth_minus / NM)
        .num("max_bandwidth_plus_nm", self.max_bandwidth_plus / NM)
        .num("separability_waist_um", self.separability_waist / UM)
        .text("classification", self.classification.as_str())
        .num("measured_bandwidth_plus_nm", m.measured_plus / NM)
        .num("measured_bandwidth_minus_nm", m.measured_minus / NM)
        .num("pearson_r", m.pearson)
        .text(
            "phase",
            match self.phase {
                PhaseMode::Full => "full",
                PhaseMode::Stripped => "stripped",
            },
        )
        .num("schmidt_number", self.schmidt_number())
        .num("purity", 1.0 / self.schmidt_number())
        .num("schmidt_number_full_phase", m.schmidt_full)
        .num("purity_full_phase", m.purity_full())
        .num("schmidt_number_stripped_phase", m.schmidt_stripped)
        .num("purity_stripped_phase", m.purity_stripped());
        r
    }
}

pub fn cmd_summary(source: &SourceConfig, opts: &Options) -> Result<Summary> {
    Ok(summarize(source, opts)?.0)
}

fn summarize(
    source: &SourceConfig,
    opts: &Options,
) -> Result<(Summary, JointSpectrumGrid, JointSpectrumGrid)> {
    let model = GaussianSpectrumModel::from_config(source)?;
    let (measurement, full, stripped) = measure(source, opts)?;
    let summary = Summary {
        phase_matching_angle: source.crystal.cut_angle,
        pump_inverse_group_velocity: source.pump_inverse_group_velocity()?,
        signal_inverse_group_velocity: source.signal_inverse_group_velocity()?,
        pump_walkoff: source.pump_walkoff()?,
        effective_pump_inverse_group_velocity: effective_pump_inverse_group_velocity(source)?,
        tilt: source.tilt.angle(),
        optimal_tilt: optimal_tilt(source)?,
        waist: source.pump.waist,
        bandwidth_plus: model.plus,
        bandwidth_minus: model.minus,
        max_bandwidth_plus: max_bandwidth_plus(source),
        separability_waist: separability_waist(source)?,
        classification: classify_correlation(&model, opts.tolerance)?,
        measurement,
        phase: opts.phase,
    };
    Ok((summary, full, stripped))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TiltScanRow {
    pub tilt: f64,
    pub bandwidth_plus: f64,
    pub max_bandwidth_plus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TiltScan {
    pub rows: Vec<TiltScanRow>,
    pub argmax: usize,
}

impl TiltScan {
    pub fn to_csv(&self, meta: &[(String, String)]) -> String {
        let mut s = csv_preamble("tilt scan", meta);
        s.push_str("xi_deg,bandwidth_plus_nm,max_bandwidth_plus_nm,argmax\n");
        for (k, row) in self.rows.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                fmt_f64(row.tilt.to_degrees()),
                fmt_f64(row.bandwidth_plus / NM),
                fmt_f64(row.max_bandwidth_plus / NM),
                u8::from(k == self.argmax)
            );
        }
        s
    }

    /// True when the sequence rises to the argmax and falls after it.
    pub fn is_single_peaked(&self) -> bool {
        let v: Vec<f64> = self.rows.iter().map(|r| r.bandwidth_plus).collect();
        v[..=self.argmax].windows(2).all(|w| w[1] >= w[0])
            && v[self.argmax..].windows(2).all(|w| w[1] <= w[0])
    }
}

/// ΔΛ₊ over tilt angles `min..=max` (radians) in steps of `step`.
pub fn cmd_scan_tilt(source: &SourceConfig, min: f64, max: f64, step: f64) -> Result<TiltScan> {
    if !(step > 0.0 && max >= min && min.is_finite() && max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "empty tilt range: min {min}, max {max}, step {step}"
        )));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    let peak = max_bandwidth_plus(source);
    let rows = (0..count)
        .map(|k| {
            let tilt = min + step * k as f64;
            let cfg = source.with_tilt_angle(tilt)?;
            Ok(TiltScanRow {
                tilt,
                bandwidth_plus: bandwidth_plus(&cfg)?,
                max_bandwidth_plus: peak,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let argmax = rows.iter().enumerate().fold(0, |best, (k, r)| {
        if r.bandwidth_plus > rows[best].bandwidth_plus {
            k
        } else {
            best
        }
    });
    Ok(TiltScan { rows, argmax })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaistScanRow {
    pub waist: f64,
    pub bandwidth_minus: f64,
    pub classification: Correlation,
    /// Row inserted at W₀*.
    pub separable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaistScan {
    pub rows: Vec<WaistScanRow>,
    pub separability_waist: f64,
}

impl WaistScan {
    pub fn to_csv(&self, meta: &[(String, String)]) -> String {
        let mut s = csv_preamble("waist scan", meta);
        s.push_str("w0_um,bandwidth_minus_nm,classification,separable\n");
        for row in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                fmt_f64(row.waist / UM),
                fmt_f64(row.bandwidth_minus / NM),
                row.classification,
                u8::from(row.separable)
            );
        }
        s
    }
}

/// ΔΛ₋ over `n_points` evenly spaced waists in `[min, max]` (meters) at the
/// current tilt. The separability waist is inserted (and flagged) when it
/// falls inside the range.
pub fn cmd_scan_waist(
    source: &SourceConfig,
    min: f64,
    max: f64,
    n_points: usize,
    tolerance: f64,
) -> Result<WaistScan> {
    if !(min > 0.0 && max > min && n_points >= 2) {
        return Err(Error::InvalidParameter(format!(
            "empty waist range: min {min}, max {max}, points {n_points}"
        )));
    }
    let plus = bandwidth_plus(source)?;
    let row = |waist: f64, separable: bool| -> Result<WaistScanRow> {
        let cfg = source.with_waist(waist)?;
        let minus = bandwidth_minus(&cfg)?;
        Ok(WaistScanRow {
            waist,
            bandwidth_minus: minus,
            classification: classify_correlation(
                &GaussianSpectrumModel::new(plus, minus)?,
                tolerance,
            )?,
            separable,
        })
    };
    let mut rows = (0..n_points)
        .map(|k| row(min + (max - min) * k as f64 / (n_points - 1) as f64, false))
        .collect::<Result<Vec<_>>>()?;
    let star = separability_waist(source)?;
    if (min..=max).contains(&star) {
        let pos = rows.partition_point(|r| r.waist < star);
        rows.insert(pos, row(star, true)?);
    }
    Ok(WaistScan {
        rows,
        separability_waist: star,
    })
}

/// Parsed joint-spectrum CSV: metadata lines (without the `# ` prefix) and
/// rows of (Λₛ nm, Λᵢ nm, Re, Im, S).
#[derive(Debug, Clone, PartialEq)]
pub struct GridCsv {
    pub metadata: Vec<String>,
    pub rows: Vec<[f64; 5]>,
}

impl GridCsv {
    /// Amplitudes are written in nm⁻¹ and S in nm⁻², so Σ S δΛₛ δΛᵢ = 1 with
    /// steps in nm.
    pub fn from_grid(metadata: Vec<String>, jsa: &JointSpectrumGrid) -> Self {
        let g = &jsa.grid;
        let mut rows = Vec::with_capacity(g.len());
        for i in 0..g.n_s {
            for j in 0..g.n_i {
                let a = jsa.amplitude_at(i, j) * NM;
                rows.push([
                    g.detuning_s(i) / NM,
                    g.detuning_i(j) / NM,
                    a.re,
                    a.im,
                    jsa.intensity_at(i, j) * NM * NM,
                ]);
            }
        }
        GridCsv { metadata, rows }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.rows.len() * 96);
        for m in &self.metadata {
            let _ = writeln!(s, "# {m}");
        }
        s.push_str(GRID_CSV_HEADER);
        s.push('\n');
        let mut buf = ryu::Buffer::new();
        for row in &self.rows {
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    s.push(',');
                }
                s.push_str(buf.format(*v));
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: "grid csv".into(),
            line,
            message,
        };
        let mut metadata = Vec::new();
        let mut rows = Vec::new();
        let mut header_seen = false;
        for (idx, line) in text.lines().enumerate() {
            if !header_seen {
                if let Some(m) = line.strip_prefix("# ") {
                    metadata.push(m.to_string());
                    continue;
                }
                if line == GRID_CSV_HEADER {
                    header_seen = true;
                    continue;
                }
                return Err(err(idx + 1, format!("expected `{GRID_CSV_HEADER}`")));
            }
            let mut row = [0.0; 5];
            let mut fields = line.split(',');
            for slot in &mut row {
                let f = fields
                    .next()
                    .ok_or_else(|| err(idx + 1, "expected 5 columns".into()))?;
                *slot = f
                    .parse::<f64>()
                    .map_err(|_| err(idx + 1, format!("bad number `{f}`")))?;
            }
            if fields.next().is_some() {
                return Err(err(idx + 1, "expected 5 columns".into()));
            }
            rows.push(row);
        }
        if !header_seen {
            return Err(err(text.lines().count(), "missing column header".into()));
        }
        Ok(GridCsv { metadata, rows })
    }
}

fn csv_preamble(kind: &str, meta: &[(String, String)]) -> String {
    let mut s = format!("# tiltspdc {kind}\n# version = {ARTIFACT_VERSION}\n");
    for (k, v) in meta {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

/// Effective physical parameters of a source in human units.
pub fn source_metadata(source: &SourceConfig) -> Vec<(String, String)> {
    vec![
        ("crystal".into(), source.crystal.name.clone()),
        (
            "phase_matching_angle_deg".into(),
            fmt_f64(source.crystal.cut_angle.to_degrees()),
        ),
        (
            "pump_wavelength_nm".into(),
            fmt_f64(source.pump.center_wavelength / NM),
        ),
        (
            "pump_bandwidth_rad_s".into(),
            fmt_f64(source.pump.bandwidth),
        ),
        ("waist_um".into(), fmt_f64(source.pump.waist / UM)),
        ("length_mm".into(), fmt_f64(source.geometry.length * 1e3)),
        (
            "noncollinear_deg".into(),
            fmt_f64(source.geometry.noncollinear_angle.to_degrees()),
        ),
        ("tilt_deg".into(), fmt_f64(source.tilt.angle().to_degrees())),
    ]
}

fn grid_metadata(
    source: &SourceConfig,
    model: &str,
    phase: Option<PhaseMode>,
    grid: &FrequencyGrid,
) -> Vec<String> {
    let mut meta = vec![
        "tiltspdc joint spectrum".to_string(),
        format!("version = {ARTIFACT_VERSION}"),
        format!("model = {model}"),
    ];
    if let Some(p) = phase {
        meta.push(format!(
            "phase = {}",
            if p == PhaseMode::Full {
                "full"
            } else {
                "stripped"
            }
        ));
    }
    meta.extend(
        source_metadata(source)
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}")),
    );
    meta.push(format!("grid_n_s = {}", grid.n_s));
    meta.push(format!("grid_n_i = {}", grid.n_i));
    meta.push(format!(
        "grid_half_span_nm = {}",
        fmt_f64(grid.half_span_s / NM)
    ));
    meta.push("units = detuning nm, amplitude nm^-1, S nm^-2".to_string());
    meta
}

/// Gaussian-model density sampled on `grid` (Re = √S, Im = 0).
pub fn gaussian_grid(source: &SourceConfig, grid: FrequencyGrid) -> Result<JointSpectrumGrid> {
    let model = GaussianSpectrumModel::from_config(source)?;
    JointSpectrumGrid::from_fn(grid, |s, i| {
        Complex64::new(gaussian_joint_spectrum(&model, s, i).sqrt(), 0.0)
    })
}

/// Files written by [`cmd_grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridOutput {
    pub summary: Summary,
    pub full_csv: PathBuf,
    pub gaussian_csv: PathBuf,
    pub summary_path: PathBuf,
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `<prefix>_full.csv`, `<prefix>_gaussian.csv` and
/// `<prefix>_summary.txt` into `out`.
pub fn cmd_grid(
    source: &SourceConfig,
    opts: &Options,
    out: &Path,
    prefix: &str,
) -> Result<GridOutput> {
    ensure_dir(out)?;
    let (summary, full, stripped) = summarize(source, opts)?;
    let written = match opts.phase {
        PhaseMode::Full => &full,
        PhaseMode::Stripped => &stripped,
    };
    let grid = full.grid;
    let full_csv = out.join(format!("{prefix}_full.csv"));
    let gaussian_csv = out.join(format!("{prefix}_gaussian.csv"));
    let summary_path = out.join(format!("{prefix}_summary.txt"));
    write(
        &full_csv,
        &GridCsv::from_grid(
            grid_metadata(source, "full", Some(opts.phase), &grid),
            written,
        )
        .to_text(),
    )?;
    let gauss = gaussian_grid(source, grid)?;
    write(
        &gaussian_csv,
        &GridCsv::from_grid(grid_metadata(source, "gaussian", None, &grid), &gauss).to_text(),
    )?;
    write(&summary_path, &summary.record().render())?;
    Ok(GridOutput {
        summary,
        full_csv,
        gaussian_csv,
        summary_path,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignBranch {
    pub tilt: f64,
    pub bandwidth_plus: f64,
    pub bandwidth_minus: f64,
    pub schmidt_full: f64,
    pub schmidt_stripped: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignReport {
    pub target: f64,
    pub waist: f64,
    pub max_bandwidth_plus: f64,
    pub branches: Vec<DesignBranch>,
}

impl DesignReport {
    pub fn record(&self) -> Record {
        let mut r = Record::new("design");
        r.num("target_nm", self.target / NM)
            .num("max_bandwidth_plus_nm", self.max_bandwidth_plus / NM)
            .num("waist_um", self.waist / UM);
        for (k, b) in self.branches.iter().enumerate() {
            let p = format!("branch{}_", k + 1);
            r.num(&format!("{p}tilt_deg"), b.tilt.to_degrees())
                .num(&format!("{p}bandwidth_plus_nm"), b.bandwidth_plus / NM)
                .num(&format!("{p}bandwidth_minus_nm"), b.bandwidth_minus / NM)
                .num(&format!("{p}schmidt_number_full_phase"), b.schmidt_full)
                .num(
                    &format!("{p}schmidt_number_stripped_phase"),
                    b.schmidt_stripped,
                );
        }
        r
    }
}

/// Tilt(s) and waist for an uncorrelated spectrum with ΔΛ₊ = ΔΛ₋ = `target`
/// (meters), each verified on the full model.
pub fn cmd_design(source: &SourceConfig, target: f64, opts: &Options) -> Result<DesignReport> {
    let design = design_for_bandwidth(source, target)?;
    let mut tilts = design.tilts.to_vec();
    tilts.dedup();
    let branches = tilts
        .into_iter()
        .map(|tilt| {
            let cfg = source.with_tilt_angle(tilt)?.with_waist(design.waist)?;
            let (m, _, _) = measure(&cfg, opts)?;
            Ok(DesignBranch {
                tilt,
                bandwidth_plus: bandwidth_plus(&cfg)?,
                bandwidth_minus: bandwidth_minus(&cfg)?,
                schmidt_full: m.schmidt_full,
                schmidt_stripped: m.schmidt_stripped,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DesignReport {
        target,
        waist: design.waist,
        max_bandwidth_plus: max_bandwidth_plus(source),
        branches,
    })
}

/// One of the nine joint-spectrum panels: tilts {0, ξ₀, 30°} by waists
/// {30 µm, W₀*(ξ), 250 µm}, lettered a–i row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub label: char,
    pub source: SourceConfig,
    pub predicted: GaussianSpectrumModel,
    pub classification: Correlation,
}

pub fn panel_configs(base: &SourceConfig, tolerance: f64) -> Result<Vec<Panel>> {
    let xi0 = optimal_tilt(base)?;
    let mut panels = Vec::with_capacity(9);
    let mut label = b'a';
    for xi in [0.0, xi0, 30f64.to_radians()] {
        let tilted = base.with_tilt_angle(xi)?;
        let star = separability_waist(&tilted)?;
        for waist in [30.0 * UM, star, 250.0 * UM] {
            let source = tilted.with_waist(waist)?;
            let predicted = GaussianSpectrumModel::from_config(&source)?;
            panels.push(Panel {
                label: label as char,
                classification: classify_correlation(&predicted, tolerance)?,
                source,
                predicted,
            });
            label += 1;
        }
    }
    Ok(panels)
}

/// Writes the tilt scan, the waist scan and the nine-panel grid set into
/// `out`. Returns the written file names relative to `out`, sorted.
pub fn cmd_figures(run: &RunConfig, opts: &Options, out: &Path) -> Result<Vec<String>> {
    let base = run.build()?;
    ensure_dir(out)?;
    let meta = run.echo();
    let mut files = Vec::new();

    let step = 0.5f64.to_radians();
    let scan = cmd_scan_tilt(&base, -80f64.to_radians(), 80f64.to_radians(), step)?;
    write(&out.join("fig2a_tilt_scan.csv"), &scan.to_csv(&meta))?;
    files.push("fig2a_tilt_scan.csv".to_string());

    let waists = cmd_scan_waist(&base, 10.0 * UM, 300.0 * UM, 59, opts.tolerance)?;
    write(&out.join("fig2b_waist_scan.csv"), &waists.to_csv(&meta))?;
    files.push("fig2b_waist_scan.csv".to_string());

    let mut table = csv_preamble("joint spectrum panels", &meta);
    table.push_str(
        "panel,xi_deg,w0_um,predicted_plus_nm,predicted_minus_nm,classification,\
         measured_plus_nm,measured_minus_nm,pearson_r,schmidt_full,schmidt_stripped\n",
    );
    for panel in panel_configs(&base, opts.tolerance)? {
        let prefix = format!("fig3_{}", panel.label);
        let g = cmd_grid(&panel.source, opts, out, &prefix)?;
        for suffix in ["full.csv", "gaussian.csv", "summary.txt"] {
            files.push(format!("{prefix}_{suffix}"));
        }
        let m = &g.summary.measurement;
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{},{},{},{},{}",
            panel.label,
            fmt_f64(panel.source.tilt.angle().to_degrees()),
            fmt_f64(panel.source.pump.waist / UM),
            fmt_f64(panel.predicted.plus / NM),
            fmt_f64(panel.predicted.minus / NM),
            panel.classification,
            fmt_f64(m.measured_plus / NM),
            fmt_f64(m.measured_minus / NM),
            fmt_f64(m.pearson),
            fmt_f64(m.schmidt_full),
            fmt_f64(m.schmidt_stripped),
        );
    }
    write(&out.join("fig3_panels.csv"), &table)?;
    files.push("fig3_panels.csv".to_string());

    let summary = cmd_summary(&base, opts)?;
    write(&out.join("summary.txt"), &summary.record().render())?;
    files.push("summary.txt".to_string());
    files.sort();
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_round_trip_formatting() {
        for x in [
            0.1,
            1.0,
            -2.5e-17,
            1.277e6,
            std::f64::consts::PI,
            11.313708498984761,
        ] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(0.5), "0.5");
    }

    #[test]
    fn record_rendering_is_ordered() {
        let mut r = Record::new("x");
        r.num("b", 2.0).text("a", "y");
        assert_eq!(r.render(), "[x]\nb = 2.0\na = y\n");
        assert_eq!(r.get("a"), Some("y"));
    }

    #[test]
    fn grid_csv_rejects_garbage() {
        assert!(GridCsv::parse("# meta\n").is_err());
        assert!(GridCsv::parse(&format!("{GRID_CSV_HEADER}\n1,2,3\n")).is_err());
        assert!(GridCsv::parse(&format!("{GRID_CSV_HEADER}\n1,2,3,4,x\n")).is_err());
        let ok = GridCsv::parse(&format!("# a = 1\n{GRID_CSV_HEADER}\n1,2,3,4,5\n")).unwrap();
        assert_eq!(ok.metadata, vec!["a = 1".to_string()]);
        assert_eq!(ok.rows, vec![[1.0, 2.0, 3.0, 4.0, 5.0]]);
    }

    #[test]
    fn scan_ranges_are_validated() {
        let src = RunConfig::default().build().unwrap();
        assert!(cmd_scan_tilt(&src, 0.2, 0.1, 0.01).is_err());
        assert!(cmd_scan_tilt(&src, 0.0, 0.1, 0.0).is_err());
        assert!(cmd_scan_waist(&src, 1e-4, 1e-5, 10, 0.05).is_err());
        assert!(cmd_scan_waist(&src, 1e-5, 1e-4, 1, 0.05).is_err());
    }
}
