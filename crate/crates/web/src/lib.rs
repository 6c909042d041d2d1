//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export takes plain numbers and returns a JSON string; the same
//! computations are available natively through the non-`_json` functions.

use serde::Serialize;
use tiltspdc::analysis::{pearson_correlation, rms_bandwidth_diag, schmidt_decompose, Diagonal};
use tiltspdc::biphoton::{joint_spectrum_grid, FrequencyGrid, PhaseMode};
use tiltspdc::config::{PumpBandwidth, RunConfig, TiltChoice};
use tiltspdc::gaussmodel::{classify_correlation, separability_waist, GaussianSpectrumModel};
use tiltspdc::phasematch::{optimal_tilt, SourceConfig};
use tiltspdc::report::{cmd_design, cmd_scan_tilt, Options};
use tiltspdc::{Error, Result};
use wasm_bindgen::prelude::*;

const NM: f64 = 1e-9;
const UM: f64 = 1e-6;

/// Largest heatmap edge the demo will compute.
pub const MAX_HEATMAP_POINTS: usize = 256;
const DESIGN_GRID_POINTS: usize = 96;

/// Source parameters exposed by the page; everything else uses the defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub pump_wavelength_nm: f64,
    pub pump_bandwidth_nm: f64,
    pub length_mm: f64,
    pub noncollinear_deg: f64,
}

impl Default for Params {
    fn default() -> Self {
        let run = RunConfig::default();
        let bandwidth = match run.pump_bandwidth {
            PumpBandwidth::WavelengthNm(b) => b,
            PumpBandwidth::AngularRadPerS(_) => unreachable!("default is in nm"),
        };
        Params {
            pump_wavelength_nm: run.pump_wavelength_nm,
            pump_bandwidth_nm: bandwidth,
            length_mm: run.length_mm,
            noncollinear_deg: run.noncollinear_deg,
        }
    }
}

impl Params {
    pub fn source(&self, tilt_deg: Option<f64>, waist_um: Option<f64>) -> Result<SourceConfig> {
        let defaults = RunConfig::default();
        let run = RunConfig {
            pump_wavelength_nm: self.pump_wavelength_nm,
            pump_bandwidth: PumpBandwidth::WavelengthNm(self.pump_bandwidth_nm),
            length_mm: self.length_mm,
            noncollinear_deg: self.noncollinear_deg,
            waist_um: waist_um.unwrap_or(defaults.waist_um),
            tilt: tilt_deg.map_or(TiltChoice::Optimal, TiltChoice::AngleDeg),
            ..defaults
        };
        run.build()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Heatmap {
    pub n: usize,
    pub half_span_nm: f64,
    /// Row-major S (signal rows, idler columns), nm⁻².
    pub intensity: Vec<f64>,
    pub peak: f64,
    pub predicted_plus_nm: f64,
    pub predicted_minus_nm: f64,
    pub measured_plus_nm: f64,
    pub measured_minus_nm: f64,
    pub pearson_r: f64,
    pub schmidt_number: f64,
    pub purity: f64,
    pub classification: &'static str,
    pub separability_waist_um: f64,
}

pub fn joint_spectrum(
    p: &Params,
    tilt_deg: f64,
    waist_um: f64,
    n: usize,
    strip_phase: bool,
) -> Result<Heatmap> {
    if n > MAX_HEATMAP_POINTS {
        return Err(Error::InvalidParameter(format!(
            "grid of {n} points per axis exceeds the demo limit of {MAX_HEATMAP_POINTS}"
        )));
    }
    let source = p.source(Some(tilt_deg), Some(waist_um))?;
    let grid = FrequencyGrid::auto(&source, n)?;
    let phase = if strip_phase {
        PhaseMode::Stripped
    } else {
        PhaseMode::Full
    };
    let jsa = joint_spectrum_grid(&source, grid, phase)?;
    let model = GaussianSpectrumModel::from_config(&source)?;
    let schmidt = schmidt_decompose(&jsa)?;
    let intensity: Vec<f64> = jsa.intensity.iter().map(|s| s * NM * NM).collect();
    Ok(Heatmap {
        n,
        half_span_nm: grid.half_span_s / NM,
        peak: intensity.iter().copied().fold(0.0, f64::max),
        intensity,
        predicted_plus_nm: model.plus / NM,
        predicted_minus_nm: model.minus / NM,
        measured_plus_nm: rms_bandwidth_diag(&jsa, Diagonal::Plus) / NM,
        measured_minus_nm: rms_bandwidth_diag(&jsa, Diagonal::Minus) / NM,
        pearson_r: pearson_correlation(&jsa)?,
        schmidt_number: schmidt.schmidt_number,
        purity: schmidt.purity,
        classification: classify_correlation(&model, Options::default().tolerance)?.as_str(),
        separability_waist_um: separability_waist(&source)? / UM,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TiltCurve {
    pub tilt_deg: Vec<f64>,
    pub bandwidth_plus_nm: Vec<f64>,
    pub max_bandwidth_plus_nm: f64,
    pub optimal_tilt_deg: f64,
    pub argmax: usize,
}

pub fn tilt_scan(p: &Params, step_deg: f64) -> Result<TiltCurve> {
    let source = p.source(Some(0.0), None)?;
    let scan = cmd_scan_tilt(
        &source,
        (-80f64).to_radians(),
        80f64.to_radians(),
        step_deg.to_radians(),
    )?;
    Ok(TiltCurve {
        tilt_deg: scan.rows.iter().map(|r| r.tilt.to_degrees()).collect(),
        bandwidth_plus_nm: scan.rows.iter().map(|r| r.bandwidth_plus / NM).collect(),
        max_bandwidth_plus_nm: scan.rows[0].max_bandwidth_plus / NM,
        optimal_tilt_deg: optimal_tilt(&source)?.to_degrees(),
        argmax: scan.argmax,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignResult {
    pub target_nm: f64,
    pub waist_um: f64,
    pub tilt_deg: Vec<f64>,
    pub schmidt_number: Vec<f64>,
}

pub fn design(p: &Params, target_nm: f64) -> Result<DesignResult> {
    let source = p.source(None, None)?;
    let opts = Options {
        n: DESIGN_GRID_POINTS,
        ..Options::default()
    };
    let d = cmd_design(&source, target_nm * NM, &opts)?;
    Ok(DesignResult {
        target_nm,
        waist_um: d.waist / UM,
        tilt_deg: d.branches.iter().map(|b| b.tilt.to_degrees()).collect(),
        schmidt_number: d.branches.iter().map(|b| b.schmidt_full).collect(),
    })
}

fn to_json<T: Serialize>(value: Result<T>) -> std::result::Result<String, JsError> {
    let value = value.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

fn params(
    pump_wavelength_nm: f64,
    pump_bandwidth_nm: f64,
    length_mm: f64,
    noncollinear_deg: f64,
) -> Params {
    Params {
        pump_wavelength_nm,
        pump_bandwidth_nm,
        length_mm,
        noncollinear_deg,
    }
}

/// Default page parameters as JSON.
#[wasm_bindgen]
pub fn default_params_json() -> String {
    let p = Params::default();
    serde_json::json!({
        "pump_wavelength_nm": p.pump_wavelength_nm,
        "pump_bandwidth_nm": p.pump_bandwidth_nm,
        "length_mm": p.length_mm,
        "noncollinear_deg": p.noncollinear_deg,
        "waist_um": RunConfig::default().waist_um,
    })
    .to_string()
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn joint_spectrum_json(
    pump_wavelength_nm: f64,
    pump_bandwidth_nm: f64,
    length_mm: f64,
    noncollinear_deg: f64,
    tilt_deg: f64,
    waist_um: f64,
    n: usize,
    strip_phase: bool,
) -> std::result::Result<String, JsError> {
    let p = params(
        pump_wavelength_nm,
        pump_bandwidth_nm,
        length_mm,
        noncollinear_deg,
    );
    to_json(joint_spectrum(&p, tilt_deg, waist_um, n, strip_phase))
}

#[wasm_bindgen]
pub fn tilt_scan_json(
    pump_wavelength_nm: f64,
    pump_bandwidth_nm: f64,
    length_mm: f64,
    noncollinear_deg: f64,
    step_deg: f64,
) -> std::result::Result<String, JsError> {
    let p = params(
        pump_wavelength_nm,
        pump_bandwidth_nm,
        length_mm,
        noncollinear_deg,
    );
    to_json(tilt_scan(&p, step_deg))
}

#[wasm_bindgen]
pub fn design_json(
    pump_wavelength_nm: f64,
    pump_bandwidth_nm: f64,
    length_mm: f64,
    noncollinear_deg: f64,
    target_nm: f64,
) -> std::result::Result<String, JsError> {
    let p = params(
        pump_wavelength_nm,
        pump_bandwidth_nm,
        length_mm,
        noncollinear_deg,
    );
    to_json(design(&p, target_nm))
}
