//! User-facing run configuration.
//!
//! A `[source]` section in the same `key = value` format as crystal data
//! files. Human units (nm, µm, mm, degrees) are accepted here and converted to
//! SI once, in [`RunConfig::build`].
//!
//! ```text
//! [source]
//! crystal = BBO
//! pump_wavelength_nm = 400
//! pump_bandwidth_nm = 4
//! waist_um = 60
//! length_mm = 0.25
//! noncollinear_deg = 3.5
//! tilt_deg = optimal
//! ```

use std::path::{Path, PathBuf};

use crate::dispersion::{load_crystal_file, load_crystals, CrystalProperties, BUNDLED_CRYSTALS};
use crate::error::{Error, Result};
use crate::keyvalue::{parse_number, Document, Entry};
use crate::phasematch::{tilt_from_grating, Geometry, Pump, SourceConfig, TiltSpec};

const NM: f64 = 1e-9;
const UM: f64 = 1e-6;
const MM: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PumpBandwidth {
    /// rms wavelength bandwidth Δλₚ, nm.
    WavelengthNm(f64),
    /// rms angular-frequency bandwidth Bₚ, rad/s.
    AngularRadPerS(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TiltChoice {
    /// Pulse-front tilt ξ in degrees.
    AngleDeg(f64),
    /// ξ = ξ₀, the group-velocity-matching tilt.
    Optimal,
    Grating {
        order: i32,
        groove_spacing_nm: f64,
        angle_deg: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpanPolicy {
    /// ±6 × the larger predicted rms bandwidth.
    Auto,
    HalfSpanNm(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub crystal: String,
    /// Crystal data file; `None` uses the bundled data.
    pub crystal_file: Option<PathBuf>,
    pub pump_wavelength_nm: f64,
    pub pump_bandwidth: PumpBandwidth,
    pub waist_um: f64,
    pub length_mm: f64,
    pub noncollinear_deg: f64,
    pub tilt: TiltChoice,
    pub grid_n: usize,
    pub span: SpanPolicy,
    pub output: PathBuf,
}

impl Default for RunConfig {
    /// Assumed reference configuration: BBO pumped at 400 nm with a 4 nm
    /// pump bandwidth. Crystal length, noncollinear angle and waist are
    /// assumptions chosen so all three correlation regimes are reachable
    /// with waists between 30 and 250 µm.
    fn default() -> Self {
        RunConfig {
            crystal: "BBO".to_string(),
            crystal_file: None,
            pump_wavelength_nm: 400.0,
            pump_bandwidth: PumpBandwidth::WavelengthNm(4.0),
            waist_um: 60.0,
            length_mm: 0.25,
            noncollinear_deg: 3.5,
            tilt: TiltChoice::Optimal,
            grid_n: 256,
            span: SpanPolicy::Auto,
            output: PathBuf::from("out"),
        }
    }
}

const KEYS: &[&str] = &[
    "crystal",
    "crystal_file",
    "pump_wavelength_nm",
    "pump_bandwidth_nm",
    "pump_bandwidth_rad_s",
    "waist_um",
    "length_mm",
    "noncollinear_deg",
    "tilt_deg",
    "grating_order",
    "grating_groove_spacing_nm",
    "grating_angle_deg",
    "grid_n",
    "grid_span_nm",
    "output",
];

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        RunConfig::parse(&path.display().to_string(), &text, base)
    }

    /// Parses config text; relative paths resolve against `base_dir`.
    pub fn parse(origin: &str, text: &str, base_dir: &Path) -> Result<Self> {
        let doc = Document::parse(origin, text)?;
        if let Some(e) = doc.preamble.first() {
            return Err(doc.error(
                e.line,
                format!("key `{}` outside the [source] section", e.key),
            ));
        }
        let mut sections = doc.sections("source");
        let section = sections.next().ok_or_else(|| Error::Config {
            path: origin.to_string(),
            message: "missing [source] section".into(),
        })?;
        if let Some(extra) = sections.next() {
            return Err(doc.error(extra.line, "only one [source] section is allowed"));
        }
        if let Some(other) = doc.sections.iter().find(|s| s.kind != "source") {
            return Err(doc.error(other.line, format!("unexpected section `{}`", other.kind)));
        }
        for e in &section.entries {
            if !KEYS.contains(&e.key.as_str()) {
                return Err(doc.error(e.line, format!("unknown key `{}`", e.key)));
            }
        }

        let number = |e: &Entry| parse_number(&e.value).map_err(|m| doc.error(e.line, m));
        let positive = |e: &Entry| -> Result<f64> {
            let v = number(e)?;
            if v > 0.0 {
                Ok(v)
            } else {
                Err(doc.error(e.line, format!("`{}` must be positive, got {v}", e.key)))
            }
        };
        let integer = |e: &Entry| -> Result<i64> {
            e.value
                .parse::<i64>()
                .map_err(|_| doc.error(e.line, format!("`{}` must be an integer", e.key)))
        };

        let mut cfg = RunConfig::default();
        if let Some(e) = section.get("crystal") {
            cfg.crystal = e.value.clone();
        }
        if let Some(e) = section.get("crystal_file") {
            cfg.crystal_file = Some(base_dir.join(&e.value));
        }
        if let Some(e) = section.get("pump_wavelength_nm") {
            cfg.pump_wavelength_nm = positive(e)?;
        }
        match (
            section.get("pump_bandwidth_nm"),
            section.get("pump_bandwidth_rad_s"),
        ) {
            (Some(a), Some(_)) => {
                return Err(doc.error(
                    a.line,
                    "give exactly one of `pump_bandwidth_nm` and `pump_bandwidth_rad_s`",
                ))
            }
            (Some(e), None) => cfg.pump_bandwidth = PumpBandwidth::WavelengthNm(positive(e)?),
            (None, Some(e)) => cfg.pump_bandwidth = PumpBandwidth::AngularRadPerS(positive(e)?),
            (None, None) => {}
        }
        if let Some(e) = section.get("waist_um") {
            cfg.waist_um = positive(e)?;
        }
        if let Some(e) = section.get("length_mm") {
            cfg.length_mm = positive(e)?;
        }
        if let Some(e) = section.get("noncollinear_deg") {
            let v = number(e)?;
            if !(0.0..90.0).contains(&v) {
                return Err(doc.error(e.line, "`noncollinear_deg` must lie in [0, 90)"));
            }
            cfg.noncollinear_deg = v;
        }

        let grating_keys = [
            "grating_order",
            "grating_groove_spacing_nm",
            "grating_angle_deg",
        ];
        let grating: Vec<&Entry> = grating_keys.iter().filter_map(|k| section.get(k)).collect();
        match (section.get("tilt_deg"), grating.is_empty()) {
            (Some(e), false) => {
                return Err(doc.error(
                    e.line,
                    "give either `tilt_deg` or the grating keys, not both",
                ))
            }
            (Some(e), true) => {
                cfg.tilt = if e.value == "optimal" {
                    TiltChoice::Optimal
                } else {
                    let v = number(e)?;
                    if !(v.abs() < 90.0) {
                        return Err(doc.error(e.line, "`tilt_deg` must lie in (-90, 90)"));
                    }
                    TiltChoice::AngleDeg(v)
                };
            }
            (None, false) => {
                if grating.len() != grating_keys.len() {
                    return Err(doc.error(
                        grating[0].line,
                        "a grating tilt needs grating_order, grating_groove_spacing_nm and grating_angle_deg",
                    ));
                }
                let order = integer(section.get("grating_order").unwrap())?;
                let order = i32::try_from(order)
                    .map_err(|_| doc.error(grating[0].line, "grating order out of range"))?;
                cfg.tilt = TiltChoice::Grating {
                    order,
                    groove_spacing_nm: positive(section.get("grating_groove_spacing_nm").unwrap())?,
                    angle_deg: number(section.get("grating_angle_deg").unwrap())?,
                };
            }
            (None, true) => {}
        }

        if let Some(e) = section.get("grid_n") {
            let n = integer(e)?;
            if n < 16 {
                return Err(doc.error(e.line, "`grid_n` must be at least 16"));
            }
            cfg.grid_n = n as usize;
        }
        if let Some(e) = section.get("grid_span_nm") {
            cfg.span = if e.value == "auto" {
                SpanPolicy::Auto
            } else {
                SpanPolicy::HalfSpanNm(positive(e)?)
            };
        }
        if let Some(e) = section.get("output") {
            cfg.output = base_dir.join(&e.value);
        }
        Ok(cfg)
    }

    pub fn load_crystal(&self) -> Result<CrystalProperties> {
        match &self.crystal_file {
            Some(path) => load_crystal_file(path, &self.crystal),
            None => load_crystals("bundled crystal data", BUNDLED_CRYSTALS)?
                .into_iter()
                .find(|c| c.name == self.crystal)
                .ok_or_else(|| Error::Config {
                    path: "bundled crystal data".into(),
                    message: format!("no crystal named `{}`", self.crystal),
                }),
        }
    }

    /// Converts to SI, solves the phase-matching angle and applies the tilt.
    pub fn build(&self) -> Result<SourceConfig> {
        let crystal = self.load_crystal()?;
        let lp = self.pump_wavelength_nm * NM;
        let pump = match self.pump_bandwidth {
            PumpBandwidth::WavelengthNm(b) => {
                Pump::from_wavelength_bandwidth(lp, b * NM, self.waist_um * UM)?
            }
            PumpBandwidth::AngularRadPerS(b) => Pump::new(lp, b, self.waist_um * UM)?,
        };
        let geometry = Geometry::new(self.length_mm * MM, self.noncollinear_deg.to_radians())?;
        let base = SourceConfig::phase_matched(crystal, geometry, pump, TiltSpec::untilted(lp))?;
        match self.tilt {
            TiltChoice::AngleDeg(xi) => base.with_tilt_angle(xi.to_radians()),
            TiltChoice::Optimal => base.with_optimal_tilt(),
            TiltChoice::Grating {
                order,
                groove_spacing_nm,
                angle_deg,
            } => Ok(base.with_tilt(tilt_from_grating(
                order,
                groove_spacing_nm * NM,
                angle_deg.to_radians(),
                lp,
            )?)),
        }
    }

    /// Canonical `key = value` echo with a fixed field order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let f = crate::report::fmt_f64;
        let mut out = vec![("crystal".to_string(), self.crystal.clone())];
        if let Some(p) = &self.crystal_file {
            out.push(("crystal_file".into(), p.display().to_string()));
        }
        out.push(("pump_wavelength_nm".into(), f(self.pump_wavelength_nm)));
        match self.pump_bandwidth {
            PumpBandwidth::WavelengthNm(b) => out.push(("pump_bandwidth_nm".into(), f(b))),
            PumpBandwidth::AngularRadPerS(b) => out.push(("pump_bandwidth_rad_s".into(), f(b))),
        }
        out.push(("waist_um".into(), f(self.waist_um)));
        out.push(("length_mm".into(), f(self.length_mm)));
        out.push(("noncollinear_deg".into(), f(self.noncollinear_deg)));
        match self.tilt {
            TiltChoice::AngleDeg(x) => out.push(("tilt_deg".into(), f(x))),
            TiltChoice::Optimal => out.push(("tilt_deg".into(), "optimal".into())),
            TiltChoice::Grating {
                order,
                groove_spacing_nm,
                angle_deg,
            } => {
                out.push(("grating_order".into(), order.to_string()));
                out.push(("grating_groove_spacing_nm".into(), f(groove_spacing_nm)));
                out.push(("grating_angle_deg".into(), f(angle_deg)));
            }
        }
        out.push(("grid_n".into(), self.grid_n.to_string()));
        out.push((
            "grid_span_nm".into(),
            match self.span {
                SpanPolicy::Auto => "auto".into(),
                SpanPolicy::HalfSpanNm(s) => f(s),
            },
        ));
        out
    }

    /// The echo as a loadable `[source]` file.
    pub fn to_text(&self) -> String {
        let mut s = String::from("[source]\n");
        for (k, v) in self.echo() {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}
