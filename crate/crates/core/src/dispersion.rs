//! Refractive indices, wavenumbers, inverse group velocities and walk-off for
//! uniaxial crystals described by Sellmeier fits.
//!
//! All public quantities are SI: wavelengths in meters, angles in radians,
//! wavenumbers in rad/m, inverse group velocities in s/m. Micrometers appear
//! only inside [`Sellmeier`], where the published fits are defined.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use crate::error::{Error, Result};
use crate::keyvalue::{parse_number_list, Document, Section};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Distance from the transparency-range edges inside which group quantities
/// are refused, in meters.
pub const DERIVATIVE_MARGIN: f64 = 1e-11;

/// Bundled coefficient file.
pub const BUNDLED_CRYSTALS: &str = include_str!("../data/crystals.txt");

/// Version of the crystal data format understood by [`load_crystals`].
pub const CRYSTAL_FORMAT_VERSION: u32 = 1;

/// A Sellmeier-type fit of n²(λ) with λ in micrometers.
#[derive(Debug, Clone, PartialEq)]
pub enum Sellmeier {
    /// `pole_quadratic`: n² = A + B/(λ² − C) − Dλ².
    PoleQuadratic { a: f64, b: f64, c: f64, d: f64 },
    /// `sellmeier`: n² = 1 + Σ Bᵢλ²/(λ² − Cᵢ), stored as (Bᵢ, Cᵢ) pairs.
    Standard { terms: Vec<(f64, f64)> },
    /// `constant`: n independent of λ.
    Constant { n: f64 },
}

impl Sellmeier {
    pub fn from_formula(formula: &str, coeffs: &[f64]) -> std::result::Result<Self, String> {
        match formula {
            "pole_quadratic" => match *coeffs {
                [a, b, c, d] => Ok(Sellmeier::PoleQuadratic { a, b, c, d }),
                _ => Err(format!(
                    "pole_quadratic needs 4 coefficients, got {}",
                    coeffs.len()
                )),
            },
            "sellmeier" => {
                if coeffs.is_empty() || !coeffs.len().is_multiple_of(2) {
                    return Err(format!(
                        "sellmeier needs (B, C) pairs, got {} coefficients",
                        coeffs.len()
                    ));
                }
                Ok(Sellmeier::Standard {
                    terms: coeffs.chunks(2).map(|p| (p[0], p[1])).collect(),
                })
            }
            "constant" => match *coeffs {
                [n] => Ok(Sellmeier::Constant { n }),
                _ => Err("constant needs exactly 1 coefficient".to_string()),
            },
            other => Err(format!("unknown formula id `{other}`")),
        }
    }

    pub fn formula_id(&self) -> &'static str {
        match self {
            Sellmeier::PoleQuadratic { .. } => "pole_quadratic",
            Sellmeier::Standard { .. } => "sellmeier",
            Sellmeier::Constant { .. } => "constant",
        }
    }

    /// n² and d(n²)/dλ at `lambda_um` micrometers.
    fn n2_and_slope(&self, lambda_um: f64) -> (f64, f64) {
        let l2 = lambda_um * lambda_um;
        match *self {
            Sellmeier::PoleQuadratic { a, b, c, d } => {
                let den = l2 - c;
                (
                    a + b / den - d * l2,
                    -2.0 * b * lambda_um / (den * den) - 2.0 * d * lambda_um,
                )
            }
            Sellmeier::Standard { ref terms } => {
                terms.iter().fold((1.0, 0.0), |(n2, slope), &(b, c)| {
                    let den = l2 - c;
                    (
                        n2 + b * l2 / den,
                        slope - 2.0 * b * c * lambda_um / (den * den),
                    )
                })
            }
            Sellmeier::Constant { n } => (n * n, 0.0),
        }
    }

    /// Index and dn/dλ (per meter) at `lambda` meters.
    fn index_and_slope(&self, lambda: f64) -> (f64, f64) {
        let (n2, slope_um) = self.n2_and_slope(lambda * 1e6);
        let n = n2.sqrt();
        (n, slope_um * 1e6 / (2.0 * n))
    }
}

/// Polarization of a wave inside the crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Polarization {
    Ordinary,
    /// Extraordinary wave whose wavevector makes angle `theta` with the optic axis.
    Extraordinary {
        theta: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrystalProperties {
    pub name: String,
    pub sellmeier_o: Sellmeier,
    pub sellmeier_e: Sellmeier,
    /// Angle between optic axis and pump propagation, radians.
    pub cut_angle: f64,
    /// (λ_min, λ_max) in meters.
    pub transparency_range: (f64, f64),
}

impl CrystalProperties {
    pub fn new(
        name: impl Into<String>,
        sellmeier_o: Sellmeier,
        sellmeier_e: Sellmeier,
        transparency_range: (f64, f64),
    ) -> Result<Self> {
        let name = name.into();
        let (lo, hi) = transparency_range;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "crystal `{name}`: transparency range must satisfy 0 < min < max"
            )));
        }
        // Indices must stay real and no smaller than 1 across the whole range.
        const PROBES: usize = 1000;
        for fit in [&sellmeier_o, &sellmeier_e] {
            for i in 0..=PROBES {
                let lambda = lo + (hi - lo) * i as f64 / PROBES as f64;
                let (n2, _) = fit.n2_and_slope(lambda * 1e6);
                if !(n2 >= 1.0 && n2.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "crystal `{name}`: {} fit gives n^2 = {n2} at {:.1} nm",
                        fit.formula_id(),
                        lambda * 1e9
                    )));
                }
            }
        }
        Ok(CrystalProperties {
            name,
            sellmeier_o,
            sellmeier_e,
            cut_angle: 0.0,
            transparency_range,
        })
    }

    pub fn with_cut_angle(mut self, theta: f64) -> Result<Self> {
        check_angle(theta)?;
        self.cut_angle = theta;
        Ok(self)
    }

    /// The bundled BBO coefficient set.
    pub fn bbo() -> Self {
        load_crystals("bundled", BUNDLED_CRYSTALS)
            .expect("bundled crystal data is valid")
            .into_iter()
            .find(|c| c.name == "BBO")
            .expect("bundled data contains BBO")
    }

    fn check_wavelength(&self, lambda: f64, margin: f64) -> Result<()> {
        let (min, max) = self.transparency_range;
        if lambda.is_finite() && lambda >= min + margin && lambda <= max - margin {
            Ok(())
        } else {
            Err(Error::WavelengthOutOfRange {
                wavelength: lambda,
                min: min + margin,
                max: max - margin,
            })
        }
    }
}

fn check_angle(theta: f64) -> Result<()> {
    if (0.0..=FRAC_PI_2).contains(&theta) {
        Ok(())
    } else {
        Err(Error::AngleOutOfRange {
            angle: theta,
            min: 0.0,
            max: FRAC_PI_2,
        })
    }
}

/// Ordinary index n_o(λ).
pub fn index_o(crystal: &CrystalProperties, lambda: f64) -> Result<f64> {
    crystal.check_wavelength(lambda, 0.0)?;
    Ok(crystal.sellmeier_o.index_and_slope(lambda).0)
}

/// Principal extraordinary index n_e(λ).
pub fn index_e_principal(crystal: &CrystalProperties, lambda: f64) -> Result<f64> {
    crystal.check_wavelength(lambda, 0.0)?;
    Ok(crystal.sellmeier_e.index_and_slope(lambda).0)
}

/// Extraordinary index at angle θ from the optic axis, from the index ellipse
/// 1/n²(θ) = cos²θ/n_o² + sin²θ/n_e².
pub fn index_e_angle(crystal: &CrystalProperties, lambda: f64, theta: f64) -> Result<f64> {
    crystal.check_wavelength(lambda, 0.0)?;
    check_angle(theta)?;
    Ok(ellipse(crystal, lambda, theta).0)
}

/// n(θ) and dn/dλ on the index ellipse.
fn ellipse(crystal: &CrystalProperties, lambda: f64, theta: f64) -> (f64, f64) {
    let (no, dno) = crystal.sellmeier_o.index_and_slope(lambda);
    let (ne, dne) = crystal.sellmeier_e.index_and_slope(lambda);
    if theta == 0.0 {
        return (no, dno);
    }
    if theta == FRAC_PI_2 {
        return (ne, dne);
    }
    let (s, c) = theta.sin_cos();
    let inv_n2 = c * c / (no * no) + s * s / (ne * ne);
    let n = inv_n2.sqrt().recip();
    let dn = n * n * n * (c * c * dno / (no * no * no) + s * s * dne / (ne * ne * ne));
    (n, dn)
}

fn index_and_slope(
    crystal: &CrystalProperties,
    lambda: f64,
    pol: Polarization,
) -> Result<(f64, f64)> {
    match pol {
        Polarization::Ordinary => Ok(crystal.sellmeier_o.index_and_slope(lambda)),
        Polarization::Extraordinary { theta } => {
            check_angle(theta)?;
            Ok(ellipse(crystal, lambda, theta))
        }
    }
}

/// Refractive index for the given polarization.
pub fn index(crystal: &CrystalProperties, lambda: f64, pol: Polarization) -> Result<f64> {
    crystal.check_wavelength(lambda, 0.0)?;
    Ok(index_and_slope(crystal, lambda, pol)?.0)
}

/// k = 2π n(λ)/λ in rad/m.
pub fn wavenumber(crystal: &CrystalProperties, lambda: f64, pol: Polarization) -> Result<f64> {
    Ok(2.0 * PI * index(crystal, lambda, pol)? / lambda)
}

/// N = dk/dω = (n − λ dn/dλ)/c in s/m.
pub fn inverse_group_velocity(
    crystal: &CrystalProperties,
    lambda: f64,
    pol: Polarization,
) -> Result<f64> {
    crystal.check_wavelength(lambda, DERIVATIVE_MARGIN)?;
    let (n, dn) = index_and_slope(crystal, lambda, pol)?;
    Ok((n - lambda * dn) / SPEED_OF_LIGHT)
}

/// Magnitude of the Poynting-vector walk-off of an extraordinary wave,
/// tan ρ = (n²(θ)/2)·sin 2θ·|1/n_e² − 1/n_o²|.
pub fn walkoff_angle(crystal: &CrystalProperties, lambda: f64, theta: f64) -> Result<f64> {
    let n = index_e_angle(crystal, lambda, theta)?;
    if theta == 0.0 || theta == FRAC_PI_2 {
        return Ok(0.0);
    }
    let no = crystal.sellmeier_o.index_and_slope(lambda).0;
    let ne = crystal.sellmeier_e.index_and_slope(lambda).0;
    let tan_rho = 0.5 * n * n * (2.0 * theta).sin() * (1.0 / (ne * ne) - 1.0 / (no * no));
    Ok(tan_rho.abs().atan())
}

fn crystal_from_section(doc: &Document, section: &Section) -> Result<CrystalProperties> {
    let name = section
        .name
        .clone()
        .ok_or_else(|| doc.error(section.line, "crystal section needs a quoted name"))?;
    let required = |key: &str| {
        section
            .get(key)
            .ok_or_else(|| doc.error(section.line, format!("crystal `{name}` is missing `{key}`")))
    };
    let fit = |formula_key: &str, coeffs_key: &str| -> Result<Sellmeier> {
        let formula = required(formula_key)?;
        let coeffs = required(coeffs_key)?;
        let values = parse_number_list(&coeffs.value).map_err(|m| doc.error(coeffs.line, m))?;
        Sellmeier::from_formula(&formula.value, &values).map_err(|m| doc.error(formula.line, m))
    };
    let sellmeier_o = fit("formula_o", "coeffs_o")?;
    let sellmeier_e = fit("formula_e", "coeffs_e")?;
    let range = required("range_nm")?;
    let bounds = parse_number_list(&range.value).map_err(|m| doc.error(range.line, m))?;
    let [lo, hi] = bounds[..] else {
        return Err(doc.error(range.line, "range_nm needs two values"));
    };
    for entry in &section.entries {
        if !matches!(
            entry.key.as_str(),
            "formula_o" | "coeffs_o" | "formula_e" | "coeffs_e" | "range_nm"
        ) {
            return Err(doc.error(entry.line, format!("unknown crystal key `{}`", entry.key)));
        }
    }
    CrystalProperties::new(name, sellmeier_o, sellmeier_e, (lo * 1e-9, hi * 1e-9))
        .map_err(|e| doc.error(section.line, e.to_string()))
}

/// Parses every `[crystal "<name>"]` section of a crystal data file.
pub fn load_crystals(origin: &str, text: &str) -> Result<Vec<CrystalProperties>> {
    let doc = Document::parse(origin, text)?;
    for entry in &doc.preamble {
        match entry.key.as_str() {
            "version" => {
                if entry.value != CRYSTAL_FORMAT_VERSION.to_string() {
                    return Err(doc.error(
                        entry.line,
                        format!("unsupported crystal data version `{}`", entry.value),
                    ));
                }
            }
            other => return Err(doc.error(entry.line, format!("unknown key `{other}`"))),
        }
    }
    if let Some(other) = doc.sections.iter().find(|s| s.kind != "crystal") {
        return Err(doc.error(other.line, format!("unexpected section `{}`", other.kind)));
    }
    doc.sections("crystal")
        .map(|s| crystal_from_section(&doc, s))
        .collect()
}

/// Reads a crystal data file and returns the crystal called `name`.
pub fn load_crystal_file(path: &Path, name: &str) -> Result<CrystalProperties> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    load_crystals(&origin, &text)?
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::Config {
            path: origin,
            message: format!("no crystal named `{name}`"),
        })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    const NM: f64 = 1e-9;

    fn bbo() -> CrystalProperties {
        CrystalProperties::bbo()
    }

    fn flat(n: f64) -> CrystalProperties {
        CrystalProperties::new(
            "flat",
            Sellmeier::Constant { n },
            Sellmeier::Constant { n },
            (100.0 * NM, 5000.0 * NM),
        )
        .unwrap()
    }

    // Golden values: the pole_quadratic form evaluated by hand (python, 17 digits)
    // from the bundled coefficients.
    #[test]
    fn bbo_golden_indices() {
        let c = bbo();
        assert!((index_o(&c, 800.0 * NM).unwrap() - 1.660_553_524_880_645_0).abs() < 1e-14);
        assert!(
            (index_e_principal(&c, 400.0 * NM).unwrap() - 1.567_887_666_518_791_1).abs() < 1e-14
        );
        let n30 = index_e_angle(&c, 400.0 * NM, 30f64.to_radians()).unwrap();
        assert!((n30 - 1.658_923_127_845_143_1).abs() < 1e-14, "{n30}");
    }

    #[test]
    fn out_of_range_wavelength_is_rejected() {
        let c = bbo();
        let err = index_o(&c, 150.0 * NM).unwrap_err();
        assert!(
            matches!(err, Error::WavelengthOutOfRange { wavelength, .. } if wavelength == 150.0 * NM)
        );
        assert!(index_e_principal(&c, 4000.0 * NM).is_err());
        assert!(
            inverse_group_velocity(&c, c.transparency_range.0, Polarization::Ordinary).is_err()
        );
    }

    #[test]
    fn normal_dispersion_and_negative_birefringence() {
        let c = bbo();
        assert!(index_o(&c, 400.0 * NM).unwrap() > index_o(&c, 800.0 * NM).unwrap());
        assert!(index_e_principal(&c, 600.0 * NM).unwrap() < index_o(&c, 600.0 * NM).unwrap());
        let (lo, hi) = c.transparency_range;
        for i in 0..=200 {
            let l = lo + (hi - lo) * i as f64 / 200.0;
            assert!(index_o(&c, l).unwrap() > index_e_principal(&c, l).unwrap());
        }
    }

    #[test]
    fn ellipse_endpoints_are_exact() {
        let c = bbo();
        let l = 400.0 * NM;
        assert_eq!(index_e_angle(&c, l, 0.0).unwrap(), index_o(&c, l).unwrap());
        assert_eq!(
            index_e_angle(&c, l, FRAC_PI_2).unwrap(),
            index_e_principal(&c, l).unwrap()
        );
        assert!(index_e_angle(&c, l, -0.1).is_err());
        assert!(index_e_angle(&c, l, 1.6).is_err());
    }

    #[test]
    fn ellipse_monotone_in_theta() {
        let c = bbo();
        let mut prev = f64::INFINITY;
        for i in 0..=90 {
            let n = index_e_angle(&c, 532.0 * NM, (i as f64).to_radians().min(FRAC_PI_2)).unwrap();
            assert!(n <= prev);
            prev = n;
        }
    }

    #[test]
    fn wavenumber_identities() {
        let vac = flat(1.0);
        let k = wavenumber(&vac, 1e-6, Polarization::Ordinary).unwrap();
        assert!((k - 2.0 * PI * 1e6).abs() < 1e-6);
        let k2 = wavenumber(&vac, 2e-6, Polarization::Ordinary).unwrap();
        assert!((k / k2 - 2.0).abs() < 1e-15);
        let c = bbo();
        let k = wavenumber(&c, 800.0 * NM, Polarization::Ordinary).unwrap();
        assert!((k - 2.0 * PI * 1.660_553_524_880_645_0 / (800.0 * NM)).abs() < 1e-6);
    }

    #[test]
    fn dispersionless_group_velocity() {
        let c = flat(1.7);
        let n = inverse_group_velocity(&c, 700.0 * NM, Polarization::Ordinary).unwrap();
        assert_eq!(n, 1.7 / SPEED_OF_LIGHT);
    }

    #[test]
    fn group_index_exceeds_phase_index() {
        let c = bbo();
        for pol in [
            Polarization::Ordinary,
            Polarization::Extraordinary { theta: 0.5 },
        ] {
            let l = 800.0 * NM;
            let ng = inverse_group_velocity(&c, l, pol).unwrap() * SPEED_OF_LIGHT;
            assert!(ng > index(&c, l, pol).unwrap());
        }
    }

    #[test]
    fn walkoff_vanishes_on_axes() {
        let c = bbo();
        assert_eq!(walkoff_angle(&c, 400.0 * NM, 0.0).unwrap(), 0.0);
        assert_eq!(walkoff_angle(&c, 400.0 * NM, FRAC_PI_2).unwrap(), 0.0);
        assert!(walkoff_angle(&c, 400.0 * NM, 2.0).is_err());
        let rho = walkoff_angle(&c, 400.0 * NM, 0.5).unwrap();
        assert!(rho > 0.05 && rho < 0.1, "{rho}");
    }

    #[test]
    fn pure_functions_are_bit_reproducible() {
        let c = bbo();
        let pol = Polarization::Extraordinary { theta: 0.51 };
        let a = inverse_group_velocity(&c, 401.0 * NM, pol).unwrap();
        let b = inverse_group_velocity(&c.clone(), 401.0 * NM, pol).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn data_file_errors_name_the_line() {
        let bad = "version = 1\n[crystal \"X\"]\nformula_o = nope\ncoeffs_o = 1\nformula_e = constant\ncoeffs_e = 1.5\nrange_nm = 200, 2000\n";
        let err = load_crystals("x.txt", bad).unwrap_err();
        assert!(err.to_string().contains("x.txt:3"), "{err}");
        let below_one = "[crystal \"Y\"]\nformula_o = constant\ncoeffs_o = 0.9\nformula_e = constant\ncoeffs_e = 1.5\nrange_nm = 200, 2000\n";
        assert!(load_crystals("y", below_one).is_err());
        assert!(load_crystals("z", "version = 2\n").is_err());
    }

    #[test]
    fn standard_sellmeier_form() {
        // Single-term fit with C = 0 is dispersionless: n² = 1 + B.
        let s = Sellmeier::from_formula("sellmeier", &[1.25, 0.0]).unwrap();
        let c = CrystalProperties::new("s", s.clone(), s, (200.0 * NM, 2000.0 * NM)).unwrap();
        let n = index_o(&c, 600.0 * NM).unwrap();
        assert!((n - 1.5).abs() < 1e-15);
        let ng = inverse_group_velocity(&c, 600.0 * NM, Polarization::Ordinary).unwrap();
        assert!((ng * SPEED_OF_LIGHT - 1.5).abs() < 1e-14);
    }
}
