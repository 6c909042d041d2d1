//! Longitudinal phase mismatch, the type-I phase-matching angle, pulse-front
//! tilt and the effective pump inverse group velocity.
//!
//! Sign convention: the walk-off angle ρₚ is non-negative (see
//! [`crate::dispersion::walkoff_angle`]); the sign of the tilt coupling
//! tan ρₚ tan ξ is carried by ξ alone.
//!
//! The tilted pump adds `(tan ρₚ tan ξ / c)·(ωₚ − ωₚ⁰)` to the untilted
//! mismatch. The term is exactly linear in pump frequency detuning, so its
//! first derivative is the group-velocity shift that defines N′ₚ and nothing
//! beyond it.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::dispersion::{
    inverse_group_velocity, walkoff_angle, wavenumber, CrystalProperties, Polarization,
    SPEED_OF_LIGHT,
};
use crate::error::{Error, Result};

/// Crystal length and internal noncollinear half-angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// Crystal length L, meters.
    pub length: f64,
    /// Internal half-angle φ, radians. The signal travels at +φ and the idler
    /// at −φ in the y–z plane.
    pub noncollinear_angle: f64,
}

impl Geometry {
    pub fn new(length: f64, noncollinear_angle: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "crystal length must be positive, got {length}"
            )));
        }
        if !(0.0..FRAC_PI_2).contains(&noncollinear_angle) {
            return Err(Error::AngleOutOfRange {
                angle: noncollinear_angle,
                min: 0.0,
                max: FRAC_PI_2,
            });
        }
        Ok(Geometry {
            length,
            noncollinear_angle,
        })
    }
}

/// Grating parameters a tilt was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grating {
    pub order: i32,
    /// Groove spacing d, meters.
    pub groove_spacing: f64,
    /// Output diffraction angle β₀, radians.
    pub diffraction_angle: f64,
}

/// Pulse-front tilt ξ and the angular dispersion ε producing it, related by
/// tan ξ = −λ ε at `reference_wavelength`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltSpec {
    angle: f64,
    angular_dispersion: f64,
    reference_wavelength: f64,
    grating: Option<Grating>,
}

impl TiltSpec {
    pub fn from_angle(angle: f64, reference_wavelength: f64) -> Result<Self> {
        if !(angle.abs() < FRAC_PI_2) {
            return Err(Error::AngleOutOfRange {
                angle,
                min: -FRAC_PI_2,
                max: FRAC_PI_2,
            });
        }
        if !(reference_wavelength > 0.0) {
            return Err(Error::InvalidParameter(
                "tilt reference wavelength must be positive".into(),
            ));
        }
        Ok(TiltSpec {
            angle,
            angular_dispersion: -angle.tan() / reference_wavelength,
            reference_wavelength,
            grating: None,
        })
    }

    pub fn untilted(reference_wavelength: f64) -> Self {
        TiltSpec {
            angle: 0.0,
            angular_dispersion: 0.0,
            reference_wavelength,
            grating: None,
        }
    }

    /// Tilt angle ξ, radians.
    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// Angular dispersion ε, rad/m.
    pub fn angular_dispersion(&self) -> f64 {
        self.angular_dispersion
    }

    pub fn reference_wavelength(&self) -> f64 {
        self.reference_wavelength
    }

    pub fn grating(&self) -> Option<&Grating> {
        self.grating.as_ref()
    }

    /// ξ recomputed from the stored ε.
    pub fn angle_from_dispersion(&self) -> f64 {
        (-self.reference_wavelength * self.angular_dispersion).atan()
    }
}

/// Tilt produced by a grating of order `m`, groove spacing `d` and output
/// angle `beta0`: ε = m/(d cos β₀), tan ξ = −λε.
pub fn tilt_from_grating(m: i32, d: f64, beta0: f64, lambda: f64) -> Result<TiltSpec> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "groove spacing must be positive, got {d}"
        )));
    }
    if !(beta0.abs() < FRAC_PI_2) {
        return Err(Error::AngleOutOfRange {
            angle: beta0,
            min: -FRAC_PI_2,
            max: FRAC_PI_2,
        });
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(
            "wavelength must be positive".into(),
        ));
    }
    let eps = f64::from(m) / (d * beta0.cos());
    Ok(TiltSpec {
        angle: (-lambda * eps).atan(),
        angular_dispersion: eps,
        reference_wavelength: lambda,
        grating: Some(Grating {
            order: m,
            groove_spacing: d,
            diffraction_angle: beta0,
        }),
    })
}

/// Gaussian pump: center wavelength, rms angular-frequency bandwidth and
/// beam waist along y at the crystal input face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pump {
    /// λₚ⁰, meters.
    pub center_wavelength: f64,
    /// Bₚ, rad/s.
    pub bandwidth: f64,
    /// W₀, meters.
    pub waist: f64,
}

impl Pump {
    pub fn new(center_wavelength: f64, bandwidth: f64, waist: f64) -> Result<Self> {
        for (label, v) in [
            ("pump wavelength", center_wavelength),
            ("pump bandwidth", bandwidth),
            ("pump waist", waist),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{label} must be positive, got {v}"
                )));
            }
        }
        Ok(Pump {
            center_wavelength,
            bandwidth,
            waist,
        })
    }

    /// Builds a pump from its rms wavelength bandwidth Δλₚ = λₚ⁰²Bₚ/(2πc).
    pub fn from_wavelength_bandwidth(
        center_wavelength: f64,
        wavelength_bandwidth: f64,
        waist: f64,
    ) -> Result<Self> {
        let bandwidth = 2.0 * PI * SPEED_OF_LIGHT * wavelength_bandwidth
            / (center_wavelength * center_wavelength);
        Pump::new(center_wavelength, bandwidth, waist)
    }

    /// Δλₚ, meters.
    pub fn wavelength_bandwidth(&self) -> f64 {
        self.center_wavelength * self.center_wavelength * self.bandwidth
            / (2.0 * PI * SPEED_OF_LIGHT)
    }

    pub fn center_frequency(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.center_wavelength
    }
}

/// Full description of a noncollinear degenerate type-I source: pump
/// extraordinary at the crystal cut angle, signal and idler ordinary at
/// 2λₚ⁰.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceConfig {
    pub crystal: CrystalProperties,
    pub geometry: Geometry,
    pub pump: Pump,
    pub tilt: TiltSpec,
}

impl SourceConfig {
    pub fn new(
        crystal: CrystalProperties,
        geometry: Geometry,
        pump: Pump,
        tilt: TiltSpec,
    ) -> Result<Self> {
        let cfg = SourceConfig {
            crystal,
            geometry,
            pump,
            tilt,
        };
        // All three center wavelengths must be usable for group quantities.
        inverse_group_velocity(
            &cfg.crystal,
            cfg.pump.center_wavelength,
            cfg.pump_polarization(),
        )?;
        inverse_group_velocity(&cfg.crystal, cfg.signal_center(), Polarization::Ordinary)?;
        Ok(cfg)
    }

    /// Sets the cut angle by [`phase_matching_angle`] and builds the config.
    pub fn phase_matched(
        crystal: CrystalProperties,
        geometry: Geometry,
        pump: Pump,
        tilt: TiltSpec,
    ) -> Result<Self> {
        let theta = phase_matching_angle(
            &crystal,
            pump.center_wavelength,
            geometry.noncollinear_angle,
        )?;
        SourceConfig::new(crystal.with_cut_angle(theta)?, geometry, pump, tilt)
    }

    pub fn with_tilt(&self, tilt: TiltSpec) -> Self {
        SourceConfig {
            tilt,
            ..self.clone()
        }
    }

    pub fn with_tilt_angle(&self, xi: f64) -> Result<Self> {
        Ok(self.with_tilt(TiltSpec::from_angle(xi, self.pump.center_wavelength)?))
    }

    pub fn with_optimal_tilt(&self) -> Result<Self> {
        self.with_tilt_angle(optimal_tilt(self)?)
    }

    pub fn with_waist(&self, waist: f64) -> Result<Self> {
        let pump = Pump::new(self.pump.center_wavelength, self.pump.bandwidth, waist)?;
        Ok(SourceConfig {
            pump,
            ..self.clone()
        })
    }

    /// λₛ⁰ = λᵢ⁰ = 2λₚ⁰.
    pub fn signal_center(&self) -> f64 {
        2.0 * self.pump.center_wavelength
    }

    pub fn idler_center(&self) -> f64 {
        self.signal_center()
    }

    pub fn pump_polarization(&self) -> Polarization {
        Polarization::Extraordinary {
            theta: self.crystal.cut_angle,
        }
    }

    /// Nₚ at λₚ⁰ (untilted).
    pub fn pump_inverse_group_velocity(&self) -> Result<f64> {
        inverse_group_velocity(
            &self.crystal,
            self.pump.center_wavelength,
            self.pump_polarization(),
        )
    }

    /// Nₛ at λₛ⁰.
    pub fn signal_inverse_group_velocity(&self) -> Result<f64> {
        inverse_group_velocity(&self.crystal, self.signal_center(), Polarization::Ordinary)
    }

    /// ρₚ at λₚ⁰ and the cut angle.
    pub fn pump_walkoff(&self) -> Result<f64> {
        walkoff_angle(
            &self.crystal,
            self.pump.center_wavelength,
            self.crystal.cut_angle,
        )
    }
}

/// Precomputed pieces of Δk for repeated evaluation on a grid.
#[derive(Debug, Clone)]
pub(crate) struct Mismatch<'a> {
    config: &'a SourceConfig,
    cos_phi: f64,
    inv_pump_center: f64,
    /// tan ρₚ tan ξ / c, s/m.
    tilt_coupling: f64,
}

impl<'a> Mismatch<'a> {
    pub(crate) fn new(config: &'a SourceConfig) -> Result<Self> {
        let rho = config.pump_walkoff()?;
        Ok(Mismatch {
            config,
            cos_phi: config.geometry.noncollinear_angle.cos(),
            inv_pump_center: 1.0 / config.pump.center_wavelength,
            tilt_coupling: rho.tan() * config.tilt.angle.tan() / SPEED_OF_LIGHT,
        })
    }

    /// Δk and the signal/idler wavenumbers.
    pub(crate) fn eval(&self, lambda_s: f64, lambda_i: f64) -> Result<MismatchTerms> {
        let cfg = self.config;
        let inv_sum = 1.0 / lambda_s + 1.0 / lambda_i;
        let lambda_p = 1.0 / inv_sum;
        let k_p = wavenumber(&cfg.crystal, lambda_p, cfg.pump_polarization())?;
        let k_s = wavenumber(&cfg.crystal, lambda_s, Polarization::Ordinary)?;
        let k_i = wavenumber(&cfg.crystal, lambda_i, Polarization::Ordinary)?;
        let pump_detuning = 2.0 * PI * SPEED_OF_LIGHT * (inv_sum - self.inv_pump_center);
        let delta_k = k_p - (k_s + k_i) * self.cos_phi + self.tilt_coupling * pump_detuning;
        Ok(MismatchTerms {
            delta_k,
            k_s,
            k_i,
            pump_detuning,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct MismatchTerms {
    pub delta_k: f64,
    pub k_s: f64,
    pub k_i: f64,
    /// ωₛ + ωᵢ − ωₚ⁰, rad/s.
    pub pump_detuning: f64,
}

/// Longitudinal phase mismatch Δk = kₚ − (kₛ + kᵢ) cos φ plus the tilt term,
/// with the pump at ωₚ = ωₛ + ωᵢ. Wavelengths in meters, result in rad/m.
pub fn delta_k(config: &SourceConfig, lambda_s: f64, lambda_i: f64) -> Result<f64> {
    Ok(Mismatch::new(config)?.eval(lambda_s, lambda_i)?.delta_k)
}

const SCAN_LOW_DEG: f64 = 0.1;
const SCAN_HIGH_DEG: f64 = 89.9;
const SCAN_STEP_DEG: f64 = 0.1;
const ANGLE_TOLERANCE: f64 = 1e-12;

/// Cut angle θ at which the degenerate center wavelengths are phase matched
/// for pump wavelength `pump_wavelength` and half-angle `phi`.
pub fn phase_matching_angle(
    crystal: &CrystalProperties,
    pump_wavelength: f64,
    phi: f64,
) -> Result<f64> {
    let signal = 2.0 * pump_wavelength;
    let k_signal = wavenumber(crystal, signal, Polarization::Ordinary)?;
    let cos_phi = phi.cos();
    let mismatch = |theta: f64| -> Result<f64> {
        let k_p = wavenumber(
            crystal,
            pump_wavelength,
            Polarization::Extraordinary { theta },
        )?;
        Ok(k_p - 2.0 * k_signal * cos_phi)
    };

    let steps = ((SCAN_HIGH_DEG - SCAN_LOW_DEG) / SCAN_STEP_DEG).round() as usize;
    let angle_at = |i: usize| (SCAN_LOW_DEG + SCAN_STEP_DEG * i as f64).to_radians();
    let mut lo = angle_at(0);
    let mut f_lo = mismatch(lo)?;
    let first = (lo, f_lo);
    let mut bracket = None;
    for i in 1..=steps {
        let hi = angle_at(i);
        let f_hi = mismatch(hi)?;
        if f_lo == 0.0 {
            return Ok(lo);
        }
        if f_lo.signum() != f_hi.signum() {
            bracket = Some((lo, f_lo, hi, f_hi));
            break;
        }
        lo = hi;
        f_lo = f_hi;
    }
    let Some((mut a, mut fa, mut b, mut fb)) = bracket else {
        return Err(Error::Unphasematchable {
            theta_low: first.0,
            theta_high: lo,
            dk_low: first.1,
            dk_high: f_lo,
        });
    };

    while b - a > ANGLE_TOLERANCE {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = mismatch(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }

    // Secant polish, kept inside the bracket.
    let mut best = if fa.abs() < fb.abs() {
        (a, fa)
    } else {
        (b, fb)
    };
    for _ in 0..4 {
        if fb == fa {
            break;
        }
        let x = b - fb * (b - a) / (fb - fa);
        if !(x >= a && x <= b) {
            break;
        }
        let fx = mismatch(x)?;
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 {
            break;
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Ok(best.0)
}

/// N′ₚ = Nₚ + tan ρₚ tan ξ / c, s/m.
pub fn effective_pump_inverse_group_velocity(config: &SourceConfig) -> Result<f64> {
    let np = config.pump_inverse_group_velocity()?;
    let rho = config.pump_walkoff()?;
    Ok(np + rho.tan() * config.tilt.angle.tan() / SPEED_OF_LIGHT)
}

/// Tilt ξ₀ = atan[c(Nₛ cos φ − Nₚ)/tan ρₚ] that matches N′ₚ to Nₛ cos φ.
pub fn optimal_tilt(config: &SourceConfig) -> Result<f64> {
    let rho = config.pump_walkoff()?;
    if rho == 0.0 {
        return Err(Error::NoWalkoff);
    }
    let np = config.pump_inverse_group_velocity()?;
    let ns = config.signal_inverse_group_velocity()?;
    let cos_phi = config.geometry.noncollinear_angle.cos();
    Ok((SPEED_OF_LIGHT * (ns * cos_phi - np) / rho.tan()).atan())
}
