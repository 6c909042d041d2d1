//! First-order closed-form joint spectrum.
//!
//! The phase-matching sinc is replaced by a Gaussian of equal 1/e width,
//! sinc(bx) ≈ exp[−(αb)²x²], and every frequency dependence is kept to first
//! order. The joint spectrum is then a rotated 2-D Gaussian in
//! Λ± = (Λₛ ± Λᵢ)/√2 with rms widths ΔΛ₊ (set by pump bandwidth and pulse-front
//! tilt) and ΔΛ₋ (set by the pump waist). Bandwidths are rms; the 1/e
//! half-width of S along either diagonal is √2 times larger.

use std::f64::consts::{PI, SQRT_2};

use crate::dispersion::SPEED_OF_LIGHT;
use crate::error::{Error, Result};
use crate::phasematch::{effective_pump_inverse_group_velocity, SourceConfig};

/// Width constant of the Gaussian stand-in for sinc.
pub const SINC_ALPHA: f64 = 0.455;

/// Default relative tolerance for calling two bandwidths equal.
pub const DEFAULT_CORRELATION_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpectrumModel {
    /// rms width along Λ₊, meters.
    pub plus: f64,
    /// rms width along Λ₋, meters.
    pub minus: f64,
    pub alpha: f64,
}

impl GaussianSpectrumModel {
    pub fn new(plus: f64, minus: f64) -> Result<Self> {
        if !(plus > 0.0 && minus > 0.0 && plus.is_finite() && minus.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bandwidths must be positive, got ({plus}, {minus})"
            )));
        }
        Ok(GaussianSpectrumModel {
            plus,
            minus,
            alpha: SINC_ALPHA,
        })
    }

    pub fn from_config(config: &SourceConfig) -> Result<Self> {
        GaussianSpectrumModel::new(bandwidth_plus(config)?, bandwidth_minus(config)?)
    }

    /// Unit-probability prefactor 1/(2π ΔΛ₊ ΔΛ₋).
    pub fn normalization(&self) -> f64 {
        1.0 / (2.0 * PI * self.plus * self.minus)
    }
}

/// λₛ²/(2πc√2), the frequency-to-wavelength factor shared by both bandwidths.
fn prefactor(config: &SourceConfig) -> f64 {
    let ls = config.signal_center();
    ls * ls / (2.0 * PI * SPEED_OF_LIGHT * SQRT_2)
}

/// N′ₚ − Nₛ cos φ, s/m.
pub fn group_mismatch(config: &SourceConfig) -> Result<f64> {
    let ns = config.signal_inverse_group_velocity()?;
    Ok(effective_pump_inverse_group_velocity(config)?
        - ns * config.geometry.noncollinear_angle.cos())
}

/// ΔΛ₊ = (λₛ²/2πc)(1/√2)[1/Bₚ² + (αL)²(N′ₚ − Nₛ cos φ)²]^(−1/2).
pub fn bandwidth_plus(config: &SourceConfig) -> Result<f64> {
    let mismatch = group_mismatch(config)?;
    let al = SINC_ALPHA * config.geometry.length;
    let b = config.pump.bandwidth;
    let bracket = 1.0 / (b * b) + al * al * mismatch * mismatch;
    Ok(prefactor(config) / bracket.sqrt())
}

/// ΔΛ₋ = (λₛ²/2πc)(1/√2)[Nₛ sin φ W₀]⁻¹.
pub fn bandwidth_minus(config: &SourceConfig) -> Result<f64> {
    let sin_phi = config.geometry.noncollinear_angle.sin();
    if sin_phi == 0.0 {
        return Err(Error::Collinear);
    }
    let ns = config.signal_inverse_group_velocity()?;
    Ok(prefactor(config) / (ns * sin_phi * config.pump.waist))
}

/// ΔΛ₊^(max) = 2√2 Δλₚ.
pub fn max_bandwidth_plus(config: &SourceConfig) -> f64 {
    2.0 * SQRT_2 * config.pump.wavelength_bandwidth()
}

/// Eq.-(2)-form density S(Λₛ, Λᵢ) normalized to unit probability.
pub fn gaussian_joint_spectrum(model: &GaussianSpectrumModel, lambda_s: f64, lambda_i: f64) -> f64 {
    let plus = (lambda_s + lambda_i) / SQRT_2;
    let minus = (lambda_s - lambda_i) / SQRT_2;
    model.normalization()
        * (-plus * plus / (2.0 * model.plus * model.plus)).exp()
        * (-minus * minus / (2.0 * model.minus * model.minus)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correlation {
    /// Elongated along the anti-diagonal (ΔΛ₊ < ΔΛ₋).
    Anticorrelated,
    /// Circular contour.
    Uncorrelated,
    /// Elongated along the diagonal (ΔΛ₊ > ΔΛ₋).
    Correlated,
}

impl Correlation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Correlation::Anticorrelated => "anticorrelated",
            Correlation::Uncorrelated => "uncorrelated",
            Correlation::Correlated => "correlated",
        }
    }
}

impl std::fmt::Display for Correlation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bandwidths within `tolerance` of each other (relative to the larger) count
/// as uncorrelated.
pub fn classify_correlation(model: &GaussianSpectrumModel, tolerance: f64) -> Result<Correlation> {
    if !(tolerance > 0.0 && tolerance < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "correlation tolerance must lie in (0, 0.5), got {tolerance}"
        )));
    }
    let larger = model.plus.max(model.minus);
    Ok(if (model.plus - model.minus).abs() <= tolerance * larger {
        Correlation::Uncorrelated
    } else if model.plus < model.minus {
        Correlation::Anticorrelated
    } else {
        Correlation::Correlated
    })
}

/// Waist W₀* at which ΔΛ₋ equals the current ΔΛ₊.
pub fn separability_waist(config: &SourceConfig) -> Result<f64> {
    let sin_phi = config.geometry.noncollinear_angle.sin();
    if sin_phi == 0.0 {
        return Err(Error::Collinear);
    }
    let ns = config.signal_inverse_group_velocity()?;
    Ok(prefactor(config) / (ns * sin_phi * bandwidth_plus(config)?))
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// |sinc(1/α) − e⁻¹|: how well the Gaussian stand-in matches the sinc 1/e point.
pub fn sinc_alpha_check() -> f64 {
    (sinc(1.0 / SINC_ALPHA) - (-1.0f64).exp()).abs()
}

/// Tilt and waist giving an uncorrelated spectrum with ΔΛ₊ = ΔΛ₋ = target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Design {
    pub target: f64,
    /// The two tilt angles reaching the target, lower first. They coincide at
    /// ΔΛ₊^(max).
    pub tilts: [f64; 2],
    pub waist: f64,
}

pub fn design_for_bandwidth(config: &SourceConfig, target: f64) -> Result<Design> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target bandwidth must be positive, got {target}"
        )));
    }
    let max = max_bandwidth_plus(config);
    if target > max * (1.0 + 1e-12) {
        return Err(Error::Unreachable {
            target_nm: target * 1e9,
            max_nm: max * 1e9,
        });
    }
    let rho = config.pump_walkoff()?;
    if rho == 0.0 {
        return Err(Error::NoWalkoff);
    }
    let b = config.pump.bandwidth;
    let q = (prefactor(config) / target).powi(2);
    let al = SINC_ALPHA * config.geometry.length;
    // Within rounding of ΔΛ₊^(max) both branches collapse onto ξ₀.
    let excess = q - 1.0 / (b * b);
    let spread = if excess <= 1e-12 * q {
        0.0
    } else {
        excess.sqrt() / al
    };
    let np = config.pump_inverse_group_velocity()?;
    let ns = config.signal_inverse_group_velocity()?;
    let base = ns * config.geometry.noncollinear_angle.cos() - np;
    let tilt = |d: f64| (SPEED_OF_LIGHT * (base + d) / rho.tan()).atan();
    let tilts = [tilt(-spread), tilt(spread)];

    let sin_phi = config.geometry.noncollinear_angle.sin();
    if sin_phi == 0.0 {
        return Err(Error::Collinear);
    }
    let waist = prefactor(config) / (ns * sin_phi * target);
    Ok(Design {
        target,
        tilts,
        waist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::CrystalProperties;
    use crate::phasematch::{optimal_tilt, Geometry, Pump, TiltSpec};

    const NM: f64 = 1e-9;
    const UM: f64 = 1e-6;

    fn config(xi_deg: f64, waist: f64) -> SourceConfig {
        let pump = Pump::from_wavelength_bandwidth(400.0 * NM, 4.0 * NM, waist).unwrap();
        SourceConfig::phase_matched(
            CrystalProperties::bbo(),
            Geometry::new(1e-3, 2f64.to_radians()).unwrap(),
            pump,
            TiltSpec::from_angle(xi_deg.to_radians(), 400.0 * NM).unwrap(),
        )
        .unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn alpha_reproduces_sinc_one_over_e_point() {
        assert!(sinc_alpha_check() <= 1e-3);
        // Definition of the stand-in: exp[−(αb x)²] = e⁻¹ at x = 1/(αb).
        let b = 3.7;
        let x = 1.0 / (SINC_ALPHA * b);
        assert!(((-(SINC_ALPHA * b * x).powi(2)).exp() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn alpha_is_the_bisection_root_of_sinc() {
        // Independent bisection of sinc(1/a) = e⁻¹ over (0.3, 0.6).
        let f = |a: f64| (1.0 / a).sin() * a - (-1.0f64).exp();
        let (mut lo, mut hi) = (0.3, 0.6);
        assert!(f(lo).signum() != f(hi).signum());
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == f(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - SINC_ALPHA).abs() < 5e-4, "{lo}");
    }

    #[test]
    fn optimal_tilt_reaches_the_maximum() {
        let cfg = config(0.0, 45.0 * UM);
        let tuned = cfg.with_tilt_angle(optimal_tilt(&cfg).unwrap()).unwrap();
        let plus = bandwidth_plus(&tuned).unwrap();
        let ls = tuned.signal_center();
        let closed = ls * ls / (2.0 * PI * SPEED_OF_LIGHT) * tuned.pump.bandwidth / SQRT_2;
        assert!(rel(plus, closed) < 1e-12);
        assert!(rel(plus, max_bandwidth_plus(&tuned)) < 1e-12);
        assert!(rel(max_bandwidth_plus(&tuned), 2.0 * SQRT_2 * 4.0 * NM) < 1e-12);
        assert!((max_bandwidth_plus(&tuned) / NM - 11.31).abs() < 0.005);
    }

    #[test]
    fn long_crystal_limit_is_pump_independent() {
        let cfg = config(0.0, 45.0 * UM);
        let long = SourceConfig {
            geometry: Geometry::new(1.0, cfg.geometry.noncollinear_angle).unwrap(),
            ..cfg.clone()
        };
        let mismatch = group_mismatch(&long).unwrap();
        let limit = prefactor(&long) / (SINC_ALPHA * 1.0 * mismatch.abs());
        assert!(rel(bandwidth_plus(&long).unwrap(), limit) < 1e-6);
    }

    #[test]
    fn minus_bandwidth_scales_inversely_with_waist() {
        let a = bandwidth_minus(&config(0.0, 30.0 * UM)).unwrap();
        let b = bandwidth_minus(&config(0.0, 60.0 * UM)).unwrap();
        assert!(rel(a, 2.0 * b) < 1e-14);
        let huge = bandwidth_minus(&config(0.0, 10.0)).unwrap();
        assert!(huge < 1e-12);
    }

    #[test]
    fn collinear_minus_bandwidth_is_an_error() {
        let cfg = config(0.0, 45.0 * UM);
        let collinear = SourceConfig {
            geometry: Geometry::new(1e-3, 0.0).unwrap(),
            ..cfg
        };
        assert!(matches!(bandwidth_minus(&collinear), Err(Error::Collinear)));
        assert!(matches!(
            separability_waist(&collinear),
            Err(Error::Collinear)
        ));
    }

    #[test]
    fn max_bandwidth_scales_with_pump_bandwidth() {
        let a = config(0.0, 45.0 * UM);
        let mut b = a.clone();
        b.pump = Pump::from_wavelength_bandwidth(400.0 * NM, 8.0 * NM, 45.0 * UM).unwrap();
        assert!(rel(max_bandwidth_plus(&b), 2.0 * max_bandwidth_plus(&a)) < 1e-14);
    }

    #[test]
    fn gaussian_density_properties() {
        let m = GaussianSpectrumModel::new(3.0 * NM, 5.0 * NM).unwrap();
        assert_eq!(gaussian_joint_spectrum(&m, 0.0, 0.0), m.normalization());
        // Moments by brute-force quadrature on a rotated grid.
        let n = 801;
        let span = 8.0 * 5.0 * NM;
        let h = 2.0 * span / (n - 1) as f64;
        let (mut total, mut second) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let (s, t) = (-span + i as f64 * h, -span + j as f64 * h);
                let w = gaussian_joint_spectrum(&m, s, t) * h * h;
                total += w;
                second += w * ((s + t) / SQRT_2).powi(2);
            }
        }
        assert!((total - 1.0).abs() < 1e-6);
        assert!(rel(second.sqrt(), 3.0 * NM) < 1e-6);

        let iso = GaussianSpectrumModel::new(4.0 * NM, 4.0 * NM).unwrap();
        let g = |x: f64| (-x * x / (2.0 * 16.0 * NM * NM)).exp() / ((2.0 * PI).sqrt() * 4.0 * NM);
        for (s, t) in [(1.0, -2.0), (3.5, 0.5), (-6.0, -1.0)] {
            let (s, t) = (s * NM, t * NM);
            assert!(rel(gaussian_joint_spectrum(&iso, s, t), g(s) * g(t)) < 1e-12);
        }
    }

    #[test]
    fn classification() {
        let tol = DEFAULT_CORRELATION_TOLERANCE;
        let eq = GaussianSpectrumModel::new(2.0 * NM, 2.0 * NM).unwrap();
        assert_eq!(
            classify_correlation(&eq, tol).unwrap(),
            Correlation::Uncorrelated
        );
        let anti = GaussianSpectrumModel::new(2.0 * NM, 6.0 * NM).unwrap();
        assert_eq!(
            classify_correlation(&anti, tol).unwrap(),
            Correlation::Anticorrelated
        );
        let corr = GaussianSpectrumModel::new(6.0 * NM, 2.0 * NM).unwrap();
        assert_eq!(
            classify_correlation(&corr, tol).unwrap(),
            Correlation::Correlated
        );
        let scaled = GaussianSpectrumModel::new(6e3 * NM, 2e3 * NM).unwrap();
        assert_eq!(
            classify_correlation(&scaled, tol).unwrap(),
            Correlation::Correlated
        );
        assert!(classify_correlation(&eq, 0.5).is_err());
        assert!(classify_correlation(&eq, 0.0).is_err());
    }

    #[test]
    fn separability_waist_balances_bandwidths() {
        let cfg = config(10.0, 45.0 * UM);
        let w = separability_waist(&cfg).unwrap();
        let balanced = cfg.with_waist(w).unwrap();
        let (p, m) = (
            bandwidth_plus(&balanced).unwrap(),
            bandwidth_minus(&balanced).unwrap(),
        );
        assert!(rel(m, p) <= 1e-12);
        let model = GaussianSpectrumModel::from_config(&balanced).unwrap();
        assert_eq!(
            classify_correlation(&model, 0.05).unwrap(),
            Correlation::Uncorrelated
        );
        // W₀* ∝ 1/ΔΛ₊.
        let other = config(-5.0, 45.0 * UM);
        let ratio = separability_waist(&other).unwrap() / w;
        let expected = bandwidth_plus(&cfg).unwrap() / bandwidth_plus(&other).unwrap();
        assert!(rel(ratio, expected) < 1e-12);
    }

    #[test]
    fn design_round_trip() {
        let cfg = config(0.0, 45.0 * UM);
        let max = max_bandwidth_plus(&cfg);
        let d = design_for_bandwidth(&cfg, 0.6 * max).unwrap();
        assert!(d.tilts[0] < d.tilts[1]);
        for xi in d.tilts {
            let c = cfg
                .with_tilt_angle(xi)
                .unwrap()
                .with_waist(d.waist)
                .unwrap();
            assert!(rel(bandwidth_plus(&c).unwrap(), 0.6 * max) < 1e-9);
            assert!(rel(bandwidth_minus(&c).unwrap(), 0.6 * max) < 1e-9);
        }
        let at_max = design_for_bandwidth(&cfg, max).unwrap();
        let xi0 = optimal_tilt(&cfg).unwrap();
        assert!((at_max.tilts[0] - xi0).abs() < 1e-9 && (at_max.tilts[1] - xi0).abs() < 1e-9);
        assert!(matches!(
            design_for_bandwidth(&cfg, 2.0 * max),
            Err(Error::Unreachable { .. })
        ));
    }
}
