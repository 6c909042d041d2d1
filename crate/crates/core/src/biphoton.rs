//! Full biphoton amplitude
//!
//! Φ(Λₛ, Λᵢ) ∝ E_ω(ωₛ + ωᵢ) · E_q[(kₛ − kᵢ) sin φ] · sinc(ΔkL/2) · exp(iΔkL/2)
//!
//! evaluated with the complete Sellmeier dispersion of every wavenumber, on a
//! uniform grid of wavelength detunings Λⱼ = λⱼ − λⱼ⁰.

use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussmodel::{bandwidth_minus, bandwidth_plus};
use crate::phasematch::{Mismatch, SourceConfig};

/// Smallest accepted sample count per axis.
pub const MIN_GRID_POINTS: usize = 16;
/// Default sample count per axis.
pub const DEFAULT_GRID_POINTS: usize = 256;
/// Default half-span in units of the larger predicted rms bandwidth.
pub const AUTO_SPAN_WIDTHS: f64 = 6.0;

/// Pump spectral envelope exp[−Ωₚ²/(4Bₚ²)] at detuning `detuning` (rad/s).
pub fn pump_spectral_amplitude(detuning: f64, bandwidth: f64) -> f64 {
    (-detuning * detuning / (4.0 * bandwidth * bandwidth)).exp()
}

/// Pump transverse envelope exp[−q²W₀²/4] at transverse wavenumber `q` (rad/m).
pub fn pump_transverse_amplitude(q: f64, waist: f64) -> f64 {
    (-q * q * waist * waist / 4.0).exp()
}

/// sinc(ΔkL/2)·exp(iΔkL/2).
pub fn phase_matching_amplitude(delta_k: f64, length: f64) -> Complex64 {
    let x = 0.5 * delta_k * length;
    if x == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let (s, c) = x.sin_cos();
    let sinc = s / x;
    Complex64::new(sinc * c, sinc * s)
}

/// Whether the longitudinal phase factor exp(iΔkL/2) is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseMode {
    #[default]
    Full,
    /// Drop exp(iΔkL/2); the amplitude becomes real (the sinc keeps its sign).
    Stripped,
}

struct AmplitudeModel<'a> {
    config: &'a SourceConfig,
    mismatch: Mismatch<'a>,
    sin_phi: f64,
    phase: PhaseMode,
}

impl<'a> AmplitudeModel<'a> {
    fn new(config: &'a SourceConfig, phase: PhaseMode) -> Result<Self> {
        Ok(AmplitudeModel {
            config,
            mismatch: Mismatch::new(config)?,
            sin_phi: config.geometry.noncollinear_angle.sin(),
            phase,
        })
    }

    fn eval(&self, detuning_s: f64, detuning_i: f64) -> Result<Complex64> {
        let cfg = self.config;
        let terms = self.mismatch.eval(
            cfg.signal_center() + detuning_s,
            cfg.idler_center() + detuning_i,
        )?;
        let spectral = pump_spectral_amplitude(terms.pump_detuning, cfg.pump.bandwidth);
        let transverse =
            pump_transverse_amplitude((terms.k_s - terms.k_i) * self.sin_phi, cfg.pump.waist);
        let pm = match self.phase {
            PhaseMode::Full => phase_matching_amplitude(terms.delta_k, cfg.geometry.length),
            PhaseMode::Stripped => {
                let x = 0.5 * terms.delta_k * cfg.geometry.length;
                Complex64::new(if x == 0.0 { 1.0 } else { x.sin() / x }, 0.0)
            }
        };
        Ok(pm * (spectral * transverse))
    }
}

/// Unnormalized Φ at detunings (Λₛ, Λᵢ) in meters.
pub fn joint_amplitude(
    config: &SourceConfig,
    detuning_s: f64,
    detuning_i: f64,
) -> Result<Complex64> {
    AmplitudeModel::new(config, PhaseMode::Full)?.eval(detuning_s, detuning_i)
}

/// Uniform sampling of (Λₛ, Λᵢ), symmetric about zero on both axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    /// Half-width of the Λₛ axis, meters.
    pub half_span_s: f64,
    /// Half-width of the Λᵢ axis, meters.
    pub half_span_i: f64,
    pub n_s: usize,
    pub n_i: usize,
}

impl FrequencyGrid {
    pub fn new(half_span_s: f64, half_span_i: f64, n_s: usize, n_i: usize) -> Result<Self> {
        if n_s < MIN_GRID_POINTS || n_i < MIN_GRID_POINTS {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {MIN_GRID_POINTS} points per axis, got {n_s}x{n_i}"
            )));
        }
        for span in [half_span_s, half_span_i] {
            if !(span > 0.0 && span.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "grid half-span must be positive, got {span}"
                )));
            }
        }
        Ok(FrequencyGrid {
            half_span_s,
            half_span_i,
            n_s,
            n_i,
        })
    }

    pub fn square(half_span: f64, n: usize) -> Result<Self> {
        FrequencyGrid::new(half_span, half_span, n, n)
    }

    /// Square grid of half-span 6·max(ΔΛ₊, ΔΛ₋) from the Gaussian model.
    pub fn auto(config: &SourceConfig, n: usize) -> Result<Self> {
        let widest = bandwidth_plus(config)?.max(bandwidth_minus(config)?);
        FrequencyGrid::square(AUTO_SPAN_WIDTHS * widest, n)
    }

    fn node(half_span: f64, n: usize, k: usize) -> f64 {
        // (2k − (n−1)) is an exact integer, so nodes are exactly antisymmetric.
        (2.0 * k as f64 - (n - 1) as f64) * (half_span / (n - 1) as f64)
    }

    pub fn detuning_s(&self, i: usize) -> f64 {
        Self::node(self.half_span_s, self.n_s, i)
    }

    pub fn detuning_i(&self, j: usize) -> f64 {
        Self::node(self.half_span_i, self.n_i, j)
    }

    pub fn step_s(&self) -> f64 {
        2.0 * self.half_span_s / (self.n_s - 1) as f64
    }

    pub fn step_i(&self) -> f64 {
        2.0 * self.half_span_i / (self.n_i - 1) as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.step_s() * self.step_i()
    }

    pub fn len(&self) -> usize {
        self.n_s * self.n_i
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Normalized amplitude Φ and intensity S = |Φ|² on a grid, stored row-major
/// with the signal index as the row.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectrumGrid {
    pub grid: FrequencyGrid,
    pub amplitude: Vec<Complex64>,
    pub intensity: Vec<f64>,
    /// Factor 𝒩 applied to |Φ|² so that Σ S δΛₛ δΛᵢ = 1.
    pub norm: f64,
}

impl JointSpectrumGrid {
    /// Normalizes raw amplitudes given in row-major order.
    pub fn from_amplitudes(grid: FrequencyGrid, mut amplitude: Vec<Complex64>) -> Result<Self> {
        if amplitude.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "amplitude has {} entries, grid has {}",
                amplitude.len(),
                grid.len()
            )));
        }
        // Sequential sum in index order keeps the result independent of how
        // the nodes were evaluated.
        let raw: f64 = amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.cell_area();
        if !(raw > 0.0) || !raw.is_finite() {
            return Err(Error::EmptySpectrum);
        }
        let norm = 1.0 / raw;
        let scale = norm.sqrt();
        for a in &mut amplitude {
            *a *= scale;
        }
        let intensity = amplitude.iter().map(|a| a.norm_sqr()).collect();
        Ok(JointSpectrumGrid {
            grid,
            amplitude,
            intensity,
            norm,
        })
    }

    /// Samples `f(Λₛ, Λᵢ)` on every node and normalizes.
    pub fn from_fn<F>(grid: FrequencyGrid, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        Self::try_from_fn(grid, |s, i| Ok(f(s, i)))
    }

    pub fn try_from_fn<F>(grid: FrequencyGrid, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<Complex64> + Sync,
    {
        let row = |i: usize| -> Result<Vec<Complex64>> {
            let ls = grid.detuning_s(i);
            (0..grid.n_i).map(|j| f(ls, grid.detuning_i(j))).collect()
        };
        #[cfg(feature = "parallel")]
        let rows: Result<Vec<Vec<Complex64>>> = (0..grid.n_s).into_par_iter().map(row).collect();
        #[cfg(not(feature = "parallel"))]
        let rows: Result<Vec<Vec<Complex64>>> = (0..grid.n_s).map(row).collect();
        let amplitude = rows?.into_iter().flatten().collect();
        Self::from_amplitudes(grid, amplitude)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.grid.n_i + j
    }

    pub fn amplitude_at(&self, i: usize, j: usize) -> Complex64 {
        self.amplitude[self.index(i, j)]
    }

    pub fn intensity_at(&self, i: usize, j: usize) -> f64 {
        self.intensity[self.index(i, j)]
    }

    /// Σ S δΛₛ δΛᵢ.
    pub fn total_probability(&self) -> f64 {
        self.intensity.iter().sum::<f64>() * self.grid.cell_area()
    }
}

/// Evaluates Φ on every node of `grid` and normalizes to unit probability.
pub fn joint_spectrum_grid(
    config: &SourceConfig,
    grid: FrequencyGrid,
    phase: PhaseMode,
) -> Result<JointSpectrumGrid> {
    let model = AmplitudeModel::new(config, phase)?;
    JointSpectrumGrid::try_from_fn(grid, |s, i| model.eval(s, i))
}
