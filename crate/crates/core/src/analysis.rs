//! Bandwidths, correlation and heralded purity measured on a sampled joint
//! spectrum.

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::biphoton::JointSpectrumGrid;
use crate::error::{Error, Result};

/// Singular values below this fraction of the largest are dropped.
pub const SINGULAR_VALUE_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtResult {
    /// Schmidt weights λₙ, descending, summing to one.
    pub coefficients: Vec<f64>,
    /// K = 1/Σλₙ².
    pub schmidt_number: f64,
    /// P = 1/K.
    pub purity: f64,
    pub n_modes_kept: usize,
}

impl SchmidtResult {
    /// Builds a result from weights that already sum to one.
    pub fn from_coefficients(mut coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::InvalidParameter(
                "Schmidt weights must be a non-empty list of non-negative numbers".into(),
            ));
        }
        coefficients.sort_by(|a, b| b.total_cmp(a));
        let purity: f64 = coefficients.iter().map(|c| c * c).sum();
        Ok(SchmidtResult {
            n_modes_kept: coefficients.len(),
            schmidt_number: 1.0 / purity,
            purity,
            coefficients,
        })
    }
}

/// Schmidt decomposition of the amplitude matrix Φᵢⱼ·√(δΛₛ δΛᵢ).
pub fn schmidt_decompose(grid: &JointSpectrumGrid) -> Result<SchmidtResult> {
    let g = &grid.grid;
    let weight = g.cell_area().sqrt();
    let matrix =
        DMatrix::<Complex64>::from_fn(g.n_s, g.n_i, |i, j| grid.amplitude_at(i, j) * weight);
    let mut sigma: Vec<f64> = matrix.singular_values().iter().copied().collect();
    sigma.sort_by(|a, b| b.total_cmp(a));
    let largest = sigma.first().copied().unwrap_or(0.0);
    if !(largest > 0.0) {
        return Err(Error::EmptySpectrum);
    }
    sigma.retain(|s| *s >= SINGULAR_VALUE_CUTOFF * largest);
    let total: f64 = sigma.iter().map(|s| s * s).sum();
    SchmidtResult::from_coefficients(sigma.iter().map(|s| s * s / total).collect())
}

/// P = Σλₙ².
pub fn heralded_purity(result: &SchmidtResult) -> f64 {
    result.coefficients.iter().map(|c| c * c).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagonal {
    /// Λ₊ = (Λₛ + Λᵢ)/√2.
    Plus,
    /// Λ₋ = (Λₛ − Λᵢ)/√2.
    Minus,
}

fn expectation(grid: &JointSpectrumGrid, f: impl Fn(f64, f64) -> f64) -> f64 {
    let g = &grid.grid;
    let mut acc = 0.0;
    for i in 0..g.n_s {
        let s = g.detuning_s(i);
        for j in 0..g.n_i {
            acc += grid.intensity_at(i, j) * f(s, g.detuning_i(j));
        }
    }
    acc * g.cell_area()
}

/// rms width of Λ₊ or Λ₋ under S, meters.
pub fn rms_bandwidth_diag(grid: &JointSpectrumGrid, direction: Diagonal) -> f64 {
    let coord = move |s: f64, i: f64| match direction {
        Diagonal::Plus => (s + i) / SQRT_2,
        Diagonal::Minus => (s - i) / SQRT_2,
    };
    let mean = expectation(grid, coord);
    expectation(grid, |s, i| (coord(s, i) - mean).powi(2)).sqrt()
}

/// Mean of Λ₊ or Λ₋ under S, meters.
pub fn mean_diag(grid: &JointSpectrumGrid, direction: Diagonal) -> f64 {
    expectation(grid, |s, i| match direction {
        Diagonal::Plus => (s + i) / SQRT_2,
        Diagonal::Minus => (s - i) / SQRT_2,
    })
}

/// Pearson correlation of Λₛ and Λᵢ under S.
pub fn pearson_correlation(grid: &JointSpectrumGrid) -> Result<f64> {
    let ms = expectation(grid, |s, _| s);
    let mi = expectation(grid, |_, i| i);
    let vs = expectation(grid, |s, _| (s - ms).powi(2));
    let vi = expectation(grid, |_, i| (i - mi).powi(2));
    if !(vs > 0.0 && vi > 0.0) {
        return Err(Error::Numerical(
            "zero variance: correlation coefficient undefined".into(),
        ));
    }
    let cov = expectation(grid, |s, i| (s - ms) * (i - mi));
    Ok((cov / (vs * vi).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Signal,
    Idler,
}

/// One-photon spectrum of a single arm.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    /// Detunings, meters.
    pub detuning: Vec<f64>,
    /// Density per meter.
    pub density: Vec<f64>,
}

impl Marginal {
    pub fn step(&self) -> f64 {
        self.detuning[1] - self.detuning[0]
    }

    pub fn total(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.step()
    }

    pub fn rms(&self) -> f64 {
        let h = self.step();
        let mean: f64 = self
            .detuning
            .iter()
            .zip(&self.density)
            .map(|(x, p)| x * p)
            .sum::<f64>()
            * h;
        let var: f64 = self
            .detuning
            .iter()
            .zip(&self.density)
            .map(|(x, p)| (x - mean).powi(2) * p)
            .sum::<f64>()
            * h;
        var.sqrt()
    }
}

/// Sums S over the other arm.
pub fn marginal_spectrum(grid: &JointSpectrumGrid, arm: Arm) -> Marginal {
    let g = &grid.grid;
    match arm {
        Arm::Signal => Marginal {
            detuning: (0..g.n_s).map(|i| g.detuning_s(i)).collect(),
            density: (0..g.n_s)
                .map(|i| (0..g.n_i).map(|j| grid.intensity_at(i, j)).sum::<f64>() * g.step_i())
                .collect(),
        },
        Arm::Idler => Marginal {
            detuning: (0..g.n_i).map(|j| g.detuning_i(j)).collect(),
            density: (0..g.n_i)
                .map(|j| (0..g.n_s).map(|i| grid.intensity_at(i, j)).sum::<f64>() * g.step_s())
                .collect(),
        },
    }
}
