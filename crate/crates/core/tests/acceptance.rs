//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::f64::consts::{PI, SQRT_2};
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use tiltspdc::analysis::{pearson_correlation, rms_bandwidth_diag, schmidt_decompose, Diagonal};
use tiltspdc::biphoton::{joint_spectrum_grid, FrequencyGrid, JointSpectrumGrid, PhaseMode};
use tiltspdc::config::RunConfig;
use tiltspdc::dispersion::{
    inverse_group_velocity, wavenumber, CrystalProperties, Polarization, SPEED_OF_LIGHT,
};
use tiltspdc::gaussmodel::{bandwidth_plus, max_bandwidth_plus, SINC_ALPHA};
use tiltspdc::phasematch::{
    effective_pump_inverse_group_velocity, optimal_tilt, Geometry, Pump, SourceConfig, TiltSpec,
};
use tiltspdc::report::{cmd_figures, cmd_scan_tilt, cmd_scan_waist, panel_configs, Options};

const NM: f64 = 1e-9;
const UM: f64 = 1e-6;
const REFERENCE_OPTIMAL_TILT_DEG: f64 = -13.8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn base() -> SourceConfig {
    RunConfig::default().build().expect("default config builds")
}

fn c1_sinc_constant() -> Outcome {
    let x = 1.0 / SINC_ALPHA;
    let d = (x.sin() / x - (-1f64).exp()).abs();
    outcome(
        d <= 1e-3,
        format!("|sinc(1/0.455) - 1/e| = {d:.3e} (limit 1e-3)"),
    )
}

fn c2_vgm_inversion() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let lp = rng.random_range(300.0..600.0) * NM;
        let phi = rng.random_range(0.5f64..8.0).to_radians();
        let length = rng.random_range(0.1..5.0) * 1e-3;
        let dl = rng.random_range(0.5..10.0) * NM;
        let waist = rng.random_range(10.0..500.0) * UM;
        let cfg = SourceConfig::phase_matched(
            CrystalProperties::bbo(),
            Geometry::new(length, phi).unwrap(),
            Pump::from_wavelength_bandwidth(lp, dl, waist).unwrap(),
            TiltSpec::untilted(lp),
        )
        .unwrap();
        let tilted = cfg.with_optimal_tilt().unwrap();
        let np = effective_pump_inverse_group_velocity(&tilted).unwrap();
        let ns = tilted.signal_inverse_group_velocity().unwrap();
        worst = worst.max((np - ns * phi.cos()).abs() / ns);
    }
    outcome(
        worst <= 1e-12,
        format!("max |N'p - Ns cos phi|/Ns = {worst:.3e} over 20 configs (limit 1e-12)"),
    )
}

fn c3_max_bandwidth() -> Outcome {
    let cfg = base();
    let at = bandwidth_plus(&cfg.with_optimal_tilt().unwrap()).unwrap();
    let expected = 2.0 * SQRT_2 * cfg.pump.wavelength_bandwidth();
    let rel = (at / expected - 1.0).abs();
    let pass = rel <= 1e-12
        && (at / NM - 11.31).abs() < 0.01
        && (max_bandwidth_plus(&cfg) / expected - 1.0).abs() <= 1e-12;
    outcome(
        pass,
        format!(
            "dL+(xi0) = {:.6} nm, 2*sqrt(2)*dlp = {:.6} nm, rel {rel:.2e} (limit 1e-12)",
            at / NM,
            expected / NM
        ),
    )
}

fn c4_tilt_scan() -> Outcome {
    let cfg = base();
    let step = 0.5f64.to_radians();
    let scan = cmd_scan_tilt(&cfg, -80f64.to_radians(), 80f64.to_radians(), step).unwrap();
    let xi0 = optimal_tilt(&cfg).unwrap();
    let arg = scan.rows[scan.argmax].tilt;
    let sup = scan
        .rows
        .iter()
        .map(|r| r.bandwidth_plus)
        .fold(0.0, f64::max);
    let bound = max_bandwidth_plus(&cfg);
    let pass = scan.is_single_peaked()
        && (arg - xi0).abs() <= step
        && sup <= bound
        && scan.rows.len() == 321;
    outcome(
        pass,
        format!(
            "{} rows, single-peaked {}, argmax {:.2} deg vs xi0 {:.3} deg, sup {:.9} <= max {:.9} nm",
            scan.rows.len(),
            scan.is_single_peaked(),
            arg.to_degrees(),
            xi0.to_degrees(),
            sup / NM,
            bound / NM
        ),
    )
}

fn c5_waist_law() -> Outcome {
    let scan = cmd_scan_waist(&base(), 10.0 * UM, 300.0 * UM, 59, 0.05).unwrap();
    let products: Vec<f64> = scan
        .rows
        .iter()
        .map(|r| r.bandwidth_minus * r.waist)
        .collect();
    let worst = products
        .iter()
        .map(|p| (p / products[0] - 1.0).abs())
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-12,
        format!(
            "max rel spread of dL- * W0 over {} waists = {worst:.2e} (limit 1e-12)",
            products.len()
        ),
    )
}

struct PanelRun {
    label: char,
    predicted: (f64, f64),
    measured: (f64, f64),
    r: f64,
    k_stripped: f64,
    k_full: f64,
}

fn run_panels() -> Vec<PanelRun> {
    panel_configs(&base(), 0.05)
        .unwrap()
        .into_iter()
        .map(|p| {
            let grid = FrequencyGrid::auto(&p.source, 256).unwrap();
            let full = joint_spectrum_grid(&p.source, grid, PhaseMode::Full).unwrap();
            let stripped = joint_spectrum_grid(&p.source, grid, PhaseMode::Stripped).unwrap();
            PanelRun {
                label: p.label,
                predicted: (p.predicted.plus, p.predicted.minus),
                measured: (
                    rms_bandwidth_diag(&full, Diagonal::Plus),
                    rms_bandwidth_diag(&full, Diagonal::Minus),
                ),
                r: pearson_correlation(&stripped).unwrap(),
                k_stripped: schmidt_decompose(&stripped).unwrap().schmidt_number,
                k_full: schmidt_decompose(&full).unwrap().schmidt_number,
            }
        })
        .collect()
}

fn c6_cross_model(panels: &[PanelRun]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut at = ' ';
    for p in panels {
        for dev in [
            p.measured.0 / p.predicted.0 - 1.0,
            p.measured.1 / p.predicted.1 - 1.0,
        ] {
            if dev.abs() > worst {
                worst = dev.abs();
                at = p.label;
            }
        }
    }
    outcome(
        worst <= 0.10,
        format!(
            "max |measured/predicted - 1| = {:.2}% (panel {at}) over 9 panels (limit 10%)",
            100.0 * worst
        ),
    )
}

fn c7_fig3_shapes(panels: &[PanelRun]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, p) in panels.iter().enumerate() {
        let ok = match k % 3 {
            0 => p.r <= -0.5,
            1 => p.k_stripped <= 1.05 && p.r.abs() <= 0.05,
            _ => p.r >= 0.5,
        };
        pass &= ok;
        if k % 3 == 1 {
            parts.push(format!("{}: r={:+.3} K={:.4}", p.label, p.r, p.k_stripped));
        } else {
            parts.push(format!("{}: r={:+.3}", p.label, p.r));
        }
    }
    outcome(pass, parts.join(", "))
}

/// Schmidt weights of exp(−p²/4a² − m²/4b²) with a/b = ρ from Mehler's
/// formula: λₙ = (1 − μ²)μ²ⁿ, μ = (ρ − 1)/(ρ + 1).
fn mehler_schmidt_number(rho: f64) -> f64 {
    let mu = (rho - 1.0) / (rho + 1.0);
    let mut sum_sq = 0.0;
    let mut weight = 1.0 - mu * mu;
    for _ in 0..10_000 {
        sum_sq += weight * weight;
        weight *= mu * mu;
        if weight < 1e-300 {
            break;
        }
    }
    1.0 / sum_sq
}

fn c8_schmidt_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for rho in [1.0, 1.5, 2.0, 4.0] {
        let minus = 2.0 * NM;
        let plus = rho * minus;
        let grid = FrequencyGrid::square(5.0 * plus.max(minus), 256).unwrap();
        let jsa = JointSpectrumGrid::from_fn(grid, |s, i| {
            let p = (s + i) / SQRT_2;
            let m = (s - i) / SQRT_2;
            Complex64::new(
                (-p * p / (4.0 * plus * plus) - m * m / (4.0 * minus * minus)).exp(),
                0.0,
            )
        })
        .unwrap();
        let k = schmidt_decompose(&jsa).unwrap().schmidt_number;
        let oracle = mehler_schmidt_number(rho);
        let closed = (rho + 1.0 / rho) / 2.0;
        let rel = (k / oracle - 1.0).abs().max((oracle / closed - 1.0).abs());
        worst = worst.max(rel);
        parts.push(format!("rho {rho}: K {k:.5} vs {oracle:.5}"));
    }
    outcome(
        worst <= 0.01,
        format!("{}; max rel {worst:.2e} (limit 1%)", parts.join(", ")),
    )
}

/// dk/dω by Richardson extrapolation of central differences in ω.
fn richardson_dk_domega(crystal: &CrystalProperties, lambda: f64, pol: Polarization) -> f64 {
    let omega = 2.0 * PI * SPEED_OF_LIGHT / lambda;
    let k = |w: f64| wavenumber(crystal, 2.0 * PI * SPEED_OF_LIGHT / w, pol).unwrap();
    let central = |h: f64| (k(omega + h) - k(omega - h)) / (2.0 * h);
    let h = omega * 1e-3;
    let d = [central(h), central(h / 2.0), central(h / 4.0)];
    let r1 = [(4.0 * d[1] - d[0]) / 3.0, (4.0 * d[2] - d[1]) / 3.0];
    (16.0 * r1[1] - r1[0]) / 15.0
}

fn c9_group_index_oracle() -> Outcome {
    let crystal = CrystalProperties::bbo();
    let theta = base().crystal.cut_angle;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for pol in [
        Polarization::Ordinary,
        Polarization::Extraordinary { theta },
    ] {
        for k in 0..50 {
            let lambda = (250.0 + 3000.0 * k as f64 / 49.0) * NM;
            let analytic = inverse_group_velocity(&crystal, lambda, pol).unwrap();
            let fd = richardson_dk_domega(&crystal, lambda, pol);
            worst = worst.max((analytic / fd - 1.0).abs());
            count += 1;
        }
    }
    outcome(
        worst <= 1e-6,
        format!(
            "max rel deviation {worst:.2e} over {count} wavelengths, 2 polarizations (limit 1e-6)"
        ),
    )
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn c10_determinism() -> Outcome {
    let run = RunConfig::default();
    let opts = Options::from_run(&run);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_figures(&run, &opts, a.path()).unwrap();
    cmd_figures(&run, &opts, b.path()).unwrap();
    let (ta, tb) = (read_tree(a.path()), read_tree(b.path()));
    let bytes: usize = ta.iter().map(|(_, d)| d.len()).sum();
    outcome(
        !ta.is_empty() && ta == tb,
        format!(
            "{} files, {} bytes, identical: {}",
            ta.len(),
            bytes,
            ta == tb
        ),
    )
}

fn c11_reference_tilt() -> Outcome {
    let xi0 = optimal_tilt(&base()).unwrap().to_degrees();
    let diff = xi0 - REFERENCE_OPTIMAL_TILT_DEG;
    let note = if diff.abs() <= 5.0 {
        "consistent"
    } else {
        "deviation explained in docs/figures.md"
    };
    outcome(
        true,
        format!("computed xi0 = {xi0:.2} deg, published reference {REFERENCE_OPTIMAL_TILT_DEG} deg, difference {diff:+.2} deg ({note}; documentation only)"),
    )
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |n: u32, name: &str, budget: Duration, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let elapsed = t.elapsed();
        let pass = o.pass && elapsed <= budget;
        all &= pass;
        println!(
            "criterion {n:>2} [{}] {name}: {} ({:.2} s, budget {} s)",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    };
    let secs = Duration::from_secs;
    report(1, "sinc constant", secs(1), &mut c1_sinc_constant);
    report(2, "optimal tilt inversion", secs(1), &mut c2_vgm_inversion);
    report(3, "maximum bandwidth", secs(1), &mut c3_max_bandwidth);
    report(4, "tilt scan shape", secs(1), &mut c4_tilt_scan);
    report(5, "waist law", secs(1), &mut c5_waist_law);
    let mut panels = Vec::new();
    report(6, "cross-model bandwidths", secs(30), &mut || {
        panels = run_panels();
        c6_cross_model(&panels)
    });
    report(7, "joint spectrum shapes", secs(60), &mut || {
        c7_fig3_shapes(&panels)
    });
    report(8, "Schmidt oracle", secs(10), &mut c8_schmidt_oracle);
    report(9, "group index oracle", secs(1), &mut c9_group_index_oracle);
    report(10, "determinism", secs(120), &mut c10_determinism);
    report(11, "reference tilt", secs(1), &mut c11_reference_tilt);
    let phase_ok = panels.iter().all(|p| p.k_full >= p.k_stripped - 1e-6);
    println!("phase never lowers K on the panel set: {phase_ok}");
    if all && phase_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
