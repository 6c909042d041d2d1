use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tiltspdc::biphoton::PhaseMode;
use tiltspdc::config::RunConfig;
use tiltspdc::report::{self, Options};
use tiltspdc::Error;

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "tiltspdc",
    version,
    about = "Joint spectra of pulse-front-tilted SPDC sources"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Run configuration file (`[source]` section). Defaults apply without it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output` from the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Grid points per axis; overrides `grid_n` from the config.
    #[arg(long, global = true, value_name = "GRIDSIZE")]
    n: Option<usize>,
    /// Drop the longitudinal phase factor from written grids and headline K.
    #[arg(long, global = true)]
    strip_phase: bool,
    /// Relative bandwidth mismatch still classified as uncorrelated.
    #[arg(long, global = true, value_name = "REL")]
    tolerance: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print phase matching, model bandwidths and Schmidt number.
    Summary,
    /// Tabulate ΔΛ₊ against pulse-front tilt.
    ScanTilt {
        #[arg(long, default_value_t = -80.0, allow_negative_numbers = true)]
        min_deg: f64,
        #[arg(long, default_value_t = 80.0, allow_negative_numbers = true)]
        max_deg: f64,
        #[arg(long, default_value_t = 0.5)]
        step_deg: f64,
    },
    /// Tabulate ΔΛ₋ and the correlation class against pump waist.
    ScanWaist {
        #[arg(long, default_value_t = 10.0)]
        min_um: f64,
        #[arg(long, default_value_t = 300.0)]
        max_um: f64,
        #[arg(long, default_value_t = 59)]
        points: usize,
    },
    /// Write full-model and Gaussian-model joint spectra plus a summary.
    Grid,
    /// Find tilt and waist giving an uncorrelated spectrum of a given width.
    Design {
        /// Target rms bandwidth ΔΛ₊ = ΔΛ₋, nm.
        #[arg(long, value_name = "NM")]
        target_nm: f64,
    },
    /// Write the tilt scan, the waist scan and the nine-panel grid set.
    Figures,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_VALIDATION
            })
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let c = &cli.common;
    let mut config = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(n) = c.n {
        config.grid_n = n;
    }
    if let Some(out) = &c.out {
        config.output = out.clone();
    }
    let mut opts = Options::from_run(&config);
    if c.strip_phase {
        opts.phase = PhaseMode::Stripped;
    }
    if let Some(t) = c.tolerance {
        if !(t > 0.0 && t < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "tolerance {t} outside (0, 0.5)"
            )));
        }
        opts.tolerance = t;
    }
    let source = config.build()?;
    opts.grid(&source)?;
    let out = config.output.clone();

    match cli.command {
        Command::Summary => {
            print!("{}", report::cmd_summary(&source, &opts)?.record().render());
        }
        Command::ScanTilt {
            min_deg,
            max_deg,
            step_deg,
        } => {
            let scan = report::cmd_scan_tilt(
                &source,
                min_deg.to_radians(),
                max_deg.to_radians(),
                step_deg.to_radians(),
            )?;
            emit(
                c.out.as_deref(),
                "tilt_scan.csv",
                &scan.to_csv(&config.echo()),
            )?;
        }
        Command::ScanWaist {
            min_um,
            max_um,
            points,
        } => {
            let scan = report::cmd_scan_waist(
                &source,
                min_um * 1e-6,
                max_um * 1e-6,
                points,
                opts.tolerance,
            )?;
            emit(
                c.out.as_deref(),
                "waist_scan.csv",
                &scan.to_csv(&config.echo()),
            )?;
        }
        Command::Grid => {
            let g = report::cmd_grid(&source, &opts, &out, "grid")?;
            print!("{}", g.summary.record().render());
            for p in [&g.full_csv, &g.gaussian_csv, &g.summary_path] {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Design { target_nm } => {
            let d = report::cmd_design(&source, target_nm * 1e-9, &opts)?;
            print!("{}", d.record().render());
        }
        Command::Figures => {
            for f in report::cmd_figures(&config, &opts, &out)? {
                println!("{}", out.join(f).display());
            }
        }
    }
    Ok(())
}

/// Writes into `dir` when given, otherwise prints to stdout.
fn emit(dir: Option<&Path>, name: &str, text: &str) -> Result<(), Error> {
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}
