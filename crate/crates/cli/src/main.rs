use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use calibra_core::immersions::catalog_descriptions;
use calibra_core::verify::{SelftestSizes, STENZEL_DEFAULT_TOL, SURFACE_DEFAULT_TOL};
use calibra_core::{
    algebra_selftest, verify_g2, verify_spin7, verify_stenzel, BsProfile, CatalogEntry, CatalogParams, DefectReport, G2Mode, StenzelJob,
    StenzelProfile, SurfaceJob,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

const TOL_ENV: &str = "CALIBRA_TOL";
const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// Numerical verification of calibrated subbundles in special-holonomy metrics.
#[derive(Debug, Parser)]
#[command(name = "calibra", version)]
struct Cli {
    /// Seed for all sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall time in the report (breaks byte-identical reruns).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Flat-model octonion and Clifford identities.
    Algebra {
        #[command(subcommand)]
        action: AlgebraAction,
    },
    /// Check a calibration condition over sampled points.
    Verify {
        #[command(subcommand)]
        target: VerifyTarget,
    },
    /// Immersion catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
enum AlgebraAction {
    Selftest,
}

#[derive(Debug, Subcommand)]
enum CatalogAction {
    List,
}

#[derive(Debug, Subcommand)]
enum VerifyTarget {
    /// Special Lagrangian conormal bundles in the Stenzel metric on T*S^n.
    Stenzel {
        #[arg(long)]
        immersion: String,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = StenzelProfileArg::Flat)]
        profile: StenzelProfileArg,
        /// Phase exponent k in i^k (default p - n).
        #[arg(long, allow_hyphen_values = true)]
        phase: Option<i32>,
    },
    /// Associative or coassociative subbundles of the G2 structure on the ASD 2-forms of S^4.
    G2 {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        surface: String,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = BsProfileArg::Unit)]
        profile: BsProfileArg,
    },
    /// Cayley subbundles of the Spin(7) structure on the negative spinor bundle of S^4.
    Spin7 {
        #[arg(long)]
        surface: String,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = BsProfileArg::Unit)]
        profile: BsProfileArg,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Defect tolerance; falls back to CALIBRA_TOL, then the command default.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StenzelProfileArg {
    Flat,
    Quadratic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BsProfileArg {
    Unit,
    Growing,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Assoc,
    Coassoc,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
}

impl From<calibra_core::Error> for Failure {
    fn from(e: calibra_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn tolerance(explicit: Option<f64>, default: f64) -> Result<f64, Failure> {
    let tol = match explicit {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => s.trim().parse().map_err(|_| Failure::Usage(format!("{TOL_ENV}={s} is not a number")))?,
            Err(_) => default,
        },
    };
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err(Failure::Usage(format!("tolerance must be positive, got {tol}")))
    }
}

fn surface_job(name: &str, common: &Common, seed: u64, profile: BsProfileArg) -> Result<SurfaceJob, Failure> {
    let params = CatalogParams {
        p: Some(2),
        n: Some(4),
        radius: common.radius,
        amplitude: common.amplitude,
    };
    Ok(SurfaceJob {
        entry: CatalogEntry::from_name(name, &params)?,
        samples: common.samples,
        seed,
        tol: tolerance(common.tol, SURFACE_DEFAULT_TOL)?,
        profile: match profile {
            BsProfileArg::Unit => BsProfile::Unit,
            BsProfileArg::Growing => BsProfile::Growing,
        },
    })
}

fn run_verify(target: &VerifyTarget, seed: u64) -> Result<DefectReport, Failure> {
    let report = match target {
        VerifyTarget::Stenzel {
            immersion,
            p,
            n,
            common,
            profile,
            phase,
        } => {
            let params = CatalogParams {
                p: *p,
                n: *n,
                radius: common.radius,
                amplitude: common.amplitude,
            };
            verify_stenzel(&StenzelJob {
                entry: CatalogEntry::from_name(immersion, &params)?,
                samples: common.samples,
                seed,
                tol: tolerance(common.tol, STENZEL_DEFAULT_TOL)?,
                profile: match profile {
                    StenzelProfileArg::Flat => StenzelProfile::Flat,
                    StenzelProfileArg::Quadratic => StenzelProfile::Quadratic,
                },
                phase_power: *phase,
            })?
        }
        VerifyTarget::G2 {
            mode,
            surface,
            common,
            profile,
        } => {
            let mode = match mode {
                ModeArg::Assoc => G2Mode::Assoc,
                ModeArg::Coassoc => G2Mode::Coassoc,
            };
            verify_g2(&surface_job(surface, common, seed, *profile)?, mode)?
        }
        VerifyTarget::Spin7 { surface, common, profile } => verify_spin7(&surface_job(surface, common, seed, *profile)?)?,
    };
    Ok(report)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let start = Instant::now();
    let mut report = match &cli.command {
        Command::Catalog { action: CatalogAction::List } => {
            let entries: Vec<_> = catalog_descriptions()
                .into_iter()
                .map(|(name, description)| serde_json::json!({ "name": name, "description": description }))
                .collect();
            emit(&serde_json::to_string_pretty(&entries).expect("catalog serializes"), cli.out.as_ref())?;
            return Ok(true);
        }
        Command::Algebra { action: AlgebraAction::Selftest } => algebra_selftest(cli.seed, SelftestSizes::default())?,
        Command::Verify { target } => run_verify(target, cli.seed)?,
    };
    if cli.timing {
        report.wall_time_seconds = Some(start.elapsed().as_secs_f64());
    }
    emit(&serde_json::to_string_pretty(&report).expect("report serializes"), cli.out.as_ref())?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}
