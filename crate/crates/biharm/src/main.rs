//! Command line front end: convergence studies on the built-in benchmark
//! problems and corner-singularity exponents.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use biharm::adapt::EstimatorChoice;
use biharm::exponent;
use biharm::mesh::load_mesh;
use biharm::presets;
use biharm::problem::ProblemSpec;
use biharm::study::{run_study, StudyConfig, StudyMode};
use biharm::Result;

#[derive(Parser)]
#[command(name = "biharm", version, about = "Adaptive C0 interior penalty solver for fourth-order problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Uniform,
    Adaptive,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Primal,
    Regularized,
    Extension,
}

#[derive(Subcommand)]
enum Command {
    /// Run a refinement study on a benchmark problem and write its reports.
    Solve {
        /// lshape-clamped, square-dirichlet, square-navier or square-neumann.
        #[arg(long)]
        preset: String,
        /// Load placement for the square benchmarks (1 node, 2 edge, 3 interior).
        #[arg(long, default_value_t = 1)]
        case: usize,
        /// Polynomial degree, 2 to 4.
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Adaptive)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = EstimatorArg::Extension)]
        estimator: EstimatorArg,
        /// Interior penalty parameter; defaults to 10 m^2.
        #[arg(long)]
        beta: Option<f64>,
        /// Bulk marking fraction for adaptive mode.
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        /// Number of refinement steps.
        #[arg(long, default_value_t = 8)]
        levels: usize,
        /// Replace the preset's initial mesh by one read from a file.
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Output directory for table.csv, trace.csv, plot.svg, mesh_<i>.txt.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Smallest positive singular exponent for an interior angle.
    Exponent {
        /// Angle in radians; accepts forms like 1.5, pi, 3pi/2, 0.75pi.
        #[arg(long)]
        omega: Option<String>,
        /// Sample alpha0 at this many angles across [pi/3, 2pi) as CSV.
        #[arg(long)]
        sweep: Option<usize>,
    },
}

/// Parse an angle given in radians or as a multiple of pi: "pi", "2pi",
/// "3pi/2", "0.75pi", "4.2".
fn parse_omega(s: &str) -> Result<f64> {
    let t = s.trim().to_lowercase();
    let bad = || biharm::BiharmError::Config(format!("cannot parse angle {s:?}"));
    let (head, denom) = match t.split_once('/') {
        Some((h, d)) => (h.to_string(), d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (t.clone(), 1.0),
    };
    let head = head.trim();
    let value = if let Some(coef) = head.strip_suffix("pi") {
        let coef = coef.trim();
        let c = if coef.is_empty() {
            1.0
        } else {
            coef.parse::<f64>().map_err(|_| bad())?
        };
        c * std::f64::consts::PI
    } else {
        head.parse::<f64>().map_err(|_| bad())?
    };
    if denom == 0.0 {
        return Err(bad());
    }
    Ok(value / denom)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve {
            preset,
            case,
            degree,
            mode,
            estimator,
            beta,
            theta,
            levels,
            mesh,
            out,
        } => {
            let beta = beta.unwrap_or_else(|| ProblemSpec::default_beta(degree));
            let mut problem = presets::by_name(&preset, case, beta)?;
            if let Some(path) = mesh {
                let text = std::fs::read_to_string(path)?;
                problem.mesh = load_mesh(&text)?;
            }
            let cfg = StudyConfig {
                degree,
                mode: match mode {
                    ModeArg::Uniform => StudyMode::Uniform,
                    ModeArg::Adaptive => StudyMode::Adaptive,
                },
                estimator: match estimator {
                    EstimatorArg::Primal => EstimatorChoice::Primal,
                    EstimatorArg::Regularized => EstimatorChoice::Regularized,
                    EstimatorArg::Extension => EstimatorChoice::Extension,
                },
                theta,
                levels,
                keep_meshes: true,
            };
            let output = run_study(&problem, &cfg)?;
            output.write_outputs(&out, degree)?;
            print!("{}", output.table_csv());
            eprintln!(
                "{}: {} levels, final N = {}, reports in {}",
                problem.name,
                levels,
                output.final_space.n_dofs,
                out.display()
            );
            Ok(())
        }
        Command::Exponent { omega, sweep } => {
            if let Some(n) = sweep {
                println!("omega,alpha0");
                for (w, a) in exponent::sweep(n)? {
                    println!("{w:.12},{a:.12}");
                }
                return Ok(());
            }
            let omega = omega.ok_or_else(|| {
                biharm::BiharmError::Config("pass --omega ANGLE or --sweep N".into())
            })?;
            let res = exponent::singular_exponent(parse_omega(&omega)?)?;
            println!("omega = {:.12}", res.omega);
            println!("alpha0 = {:.12}", res.alpha0);
            for z in &res.roots {
                println!("root {:.12} + {:.12}i", z.re, z.im);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
