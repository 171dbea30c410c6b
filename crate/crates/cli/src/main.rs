//! `invpert` command-line interface.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical or I/O failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use invpert::contour::verify_bootstrap;
use invpert::harness::{self, ExperimentConfig};
use invpert::ingest::{census_covariance, write_diagonal_matrix_market, write_matrix_market};
use invpert::matgen::{
    counterexample_decouple, counterexample_swap, hamiltonian, hamiltonian_h, synthetic_spectrum, HamiltonianParams,
};
use invpert::noise::{sample_noise, NoiseKind, NoiseSpec};
use invpert::pcg::StoppingRule;
use invpert::{Error, SymMatrix};

#[derive(Parser)]
#[command(
    name = "invpert",
    version,
    about = "Perturbation bounds for low-rank matrix inverses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Hamiltonian,
    Synthetic,
    CounterexampleSwap,
    CounterexampleDecouple,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Stopping {
    Residual,
    ANorm,
}

#[derive(clap::Args)]
struct NoiseArgs {
    /// Noise family: goe (alias gaussian), wigner or rademacher.
    #[arg(long)]
    noise: NoiseKind,
    /// Entry scale of the noise.
    #[arg(long)]
    delta: f64,
    /// Multiplier applied on top of delta.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl NoiseArgs {
    fn spec(&self) -> NoiseSpec {
        NoiseSpec::new(self.noise, self.delta)
            .with_scale(self.scale)
            .with_seed(self.seed)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test matrix and write it in Matrix Market format.
    Gen {
        kind: Generator,
        #[arg(long)]
        n: Option<usize>,
        /// Exponent for the swap counterexample.
        #[arg(long)]
        eps: Option<f64>,
        /// Comma-separated eigenvalues for the synthetic generator.
        #[arg(long, value_delimiter = ',')]
        evals: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the unscaled Hamiltonian stencil instead of the scaled matrix.
        #[arg(long)]
        unscaled: bool,
        #[arg(long)]
        out: PathBuf,
        /// Where counterexamples write their noise matrix (default: OUT with `.noise` before the extension).
        #[arg(long)]
        noise_out: Option<PathBuf>,
    },
    /// Spectral summary, stable rank, suggested rank and admissibility table.
    Analyze {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = harness::AUTO_P_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        p_max: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Bounds and measured error for one noise draw.
    Bound {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        p: usize,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Also evaluate the refined bound.
        #[arg(long)]
        refined: bool,
    },
    /// Run a sharpness experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Integrate the first-order and exact contour integrals for one noise draw.
    ContourVerify {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        p: usize,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, default_value_t = invpert::contour::DEFAULT_TOL)]
        tol: f64,
    },
    /// Plain versus low-rank preconditioned CG.
    Pcg {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        p: usize,
        /// Complement scale, or `auto` for 1 / lambda_1 of the noisy matrix.
        #[arg(long, default_value = "auto")]
        tau: String,
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, value_enum, default_value_t = Stopping::Residual)]
        stopping: Stopping,
    },
    /// Covariance matrix of a CSV table (header row, leading index column).
    Census {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Library(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::InvalidRank { .. } => Failure::Usage(e.to_string()),
            other => Failure::Library(other),
        }
    }
}

type CliResult = Result<(), Failure>;

fn load(path: &Path) -> Result<SymMatrix, Error> {
    harness::MatrixSpec::from_path(path).load()
}

fn print_json<T: serde::Serialize>(value: &T) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    println!("{text}");
    Ok(())
}

fn noise_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("matrix");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("mtx");
    out.with_file_name(format!("{stem}.noise.{ext}"))
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("missing required flag --{flag}")))
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Gen {
            kind,
            n,
            eps,
            evals,
            seed,
            unscaled,
            out,
            noise_out,
        } => match kind {
            Generator::Hamiltonian => {
                let params = HamiltonianParams::new(require(n, "n")?);
                let m = if unscaled {
                    hamiltonian_h(&params)?
                } else {
                    hamiltonian(&params)?
                };
                write_matrix_market(&m, &out)?;
                eprintln!("wrote {}", out.display());
                Ok(())
            }
            Generator::Synthetic => {
                let evals = require(evals, "evals")?;
                if let Some(n) = n {
                    if n != evals.len() {
                        return Err(Failure::Usage(format!(
                            "--n {n} disagrees with {} eigenvalues",
                            evals.len()
                        )));
                    }
                }
                write_matrix_market(&synthetic_spectrum(&evals, seed)?, &out)?;
                eprintln!("wrote {}", out.display());
                Ok(())
            }
            Generator::CounterexampleSwap | Generator::CounterexampleDecouple => {
                let n = require(n, "n")?;
                let (pair, summary) = if let Generator::CounterexampleSwap = kind {
                    let c = counterexample_swap(n, require(eps, "eps")?)?;
                    let summary = serde_json::json!({
                        "n": n,
                        "k": c.k,
                        "expected_ratio": c.expected_ratio,
                        "low_rank_inverse_error": c.pair.low_rank_inverse_error(1),
                        "inverse_error": c.pair.inverse_error(),
                    });
                    (c.pair, summary)
                } else {
                    let pair = counterexample_decouple(n)?;
                    let summary = serde_json::json!({
                        "n": n,
                        "low_rank_error": pair.low_rank_error(1),
                        "low_rank_inverse_error": pair.low_rank_inverse_error(1),
                    });
                    (pair, summary)
                };
                let noise_out = noise_out.unwrap_or_else(|| noise_path(&out));
                write_diagonal_matrix_market(&pair.a, &out)?;
                write_diagonal_matrix_market(&pair.e, &noise_out)?;
                eprintln!("wrote {} and {}", out.display(), noise_out.display());
                print_json(&summary)
            }
        },
        Command::Analyze {
            matrix,
            threshold,
            p_max,
            format,
        } => {
            let a = load(&matrix)?;
            let report = harness::analyze(&a, threshold, p_max)?;
            match format {
                Format::Json => print_json(&report),
                Format::Text => {
                    print!("{}", report.to_text());
                    Ok(())
                }
            }
        }
        Command::Bound {
            matrix,
            p,
            noise,
            refined,
        } => {
            let a = load(&matrix)?;
            let report = harness::bound_instance(&a, p, &noise.spec(), refined)?;
            print_json(&report)
        }
        Command::Experiment { config, out, plot } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let csv = out
                .or_else(|| cfg.outputs.csv.clone())
                .ok_or_else(|| Failure::Usage("no CSV output: pass --out or set outputs.csv".into()))?;
            let plot = plot.or_else(|| cfg.outputs.plot.clone());
            let run = harness::run_sharpness(&cfg)?;
            harness::emit_csv(&run.records, &csv)?;
            eprintln!("n = {}, p = {}; wrote {}", run.n, run.p, csv.display());
            if let Some(plot) = plot {
                harness::emit_plot(&run.records, &plot)?;
                eprintln!("wrote {}", plot.display());
            }
            Ok(())
        }
        Command::ContourVerify { matrix, p, noise, tol } => {
            let a = load(&matrix)?;
            let e = sample_noise(&noise.spec(), a.n());
            let report = verify_bootstrap(&a, &e, p, tol)?;
            print_json(&report)
        }
        Command::Pcg {
            matrix,
            p,
            tau,
            eps,
            noise,
            stopping,
        } => {
            let tau = match tau.as_str() {
                "auto" => None,
                t => Some(
                    t.parse::<f64>()
                        .map_err(|_| Failure::Usage(format!("--tau must be 'auto' or a number, got '{t}'")))?,
                ),
            };
            let stopping = match stopping {
                Stopping::Residual => StoppingRule::RelativeResidual,
                Stopping::ANorm => StoppingRule::RelativeANormError,
            };
            let a = load(&matrix)?;
            let report = harness::pcg_benchmark(&a, &noise.spec(), p, tau, eps, stopping)?;
            print_json(&report)
        }
        Command::Census { csv, out } => {
            let cov = census_covariance(&csv)?;
            write_matrix_market(&cov, &out)?;
            eprintln!("wrote {}x{} covariance to {}", cov.n(), cov.n(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Library(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
