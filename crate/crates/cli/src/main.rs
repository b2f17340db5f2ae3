use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

use commands::{CliError, Outcome};

/// Uniqueness certificates, product-operator searches and example generators
/// for separable channels given as product Kraus sets.
#[derive(Debug, Parser)]
#[command(name = "sepcert", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check sum_j K_j^dagger K_j = I and the local-positive-part bound.
    Verify(VerifyArgs),
    /// Run the subset certificate for a channel or ensemble file.
    Certify(CertifyArgs),
    /// Search a subset's span for another product operator.
    Hunt(HuntArgs),
    /// Write one of the built-in example families to a file.
    Gen(GenArgs),
    /// Convert a channel file to its product Choi ensemble.
    Choi(ChoiArgs),
}

#[derive(Debug, Args)]
struct ToleranceArgs {
    /// Relative singular-value threshold for rank decisions.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    file: PathBuf,
    #[command(flatten)]
    tolerance: ToleranceArgs,
    /// Completeness holds when the residual is at most this times sqrt(dim).
    #[arg(long, default_value_t = sepcert_core::cert::DEFAULT_RESIDUAL_TOL)]
    residual_tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Pairs,
    #[value(alias = "all_bipartitions", alias = "all-bipartitions")]
    Bipartitions,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
enum ReportFormat {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    file: PathBuf,
    /// Cuts examined per subset; defaults to bipartitions up to six parties.
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    #[command(flatten)]
    tolerance: ToleranceArgs,
    /// Largest family whose subsets are enumerated.
    #[arg(long, default_value_t = sepcert_core::cert::DEFAULT_MAX_MEMBERS)]
    max_subset: usize,
    #[arg(long, value_enum, default_value_t)]
    report: ReportFormat,
    /// Stop at the first witness.
    #[arg(long)]
    fast_fail: bool,
}

#[derive(Debug, Args)]
struct HuntArgs {
    file: PathBuf,
    /// One-based member indices, comma separated; all members when omitted.
    #[arg(long, value_delimiter = ',')]
    subset: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-8)]
    threshold: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Generator {
    Eq701,
    Fourier,
    ProductUnitary,
    Pauli,
    Projective,
    Augment,
    Tight,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(value_enum)]
    name: Generator,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
    /// Complex parameter `re` or `re,im` (eq701).
    #[arg(long, default_value = "0.5")]
    mu: String,
    /// Phase parameter (eq701).
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    /// Local dimensions, comma separated (fourier, product-unitary, projective).
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Member count (product-unitary) or pair count (tight).
    #[arg(long)]
    n: Option<usize>,
    /// Party count (tight).
    #[arg(long, default_value_t = 2)]
    parties: usize,
    /// Local dimension of every party (tight).
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Base channel file to augment; the eq701 channel when omitted.
    #[arg(long)]
    base: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ChoiArgs {
    file: PathBuf,
    /// Ensemble file to write.
    #[arg(long)]
    out: PathBuf,
    /// Also write the dense Choi matrix here.
    #[arg(long)]
    state: Option<PathBuf>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("SEPCERT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::input(format!("SEPCERT_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::input(format!("cannot size the worker pool: {e}")))
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Verify(a) => commands::verify(&a.file, a.tolerance.tol, a.residual_tol),
        Command::Certify(a) => commands::certify(
            &a.file,
            a.strategy.map(|s| match s {
                StrategyArg::Pairs => sepcert_core::cert::Strategy::Pairs,
                StrategyArg::Bipartitions => sepcert_core::cert::Strategy::AllBipartitions,
            }),
            a.tolerance.tol,
            a.max_subset,
            a.fast_fail,
            matches!(a.report, ReportFormat::Text),
        ),
        Command::Hunt(a) => commands::hunt(
            &a.file,
            a.subset.as_deref(),
            sepcert_core::hunter::HuntConfig {
                restarts: a.restarts,
                max_iters: a.max_iters,
                threshold: a.threshold,
                seed: a.seed,
                ..Default::default()
            },
        ),
        Command::Gen(a) => {
            let params = commands::GenParams {
                mu: a.mu,
                phi: a.phi,
                dims: a.dims,
                n: a.n,
                parties: a.parties,
                dim: a.dim,
                seed: a.seed,
                base: a.base,
            };
            let name = match a.name {
                Generator::Eq701 => "eq701",
                Generator::Fourier => "fourier",
                Generator::ProductUnitary => "product-unitary",
                Generator::Pauli => "pauli",
                Generator::Projective => "projective",
                Generator::Augment => "augment",
                Generator::Tight => "tight",
            };
            commands::generate(name, &params, &a.out)
        }
        Command::Choi(a) => commands::choi(&a.file, &a.out, a.state.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            println!("{}", outcome.stdout);
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
