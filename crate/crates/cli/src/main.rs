//! `mixdiv` command-line front end.
//!
//! Exit codes: 0 ok, 1 fairness check failed, 2 bad input data,
//! 3 precondition violated, 4 internal invariant violated.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mixdiv::scalar::{parse_scalar, Scalar};

#[derive(Debug, Parser)]
#[command(name = "mixdiv", version, about = "Envy-free allocation of indivisible goods together with a divisible cake")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load an instance and print a summary.
    Validate {
        instance: PathBuf,
        #[command(flatten)]
        load: LoadArgs,
    },
    /// Run a solver and verify its output.
    Solve(SolveArgs),
    /// Check an allocation against one fairness notion.
    Verify(VerifyArgs),
    /// Write a seeded random instance.
    Gen(GenArgs),
    /// Brute-force searches on a discretized cake.
    Oracle(OracleArgs),
    /// Solve a sweep of random instances and print CSV counters.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct LoadArgs {
    /// Rescale every agent to total value 1 even if the file says otherwise.
    #[arg(long)]
    normalize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Efm,
    Two,
    EpsEfm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Base {
    Ef1,
    Efx,
}

#[derive(Debug, Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "efm")]
    alg: Algorithm,
    /// Envy allowance for eps-efm, as p/q or a decimal.
    #[arg(long, value_parser = scalar_arg, required_if_eq("alg", "eps-efm"))]
    eps: Option<Scalar>,
    /// Goods split used by the two-agent algorithm.
    #[arg(long, value_enum)]
    base: Option<Base>,
    /// Directory for allocation.json, report.json and trace.json; one
    /// combined document goes to stdout otherwise.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Drop the per-round records from the trace (invariants are still checked).
    #[arg(long)]
    no_trace: bool,
    /// Skip the per-round invariant checks.
    #[arg(long)]
    unchecked: bool,
    /// Count the value queries spent on verification.
    #[arg(long)]
    count_verifier_queries: bool,
    /// Add decimal renderings next to exact utilities.
    #[arg(long)]
    decimal: bool,
    #[command(flatten)]
    load: LoadArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Notion {
    Ef,
    Ef1,
    Efm,
    WeakEfm,
    Efxm,
    EpsEfm,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    instance: PathBuf,
    allocation: PathBuf,
    #[arg(long, value_enum, default_value = "efm")]
    notion: Notion,
    #[arg(long, value_parser = scalar_arg, required_if_eq("notion", "eps-efm"))]
    eps: Option<Scalar>,
    #[arg(long)]
    count_verifier_queries: bool,
    #[command(flatten)]
    load: LoadArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Constant,
    Linear,
}

impl From<Kind> for mixdiv::gen::DensityKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Constant => Self::Constant,
            Kind::Linear => Self::Linear,
        }
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(short)]
    n: usize,
    #[arg(short, default_value_t = 0)]
    m: usize,
    /// Density segments per agent; 0 leaves out the cake (needs m > 0).
    #[arg(long, default_value_t = 3)]
    segments: usize,
    #[arg(long, value_enum, default_value = "constant")]
    kind: Kind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Query {
    /// Every EFM allocation on the grid.
    EfmSet,
    /// A maximum Nash welfare allocation on the grid.
    Mnw,
    /// A grid allocation that Pareto dominates --allocation.
    Dominate,
    /// First EFX allocation of the goods.
    Efx,
}

#[derive(Debug, Args)]
struct OracleArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    query: Query,
    /// Uniform grid resolution for the cake.
    #[arg(long, default_value_t = 10)]
    grid: usize,
    #[arg(long, required_if_eq("query", "dominate"))]
    allocation: Option<PathBuf>,
    /// Run enumeration on the calling thread only.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    load: LoadArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_value = "efm")]
    alg: Vec<Algorithm>,
    /// Agent counts, e.g. `2,3,4` or `2..6` (inclusive).
    #[arg(long, value_parser = range_arg, default_value = "2..4")]
    n: Sizes,
    #[arg(long, value_parser = range_arg, default_value = "4")]
    m: Sizes,
    #[arg(long, value_delimiter = ',', value_parser = scalar_arg, default_value = "1/10")]
    eps: Vec<Scalar>,
    #[arg(long, default_value_t = 3)]
    segments: usize,
    #[arg(long, value_enum, default_value = "constant")]
    kind: Kind,
    /// Instances per (n, m) cell.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    #[arg(long)]
    unchecked: bool,
    #[arg(long)]
    sequential: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn scalar_arg(s: &str) -> Result<Scalar, String> {
    parse_scalar(s).map_err(|e| e.to_string())
}

#[derive(Debug, Clone)]
struct Sizes(Vec<usize>);

fn range_arg(s: &str) -> Result<Sizes, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty range {s}"));
        }
        Ok(Sizes((a..=b).collect()))
    } else {
        s.split(',').map(num).collect::<Result<_, _>>().map(Sizes)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { instance, load } => commands::validate(&instance, load.normalize),
        Command::Solve(a) => commands::solve(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Gen(a) => commands::gen(&a),
        Command::Oracle(a) => commands::oracle(&a),
        Command::Bench(a) => commands::bench(&a),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.status as u8)
        }
    }
}
