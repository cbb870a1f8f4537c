use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "pvlab",
    version,
    about = "Exact-arithmetic lab for Parsell-Vinogradov systems"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for every sampled task.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (overrides PVLAB_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Memory cap in bytes, with optional K/M/G suffix (overrides PVLAB_MEM_CAP).
    #[arg(long = "mem-cap", global = true)]
    pub mem_cap: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count solutions J_{s,d,k}(N).
    Count(CountArgs),
    /// Exponential sums and torus moments.
    #[command(subcommand)]
    Sums(SumsCommand),
    /// Exact exponent numerology.
    #[command(subcommand)]
    Numerology(NumerologyCommand),
    /// Minor certificates, rank lemmas, Brascamp-Lieb and square checks.
    #[command(subcommand)]
    Transversality(TransversalityCommand),
    /// Lower-bound tables and report validation.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[arg(long, required_unless_present = "linear")]
    pub d: Option<usize>,
    #[arg(long, required_unless_present = "linear")]
    pub k: Option<u32>,
    #[arg(long)]
    pub s: usize,
    /// A single N, an inclusive range `a..b`, or a list `a,b,c`.
    #[arg(long = "N")]
    pub n: String,
    #[arg(long, value_enum, default_value_t = CountMethod::Mitm)]
    pub method: CountMethod,
    #[arg(long)]
    pub split: Option<usize>,
    /// Use the single linear equation t_1 + .. + t_s = t'_1 + .. + t'_s.
    #[arg(long, conflicts_with_all = ["d", "k"])]
    pub linear: bool,
    /// Largest number of 2s-tuples the brute-force path may visit.
    #[arg(long = "enum-cap")]
    pub enum_cap: Option<u128>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CountMethod {
    Mitm,
    Brute,
}

#[derive(Subcommand, Debug)]
pub enum SumsCommand {
    /// Average of |f|^p over a tensor grid.
    Moment(MomentArgs),
    /// Smallest |f| over a small box around the origin.
    Probe(ProbeArgs),
}

#[derive(Args, Debug)]
pub struct MomentArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub k: u32,
    #[arg(long = "N")]
    pub n: u64,
    #[arg(long)]
    pub p: u32,
    /// `auto` or per-axis point counts `m1,m2,...`.
    #[arg(long, default_value = "auto")]
    pub grid: String,
    #[arg(long, value_enum, default_value_t = QuadMethod::Auto)]
    pub method: QuadMethod,
    /// Largest grid evaluated before falling back to sampling.
    #[arg(long = "point-cap")]
    pub point_cap: Option<u128>,
    /// Sample count of the fallback estimate.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QuadMethod {
    Auto,
    Direct,
    Fft,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[arg(long = "N")]
    pub n: u64,
    /// Box constant, a rational `a/b`.
    #[arg(long, default_value = "1/100")]
    pub c: String,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// Exponents q for the implied lower bound 1 - 2/q, comma separated.
    #[arg(long)]
    pub q: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum NumerologyCommand {
    /// Interpolation coefficients, series, lambda_0 and eta for one parameter set.
    Report(NumReportArgs),
    /// Search for parameters making the rewritten gap negative.
    Scan(ScanArgs),
    /// Ball-inflation exponent constraints.
    Ball(BallArgs),
    /// Table of proved exponents and their relations.
    Table,
}

#[derive(Args, Debug)]
pub struct NumReportArgs {
    #[arg(long)]
    pub p: String,
    #[arg(long, default_value_t = 10)]
    pub r: usize,
    #[arg(long = "M", default_value_t = 10)]
    pub m: u32,
    /// Defaults to min(1/1000000, largest admissible u).
    #[arg(long)]
    pub u: Option<String>,
    #[arg(long, default_value = "0")]
    pub mu: String,
    #[arg(long = "eta-p", default_value = "91/100")]
    pub eta_p: String,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long = "eta-p", default_value = "91/100")]
    pub eta_p: String,
    /// `lo,hi`.
    #[arg(long = "p-window", default_value = "19,20")]
    pub p_window: String,
    #[arg(long = "r-max", default_value_t = 100)]
    pub r_max: usize,
    #[arg(long = "M-max", default_value_t = 100)]
    pub m_max: u32,
    #[arg(long, default_value = "0")]
    pub mu: String,
    #[arg(long, default_value = "1/1000000")]
    pub u: String,
    /// Number of p values approaching the upper end of the window.
    #[arg(long, default_value_t = 40)]
    pub ladder: u32,
}

#[derive(Args, Debug)]
pub struct BallArgs {
    #[arg(long)]
    pub l: u32,
    #[arg(long, default_value_t = 9)]
    pub n: u32,
    #[arg(long)]
    pub p: String,
}

#[derive(Subcommand, Debug)]
pub enum TransversalityCommand {
    /// Certify nonvanishing minors of M_V^(l) for random subspaces V.
    Conjecture(ConjectureArgs),
    /// Rank checks behind the minor-order proposition.
    Appendix(AppendixArgs),
    /// Brascamp-Lieb dimension inequality at a point configuration.
    Bl(BlArgs),
    /// Heuristic transversality estimate for squares of side 1/K.
    Squares(SquaresArgs),
}

#[derive(Args, Debug)]
pub struct ConjectureArgs {
    #[arg(long)]
    pub l: u32,
    /// Comma-separated dimensions; all of 1..=9 by default.
    #[arg(long)]
    pub dims: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    /// Subspace entries are drawn from [-bound, bound].
    #[arg(long = "entry-bound", default_value_t = 9)]
    pub entry_bound: i64,
}

#[derive(Args, Debug)]
pub struct AppendixArgs {
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
}

#[derive(Args, Debug)]
pub struct BlArgs {
    /// JSON file `{"points": [["a/b","c/d"], ...]}`.
    #[arg(long, conflicts_with = "random_points")]
    pub points: Option<PathBuf>,
    /// Use this many random rational points instead of a file.
    #[arg(long = "random-points")]
    pub random_points: Option<usize>,
    #[arg(long)]
    pub l: u32,
    #[arg(long, default_value_t = 500)]
    pub samples: u64,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 3)]
    pub k: u32,
}

#[derive(Args, Debug)]
pub struct SquaresArgs {
    #[arg(long = "K")]
    pub k: u32,
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    /// Squares `i:j,...` (0-based); the full collection by default.
    #[arg(long)]
    pub squares: Option<String>,
    #[arg(long, default_value_t = 400)]
    pub polys: u64,
    /// Sub-grid points per square side.
    #[arg(long, default_value_t = 5)]
    pub grid: u32,
    /// Extra probe polynomial as rational coefficients in graded order 1, r, s, r^2, rs, s^2, ...
    #[arg(long)]
    pub probe: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum ReportCommand {
    /// Lower-bound exponent, regimes and proved upper bound.
    Bounds(BoundsArgs),
    /// Check a JSON report for provenance tags.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub s: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    pub file: PathBuf,
}
