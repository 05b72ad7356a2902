use std::num::NonZeroUsize;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperbound::OrderingSpec;

#[derive(Parser)]
#[command(
    name = "hyperbound",
    version,
    about = "Cap each user's share of a multi-owner dataset while keeping as many records as possible"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Round-based distributed matching
    Run(RunArgs),
    /// Sequential greedy baseline
    Greedy(GreedyArgs),
    /// Exact optimum by exhaustive search (small instances only)
    Optimal(OptimalArgs),
    /// Generate a synthetic edge list
    Gen(GenArgs),
    /// Run distributed + greedy (+ exact when small) on one instance
    Compare(CompareArgs),
    /// Report unmatchable edges and suspicious capacity overrides
    Validate(ValidateArgs),
}

#[derive(Args)]
pub struct InstanceArgs {
    /// Edge list file: `edge_id<TAB>owner,owner,...[<TAB>weight]` per line
    #[arg(long)]
    pub edges: PathBuf,
    /// Default per-user capacity
    #[arg(long, default_value_t = 1)]
    pub capacity: u64,
    /// Capacity override file: `user_id<TAB>capacity` per line
    #[arg(long)]
    pub capacities: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum OrderingKind {
    /// Seeded hash order shared by all users
    Hash,
    /// Heaviest edge first (edges must carry weights)
    Weight,
}

#[derive(Args)]
pub struct OrderingArgs {
    #[arg(long, value_enum, default_value_t = OrderingKind::Hash)]
    pub ordering: OrderingKind,
    /// Seed for the hash order and for weight tie-breaks
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl OrderingArgs {
    pub fn spec(&self) -> OrderingSpec {
        match self.ordering {
            OrderingKind::Hash => OrderingSpec::UniversalRandom { seed: self.seed },
            OrderingKind::Weight => OrderingSpec::WeightDescending { seed: self.seed },
        }
    }
}

/// Round budget: a positive count or `unbounded`.
#[derive(Clone, Copy, Debug)]
pub struct MaxRounds(pub Option<u64>);

pub fn parse_max_rounds(s: &str) -> Result<MaxRounds, String> {
    if s == "unbounded" {
        return Ok(MaxRounds(None));
    }
    let n: u64 = s
        .parse()
        .map_err(|_| format!("expected a positive integer or `unbounded`, got `{s}`"))?;
    if n == 0 {
        return Err("max rounds must be positive; use `unbounded` for no limit".into());
    }
    Ok(MaxRounds(Some(n)))
}

pub fn parse_zipf_size(s: &str) -> Result<(f64, usize), String> {
    let (exp, max) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `EXPONENT,MAX_SIZE`, got `{s}`"))?;
    let exponent: f64 = exp
        .parse()
        .map_err(|_| format!("invalid exponent `{exp}`"))?;
    let max_size: usize = max
        .parse()
        .map_err(|_| format!("invalid max size `{max}`"))?;
    Ok((exponent, max_size))
}

#[derive(Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub ordering: OrderingArgs,
    /// Maximum number of rounds, or `unbounded`
    #[arg(long, default_value = "unbounded", value_parser = parse_max_rounds)]
    pub max_rounds: MaxRounds,
    /// Keep running rounds that accept nothing (needs a bounded --max-rounds)
    #[arg(long)]
    pub no_early_stop: bool,
    /// Worker threads per phase
    #[arg(long, default_value = "1")]
    pub workers: NonZeroUsize,
    /// Selected-edges output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON output file (skipped when omitted)
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args)]
pub struct GreedyArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub ordering: OrderingArgs,
    /// Selected-edges output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON output file (skipped when omitted)
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args)]
pub struct OptimalArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Refuse instances with more edges than this
    #[arg(long, default_value_t = hyperbound::baselines::DEFAULT_EXACT_LIMIT)]
    pub limit: usize,
    /// Selected-edges output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON output file (skipped when omitted)
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args)]
pub struct GenArgs {
    /// Number of users; ids are 0..users
    #[arg(long)]
    pub users: u64,
    /// Number of edges; ids are 0..edges
    #[arg(long)]
    pub edges: u64,
    /// Owners per edge
    #[arg(long, default_value_t = 2, conflicts_with = "size_zipf")]
    pub edge_size: usize,
    /// Zipf edge sizes as `EXPONENT,MAX_SIZE`
    #[arg(long, value_parser = parse_zipf_size)]
    pub size_zipf: Option<(f64, usize)>,
    /// Zipf owner popularity with this exponent (uniform when omitted)
    #[arg(long)]
    pub popularity_zipf: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub ordering: OrderingArgs,
    /// Worker threads for the distributed run
    #[arg(long, default_value = "1")]
    pub workers: NonZeroUsize,
    /// Skip the exact oracle above this edge count
    #[arg(long, default_value_t = hyperbound::baselines::DEFAULT_EXACT_LIMIT)]
    pub limit: usize,
    /// Joint summary JSON output file (stdout when omitted)
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
}
