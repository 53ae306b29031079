use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mscott::WeakModulus;

#[derive(Parser, Debug)]
#[command(
    name = "mscott",
    version,
    about = "Exact continuous logic on finite metric structures"
)]
pub struct Cli {
    /// Emit structured JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads; defaults to MSCOTT_JOBS, then the core count.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a structure file against the pseudometric and modulus axioms.
    Validate { structure: PathBuf },
    /// Evaluate a formula at a tuple of points.
    Eval {
        structure: PathBuf,
        /// Formula text, or `@path` for a formula file.
        formula: String,
        /// Point names bound to v0, v1, ...
        tuple: Vec<String>,
        /// Also print an approximate decimal rendering.
        #[arg(long)]
        decimal: bool,
    },
    /// List the first members of the dense formula family.
    DenseFamily {
        #[arg(long)]
        arity: usize,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, value_enum, default_value_t = OmegaArg::Sum)]
        omega: OmegaArg,
        /// Take the signature from this structure or formula file.
        #[arg(long)]
        signature: Option<PathBuf>,
    },
    /// Largest modulus below a function sampled on a grid.
    ModulusFloor {
        /// Comma-separated values at the grid points in lexicographic order.
        #[arg(long)]
        values: String,
        #[arg(long, default_value_t = 1)]
        arity: usize,
        #[arg(long, default_value = "1/16")]
        grid: String,
        #[arg(long, default_value = "1")]
        bound: String,
        #[arg(long, default_value_t = 8)]
        k_max: usize,
    },
    /// Stage-0 back-and-forth distance between two tuples.
    R0 {
        structure: PathBuf,
        /// Comma-separated point names.
        left: String,
        right: String,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Full table of one stage at one arity.
    Ralpha {
        structure: PathBuf,
        #[arg(long)]
        stage: usize,
        #[arg(long)]
        arity: usize,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Least stage at which the pseudo-distances stabilize.
    ScottRank {
        structure: PathBuf,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Iterates of the threshold operator for `q` up to its fixed point.
    Fixpoint {
        structure: PathBuf,
        #[arg(long)]
        q: String,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct AnalysisArgs {
    /// Dense-family members per arity used for stage 0.
    #[arg(long = "family", default_value_t = 200)]
    pub family: usize,
    /// Stage `a` is computed at arities `n` with `n + a <= max-arity`.
    #[arg(long, default_value_t = 3)]
    pub max_arity: usize,
    #[arg(long, default_value_t = 8)]
    pub stage_cap: usize,
    /// Grid step for induced moduli.
    #[arg(long, default_value = "1/16")]
    pub grid: String,
    #[arg(long, default_value_t = 8)]
    pub k_max: usize,
    #[arg(long, value_enum, default_value_t = OmegaArg::Sum)]
    pub omega: OmegaArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaArg {
    Sum,
    Max,
}

impl From<OmegaArg> for WeakModulus {
    fn from(o: OmegaArg) -> Self {
        match o {
            OmegaArg::Sum => WeakModulus::Sum,
            OmegaArg::Max => WeakModulus::Max,
        }
    }
}
