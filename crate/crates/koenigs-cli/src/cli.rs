//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Parser)]
#[command(name = "koenigs", version, about = "Generate, check and export discrete Kœnigs nets")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub rank_tol: f64,
    /// Absolute incidence residual.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub residual_tol: f64,
    /// Worker threads for data-parallel checks; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Write a fixture as JSON.
    Gen(GenArgs),
    /// Run a check and print a JSON report.
    Verify(VerifyArgs),
    /// Write a net, its conics or a quadric as OBJ or JSON mesh.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// Grid of tangent lines to the unit circle.
    TangentGrid,
    /// Pair of autoconjugate curves.
    Autoconjugate,
    /// Grid of a curve pair.
    GridFromCurves,
    /// Grid whose diagonal parameter spaces drop one dimension.
    SpecialGrid,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    pub kind: GenKind,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub len: Option<usize>,
    /// Curve pair JSON for grid-from-curves.
    #[arg(long)]
    pub pair: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Koenigs,
    Binet,
    Inscribed,
    Grid,
    Incidence,
    Roundtrip,
    DiagCorollary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Rows,
    Cols,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    pub check: Check,
    #[arg(long)]
    pub net: Option<PathBuf>,
    /// `special`, a parameter `t` for face (0,0), or an instance JSON file.
    #[arg(long)]
    pub instance: Option<String>,
    #[arg(long)]
    pub pair: Option<PathBuf>,
    /// Quadric to check instead of building one.
    #[arg(long)]
    pub quadric: Option<PathBuf>,
    /// Grid order; taken from the grid file when absent.
    #[arg(long)]
    pub d: Option<usize>,
    /// Highest diagonal transform order, `d` by default.
    #[arg(long)]
    pub k: Option<usize>,
    /// First split of the inscribed-quadric induction.
    #[arg(long, value_enum)]
    pub split: Option<SplitArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Obj,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    pub format: Format,
    #[arg(long)]
    pub net: Option<PathBuf>,
    /// Instance JSON whose conics are drawn on the net.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub quadric: Option<PathBuf>,
    /// Affine chart, `w=1` or `x<k>=1`.
    #[arg(long, default_value = "w=1")]
    pub chart: String,
    /// Samples around a quadric surface.
    #[arg(long, default_value_t = 48)]
    pub density: usize,
    /// Largest affine coordinate before a point counts as at infinity.
    #[arg(long, default_value_t = 1e3)]
    pub clip: f64,
}
