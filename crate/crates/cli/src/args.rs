use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "momenta", version, about = "Loop equations, exact moments and positivity bootstrap for matrix models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads (default: all cores). MOMENTA_THREADS overrides it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write the artifact here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Ignore the symmetries declared in the model file.
    #[arg(long, global = true)]
    pub no_symmetry: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive the loop equations for every insertion up to a length.
    Sde(SdeArgs),
    /// Solve the loop equations for every moment up to a cutoff.
    Solve(SolveArgs),
    /// Expand moments and free energy in powers of g.
    Series(SeriesArgs),
    /// Symbolic principal-minor constraint of a Hankel matrix.
    Minor(MinorArgs),
    /// Exact PSD verdicts over a (g, generators) grid.
    Scan(ScanArgs),
    /// Estimate a critical coupling.
    Critical(CriticalArgs),
    /// Fit a power law to boundary points from a scan.
    Fit(FitArgs),
    /// Count colored polygon gluings.
    Maps(MapsArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SdeArgs {
    pub model: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub max_len: usize,
    /// Exponent-tuple notation (`m_{2,1}`) instead of words.
    #[arg(long)]
    pub tuples: bool,
    /// Emit a JSON artifact instead of one equation per line.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    pub model: PathBuf,
    #[arg(long)]
    pub cutoff: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SeriesArgs {
    pub model: PathBuf,
    /// Truncation order.
    #[arg(short = 'K', long = "order", default_value_t = 6)]
    pub order: usize,
    /// Report every necklace up to this length.
    #[arg(long, default_value_t = 4)]
    pub len: usize,
    /// Longest word the recursion may track (default: enough for `len`).
    #[arg(long)]
    pub max_len: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct MinorArgs {
    pub model: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub cutoff: usize,
    /// Hankel size (basis words of the model's alphabet).
    #[arg(short = 'n', long)]
    pub n: Option<usize>,
    /// Comma-separated row indices (default: all).
    #[arg(long, value_delimiter = ',')]
    pub rows: Vec<usize>,
    /// Use the 5×5 two-matrix bound matrix instead of a basis Hankel
    /// matrix; `literal` keeps m_ABAB in the corner.
    #[arg(long, value_enum)]
    pub bound: Option<BoundKind>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Literal,
    Basis,
}

/// Grid axes shared by `scan` and `critical`.
#[derive(Debug, Args, Serialize)]
pub struct GridArgs {
    /// Coupling range `lo:hi:step`.
    #[arg(long = "g", allow_hyphen_values = true)]
    pub g: Option<String>,
    /// Range for generator m1.
    #[arg(long, allow_hyphen_values = true)]
    pub m1: Option<String>,
    /// Range for generator m2.
    #[arg(long, allow_hyphen_values = true)]
    pub m2: Option<String>,
    /// Range for generator m4.
    #[arg(long, allow_hyphen_values = true)]
    pub m4: Option<String>,
    /// Range for any generator symbol: `SYM=lo:hi:step`.
    #[arg(long = "axis", allow_hyphen_values = true)]
    pub axes: Vec<String>,
    /// Fix generators instead of scanning them: `SYM=value`.
    #[arg(long = "level", allow_hyphen_values = true)]
    pub levels: Vec<String>,
    /// Check every row together instead of the symmetry sectors.
    #[arg(long)]
    pub no_sectors: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    pub model: PathBuf,
    /// Hankel size.
    #[arg(short = 'n', long)]
    pub n: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// Moment cutoff (default: the longest Hankel entry).
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Dyadic bisection rounds for the boundaries of single-axis scans
    /// (JSON output only).
    #[arg(long, default_value_t = 3)]
    pub refine: u32,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct CriticalArgs {
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = CriticalMethod::Boundary)]
    pub method: CriticalMethod,
    /// Hankel sizes for `boundary` (trend across sizes) or a single size for
    /// `bisect`.
    #[arg(short = 'n', long = "n", value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Truncation word for `truncation`.
    #[arg(long)]
    pub word: Option<String>,
    /// Moment cutoff (default: the longest Hankel entry, or the word
    /// length for `truncation`).
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// Bisection steps on g (`bisect`).
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Coarse samples per generator axis (`bisect`).
    #[arg(long, default_value_t = 65)]
    pub coarse: usize,
    /// Zoom rounds per slice (`bisect`).
    #[arg(long, default_value_t = 6)]
    pub zoom: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalMethod {
    /// Lowest feasible g on a grid, with the trend across sizes.
    Boundary,
    /// Bisection on g with an adaptive search of each slice; the first
    /// and last g of the range are the feasible and infeasible ends.
    Bisect,
    /// Real-root boundary of a truncated moment's numerator.
    Truncation,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// Scan CSV (`g, axes…, feasible`) or a two-column `g,value` CSV.
    pub input: PathBuf,
    /// Keep only scan rows with this generator value: `SYM=value`.
    #[arg(long = "level", allow_hyphen_values = true)]
    pub levels: Vec<String>,
    /// Which boundary of the feasible interval to fit.
    #[arg(long, value_enum, default_value_t = Edge::Upper)]
    pub edge: Edge,
    /// Fix g_c instead of fitting it.
    #[arg(long, allow_hyphen_values = true)]
    pub gc: Option<f64>,
    #[arg(long, value_enum, default_value_t = SideArg::Above)]
    pub side: SideArg,
    #[arg(long, value_enum, default_value_t = RelationArg::First)]
    pub relation: RelationArg,
    /// Only use points with g ≥ this.
    #[arg(long, allow_hyphen_values = true)]
    pub g_min: Option<f64>,
    /// Only use points with g ≤ this.
    #[arg(long, allow_hyphen_values = true)]
    pub g_max: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Edge {
    Upper,
    Lower,
    Width,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideArg {
    Above,
    Below,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationArg {
    /// The data behaves like dF/dg.
    First,
    /// The data behaves like d²F/dg².
    Second,
}

#[derive(Debug, Args, Serialize)]
pub struct MapsArgs {
    /// Rooted polygon, e.g. AABB.
    #[arg(long)]
    pub word: String,
    /// Model whose potential terms supply the unrooted polygons (without
    /// one, only self-gluings of the rooted polygon are counted).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Largest number of unrooted polygons.
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Genus selected for the weighted sums.
    #[arg(long)]
    pub genus: Option<usize>,
}
