//! Command-line interface definition.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "obatalab", version, about = "Quantitative Obata rigidity on one-dimensional CD(N-1,N) spaces")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every command.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Dimension parameter N.
    #[arg(long, global = true)]
    pub dim: Option<f64>,
    /// Diameter D of the interval.
    #[arg(long, global = true)]
    pub diam: Option<f64>,
    /// Number of grid cells.
    #[arg(long, global = true, default_value_t = 4096)]
    pub grid: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    #[serde(skip)]
    pub out: PathBuf,
    /// Input file(s); `localize` takes one ray family, `sweep localize` several.
    #[arg(long, global = true, num_args = 1..)]
    #[serde(skip)]
    pub config: Vec<PathBuf>,
    /// Also write `plot.svg`.
    #[arg(long, global = true)]
    pub plot: bool,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Model isoperimetric profile I_{N,D}(v) and the constant C_{N,D}.
    Profile(ProfileArgs),
    /// Lowest Neumann eigenvalues of a weighted interval.
    Spectrum(SpectrumArgs),
    /// Deficit against distance to the cosine on a one-parameter family.
    Obata(ObataArgs),
    /// The globalisation chain on a ray family.
    Localize(LocalizeArgs),
    /// Parameter sweeps of the individual estimates.
    Sweep(SweepArgs),
    /// CD(K,N) verdict for a `t,h` density table.
    CheckDensity(CheckArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProfileArgs {
    /// Volume fractions.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5])]
    pub v: Vec<f64>,
    /// Tabulate at v = i/(points+1) instead.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    /// sin^{N-1} on [0, π].
    #[arg(long, conflicts_with_all = ["truncated", "scaled", "generated", "file"])]
    pub model: bool,
    /// sin^{N-1} restricted to [0, D].
    #[arg(long, conflicts_with_all = ["model", "scaled", "generated", "file"])]
    pub truncated: bool,
    /// sin^{N-1}(πt/D) on [0, D].
    #[arg(long, conflicts_with_all = ["model", "truncated", "generated", "file"])]
    pub scaled: bool,
    /// Seeded generated density on [0, D].
    #[arg(long, conflicts_with_all = ["model", "truncated", "scaled", "file"])]
    pub generated: bool,
    /// `t,h` density table.
    #[arg(long, conflicts_with_all = ["model", "truncated", "scaled", "generated"])]
    #[serde(skip)]
    pub file: Option<PathBuf>,
    /// Curvature excess bound for `--generated`.
    #[arg(long, default_value_t = 1.0)]
    pub level: f64,
    #[arg(long, default_value_t = 4)]
    pub pieces: usize,
    /// Number of eigenpairs.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Perturbed,
    Truncated,
    Generated,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ObataArgs {
    #[arg(long, value_enum, default_value_t = FamilyKind::Perturbed)]
    pub family: FamilyKind,
    /// Sweep parameters (s, ε or excess level); family defaults otherwise.
    #[arg(long, value_delimiter = ',')]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LocalizeArgs {
    /// Check volume control at this many radii in (0, π − δ_pole).
    #[arg(long)]
    pub radii: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// (π−D)^N / (C²_{N,D} − 1) as D → π.
    Asymptotic,
    /// λ₁ ≥ N C²_{N,D} on generated densities.
    Gap,
    /// λ₁ − N against π − D on truncated models.
    Diameter,
    /// λ₁ − N against ε on stretched models.
    UpperGap,
    /// ‖u'' + u‖² / (λ₁ − N) on truncated models.
    Bochner,
    /// ‖v₀‖ ≤ π‖z‖ for random sources.
    Green,
    /// Pipeline over a list of ray families.
    Localize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub kind: SweepKind,
    /// Values of π − D.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Number of random instances.
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CheckArgs {
    /// `t,h` density table.
    #[arg(long)]
    #[serde(skip)]
    pub file: PathBuf,
    /// Curvature K; defaults to N − 1.
    #[arg(long)]
    pub curvature: Option<f64>,
    /// Quasi-random triples on top of the lattice.
    #[arg(long, default_value_t = 2000)]
    pub pairs: usize,
}
