//! Artifacts of a run: `results.csv`, `summary.json`, `timing.json` and
//! the optional `plot.svg`.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use obatalab_core::{localization, measure, numerics, obata1d, spectral};
use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};

use crate::args::Cli;
use crate::error::CliResult;
use crate::plot::{write_plot, PlotSpec};
use crate::table::Table;

/// Slack on `λ₁ ≥ N C²_{N,D}`.
pub const GAP_SLACK: f64 = 1e-6;
/// Allowed shortfall of a fitted exponent below its target.
pub const EXPONENT_SLACK: f64 = 0.1;
/// Allowed shortfall of the assembled exponent below `1/(8N+4)`.
pub const ASSEMBLY_SLACK: f64 = 0.05;
/// Relative tolerance on the diameter slope `N`.
pub const DIAMETER_SLOPE_REL: f64 = 0.15;
/// Additive slack on `‖v₀‖ ≤ π‖z‖`.
pub const GREEN_SLACK: f64 = 1e-12;

/// What a command produced, before it is written to disk.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub table: Table,
    pub result: Json,
    /// Inequality violations found; any entry makes the exit status 2.
    pub violations: Vec<String>,
    pub plot: Option<PlotSpec>,
    /// Further tables, written as `<name>.csv`.
    pub extra: Vec<(String, Table)>,
}

/// All tolerances in force, recorded in every summary.
pub fn tolerances() -> BTreeMap<&'static str, f64> {
    BTreeMap::from([
        ("assembly_exponent_slack", ASSEMBLY_SLACK),
        ("bochner_window", spectral::BOCHNER_WINDOW),
        ("cd_inequality_slack", measure::INEQ_SLACK),
        ("comparison_guard", obata1d::COMPARISON_GUARD),
        ("delta_guard", obata1d::DELTA_GUARD),
        ("diameter_slope_rel", DIAMETER_SLOPE_REL),
        ("exact_slack", localization::EXACT_SLACK),
        ("exponent_slack", EXPONENT_SLACK),
        ("gap_slack", GAP_SLACK),
        ("green_slack", GREEN_SLACK),
        ("mass_slack", localization::MASS_SLACK),
        ("min_r_squared", numerics::fit::MIN_R_SQUARED),
        ("pole_constant", localization::C_POLE),
        ("select_slack", localization::SELECT_SLACK),
        ("stable_range", obata1d::STABLE_RANGE),
        ("volume_slack", localization::VOLUME_SLACK),
    ])
}

/// SHA-256 over the resolved command line (without the output directory)
/// followed by the bytes of every input file.
pub fn config_hash(cli: &Cli) -> CliResult<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(cli)?);
    let mut inputs = cli.common.config.clone();
    match &cli.command {
        crate::args::Command::Spectrum(a) => inputs.extend(a.file.clone()),
        crate::args::Command::CheckDensity(a) => inputs.push(a.file.clone()),
        _ => {}
    }
    for p in inputs {
        h.update(std::fs::read(&p)?);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

pub fn command_name(cli: &Cli) -> &'static str {
    use crate::args::Command::*;
    match cli.command {
        Profile(_) => "profile",
        Spectrum(_) => "spectrum",
        Obata(_) => "obata",
        Localize(_) => "localize",
        Sweep(_) => "sweep",
        CheckDensity(_) => "check-density",
    }
}

pub fn summary(cli: &Cli, outcome: &Outcome) -> CliResult<Json> {
    Ok(json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command_name(cli),
        "config_hash": config_hash(cli)?,
        "seed": cli.common.seed,
        "grid": cli.common.grid,
        "tolerances": tolerances(),
        "status": if outcome.violations.is_empty() { "ok" } else { "violation" },
        "violations": outcome.violations,
        "result": outcome.result,
    }))
}

/// Writes all artifacts into `--out`. Run time goes to `timing.json` so
/// that `summary.json` stays byte-identical across runs.
pub fn write_artifacts(cli: &Cli, outcome: &Outcome, runtime: Duration) -> CliResult<()> {
    let dir: &Path = &cli.common.out;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("results.csv"), outcome.table.to_csv()?)?;
    for (name, t) in &outcome.extra {
        std::fs::write(dir.join(format!("{name}.csv")), t.to_csv()?)?;
    }
    let mut s = serde_json::to_string_pretty(&summary(cli, outcome)?)?;
    s.push('\n');
    std::fs::write(dir.join("summary.json"), s)?;
    let timing = json!({ "runtime_seconds": runtime.as_secs_f64() });
    std::fs::write(dir.join("timing.json"), format!("{}\n", serde_json::to_string_pretty(&timing)?))?;
    if cli.common.plot {
        if let Some(spec) = &outcome.plot {
            write_plot(&outcome.table, spec, &dir.join("plot.svg"))?;
        }
    }
    Ok(())
}
