//! One function per subcommand; each returns an [`Outcome`] and leaves
//! disk output to the caller.

use std::f64::consts::PI;
use std::path::Path;

use obatalab_core::isoperimetry::{asymptotic_constant, bbg_c2_minus_one, bbg_constant, profile, ProfileQuery};
use obatalab_core::localization::{run_pipeline, volume_control, Params, PipelineReport, RayFamily, SuspensionGeometry};
use obatalab_core::measure::{
    cd_check, generate_cd_density, model_density, parse_density_csv, scaled_model, truncated_model, CdVerdict, Excess, Grid, StartData, INEQ_SLACK,
};
use obatalab_core::numerics::fit::{constant_range, loglog_fit};
use obatalab_core::obata1d::{deficit_distance_sweep, diameter_deficit_sweep, upper_gap_check, ExperimentSpec, Family, STABLE_RANGE};
use obatalab_core::spectral::{bochner_check, green_apply, lichnerowicz_check, neumann_eigs};
use obatalab_core::{Error, WeightedInterval};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::args::{CheckArgs, Cli, Command, Common, FamilyKind, LocalizeArgs, ObataArgs, ProfileArgs, SpectrumArgs, SweepArgs, SweepKind};
use crate::error::{CliError, CliResult, Context};
use crate::output::{Outcome, ASSEMBLY_SLACK, DIAMETER_SLOPE_REL, EXPONENT_SLACK, GAP_SLACK, GREEN_SLACK};
use crate::plot::PlotSpec;
use crate::table::Table;

pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    let c = &cli.common;
    match &cli.command {
        Command::Profile(a) => run_profile(c, a),
        Command::Spectrum(a) => run_spectrum(c, a),
        Command::Obata(a) => run_obata(c, a),
        Command::Localize(a) => run_localize(c, a),
        Command::Sweep(a) => run_sweep(c, a),
        Command::CheckDensity(a) => run_check(c, a),
    }
}

fn dim(c: &Common) -> CliResult<f64> {
    c.dim.ok_or_else(|| CliError::Input("--dim is required".into()))
}

fn diam(c: &Common) -> CliResult<f64> {
    c.diam.ok_or_else(|| CliError::Input("--diam is required".into()))
}

fn single_config(c: &Common) -> CliResult<&Path> {
    match c.config.as_slice() {
        [p] => Ok(p),
        _ => Err(CliError::Input("exactly one --config file is required".into())),
    }
}

fn params(c: &Common, n: f64) -> Params {
    let opt = Params::optimal(n);
    Params { beta: c.beta.unwrap_or(opt.beta), gamma: c.gamma.unwrap_or(opt.gamma) }
}

/// Geometric sequence `start, start·ratio, …`.
fn geometric(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start * ratio.powi(i as i32)).collect()
}

fn run_profile(c: &Common, a: &ProfileArgs) -> CliResult<Outcome> {
    let (n, d) = (dim(c)?, diam(c)?);
    let vs = match a.points {
        Some(k) => (1..=k).map(|i| i as f64 / (k + 1) as f64).collect(),
        None => a.v.clone(),
    };
    let mut table = Table::new(&["v", "value", "argmin_b", "r"]);
    for v in vs {
        let p = profile(ProfileQuery { n, d, v }).context("profile")?;
        table.push(vec![v.into(), p.value.into(), p.argmin_b.into(), p.r_at_argmin.into()]);
    }
    let result = json!({
        "dim": n,
        "diam": d,
        "bbg_constant": bbg_constant(n, d).context("BBG constant")?,
        "c2_minus_one": bbg_c2_minus_one(n, d).context("BBG constant")?,
    });
    Ok(Outcome { table, result, plot: Some(PlotSpec::linear("isoperimetric profile", "v", &["value"])), ..Default::default() })
}

fn spectrum_density(c: &Common, a: &SpectrumArgs, n: f64) -> CliResult<WeightedInterval> {
    if let Some(path) = &a.file {
        let f = std::fs::File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        return parse_density_csv(f, n - 1.0, n).context("density file")?.normalized().context("density file");
    }
    if a.model || !(a.truncated || a.scaled || a.generated) {
        return model_density(n, Grid::uniform(PI, c.grid).context("grid")?).context("model density");
    }
    let grid = Grid::uniform(diam(c)?, c.grid).context("grid")?;
    if a.truncated {
        truncated_model(n, grid).context("truncated model")
    } else if a.scaled {
        scaled_model(n, grid).context("scaled model")
    } else {
        let g = generate_cd_density(n, c.seed, &grid, &Excess::Random { pieces: a.pieces, max_level: a.level }, StartData::default())
            .context("generator")?;
        Ok(g.interval)
    }
}

fn run_spectrum(c: &Common, a: &SpectrumArgs) -> CliResult<Outcome> {
    let n = dim(c)?;
    let w = spectrum_density(c, a, n)?;
    let s = neumann_eigs(&w, a.k).context("eigensolver")?;
    let mut table = Table::new(&["k", "lambda", "error_bar", "extrapolated"]);
    for i in 0..a.k {
        let bar = s.error_bar.as_ref().map(|b| b[i]);
        let ext = s.extrapolated.as_ref().map(|e| e[i]);
        table.push(vec![(i + 1).into(), s.eigenvalues[i].into(), bar.into(), ext.into()]);
    }
    let cd = cd_check(&w, 2000, INEQ_SLACK).passed();
    let lich = lichnerowicz_check(&w, s.lambda1_refined()).context("spectral gap bound")?;
    let mut violations = Vec::new();
    if cd && lich.margin < -GAP_SLACK {
        violations.push(format!("λ₁ − N C²_{{N,D}} = {} below −{GAP_SLACK}", lich.margin));
    }
    let result = json!({
        "dim": n,
        "length": w.length(),
        "lambda1": s.lambda1(),
        "lambda1_refined": s.lambda1_refined(),
        "lambda0": s.lambda0,
        "residual": s.residual,
        "cd_passed": cd,
        "gap_bound": lich,
    });
    Ok(Outcome { table, result, violations, plot: Some(PlotSpec::linear("Neumann spectrum", "k", &["lambda"])), ..Default::default() })
}

fn run_obata(c: &Common, a: &ObataArgs) -> CliResult<Outcome> {
    let n = dim(c)?;
    let p = if a.params.is_empty() { None } else { Some(a.params.clone()) };
    let family = match a.family {
        FamilyKind::Perturbed => Family::PerturbedCosine { scales: p.unwrap_or_else(|| geometric(0.2, 0.5, 5)) },
        FamilyKind::Truncated => Family::TruncatedModel { eps: p.unwrap_or_else(|| geometric(0.125, 0.5, 5)) },
        FamilyKind::Generated => Family::Generated { seed: c.seed, d: c.diam.unwrap_or(2.8), levels: p.unwrap_or_else(|| geometric(0.8, 0.5, 5)) },
    };
    let spec = ExperimentSpec { n, family, cells: c.grid };
    let rep = deficit_distance_sweep(&spec).context("deficit sweep")?;
    let mut table = Table::new(&["param", "delta", "dist_l2", "dist_w12", "lambda1"]);
    for r in &rep.rows {
        table.push(vec![r.param.into(), r.delta.into(), r.dist_l2.into(), r.dist_w12.into(), r.lambda1.into()]);
    }
    let mut violations = Vec::new();
    if rep.violates(EXPONENT_SLACK) {
        violations.push(format!("distance decays with exponent {:?}, below the target {}", rep.fit.map(|f| f.slope), rep.target_exponent));
    }
    let result = json!({
        "dim": n,
        "family": spec.family,
        "target_exponent": rep.target_exponent,
        "fit": rep.summary(),
        "stable": rep.passes(EXPONENT_SLACK),
        "constants": rep.constants,
        "excluded": rep.excluded,
    });
    Ok(Outcome {
        table,
        result,
        violations,
        plot: Some(PlotSpec::loglog("deficit against distance", "delta", &["dist_w12", "dist_l2"])),
        ..Default::default()
    })
}

fn ray_table(rep: &PipelineReport) -> Table {
    let mut t = Table::new(&["index", "weight", "length", "c_abs", "c", "delta_q", "orth", "long", "cos_dist"]);
    for (i, r) in rep.ledger.rays.iter().enumerate() {
        let cos = rep.cosines.iter().find(|s| s.index == i);
        t.push(vec![
            i.into(),
            r.weight.into(),
            r.length.into(),
            r.c_abs.into(),
            cos.map(|s| s.c).into(),
            r.delta_q.into(),
            r.orth.into(),
            rep.long.contains(i).into(),
            cos.map(|s| s.dist).into(),
        ]);
    }
    t
}

/// Inequality failures of one pipeline run.
fn pipeline_violations(rep: &PipelineReport) -> Vec<String> {
    let mut v = Vec::new();
    if !rep.ledger.localization_holds() {
        v.push(format!("δ = {} below Σ q δ_q c_q² = {}", rep.ledger.delta, rep.ledger.localized));
    }
    if !rep.ledger.orthogonal_holds() {
        v.push(format!("orthogonal energy {} exceeds δ = {}", rep.ledger.orth_total, rep.ledger.delta));
    }
    if let Some(i) = rep.ledger.lichnerowicz_failure() {
        v.push(format!("ray {i} violates ∫|u'|² ≥ N c²"));
    }
    if !rep.long.chebyshev_holds() {
        v.push("Chebyshev certificate for long rays fails".into());
    }
    if !rep.bad_set.holds() {
        v.push(format!("bad-set energy {} exceeds {}", rep.bad_set.energy, rep.bad_set.bound));
    }
    if rep.pole.is_some_and(|p| p.flagged) {
        v.push("pole offsets exceed the δ^{β/N} scaling".into());
    }
    v
}

fn run_localize(c: &Common, a: &LocalizeArgs) -> CliResult<Outcome> {
    let path = single_config(c)?;
    let family = RayFamily::load(path).context("ray family")?;
    let p = params(c, family.n);
    let mut violations = Vec::new();
    let rep = match run_pipeline(&family, p) {
        Ok(r) => r,
        Err(e @ Error::NonCdRay { .. }) => {
            violations.push(e.to_string());
            return Ok(Outcome { table: Table::new(&["index"]), result: json!({ "error": e.to_string() }), violations, ..Default::default() });
        }
        Err(e) => return Err(CliError::Core { context: "pipeline".into(), source: e }),
    };
    violations.extend(pipeline_violations(&rep));
    let mut extra = Vec::new();
    let mut volume = None;
    if let Some(k) = a.radii {
        let geo = SuspensionGeometry::from_family(&family).context("volume control")?;
        let mut t = Table::new(&["r", "ball", "lower", "upper", "holds"]);
        let mut failures = 0usize;
        let top = PI - geo.delta_pole;
        for i in 1..=k {
            let r = top * i as f64 / (k + 1) as f64;
            match volume_control(&family, &geo, r) {
                Ok(v) => t.push(vec![r.into(), v.ball.into(), v.lower.into(), v.upper.into(), true.into()]),
                Err(e @ Error::NonCdRay { .. }) => {
                    failures += 1;
                    violations.push(e.to_string());
                    t.push(vec![r.into(), None.into(), None.into(), None.into(), false.into()]);
                }
                Err(e) => return Err(CliError::Core { context: "volume control".into(), source: e }),
            }
        }
        volume = Some(json!({ "radii": k, "failures": failures }));
        extra.push(("volume".to_string(), t));
    }
    let result = json!({
        "summary": rep.summary(),
        "certificates_hold": rep.certificates_hold(),
        "ledger": { "delta": rep.ledger.delta, "localized": rep.ledger.localized, "orth_total": rep.ledger.orth_total, "c2_total": rep.ledger.c2_total },
        "long_rays": rep.long,
        "bad_set": rep.bad_set,
        "variance": rep.variance,
        "long_mass": rep.long_mass,
        "assembly": rep.assembly,
        "pole": rep.pole,
        "volume": volume,
    });
    Ok(Outcome { table: ray_table(&rep), result, violations, extra, plot: None })
}

fn run_check(c: &Common, a: &CheckArgs) -> CliResult<Outcome> {
    let n = dim(c)?;
    let k = a.curvature.unwrap_or(n - 1.0);
    let f = std::fs::File::open(&a.file).map_err(|e| CliError::Input(format!("{}: {e}", a.file.display())))?;
    let w = parse_density_csv(f, k, n).context("density file")?;
    let verdict = cd_check(&w, a.pairs, INEQ_SLACK);
    let mut table = Table::new(&["passed", "x0", "x1", "t", "violation", "kind"]);
    let mut violations = Vec::new();
    let result = match &verdict {
        CdVerdict::Pass { checked, max_violation } => {
            table.push(vec![true.into(), None.into(), None.into(), None.into(), (*max_violation).into(), "".into()]);
            println!("pass: {checked} triples, largest violation {max_violation:e}");
            json!({ "passed": true, "checked": checked, "max_violation": max_violation, "curvature": k, "dim": n })
        }
        CdVerdict::Fail(wit) => {
            let kind = format!("{:?}", wit.kind).to_lowercase();
            table.push(vec![false.into(), wit.x0.into(), wit.x1.into(), wit.t.into(), wit.violation.into(), kind.as_str().into()]);
            println!("FAIL: {kind} violation {:e} at x0 = {}, x1 = {}, t = {}", wit.violation, wit.x0, wit.x1, wit.t);
            violations.push(format!("CD({k},{n}) fails: {kind} violation {} at x0 = {}, x1 = {}, t = {}", wit.violation, wit.x0, wit.x1, wit.t));
            json!({ "passed": false, "witness": { "x0": wit.x0, "x1": wit.x1, "t": wit.t, "violation": wit.violation, "kind": kind }, "curvature": k, "dim": n })
        }
    };
    Ok(Outcome { table, result, violations, ..Default::default() })
}

fn run_sweep(c: &Common, a: &SweepArgs) -> CliResult<Outcome> {
    match a.kind {
        SweepKind::Asymptotic => sweep_asymptotic(c, a),
        SweepKind::Gap => sweep_gap(c, a),
        SweepKind::Diameter => sweep_diameter(c, a),
        SweepKind::UpperGap => sweep_upper_gap(c, a),
        SweepKind::Bochner => sweep_bochner(c, a),
        SweepKind::Green => sweep_green(c, a),
        SweepKind::Localize => sweep_localize(c),
    }
}

fn eps_or(a: &SweepArgs, default: Vec<f64>) -> Vec<f64> {
    if a.eps.is_empty() {
        default
    } else {
        a.eps.clone()
    }
}

fn sweep_asymptotic(c: &Common, a: &SweepArgs) -> CliResult<Outcome> {
    let n = dim(c)?;
    let mut eps = eps_or(a, vec![1e-1, 1e-2, 1e-3]);
    eps.sort_by(|x, y| y.total_cmp(x));
    let ds: Vec<f64> = eps.iter().map(|e| PI - e).collect();
    let rep = asymptotic_constant(n, &ds).context("asymptotic constant")?;
    let mut table = Table::new(&["eps", "diam", "ratio", "target", "rel_err"]);
    for (e, (d, r)) in eps.iter().zip(&rep.ratios) {
        table.push(vec![(*e).into(), (*d).into(), (*r).into(), rep.target.into(), ((r - rep.target).abs() / rep.target).into()]);
    }
    let last = rep.ratios.last().map(|p| p.1).unwrap_or(f64::NAN);
    let result = json!({
        "dim": n,
        "target": rep.target,
        "ratio_at_smallest_eps": last,
        "rel_err_at_smallest_eps": (last - rep.target).abs() / rep.target,
        "extrapolated": rep.extrapolated,
    });
    Ok(Outcome { table, result, ..Default::default() })
}

fn sweep_gap(c: &Common, a: &SweepArgs) -> CliResult<Outcome> {
    let n = dim(c)?;
    let count = a.count.unwrap_or(20);
    let rows = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let seed = c.seed.wrapping_add(i);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = rng.gen_range(1.5..3.1);
            let level = rng.gen_range(0.0..3.0);
            let grid = Grid::uniform(d, c.grid)?;
            let g = generate_cd_density(n, seed, &grid, &Excess::Random { pieces: 4, max_level: level }, StartData::default())?;
            let s = neumann_eigs(&g.interval, 1)?;
            let l = lichnerowicz_check(&g.interval, s.lambda1_refined())?;
            Ok((seed, g.interval.length(), level, s.lambda1_refined(), l))
        })
        .collect::<obatalab_core::Result<Vec<_>>>()
        .context("generated spectral gaps")?;
    let mut table = Table::new(&["seed", "length", "level", "lambda1", "bound", "margin"]);
    let mut violations = Vec::new();
    for (seed, len, level, lambda, l) in &rows {
        table.push(vec![(*seed).into(), (*len).into(), (*level).into(), (*lambda).into(), (n * l.c2).into(), l.margin.into()]);
        if l.margin < -GAP_SLACK {
            violations.push(format!("seed {seed}: λ₁ − N C² = {}", l.margin));
        }
    }
    let min_margin = rows.iter().map(|r| r.4.margin).fold(f64::INFINITY, f64::min);
    let result = json!({ "dim": n, "count": count, "violations": violations.len(), "min_margin": min_margin });
    Ok(Outcome { table, result, violations, ..Default::default() })
}

fn sweep_diameter(c: &Common, a: &SweepArgs) -> CliResult<Outcome> {
    let n = dim(c)?;
    let eps = eps_or(a, geometric(0.125, 0.5, 5));
    let rep = diameter_deficit_sweep(n, &eps, c.grid).context("diameter sweep")?;
    let mut table = Table::new(&["eps", "gap", "lower", "holds"]);
    let mut violations = Vec::new();
    for r in &rep.rows {
        table.push(vec![r.eps.into(), r.gap.into(), r.lower.into(), r.holds.into()]);
        if !r.holds {
            violations.push(format!("C_N ε^N = {} exceeds λ₁ − N = {} at ε = {}", r.lower, r.gap, r.eps));
        }
    }
    let slope = rep.fit.map(|f| f.slope);
    let rel = slope.map(|s| (s - n).abs() / n);
    if !rel.is_some_and(|r| r <= DIAMETER_SLOPE_REL) {
        violations.push(format!("slope {slope:?} not within {DIAMETER_SLOPE_REL} of N = {n}"));
    }
    let result = json!({ "dim": n, "fit": rep.fit, "slope_rel_err": rel, "c_n": rep.c_n, "all_hold": rep.all_hold() });
    Ok(Outcome {
        table,
        result,
        violations,
        plot: Some(PlotSpec::loglog("spectral gap against diameter deficit", "eps", &["gap", "lower"])),
        ..Default::default()
    })
}

fn sweep_upper_gap(c: &Common, a: &SweepArgs) -> CliResult<Outcome> {
    let n = dim(c)?;
    let eps = eps_or(a, geometric(0.2, 0.5, 5));
    let rep = upper_gap_check(n, &eps, c.grid).context("upper gap")?;
    let mut table = Table::new(&["eps", "ratio", "candidate_ratio"]);
    for r in &rep.rows {
        table.push(vec![r.eps.into(), r.ratio.into(), r.candidate_ratio.into()]);
    }
    let result = json!({ "dim": n, "max_ratio": rep.max_ratio, "ratio_range": rep.ratio_range, "max_candidate_ratio": rep.max_candidate_ratio });
    Ok(Outcome { table, result, plot: Some(PlotSpec::linear("(λ₁ − N)/ε", "eps", &["ratio", "candidate_ratio"])), ..Default::default() })
}

fn sweep_bochner(c: &Common, a: &SweepArgs) -> CliResult<Outcome> {
    let n = dim(c)?;
    let eps = eps_or(a, geometric(0.125, 0.5, 5));
    let mut rows = eps
        .par_iter()
        .map(|&e| {
            let w = truncated_model(n, Grid::uniform(PI - e, c.grid)?)?;
            let s = neumann_eigs(&w, 1)?;
            let b = bochner_check(&w, s.lambda1_refined(), &s.eigenfunctions[0])?;
            Ok((e, s.lambda1_refined() - n, b))
        })
        .collect::<obatalab_core::Result<Vec<_>>>()
        .context("Bochner sweep")?;
    rows.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut table = Table::new(&["eps", "delta", "norm_sq", "squared_ratio"]);
    for (e, d, b) in &rows {
        table.push(vec![(*e).into(), (*d).into(), (b.norm * b.norm).into(), b.squared_ratio.into()]);
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.2.squared_ratio).collect();
    let range = constant_range(&ratios);
    let mut violations = Vec::new();
    if !(range <= STABLE_RANGE) {
        violations.push(format!("‖u''+u‖²/(λ₁−N) range {range} exceeds {STABLE_RANGE}"));
    }
    let fit = loglog_fit(&rows.iter().map(|r| r.1).collect::<Vec<_>>(), &rows.iter().map(|r| r.2.norm * r.2.norm).collect::<Vec<_>>());
    let result = json!({ "dim": n, "ratio_range": range, "max_ratio": ratios.iter().fold(0.0f64, |x, y| x.max(*y)), "fit": fit });
    Ok(Outcome { table, result, violations, plot: Some(PlotSpec::loglog("Bochner defect", "delta", &["norm_sq"])), ..Default::default() })
}

/// Density families of the Green sweep.
fn green_families(n: f64, cells: usize, seed: u64) -> obatalab_core::Result<Vec<(&'static str, WeightedInterval)>> {
    let gen = generate_cd_density(n, seed, &Grid::uniform(2.8, cells)?, &Excess::Random { pieces: 4, max_level: 1.0 }, StartData::default())?;
    Ok(vec![
        ("model", model_density(n, Grid::uniform(PI, cells)?)?),
        ("truncated", truncated_model(n, Grid::uniform(PI - 0.1, cells)?)?),
        ("scaled", scaled_model(n, Grid::uniform(PI - 0.1, cells)?)?),
        ("generated", gen.interval),
    ])
}

/// Smooth random source: trigonometric polynomial with decaying
/// coefficients, plus a random base point.
fn random_source(w: &WeightedInterval, rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    let coeffs: Vec<(f64, f64)> =
        (0..6).map(|k| (rng.gen_range(-1.0..1.0) / (1.0 + k as f64), rng.gen_range(-1.0..1.0) / (1.0 + k as f64))).collect();
    let x0 = rng.gen_range(0.0..w.length());
    let z = w
        .grid()
        .nodes()
        .iter()
        .map(|t| coeffs.iter().enumerate().map(|(k, (a, b))| a * (k as f64 * t).cos() + b * (k as f64 * t).sin()).sum())
        .collect();
    (z, x0)
}

fn sweep_green(c: &Common, a: &SweepArgs) -> CliResult<Outcome> {
    let n = dim(c)?;
    let count = a.count.unwrap_or(100);
    let families = green_families(n, c.grid, c.seed).context("Green sweep")?;
    let mut table = Table::new(&["family", "index", "x0", "norm_v0", "bound", "ratio", "holds", "residual"]);
    let mut violations = Vec::new();
    let mut worst = 0.0f64;
    let mut convergence = serde_json::Map::new();
    for (fi, (name, w)) in families.iter().enumerate() {
        let rows = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(c.seed ^ ((fi as u64) << 32) ^ i as u64);
                let (z, x0) = random_source(w, &mut rng);
                green_apply(w, &z, x0).map(|g| (i, x0, g.norm_v0, g.norm_z, g.residual, g.bound_holds(GREEN_SLACK)))
            })
            .collect::<obatalab_core::Result<Vec<_>>>()
            .context("Green sweep")?;
        for (i, x0, v, z, res, holds) in rows {
            let ratio = v / (PI * z);
            worst = worst.max(ratio);
            table.push(vec![(*name).into(), i.into(), x0.into(), v.into(), (PI * z).into(), ratio.into(), holds.into(), res.into()]);
            if !holds {
                violations.push(format!("{name} #{i}: ‖v₀‖ = {v} exceeds π‖z‖ = {}", PI * z));
            }
        }
        // Residual under grid halving, for one fixed smooth source.
        let residual_at = |cells: usize| -> obatalab_core::Result<f64> {
            let wc = resample(w, cells)?;
            let z: Vec<f64> = wc.grid().nodes().iter().map(|t| (2.0 * t).cos() + 0.3 * t.sin()).collect();
            Ok(green_apply(&wc, &z, 0.37 * wc.length())?.residual)
        };
        let fine = residual_at(c.grid).context("Green residual")?;
        let coarse = residual_at(c.grid / 2).context("Green residual")?;
        let ratio = coarse / fine;
        if !(2.0..=8.0).contains(&ratio) {
            violations.push(format!("{name}: residual ratio {ratio} under halving is not second order"));
        }
        convergence.insert(name.to_string(), json!({ "fine": fine, "coarse": coarse, "ratio": ratio }));
    }
    let result = json!({ "dim": n, "count_per_family": count, "max_ratio": worst, "violations": violations.len(), "residual_halving": convergence });
    Ok(Outcome { table, result, violations, ..Default::default() })
}

/// The same density family on a grid with `cells` cells; sampled densities
/// are interpolated.
fn resample(w: &WeightedInterval, cells: usize) -> obatalab_core::Result<WeightedInterval> {
    let grid = Grid::uniform(w.length(), cells)?;
    WeightedInterval::from_fn(grid, |t| w.density_at(t), w.curvature(), w.dim())?.normalized()
}

fn sweep_localize(c: &Common) -> CliResult<Outcome> {
    if c.config.is_empty() {
        return Err(CliError::Input("--config must list at least one ray family".into()));
    }
    let runs = c
        .config
        .par_iter()
        .map(|p| {
            let f = RayFamily::load(p).context(&p.display().to_string())?;
            let rep = run_pipeline(&f, params(c, f.n)).context(&p.display().to_string())?;
            Ok((p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(), f.n, rep))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(&[
        "family",
        "delta",
        "localized",
        "long_rays",
        "outside_c2",
        "chebyshev_bound",
        "bad_energy",
        "bad_bound",
        "variance",
        "variance_env",
        "variance_c",
        "mass_lhs",
        "mass_env",
        "mass_c",
        "final_dist",
        "final_c",
        "certificates",
    ]);
    let mut violations = Vec::new();
    for (name, _, r) in &runs {
        let asm = r.assembly;
        table.push(vec![
            name.as_str().into(),
            r.ledger.delta.into(),
            r.ledger.localized.into(),
            r.long.indices.len().into(),
            r.long.outside_c2.into(),
            r.long.chebyshev_bound.into(),
            r.bad_set.energy.into(),
            r.bad_set.bound.into(),
            r.variance.bound.lhs.into(),
            r.variance.bound.envelope.into(),
            r.variance.bound.constant.into(),
            r.long_mass.bound.lhs.into(),
            r.long_mass.bound.envelope.into(),
            r.long_mass.bound.constant.into(),
            asm.map(|a| a.final_dist).into(),
            asm.map(|a| a.bound.constant).into(),
            r.certificates_hold().into(),
        ]);
        violations.extend(pipeline_violations(r).into_iter().map(|v| format!("{name}: {v}")));
    }
    let deltas: Vec<f64> = runs.iter().map(|r| r.2.ledger.delta).collect();
    // Rows with a vanishing left-hand side constrain no constant. The range
    // is the stability figure; growth towards small δ is what breaks a bound.
    let stability = |get: fn(&PipelineReport) -> f64| {
        let (ds, cs): (Vec<f64>, Vec<f64>) = runs.iter().map(|r| (r.2.ledger.delta, get(&r.2))).filter(|p| p.1 > 0.0).unzip();
        if cs.is_empty() {
            return (1.0, false);
        }
        let range = constant_range(&cs);
        let grows = loglog_fit(&ds, &cs).is_some_and(|f| f.slope < 0.0);
        (range, grows)
    };
    let (var_range, var_grows) = stability(|r| r.variance.bound.constant);
    let (mass_range, mass_grows) = stability(|r| r.long_mass.bound.constant);
    for (what, range, grows) in [("variance", var_range, var_grows), ("long-ray mass", mass_range, mass_grows)] {
        if !(range <= STABLE_RANGE) && grows {
            violations.push(format!("{what} constants grow along the sweep: range {range}"));
        }
    }
    let dists: Vec<f64> = runs.iter().map(|r| r.2.assembly.map_or(f64::NAN, |a| a.final_dist)).collect();
    let fit = loglog_fit(&deltas, &dists);
    let n = runs[0].1;
    let eta = 1.0 / (8.0 * n + 4.0);
    let exponent_ok = fit.map(|f| f.slope >= eta - ASSEMBLY_SLACK);
    if runs.len() > 1 && exponent_ok == Some(false) {
        violations.push(format!("assembled exponent {:?} below η − {ASSEMBLY_SLACK} = {}", fit.map(|f| f.slope), eta - ASSEMBLY_SLACK));
    }
    let result = json!({
        "families": runs.len(),
        "dim": n,
        "eta": eta,
        "variance_range": var_range,
        "mass_range": mass_range,
        "stable": var_range <= STABLE_RANGE && mass_range <= STABLE_RANGE,
        "final_fit": fit,
        "exponent_ok": exponent_ok,
        "certificates_hold": runs.iter().all(|r| r.2.certificates_hold()),
        "max_final_dist": dists.iter().fold(0.0f64, |a, b| a.max(*b)),
    });
    Ok(Outcome {
        table,
        result,
        violations,
        plot: Some(PlotSpec::loglog("final distance against deficit", "delta", &["final_dist"])),
        ..Default::default()
    })
}
