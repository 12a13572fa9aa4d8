//! Shipped ray-family fixtures. Every family is built deterministically so
//! the files under `fixtures/` can be regenerated byte for byte.

use std::path::Path;

use std::f64::consts::PI;

use obatalab_core::localization::construct::{self, Fixture};
use obatalab_core::measure::{model_density, write_density_csv, Grid};
use obatalab_core::{Result, WeightedInterval};

/// Deficit sweep shared by the extremal and Chebyshev-tight families.
pub const EXTREMAL_DELTAS: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
/// Wider sweep for the fixed-geometry unspanned family.
pub const UNSPANNED_DELTAS: [f64; 5] = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10];
pub const SUSPENSION_POLES: [f64; 3] = [0.3, 0.1, 0.01];
pub const DIMS: [(f64, &str); 2] = [(2.0, "n2"), (3.0, "n3")];

fn tag(x: f64) -> String {
    format!("{x:e}").replace('-', "m")
}

/// All fixtures as `(relative directory, name, fixture)`.
pub fn catalogue() -> Result<Vec<(String, String, Fixture)>> {
    let mut out = Vec::new();
    let mut add = |dir: &str, name: String, f: Fixture| out.push((dir.to_string(), name, f));
    add("", "rigid".into(), construct::rigid(2.0, 4));
    add("", "rigid-n3".into(), construct::rigid(3.0, 4));
    add("", "displaced-pole".into(), construct::displaced_pole(2.0, 1e-4, 0.5)?);
    add("", "short-ray".into(), construct::with_short_ray(2.0, 0.1)?);
    for (n, dn) in DIMS {
        for d in EXTREMAL_DELTAS {
            add(&format!("extremal-{dn}"), format!("delta-{}", tag(d)), construct::extremal(n, d)?);
            add(&format!("chebyshev-{dn}"), format!("delta-{}", tag(d)), construct::chebyshev_tight(n, d)?);
        }
        for d in UNSPANNED_DELTAS {
            add(&format!("unspanned-{dn}"), format!("delta-{}", tag(d)), construct::unspanned_fixed(n, d)?);
        }
        for k in 0..5 {
            let name = format!("s-{k}");
            add(&format!("poincare-{dn}"), name.clone(), construct::poincare_matched(n, 0.1 / f64::powi(2.0, k), &name));
        }
        for (i, p) in SUSPENSION_POLES.into_iter().enumerate() {
            add(&format!("suspension-{dn}"), format!("pole-{}", tag(p)), construct::suspension(n, p, i as u64));
        }
    }
    Ok(out)
}

/// `t,h` density tables for `check-density` and `spectrum --file`.
pub fn densities() -> Result<Vec<(String, WeightedInterval)>> {
    let mut out = Vec::new();
    for (n, dn) in DIMS {
        out.push((format!("model-{dn}"), model_density(n, Grid::uniform(PI, 512)?)?));
    }
    out.push(("linear".into(), WeightedInterval::from_fn(Grid::uniform(0.9, 256)?, |t| t, 1.0, 2.0)?));
    Ok(out)
}

/// Writes every fixture below `root`.
pub fn write_all(root: &Path) -> Result<usize> {
    let all = catalogue()?;
    for (dir, name, f) in &all {
        f.write(&root.join(dir), name)?;
    }
    let dens = densities()?;
    let dir = root.join("densities");
    std::fs::create_dir_all(&dir)?;
    for (name, w) in &dens {
        write_density_csv(w, std::fs::File::create(dir.join(format!("{name}.csv")))?)?;
    }
    Ok(all.len() + dens.len())
}
