//! Verification of the `CD(K,N)` condition for weighted intervals.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::measure::coeff::sigma_unchecked;
use crate::measure::WeightedInterval;

/// Default additive slack for inequality checks.
pub const INEQ_SLACK: f64 = 1e-8;

/// Target number of lattice nodes along each axis of the deterministic
/// triple lattice.
const LATTICE_NODES: usize = 65;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WitnessKind {
    /// The concavity inequality fails at `(x0, x1, t)`.
    Inequality,
    /// `K > 0` and the interval is longer than `π√((N−1)/K)`.
    Diameter,
}

/// Worst violating triple; `violation` is `rhs − lhs` of the inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdWitness {
    pub x0: f64,
    pub x1: f64,
    pub t: f64,
    pub violation: f64,
    pub kind: WitnessKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CdVerdict {
    Pass { checked: usize, max_violation: f64 },
    Fail(CdWitness),
}

impl CdVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, CdVerdict::Pass { .. })
    }
}

/// Checks
/// `h(x_t)^{1/(N−1)} ≥ σ^{(1−t)}_{K,N−1}(|x1−x0|) h(x0)^{1/(N−1)} + σ^{(t)}_{K,N−1}(|x1−x0|) h(x1)^{1/(N−1)}`
/// with `x_t = (1−t)x0 + t x1` on a deterministic lattice of node triples and
/// `sample_pairs` further quasi-random node triples.
///
/// All three points are grid nodes, so no interpolation error enters the
/// comparison and the model density satisfies it up to rounding.
pub fn cd_check(w: &WeightedInterval, sample_pairs: usize, tol: f64) -> CdVerdict {
    let k = w.curvature();
    let dim = w.dim() - 1.0;
    let d = w.length();
    if k > 0.0 {
        let bound = PI * (dim / k).sqrt();
        if d > bound * (1.0 + 1e-12) {
            return CdVerdict::Fail(CdWitness { x0: 0.0, x1: d, t: 0.5, violation: f64::INFINITY, kind: WitnessKind::Diameter });
        }
    }
    let nodes = w.grid().nodes();
    let root: Vec<f64> = w.h().iter().map(|v| v.powf(1.0 / dim)).collect();
    let eval = |i: usize, j: usize, m: usize| -> f64 {
        let (x0, x1, xm) = (nodes[i], nodes[j], nodes[m]);
        let theta = x1 - x0;
        let t = (xm - x0) / theta;
        let term = |s: f64, r: f64| if r == 0.0 { 0.0 } else { s * r };
        let rhs = term(sigma_unchecked(k, dim, 1.0 - t, theta), root[i]) + term(sigma_unchecked(k, dim, t, theta), root[j]);
        rhs - root[m]
    };

    let n = nodes.len() - 1;
    let stride = (n / (LATTICE_NODES - 1)).max(1);
    let mut lattice: Vec<usize> = (0..=n).step_by(stride).collect();
    if *lattice.last().unwrap() != n {
        lattice.push(n);
    }

    let mut worst: Option<(usize, usize, usize, f64)> = None;
    let mut checked = 0usize;
    let mut record = |i: usize, j: usize, m: usize, v: f64| {
        checked += 1;
        if worst.is_none_or(|(_, _, _, wv)| v > wv) {
            worst = Some((i, j, m, v));
        }
    };
    for a in 0..lattice.len() {
        for b in a + 2..lattice.len() {
            for c in a + 1..b {
                let (i, j, m) = (lattice[a], lattice[b], lattice[c]);
                record(i, j, m, eval(i, j, m));
            }
        }
    }
    // Additive recurrence with the plastic-number generator (R3 sequence).
    let g = 1.324_717_957_244_746_f64;
    let alpha = [1.0 / g, 1.0 / (g * g), 1.0 / (g * g * g)];
    for s in 0..sample_pairs {
        let u: Vec<f64> = alpha.iter().map(|a| (0.5 + a * (s + 1) as f64).fract()).collect();
        let p = (u[0] * (n + 1) as f64) as usize;
        let q = (u[1] * (n + 1) as f64) as usize;
        let (i, j) = (p.min(q).min(n), p.max(q).min(n));
        if j < i + 2 {
            continue;
        }
        let m = i + 1 + ((u[2] * (j - i - 1) as f64) as usize).min(j - i - 2);
        record(i, j, m, eval(i, j, m));
    }
    match worst {
        Some((i, j, m, v)) if v > tol => CdVerdict::Fail(CdWitness {
            x0: nodes[i],
            x1: nodes[j],
            t: (nodes[m] - nodes[i]) / (nodes[j] - nodes[i]),
            violation: v,
            kind: WitnessKind::Inequality,
        }),
        Some((_, _, _, v)) => CdVerdict::Pass { checked, max_violation: v },
        None => CdVerdict::Pass { checked, max_violation: f64::NEG_INFINITY },
    }
}

/// Outcome of [`cd_check_differential`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferentialReport {
    pub passed: bool,
    /// Largest excess of `(N−1) w''/w` over the admissible bound.
    pub max_excess: f64,
    /// Node where the excess is largest.
    pub worst_t: f64,
    /// `max |(N−1) w''/w + K|`: zero up to `O(dx²)` for densities saturating
    /// the bound.
    pub max_residual: f64,
}

/// Checks `(N−1) w''/w ≤ −K + tol` with `w = h^{1/(N−1)}` at interior nodes
/// using second-order differences.
///
/// On uniform grids the bound `−K` is replaced by the value the
/// three-point stencil returns on the exact solution of
/// `(N−1) w'' = −K w`, so densities with constant curvature pass with
/// equality and no `O(dx²)` allowance is needed in `tol`.
pub fn cd_check_differential(w: &WeightedInterval, tol: f64) -> Result<DifferentialReport> {
    let dim = w.dim() - 1.0;
    let k = w.curvature();
    let g = w.grid();
    let n = g.cells();
    for i in 1..n {
        if w.h()[i] <= 0.0 {
            return Err(Error::DegenerateDensity { index: i, t: g.t(i) });
        }
    }
    let root: Vec<f64> = w.h().iter().map(|v| v.powf(1.0 / dim)).collect();
    let bound = match g.spacing() {
        Ok(dx) => -dim * discrete_curvature(k / dim, dx),
        Err(_) => -k,
    };
    let mut report = DifferentialReport { passed: true, max_excess: f64::NEG_INFINITY, worst_t: 0.0, max_residual: 0.0 };
    for i in 1..n {
        let (hl, hr) = (g.dx(i - 1), g.dx(i));
        let second = 2.0 * (hl * root[i + 1] - (hl + hr) * root[i] + hr * root[i - 1]) / (hl * hr * (hl + hr));
        let lhs = dim * second / root[i];
        let excess = lhs - bound;
        if excess > report.max_excess {
            report.max_excess = excess;
            report.worst_t = g.t(i);
        }
        report.max_residual = report.max_residual.max((lhs + k).abs());
    }
    report.passed = report.max_excess <= tol;
    Ok(report)
}

/// `(2 − 2cos(√κ dx))/dx²` (hyperbolic for `κ < 0`): minus the three-point
/// second difference of a solution of `w'' = −κ w`, divided by `w`.
pub(crate) fn discrete_curvature(kappa: f64, dx: f64) -> f64 {
    if kappa > 0.0 {
        (2.0 - 2.0 * (kappa.sqrt() * dx).cos()) / (dx * dx)
    } else if kappa < 0.0 {
        (2.0 - 2.0 * ((-kappa).sqrt() * dx).cosh()) / (dx * dx)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{model_density, Grid};

    #[test]
    fn model_passes_both_checks() {
        for &n in &[1.5, 2.0, 2.5, 3.0, 4.0] {
            let w = model_density(n, Grid::uniform(PI, 1024).unwrap()).unwrap();
            assert!(cd_check(&w, 2000, INEQ_SLACK).passed(), "N = {n}");
            let r = cd_check_differential(&w, INEQ_SLACK).unwrap();
            assert!(r.passed, "N = {n}: {r:?}");
        }
    }

    #[test]
    fn constant_density_with_zero_curvature() {
        let g = Grid::uniform(1.0, 64).unwrap();
        let w = WeightedInterval::from_fn(g, |_| 1.0, 0.0, 2.7).unwrap();
        assert!(cd_check(&w, 500, INEQ_SLACK).passed());
        let r = cd_check_differential(&w, INEQ_SLACK).unwrap();
        assert!(r.passed && r.max_residual == 0.0);
    }

    #[test]
    fn linear_density_fails_with_large_curvature() {
        let g = Grid::uniform(1.0, 256).unwrap();
        let w = WeightedInterval::from_fn(g, |t| t, 10.0, 2.0).unwrap();
        let CdVerdict::Fail(wit) = cd_check(&w, 500, INEQ_SLACK) else { panic!("expected failure") };
        assert!(wit.violation > 0.0);
        // Shorter interval: diameter is admissible, the inequality itself fails.
        let g = Grid::uniform(0.9, 256).unwrap();
        let w = WeightedInterval::from_fn(g, |t| t, 10.0, 2.0).unwrap();
        let CdVerdict::Fail(wit) = cd_check(&w, 500, INEQ_SLACK) else { panic!("expected failure") };
        assert_eq!(wit.kind, WitnessKind::Inequality);
        let xt = (1.0 - wit.t) * wit.x0 + wit.t * wit.x1;
        let theta = wit.x1 - wit.x0;
        let rhs = sigma_unchecked(10.0, 1.0, 1.0 - wit.t, theta) * wit.x0 + sigma_unchecked(10.0, 1.0, wit.t, theta) * wit.x1;
        assert!((rhs - xt - wit.violation).abs() < 1e-9);
    }

    #[test]
    fn gaussian_bump_fails_differential_check() {
        let g = Grid::uniform(1.0, 256).unwrap();
        let w = WeightedInterval::from_fn(g, |t| (t * t).exp(), 0.0, 2.0).unwrap();
        assert!(!cd_check_differential(&w, INEQ_SLACK).unwrap().passed);
    }

    #[test]
    fn interior_zero_is_degenerate() {
        let g = Grid::uniform(1.0, 64).unwrap();
        let w = WeightedInterval::from_fn(g, |t| (t - 0.5).abs(), 0.0, 2.0).unwrap();
        assert!(matches!(cd_check_differential(&w, INEQ_SLACK), Err(Error::DegenerateDensity { .. })));
    }
}
