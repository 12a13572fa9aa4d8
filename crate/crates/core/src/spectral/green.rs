//! Green-operator representation `u = u₀ + α sin + β cos` of functions with
//! small `u'' + u`, and distances to `±√(N+1) cos`.

use serde::Serialize;

use super::Discretization;
use crate::error::{Error, Result};
use crate::measure::WeightedInterval;
use crate::numerics::quad::gauss5;

/// Output of [`green_apply`].
#[derive(Debug, Clone)]
pub struct GreenResult {
    /// `v₀(t) = ∫_{x₀}^t sin(t − s) z(s) ds` at the nodes.
    pub v0: Vec<f64>,
    /// Node used as `x₀`.
    pub x0_index: usize,
    /// `x₀` fell on an endpoint of the interval.
    pub boundary_max: bool,
    /// `max |v₀'' + v₀ − z|` over interior nodes, with `v₀''` the three-point
    /// second difference.
    pub residual: f64,
    pub norm_v0: f64,
    pub norm_z: f64,
}

impl GreenResult {
    /// `‖v₀‖ ≤ π‖z‖` in `L²(m)`, up to `slack`.
    pub fn bound_holds(&self, slack: f64) -> bool {
        self.norm_v0 <= std::f64::consts::PI * self.norm_z + slack
    }
}

/// `(2 − 2cos dx)/dx²`, the symbol of the three-point stencil on `sin`/`cos`.
fn stencil_unit(dx: f64) -> f64 {
    let s = (0.5 * dx).sin();
    4.0 * s * s / (dx * dx)
}

/// Applies the Green operator of `v'' + v` with base point `x0`, snapped to
/// the nearest node.
///
/// The quadrature is the trapezoid rule scaled by `dx / sin(dx)`; with this
/// scaling the result solves
/// `(v_{i+1} − 2v_i + v_{i−1})/dx² + (2 − 2cos dx)/dx² · v_i = z_i` exactly,
/// which is the discrete identity [`cosine_decompose`] relies on.
pub fn green_apply(w: &WeightedInterval, z: &[f64], x0: f64) -> Result<GreenResult> {
    let g = w.grid();
    let dx = g.spacing()?;
    let nodes = g.nodes();
    let n = nodes.len();
    if z.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: z.len() });
    }
    let p = ((x0 / dx).round() as isize).clamp(0, (n - 1) as isize) as usize;
    let scale = dx / dx.sin();
    let mut v0 = vec![0.0; n];
    // v_i = scale · dx · Σ_j ω_j sin(t_i − t_j) z_j over nodes between p and
    // i, with half weight at p (the weight at i multiplies sin 0).
    let (sp, cp) = (nodes[p].sin(), nodes[p].cos());
    for (dir, range) in [(1.0f64, (p + 1..n).collect::<Vec<_>>()), (-1.0, (0..p).rev().collect())] {
        // sin(t_i − s) = sin t_i cos s − cos t_i sin s: accumulate the two
        // running sums in a single pass.
        let mut acc_c = 0.5 * cp * z[p];
        let mut acc_s = 0.5 * sp * z[p];
        let mut prev = p;
        for i in range {
            if prev != p {
                acc_c += nodes[prev].cos() * z[prev];
                acc_s += nodes[prev].sin() * z[prev];
            }
            let (si, ci) = (nodes[i].sin(), nodes[i].cos());
            v0[i] = dir * scale * dx * (si * acc_c - ci * acc_s);
            prev = i;
        }
    }
    let mut residual = 0.0f64;
    for i in 1..n - 1 {
        let second = (v0[i + 1] - 2.0 * v0[i] + v0[i - 1]) / (dx * dx);
        residual = residual.max((second + v0[i] - z[i]).abs());
    }
    let disc = Discretization::new(w)?;
    Ok(GreenResult { norm_v0: disc.norm(&v0), norm_z: disc.norm(z), v0, x0_index: p, boundary_max: p == 0 || p == n - 1, residual })
}

/// Distances on a sub-window `[a, b]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindowReport {
    pub a: f64,
    pub b: f64,
    pub dist_l2: f64,
    pub dist_w12: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CosineReport {
    /// Sign `s` minimising `‖u − s√(N+1) cos‖_{L²(m)}`.
    pub sign: f64,
    pub dist_l2: f64,
    pub dist_w12: f64,
    pub alpha: f64,
    pub beta: f64,
    pub u0_norm: f64,
    pub z_norm: f64,
    /// `max |u − (u₀ + α sin + β cos)|` at the nodes.
    pub reconstruction_error: f64,
    pub boundary_max: bool,
    /// Window `[0, r]`, when requested.
    pub window_r: Option<WindowReport>,
    /// Window `[r − η, r + η]`, when requested.
    pub window_eta: Option<WindowReport>,
}

/// Squared `L²(m)` and `L²(m)`-derivative norms of the piecewise-linear
/// interpolant of `f` over `[a, b]`, integrated exactly cell by cell.
fn window_norms(w: &WeightedInterval, f: &[f64], a: f64, b: f64) -> (f64, f64) {
    let g = w.grid();
    let h = w.h();
    let total = w.total_mass();
    let (a, b) = (a.max(0.0), b.min(w.length()));
    if b <= a {
        return (0.0, 0.0);
    }
    let (ia, _) = g.locate(a);
    let (ib, _) = g.locate(b);
    let (mut l2, mut d2) = (0.0, 0.0);
    for i in ia..=ib.min(g.cells() - 1) {
        let (t0, t1) = (g.t(i), g.t(i + 1));
        let (lo, hi) = (t0.max(a), t1.min(b));
        if hi <= lo {
            continue;
        }
        let dx = t1 - t0;
        let lin = |vals: &[f64], t: f64| vals[i] + (vals[i + 1] - vals[i]) * (t - t0) / dx;
        let slope = (f[i + 1] - f[i]) / dx;
        l2 += gauss5(|t| lin(f, t).powi(2) * lin(h, t), lo, hi);
        d2 += slope * slope * gauss5(|t| lin(h, t), lo, hi);
    }
    (l2 / total, d2 / total)
}

/// Minimum over the sign of the `L²` and `W^{1,2}` distances of `u` to
/// `±√(N+1) cos` on `[a, b]`.
pub fn window_distance(w: &WeightedInterval, u: &[f64], a: f64, b: f64) -> Result<WindowReport> {
    let nodes = w.grid().nodes();
    if u.len() != nodes.len() {
        return Err(Error::LengthMismatch { expected: nodes.len(), got: u.len() });
    }
    let c = (w.dim() + 1.0).sqrt();
    let mut best = WindowReport { a, b, dist_l2: f64::INFINITY, dist_w12: f64::INFINITY };
    for s in [1.0, -1.0] {
        let diff: Vec<f64> = u.iter().zip(nodes).map(|(v, t)| v - s * c * t.cos()).collect();
        let (l2, d2) = window_norms(w, &diff, a, b);
        best.dist_l2 = best.dist_l2.min(l2.sqrt());
        best.dist_w12 = best.dist_w12.min((l2 + d2).sqrt());
    }
    Ok(best)
}

/// Decomposes `u` as `u₀ + α sin + β cos` with `u₀` the Green operator
/// applied to the discrete `z = u'' + u` and based at the density maximum,
/// and measures the distance of `u` to `±√(N+1) cos`.
///
/// `window = Some((r, η))` adds the distances on `[0, r]` and
/// `[r − η, r + η]`.
pub fn cosine_decompose(w: &WeightedInterval, u: &[f64], window: Option<(f64, f64)>) -> Result<CosineReport> {
    let g = w.grid();
    let dx = g.spacing()?;
    let nodes = g.nodes();
    let n = nodes.len();
    if u.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: u.len() });
    }
    let unit = stencil_unit(dx);
    let mut z = vec![0.0; n];
    for i in 1..n - 1 {
        z[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dx * dx) + unit * u[i];
    }
    let x0 = g.t(w.argmax());
    let green = green_apply(w, &z, x0)?;
    let disc = Discretization::new(w)?;
    let sin: Vec<f64> = nodes.iter().map(|t| t.sin()).collect();
    let cos: Vec<f64> = nodes.iter().map(|t| t.cos()).collect();
    let rest: Vec<f64> = u.iter().zip(&green.v0).map(|(a, b)| a - b).collect();
    let (ss, sc, cc) = (disc.inner(&sin, &sin), disc.inner(&sin, &cos), disc.inner(&cos, &cos));
    let (rs, rc) = (disc.inner(&rest, &sin), disc.inner(&rest, &cos));
    let det = ss * cc - sc * sc;
    if !(det > 1e-12 * ss * cc) {
        return Err(Error::Conditioning(format!("sin/cos Gram determinant {det:e}")));
    }
    let alpha = (rs * cc - rc * sc) / det;
    let beta = (rc * ss - rs * sc) / det;
    let reconstruction_error = (0..n).map(|i| (u[i] - green.v0[i] - alpha * sin[i] - beta * cos[i]).abs()).fold(0.0, f64::max);

    let c = (w.dim() + 1.0).sqrt();
    let mut sign = 1.0;
    let (mut dist_l2, mut dist_w12) = (f64::INFINITY, f64::INFINITY);
    for s in [1.0, -1.0] {
        let diff: Vec<f64> = u.iter().zip(&cos).map(|(v, k)| v - s * c * k).collect();
        let l2 = disc.inner(&diff, &diff);
        let w12 = (l2 + disc.energy(&diff)).sqrt();
        if l2.sqrt() < dist_l2 {
            dist_l2 = l2.sqrt();
            sign = s;
        }
        dist_w12 = dist_w12.min(w12);
    }
    let (window_r, window_eta) = match window {
        Some((r, eta)) => (Some(window_distance(w, u, 0.0, r)?), Some(window_distance(w, u, r - eta, r + eta)?)),
        None => (None, None),
    };
    Ok(CosineReport {
        sign,
        dist_l2,
        dist_w12,
        alpha,
        beta,
        u0_norm: green.norm_v0,
        z_norm: green.norm_z,
        reconstruction_error,
        boundary_max: green.boundary_max,
        window_r,
        window_eta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{model_density, truncated_model, Grid};
    use crate::spectral::neumann_eigs;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn zero_source_gives_zero() {
        let w = model_density(2.0, Grid::uniform(PI, 256).unwrap()).unwrap();
        let r = green_apply(&w, &vec![0.0; 257], FRAC_PI_2).unwrap();
        assert!(r.v0.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cosine_source_matches_antiderivative() {
        let g = Grid::uniform(PI, 4096).unwrap();
        let w = model_density(2.0, g.clone()).unwrap();
        let z: Vec<f64> = g.nodes().iter().map(|t| t.cos()).collect();
        let r = green_apply(&w, &z, FRAC_PI_2).unwrap();
        assert!(r.residual <= 1e-6, "{}", r.residual);
        assert_eq!(r.x0_index, 2048);
        for (t, v) in g.nodes().iter().zip(&r.v0) {
            let exact = 0.5 * ((t - FRAC_PI_2) * t.sin() + t.cos());
            assert!((v - exact).abs() < 1e-6);
        }
        assert!(r.bound_holds(1e-8));
    }

    #[test]
    fn residual_is_second_order() {
        let z = |t: f64| (3.0 * t).sin() + t * t;
        let res = |n: usize| {
            let g = Grid::uniform(PI, n).unwrap();
            let w = model_density(2.0, g.clone()).unwrap();
            let zs: Vec<f64> = g.nodes().iter().map(|&t| z(t)).collect();
            green_apply(&w, &zs, FRAC_PI_2).unwrap().residual
        };
        let ratio = res(512) / res(1024);
        assert!((2.0..=8.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn model_eigenfunction_decomposes_to_cosine() {
        let g = Grid::uniform(PI, 4096).unwrap();
        let w = model_density(3.0, g).unwrap();
        let s = neumann_eigs(&w, 1).unwrap();
        let rep = cosine_decompose(&w, &s.eigenfunctions[0], Some((0.3, 0.02))).unwrap();
        assert!(rep.alpha.abs() < 1e-6, "{}", rep.alpha);
        assert!((rep.beta - 2.0).abs() < 1e-6, "{}", rep.beta);
        assert!(rep.u0_norm < 1e-5);
        assert!(rep.reconstruction_error < 1e-8);
        assert!(rep.dist_l2 <= rep.dist_w12);
        assert_eq!(rep.sign, 1.0);
    }

    #[test]
    fn truncated_eigenfunction_reconstructs() {
        let w = truncated_model(2.0, Grid::uniform(PI - 0.01, 4096).unwrap()).unwrap();
        let s = neumann_eigs(&w, 1).unwrap();
        let rep = cosine_decompose(&w, &s.eigenfunctions[0], None).unwrap();
        assert!(rep.reconstruction_error < 1e-7);
        assert!(rep.dist_l2 <= rep.dist_w12);
    }

    #[test]
    fn window_norms_are_exact_for_linear_data() {
        let g = Grid::uniform(1.0, 16).unwrap();
        let w = WeightedInterval::from_fn(g.clone(), |_| 1.0, 0.0, 2.0).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|t| 2.0 * t).collect();
        let (l2, d2) = window_norms(&w, &f, 0.13, 0.71);
        let exact = 4.0 * (0.71f64.powi(3) - 0.13f64.powi(3)) / 3.0;
        assert!((l2 - exact).abs() < 1e-14);
        assert!((d2 - 4.0 * 0.58).abs() < 1e-14);
    }
}
