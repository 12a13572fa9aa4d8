//! Inequality diagnostics built on the spectral solver.

use serde::Serialize;

use super::Discretization;
use crate::error::{Error, Result};
use crate::isoperimetry::{bbg_c2_minus_one, c_n};
use crate::measure::WeightedInterval;
use crate::numerics::quad::gauss5;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LichnerowiczReport {
    /// `λ₁ − N C²_{N,D}`.
    pub margin: f64,
    pub c2: f64,
    /// `C_N (π − D)^N`.
    pub diameter_lhs: f64,
    /// `λ₁ − N`.
    pub diameter_rhs: f64,
}

impl LichnerowiczReport {
    pub fn diameter_holds(&self) -> bool {
        self.diameter_lhs <= self.diameter_rhs
    }
}

/// Compares `λ₁` with the improved gap `N C²_{N,D}` and evaluates
/// `C_N (π − D)^N ≤ λ₁ − N`.
pub fn lichnerowicz_check(w: &WeightedInterval, lambda1: f64) -> Result<LichnerowiczReport> {
    let n = w.dim();
    let d = w.length();
    let c2m1 = bbg_c2_minus_one(n, d)?;
    let gap = lambda1 - n;
    Ok(LichnerowiczReport { margin: gap - n * c2m1, c2: 1.0 + c2m1, diameter_lhs: c_n(n)? * w.epsilon().powf(n), diameter_rhs: gap })
}

/// Relative density threshold below which second differences are ignored.
pub const BOCHNER_WINDOW: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BochnerReport {
    /// `‖u'' + u‖_{L²(m)}` over the window `h ≥ 10⁻⁶ max h`.
    pub norm: f64,
    /// `‖u'' + u‖ / (λ − N)^{1/2}`.
    pub ratio: f64,
    /// `‖u'' + u‖² / (λ − N)`.
    pub squared_ratio: f64,
    /// `λ ∉ [N, 2N]`.
    pub out_of_range: bool,
}

pub fn bochner_check(w: &WeightedInterval, lambda: f64, u: &[f64]) -> Result<BochnerReport> {
    let g = w.grid();
    let n = g.nodes().len();
    if u.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: u.len() });
    }
    let dim = w.dim();
    let disc = Discretization::new(w)?;
    let hmax = w.h().iter().fold(0.0f64, |a, b| a.max(*b));
    let mut sq = 0.0;
    for i in 1..n - 1 {
        if w.h()[i] < BOCHNER_WINDOW * hmax {
            continue;
        }
        let (hl, hr) = (g.dx(i - 1), g.dx(i));
        let second = 2.0 * (hl * u[i + 1] - (hl + hr) * u[i] + hr * u[i - 1]) / (hl * hr * (hl + hr));
        sq += disc.mass[i] * (second + u[i]).powi(2);
    }
    let gap = lambda - dim;
    Ok(BochnerReport {
        norm: sq.sqrt(),
        ratio: sq.sqrt() / gap.max(0.0).sqrt(),
        squared_ratio: sq / gap.max(0.0),
        out_of_range: !(lambda >= dim && lambda <= 2.0 * dim),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PoincareReport {
    /// `⨍_{B_r} |u − ⨍_{B_r} u|^p dm`.
    pub lhs: f64,
    /// `r ⨍_{B_{10r}} |u'|^p dm`.
    pub rhs: f64,
    pub ratio: f64,
}

/// Integral over `[a, b]` of `φ(u_PL(t)) h_PL(t)` for the piecewise-linear
/// interpolants, splitting each cell where `u` crosses `kink`.
fn integrate_pl<F: Fn(f64, f64) -> f64>(w: &WeightedInterval, u: &[f64], a: f64, b: f64, kink: f64, phi: F) -> f64 {
    let g = w.grid();
    let h = w.h();
    let (ia, _) = g.locate(a);
    let (ib, _) = g.locate(b);
    let mut total = 0.0;
    for i in ia..=ib.min(g.cells() - 1) {
        let (t0, t1) = (g.t(i), g.t(i + 1));
        let (lo, hi) = (t0.max(a), t1.min(b));
        if hi <= lo {
            continue;
        }
        let dx = t1 - t0;
        let slope = (u[i + 1] - u[i]) / dx;
        let uf = |t: f64| u[i] + slope * (t - t0);
        let hf = |t: f64| h[i] + (h[i + 1] - h[i]) * (t - t0) / dx;
        let f = |t: f64| phi(uf(t), slope) * hf(t);
        let cross = if slope != 0.0 { t0 + (kink - u[i]) / slope } else { f64::NAN };
        if cross > lo && cross < hi {
            total += gauss5(f, lo, cross) + gauss5(f, cross, hi);
        } else {
            total += gauss5(f, lo, hi);
        }
    }
    total
}

/// Ratio of the two sides of the weak local Poincaré inequality
/// `⨍_{B_r(x)} |u − ⨍ u|^p ≤ C r ⨍_{B_{10r}(x)} |u'|^p` for `p ∈ {1, 2}`,
/// balls clipped to `[0, D]`.
pub fn poincare_check(w: &WeightedInterval, u: &[f64], x: f64, r: f64, p: u32) -> Result<PoincareReport> {
    if !(p == 1 || p == 2) {
        return Err(Error::Domain(format!("exponent p = {p} not in {{1, 2}}")));
    }
    if u.len() != w.h().len() {
        return Err(Error::LengthMismatch { expected: w.h().len(), got: u.len() });
    }
    let d = w.length();
    if !(r > 0.0) || !(0.0..=d).contains(&x) {
        return Err(Error::EmptyBall { x, r });
    }
    let ball = |rad: f64| ((x - rad).max(0.0), (x + rad).min(d));
    let (a, b) = ball(r);
    let mass = w.mass_between(a, b);
    if !(mass > 0.0) {
        return Err(Error::EmptyBall { x, r });
    }
    let pw = |v: f64| if p == 1 { v.abs() } else { v * v };
    let mean = integrate_pl(w, u, a, b, f64::NAN, |v, _| v) / mass;
    let lhs = integrate_pl(w, u, a, b, mean, |v, _| pw(v - mean)) / mass;
    let (a10, b10) = ball(10.0 * r);
    let mass10 = w.mass_between(a10, b10);
    let rhs = r * integrate_pl(w, u, a10, b10, f64::NAN, |_, s| pw(s)) / mass10;
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(PoincareReport { lhs, rhs, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{generate_cd_density, model_density, truncated_model, Excess, Grid, StartData};
    use crate::spectral::neumann_eigs;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn lichnerowicz_on_model_and_truncated() {
        let w = model_density(3.0, Grid::uniform(PI, 4096).unwrap()).unwrap();
        let s = neumann_eigs(&w, 1).unwrap();
        let rep = lichnerowicz_check(&w, s.lambda1()).unwrap();
        assert!(rep.margin.abs() < 1e-5);
        let w = truncated_model(2.0, Grid::uniform(3.0, 4096).unwrap()).unwrap();
        let s = neumann_eigs(&w, 1).unwrap();
        let rep = lichnerowicz_check(&w, s.lambda1()).unwrap();
        assert!(rep.margin >= 0.0, "{rep:?}");
        assert!(rep.diameter_holds());
    }

    #[test]
    fn lichnerowicz_on_generated_densities() {
        let g = Grid::uniform(2.9, 2048).unwrap();
        for seed in 0..20 {
            let ex = Excess::Random { pieces: 4, max_level: 1.0 };
            let gen = generate_cd_density(2.5, seed, &g, &ex, StartData::default()).unwrap();
            let s = neumann_eigs(&gen.interval, 1).unwrap();
            let rep = lichnerowicz_check(&gen.interval, s.lambda1()).unwrap();
            assert!(rep.margin >= -1e-6, "seed {seed}: {rep:?}");
        }
    }

    #[test]
    fn bochner_on_model_vanishes() {
        let g = Grid::uniform(PI, 4096).unwrap();
        let w = model_density(3.0, g).unwrap();
        let s = neumann_eigs(&w, 1).unwrap();
        let rep = bochner_check(&w, s.lambda1(), &s.eigenfunctions[0]).unwrap();
        assert!(rep.norm < 1e-4, "{rep:?}");
        assert!(bochner_check(&w, 7.0, &s.eigenfunctions[0]).unwrap().out_of_range);
    }

    #[test]
    fn poincare_examples() {
        let g = Grid::uniform(PI, 4096).unwrap();
        let w = model_density(2.0, g.clone()).unwrap();
        let flat = vec![1.5; g.nodes().len()];
        assert!(poincare_check(&w, &flat, 1.0, 0.2, 2).unwrap().lhs < 1e-28);
        let u: Vec<f64> = g.nodes().iter().map(|t| t.cos()).collect();
        let rep = poincare_check(&w, &u, FRAC_PI_2, 0.3, 2).unwrap();
        // Oracle: closed forms on the model with h = sin/2.
        let (a, b) = (FRAC_PI_2 - 0.3, FRAC_PI_2 + 0.3);
        let m = 200_000;
        let mid = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| {
            let dt = (hi - lo) / m as f64;
            (0..m).map(|i| f(lo + (i as f64 + 0.5) * dt)).sum::<f64>() * dt
        };
        let mass = mid(a, b, &|t| t.sin() / 2.0);
        let mean = mid(a, b, &|t| t.cos() * t.sin() / 2.0) / mass;
        let lhs = mid(a, b, &|t| (t.cos() - mean).powi(2) * t.sin() / 2.0) / mass;
        let rhs = 0.3 * mid(0.0, PI, &|t| t.sin().powi(3) / 2.0) / mid(0.0, PI, &|t| t.sin() / 2.0);
        assert!((rep.ratio - lhs / rhs).abs() < 1e-6, "{} vs {}", rep.ratio, lhs / rhs);
        assert!(poincare_check(&w, &u, 1.0, 0.0, 2).is_err());
        let p1 = poincare_check(&w, &u, 1.0, 0.1, 1).unwrap();
        assert!(p1.ratio.is_finite() && p1.ratio > 0.0);
    }

    #[test]
    fn poincare_bounded_under_radius_halving() {
        let g = Grid::uniform(PI, 4096).unwrap();
        let w = model_density(3.0, g.clone()).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|t| t.cos() + 0.3 * (2.0 * t).sin()).collect();
        let mut prev = f64::INFINITY;
        for k in 0..6 {
            let r = 0.2 / 2f64.powi(k);
            let ratio = poincare_check(&w, &u, 1.1, r, 2).unwrap().ratio;
            assert!(ratio < 2.0 * prev.min(1.0));
            prev = ratio;
        }
    }
}
