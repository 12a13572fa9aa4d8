//! Seeded generator of `CD(N−1, N)` densities.
//!
//! `w = h^{1/(N−1)}` solves `w'' = −(1 + a(t)) w` for a piecewise-constant
//! excess `a ≥ 0`, which makes `(N−1) w''/w ≤ −(N−1)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measure::{Grid, WeightedInterval};

/// Piecewise-constant curvature excess `a(t) ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Excess {
    Zero,
    /// `levels[j]` on `[breaks[j], breaks[j+1])`, with `breaks[0] = 0`
    /// implied and the last piece extending to `D`.
    Steps {
        breaks: Vec<f64>,
        levels: Vec<f64>,
    },
    /// `pieces` levels drawn uniformly from `[0, max_level]` on random
    /// breakpoints, driven by the seed.
    Random {
        pieces: usize,
        max_level: f64,
    },
}

/// Initial data `w(0)`, `w'(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartData {
    pub value: f64,
    pub slope: f64,
}

impl Default for StartData {
    fn default() -> Self {
        Self { value: 0.0, slope: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub interval: WeightedInterval,
    /// Set when `w` vanished inside the requested interval and the length was
    /// reduced to this value.
    pub shrunk_to: Option<f64>,
    /// Realised excess as `(start, level)` pieces.
    pub excess: Vec<(f64, f64)>,
}

/// Safety factor applied to the first zero of `w` when shrinking.
const SHRINK: f64 = 0.98;

pub fn generate_cd_density(n: f64, seed: u64, grid: &Grid, excess: &Excess, start: StartData) -> Result<Generated> {
    if !(n > 1.0) {
        return Err(Error::Domain(format!("dimension N = {n} must exceed 1")));
    }
    if grid.length() >= std::f64::consts::PI {
        return Err(Error::Precondition("generator needs D < π".into()));
    }
    if !(start.value >= 0.0) || (start.value == 0.0 && !(start.slope > 0.0)) {
        return Err(Error::Domain("start data must make w positive just after 0".into()));
    }
    let pieces = realise(excess, seed, grid.length())?;
    let mut grid = grid.clone();
    let mut shrunk_to = None;
    for _ in 0..64 {
        match integrate_w(&grid, &pieces, start) {
            Ok(w) => {
                let h: Vec<f64> = w.iter().map(|v| v.max(0.0).powf(n - 1.0)).collect();
                let interval = WeightedInterval::new(grid, h, n - 1.0, n)?.normalized()?;
                return Ok(Generated { interval, shrunk_to, excess: pieces });
            }
            Err(zero) => {
                let d = SHRINK * zero;
                shrunk_to = Some(d);
                grid = Grid::uniform(d, grid.cells())?;
            }
        }
    }
    Err(Error::Numerical("generator failed to find a positive solution".into()))
}

fn realise(excess: &Excess, seed: u64, d: f64) -> Result<Vec<(f64, f64)>> {
    match excess {
        Excess::Zero => Ok(vec![(0.0, 0.0)]),
        Excess::Steps { breaks, levels } => {
            if levels.is_empty() || breaks.len() + 1 != levels.len() {
                return Err(Error::Domain("need one more level than interior breakpoints".into()));
            }
            if levels.iter().any(|a| !(*a >= 0.0)) {
                return Err(Error::Domain("excess levels must be non-negative".into()));
            }
            let mut out = vec![(0.0, levels[0])];
            out.extend(breaks.iter().copied().zip(levels[1..].iter().copied()));
            Ok(out)
        }
        Excess::Random { pieces, max_level } => {
            if *pieces == 0 || !(*max_level >= 0.0) {
                return Err(Error::Domain("random excess needs pieces ≥ 1 and max_level ≥ 0".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cuts: Vec<f64> = (1..*pieces).map(|_| rng.gen::<f64>() * d).collect();
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut out = vec![(0.0, rng.gen::<f64>() * max_level)];
            for c in cuts {
                out.push((c, rng.gen::<f64>() * max_level));
            }
            Ok(out)
        }
    }
}

fn level_at(pieces: &[(f64, f64)], t: f64) -> f64 {
    pieces.iter().rev().find(|(s, _)| *s <= t).map_or(pieces[0].1, |p| p.1)
}

/// RK4 on the grid with the excess frozen per cell (breakpoints snap to the
/// node on their left). Returns the first zero of `w` on failure.
fn integrate_w(grid: &Grid, pieces: &[(f64, f64)], start: StartData) -> std::result::Result<Vec<f64>, f64> {
    let n = grid.cells();
    let mut w = Vec::with_capacity(n + 1);
    let (mut y, mut p) = (start.value, start.slope);
    w.push(y);
    for i in 0..n {
        let dt = grid.dx(i);
        let c = 1.0 + level_at(pieces, grid.t(i));
        let f = |y: f64, p: f64| (p, -c * y);
        let (k1y, k1p) = f(y, p);
        let (k2y, k2p) = f(y + 0.5 * dt * k1y, p + 0.5 * dt * k1p);
        let (k3y, k3p) = f(y + 0.5 * dt * k2y, p + 0.5 * dt * k2p);
        let (k4y, k4p) = f(y + dt * k3y, p + dt * k3p);
        let ny = y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        let np = p + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if !(ny > 0.0) {
            let t0 = grid.t(i);
            return Err(t0 + dt * y / (y - ny));
        }
        y = ny;
        p = np;
        w.push(y);
    }
    Ok(w)
}
