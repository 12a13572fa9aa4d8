//! Neumann spectral problems on weighted intervals.
//!
//! `−(h u')' = λ h u` is discretised with piecewise-linear elements: the
//! conductance of cell `i` is the exact cell average of `h` divided by the
//! cell width, and the mass of node `i` is the integral of `h` against its
//! hat function (mass lumping). Natural Neumann conditions need no ghost
//! values, and no quantity ever divides by `h` at a node, so densities that
//! vanish at the endpoints are handled directly. After the diagonal
//! similarity `M^{-1/2} K M^{-1/2}` the problem is a symmetric tridiagonal
//! eigenproblem.

mod checks;
mod green;

pub use checks::{bochner_check, lichnerowicz_check, poincare_check, BochnerReport, LichnerowiczReport, PoincareReport, BOCHNER_WINDOW};
pub use green::{cosine_decompose, green_apply, window_distance, CosineReport, GreenResult, WindowReport};

use crate::error::{Error, Result};
use crate::measure::WeightedInterval;
use crate::numerics::SymTridiag;

/// Discrete measure and energy of a weighted interval, normalised to total
/// mass one.
#[derive(Debug, Clone)]
pub struct Discretization {
    /// Lumped node masses, summing to one.
    pub mass: Vec<f64>,
    /// Cell conductances `mean_cell(h) / dx`, scaled like `mass`.
    pub conductance: Vec<f64>,
    /// Cell widths.
    pub dx: Vec<f64>,
}

impl Discretization {
    pub fn new(w: &WeightedInterval) -> Result<Self> {
        let total = w.total_mass();
        if !(total > 0.0) {
            return Err(Error::Normalization { mass: total });
        }
        let g = w.grid();
        let h = w.h();
        let dx: Vec<f64> = (0..g.cells()).map(|i| g.dx(i)).collect();
        let conductance: Vec<f64> = (0..g.cells()).map(|i| 0.5 * (h[i] + h[i + 1]) / dx[i] / total).collect();
        let mass: Vec<f64> = w.node_masses().iter().map(|m| m / total).collect();
        Ok(Self { mass, conductance, dx })
    }

    pub fn mean(&self, u: &[f64]) -> f64 {
        self.mass.iter().zip(u).map(|(m, v)| m * v).sum()
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.mass.iter().zip(u).zip(v).map(|((m, a), b)| m * a * b).sum()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }

    /// `∫ |u'|² dm` for the piecewise-linear interpolant of `u`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        self.conductance.iter().enumerate().map(|(i, c)| c * (u[i + 1] - u[i]).powi(2)).sum()
    }

    /// Recentres to zero mean and rescales to unit `L²` norm.
    pub fn normalize(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.mass.len() {
            return Err(Error::LengthMismatch { expected: self.mass.len(), got: u.len() });
        }
        let mean = self.mean(u);
        let centred: Vec<f64> = u.iter().map(|v| v - mean).collect();
        let norm = self.norm(&centred);
        let scale = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !(norm > 1e-12 * scale) || norm == 0.0 {
            return Err(Error::ConstantFunction);
        }
        Ok(centred.into_iter().map(|v| v / norm).collect())
    }

    /// `(K u)_i − λ (M u)_i`, divided by the dual cell width.
    fn strong_residual(&self, u: &[f64], lambda: f64) -> f64 {
        let n = self.mass.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut ku = 0.0;
            let mut width = 0.0;
            if i > 0 {
                ku += self.conductance[i - 1] * (u[i] - u[i - 1]);
                width += 0.5 * self.dx[i - 1];
            }
            if i + 1 < n {
                ku += self.conductance[i] * (u[i] - u[i + 1]);
                width += 0.5 * self.dx[i];
            }
            worst = worst.max((ku - lambda * self.mass[i] * u[i]).abs() / width);
        }
        worst
    }

    fn check_connected(&self) -> Result<()> {
        if let Some(cell) = self.conductance.iter().position(|c| !(*c > 0.0)) {
            return Err(Error::Disconnected { cell });
        }
        Ok(())
    }
}

/// Lowest Neumann eigenpairs of a weighted interval.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    /// `λ_1 ≤ … ≤ λ_k`, each the Rayleigh quotient of its eigenvector.
    pub eigenvalues: Vec<f64>,
    /// Node samples with zero mean, unit `L²(m)` norm and positive value at
    /// `t = 0`.
    pub eigenfunctions: Vec<Vec<f64>>,
    /// The discarded eigenvalue of the constants.
    pub lambda0: f64,
    /// Largest strong residual `|(h u')' + λ h u|` over all returned pairs.
    pub residual: f64,
    /// `|λ_i(n) − λ_i(n/2)|`, when the grid can be halved.
    pub error_bar: Option<Vec<f64>>,
    /// `λ_i(n) + (λ_i(n) − λ_i(n/2))/3`: second-order Richardson values.
    pub extrapolated: Option<Vec<f64>>,
}

impl SpectralResult {
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Best available estimate of `λ_1`: the Richardson value when present.
    pub fn lambda1_refined(&self) -> f64 {
        self.extrapolated.as_ref().map_or(self.eigenvalues[0], |e| e[0])
    }
}

struct RawSpectrum {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    residual: f64,
}

fn solve(w: &WeightedInterval, count: usize) -> Result<RawSpectrum> {
    let disc = Discretization::new(w)?;
    disc.check_connected()?;
    let n = disc.mass.len();
    let mut diag = vec![0.0; n];
    for (i, c) in disc.conductance.iter().enumerate() {
        diag[i] += c;
        diag[i + 1] += c;
    }
    let root: Vec<f64> = disc.mass.iter().map(|m| m.sqrt()).collect();
    let diag: Vec<f64> = diag.iter().zip(&disc.mass).map(|(d, m)| d / m).collect();
    let off: Vec<f64> = disc.conductance.iter().enumerate().map(|(i, c)| -c / (root[i] * root[i + 1])).collect();
    let eig = SymTridiag::new(diag, off)?.lowest(count)?;
    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    let mut residual = 0.0f64;
    for (k, y) in eig.vectors.iter().enumerate() {
        let raw: Vec<f64> = y.iter().zip(&root).map(|(a, r)| a / r).collect();
        let u = if k == 0 {
            let norm = disc.norm(&raw);
            raw.iter().map(|v| v / norm).collect::<Vec<_>>()
        } else {
            disc.normalize(&raw)?
        };
        let lambda = disc.energy(&u) / disc.inner(&u, &u);
        let sign = if u[0] < 0.0 { -1.0 } else { 1.0 };
        let u: Vec<f64> = u.into_iter().map(|v| sign * v).collect();
        if k > 0 {
            residual = residual.max(disc.strong_residual(&u, lambda));
        }
        values.push(lambda);
        vectors.push(u);
    }
    Ok(RawSpectrum { values, vectors, residual })
}

/// The `k` lowest non-zero Neumann eigenpairs. When the grid has an even
/// number of at least 32 cells the problem is re-solved on every other node
/// to provide an error bar and a Richardson-extrapolated value.
pub fn neumann_eigs(w: &WeightedInterval, k: usize) -> Result<SpectralResult> {
    if k == 0 {
        return Err(Error::Domain("need at least one eigenpair".into()));
    }
    let fine = solve(w, k + 1)?;
    let cells = w.grid().cells();
    let (error_bar, extrapolated) = if cells.is_multiple_of(2) && cells >= 32 {
        let coarse = solve(&subsample(w)?, k + 1)?;
        let bars = (1..=k).map(|i| (fine.values[i] - coarse.values[i]).abs()).collect();
        let ext = (1..=k).map(|i| fine.values[i] + (fine.values[i] - coarse.values[i]) / 3.0).collect();
        (Some(bars), Some(ext))
    } else {
        (None, None)
    };
    let mut vectors = fine.vectors;
    let lambda0 = fine.values[0];
    vectors.remove(0);
    Ok(SpectralResult { eigenvalues: fine.values[1..].to_vec(), eigenfunctions: vectors, lambda0, residual: fine.residual, error_bar, extrapolated })
}

/// Same density sampled on every other node.
pub fn subsample(w: &WeightedInterval) -> Result<WeightedInterval> {
    let nodes: Vec<f64> = w.grid().nodes().iter().step_by(2).copied().collect();
    let h: Vec<f64> = w.h().iter().step_by(2).copied().collect();
    let grid = crate::measure::Grid::from_nodes(nodes)?;
    WeightedInterval::new(grid, h, w.curvature(), w.dim())
}

/// `∫ |u'|² dm` after recentring `u` to zero mean and unit `L²(m)` norm.
pub fn rayleigh(w: &WeightedInterval, u: &[f64]) -> Result<f64> {
    let disc = Discretization::new(w)?;
    let u = disc.normalize(u)?;
    Ok(disc.energy(&u))
}

/// `δ(u) = ∫ |u'|² dm − N` for the normalised `u`.
pub fn deficit(w: &WeightedInterval, u: &[f64], n: f64) -> Result<f64> {
    Ok(rayleigh(w, u)? - n)
}
