use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Smallest admissible number of nodes.
pub const MIN_NODES: usize = 16;

/// Strictly increasing nodes `0 = t_0 < … < t_n = D` on an interval of
/// length `0 < D ≤ π`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    uniform: bool,
}

impl Grid {
    /// Uniform grid with `n` cells. The last node is set to `d` exactly.
    pub fn uniform(d: f64, n: usize) -> Result<Self> {
        check_length(d)?;
        if n < 16 {
            return Err(Error::Grid(format!("need at least 16 cells, got {n}")));
        }
        let dx = d / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|i| i as f64 * dx).collect();
        nodes[n] = d;
        Ok(Self { nodes, uniform: true })
    }

    /// Grid from explicit nodes (e.g. a density file).
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < MIN_NODES {
            return Err(Error::Grid(format!("need at least {MIN_NODES} nodes, got {}", nodes.len())));
        }
        if nodes[0] != 0.0 {
            return Err(Error::Grid(format!("first node must be 0, got {}", nodes[0])));
        }
        if let Some(w) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Grid(format!("nodes not strictly increasing at index {}", w + 1)));
        }
        check_length(*nodes.last().unwrap())?;
        let n = nodes.len() - 1;
        let dx = nodes[n] / n as f64;
        let uniform = nodes.iter().enumerate().all(|(i, &t)| (t - i as f64 * dx).abs() <= 1e-12 * nodes[n]);
        Ok(Self { nodes, uniform })
    }

    /// Interval length `D`.
    pub fn length(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// `π − D`.
    pub fn epsilon(&self) -> f64 {
        (PI - self.length()).max(0.0)
    }

    /// Number of cells `n` (there are `n + 1` nodes).
    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn t(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Width of cell `i`, i.e. `t_{i+1} − t_i`.
    pub fn dx(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Uniform spacing, or a precondition error on non-uniform grids.
    pub fn spacing(&self) -> Result<f64> {
        if self.uniform {
            Ok(self.length() / self.cells() as f64)
        } else {
            Err(Error::Precondition("operation requires a uniform grid".into()))
        }
    }

    /// Uniform grid of the same length with half the cells.
    pub fn coarsened(&self) -> Result<Self> {
        Self::uniform(self.length(), self.cells() / 2)
    }

    /// Cell index `i` and local coordinate `s ∈ [0,1]` with
    /// `x = t_i + s (t_{i+1} − t_i)`; `x` is clamped to `[0, D]`.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.cells();
        let x = x.clamp(0.0, self.length());
        let i = match self.nodes.binary_search_by(|t| t.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(n - 1),
            Err(i) => (i - 1).min(n - 1),
        };
        let s = (x - self.nodes[i]) / self.dx(i);
        (i, s.clamp(0.0, 1.0))
    }

    /// Piecewise-linear interpolation of node values at `x`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let (i, s) = self.locate(x);
        (1.0 - s) * values[i] + s * values[i + 1]
    }

    /// Trapezoid weights `w_i` so that `Σ w_i f_i ≈ ∫ f dt`.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let n = self.cells();
        let mut w = vec![0.0; n + 1];
        for i in 0..n {
            let half = 0.5 * self.dx(i);
            w[i] += half;
            w[i + 1] += half;
        }
        w
    }
}

fn check_length(d: f64) -> Result<()> {
    if !(d > 0.0) || d > PI * (1.0 + 1e-14) {
        return Err(Error::Grid(format!("interval length must lie in (0, π], got {d}")));
    }
    Ok(())
}
