use std::io::Read;

use crate::error::{Error, Result};
use crate::measure::Grid;
use crate::numerics::quad::sin_power_integral;

/// Tolerance on the total mass of a probability density.
pub const MASS_TOL: f64 = 1e-6;

/// A one-dimensional metric measure space `([0,D], |·|, h dt)` with
/// curvature-dimension parameters `(K, N)`. Between nodes `h` is
/// interpolated linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedInterval {
    grid: Grid,
    h: Vec<f64>,
    k: f64,
    n: f64,
    total_mass: f64,
}

/// Quadrature rule for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rule {
    #[default]
    Trapezoid,
    Simpson,
}

impl WeightedInterval {
    pub fn new(grid: Grid, h: Vec<f64>, k: f64, n: f64) -> Result<Self> {
        if h.len() != grid.nodes().len() {
            return Err(Error::LengthMismatch { expected: grid.nodes().len(), got: h.len() });
        }
        if !(n > 1.0) || !n.is_finite() || !k.is_finite() {
            return Err(Error::Domain(format!("need finite K and N > 1, got K = {k}, N = {n}")));
        }
        if let Some(i) = h.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain(format!("density sample {i} is negative or not finite: {}", h[i])));
        }
        let total_mass = grid.trapezoid_weights().iter().zip(&h).map(|(w, v)| w * v).sum();
        Ok(Self { grid, h, k, n, total_mass })
    }

    /// Samples `f` at the nodes.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: Grid, f: F, k: f64, n: f64) -> Result<Self> {
        let h = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(grid, h, k, n)
    }

    /// Rescaled copy with total mass one.
    pub fn normalized(&self) -> Result<Self> {
        if !(self.total_mass > 0.0) {
            return Err(Error::Normalization { mass: self.total_mass });
        }
        let h = self.h.iter().map(|v| v / self.total_mass).collect();
        Self::new(self.grid.clone(), h, self.k, self.n)
    }

    pub fn with_curvature(&self, k: f64) -> Self {
        Self { k, ..self.clone() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn curvature(&self) -> f64 {
        self.k
    }

    pub fn dim(&self) -> f64 {
        self.n
    }

    /// `∫ h dt` of the piecewise-linear density.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn length(&self) -> f64 {
        self.grid.length()
    }

    /// `ε = π − D`.
    pub fn epsilon(&self) -> f64 {
        self.grid.epsilon()
    }

    pub fn density_at(&self, x: f64) -> f64 {
        self.grid.interpolate(&self.h, x)
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass - 1.0).abs() <= MASS_TOL
    }

    pub fn require_probability(&self) -> Result<()> {
        if self.is_probability() {
            Ok(())
        } else {
            Err(Error::Normalization { mass: self.total_mass })
        }
    }

    /// Exact integrals of the piecewise-linear density against the hat
    /// functions of the nodes (lumped masses). They sum to the total mass and
    /// are positive at an endpoint where `h` vanishes but its neighbour does
    /// not.
    pub fn node_masses(&self) -> Vec<f64> {
        let n = self.grid.cells();
        let mut m = vec![0.0; n + 1];
        for i in 0..n {
            let dx = self.grid.dx(i);
            m[i] += dx * (2.0 * self.h[i] + self.h[i + 1]) / 6.0;
            m[i + 1] += dx * (self.h[i] + 2.0 * self.h[i + 1]) / 6.0;
        }
        m
    }

    /// Mass `∫_a^b h dt` of the piecewise-linear density (`0 ≤ a ≤ b ≤ D`).
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        let d = self.length();
        let (a, b) = (a.clamp(0.0, d), b.clamp(0.0, d));
        if b <= a {
            return 0.0;
        }
        let (ia, sa) = self.grid.locate(a);
        let (ib, sb) = self.grid.locate(b);
        let seg = |i: usize, s0: f64, s1: f64| {
            let dx = self.grid.dx(i);
            let h0 = self.h[i];
            let h1 = self.h[i + 1];
            let v0 = h0 + s0 * (h1 - h0);
            let v1 = h0 + s1 * (h1 - h0);
            0.5 * (v0 + v1) * (s1 - s0) * dx
        };
        if ia == ib {
            return seg(ia, sa, sb);
        }
        let mut total = seg(ia, sa, 1.0);
        for i in ia + 1..ib {
            total += seg(i, 0.0, 1.0);
        }
        total + seg(ib, 0.0, sb)
    }

    /// Index of the largest sample; ties go to the smaller `t`.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.h.iter().enumerate() {
            if v > self.h[best] {
                best = i;
            }
        }
        best
    }
}

/// `sin t` on `[0, π]` evaluated as `sin(min(t, π − t))`, so that it
/// vanishes exactly at `t = π`.
pub fn sin_reflected(t: f64) -> f64 {
    t.min(std::f64::consts::PI - t).sin().max(0.0)
}

/// Normalising constant `ω_N = ∫_0^π sin^{N−1}`.
pub fn omega(n: f64) -> Result<f64> {
    sin_power_integral(n - 1.0, 0.0, std::f64::consts::PI)
}

/// Model density `h_N = sin^{N−1}/ω_N` sampled on `grid`, tagged with
/// `K = N − 1`. On a grid shorter than `π` the samples are not renormalised.
pub fn model_density(n: f64, grid: Grid) -> Result<WeightedInterval> {
    if !(n > 1.0) {
        return Err(Error::Domain(format!("dimension N = {n} must exceed 1")));
    }
    let w = omega(n)?;
    WeightedInterval::from_fn(grid, |t| sin_reflected(t).powf(n - 1.0) / w, n - 1.0, n)
}

/// Model density restricted to `[0, D]` and renormalised to mass one.
pub fn truncated_model(n: f64, grid: Grid) -> Result<WeightedInterval> {
    model_density(n, grid)?.normalized()
}

/// The model density stretched onto `[0, D]`: `h(t) = (π/D) h_N(πt/D)`,
/// renormalised on the grid. It is a `CD(N−1, N)` density whose distance to
/// `h_N` is of exact order `π − D`.
pub fn scaled_model(n: f64, grid: Grid) -> Result<WeightedInterval> {
    let d = grid.length();
    let s = std::f64::consts::PI / d;
    WeightedInterval::from_fn(grid, |t| sin_reflected(s * t).powf(n - 1.0), n - 1.0, n)?.normalized()
}

/// `∫ f h dt` for node samples `f`. Simpson needs a uniform grid with an
/// even number of cells.
pub fn integrate(w: &WeightedInterval, f: &[f64], rule: Rule) -> Result<f64> {
    let g = w.grid();
    if f.len() != g.nodes().len() {
        return Err(Error::LengthMismatch { expected: g.nodes().len(), got: f.len() });
    }
    match rule {
        Rule::Trapezoid => Ok(g.trapezoid_weights().iter().zip(f).zip(w.h()).map(|((a, b), c)| a * b * c).sum()),
        Rule::Simpson => {
            let dx = g.spacing()?;
            let n = g.cells();
            if !n.is_multiple_of(2) {
                return Err(Error::Precondition("Simpson's rule needs an even number of cells".into()));
            }
            let s: f64 = f
                .iter()
                .zip(w.h())
                .enumerate()
                .map(|(i, (a, b))| {
                    let c = if i == 0 || i == n {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    c * a * b
                })
                .sum();
            Ok(s * dx / 3.0)
        }
    }
}

/// Parses a `t,h` density table.
pub fn parse_density_csv<R: Read>(reader: R, k: f64, n: f64) -> Result<WeightedInterval> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "h" {
        return Err(Error::Parse(format!("expected header `t,h`, got `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut ts = Vec::new();
    let mut hs = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("row {}: {e}", row + 1)));
        let t = parse(&rec[0])?;
        let h = parse(&rec[1])?;
        if !(h >= 0.0) || !h.is_finite() {
            return Err(Error::Parse(format!("row {}: density must be non-negative, got {h}", row + 1)));
        }
        ts.push(t);
        hs.push(h);
    }
    WeightedInterval::new(Grid::from_nodes(ts)?, hs, k, n)
}

/// Writes a `t,h` density table.
pub fn write_density_csv<W: std::io::Write>(w: &WeightedInterval, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["t", "h"])?;
    for (t, h) in w.grid().nodes().iter().zip(w.h()) {
        wtr.write_record([format!("{t:e}"), format!("{h:e}")])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn omega_closed_forms() {
        assert!((omega(2.0).unwrap() - 2.0).abs() < 1e-13);
        assert!((omega(3.0).unwrap() - PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn omega_matches_dense_riemann_sum() {
        let n = 1_000_000;
        let dx = PI / n as f64;
        let riemann: f64 = (0..n).map(|i| ((i as f64 + 0.5) * dx).sin().powf(1.5)).sum::<f64>() * dx;
        assert!((omega(2.5).unwrap() - riemann).abs() < 1e-9);
    }

    #[test]
    fn model_density_peak() {
        let w = model_density(2.0, Grid::uniform(PI, 4096).unwrap()).unwrap();
        assert!((w.density_at(PI / 2.0) - 0.5).abs() < 1e-12);
        assert!((w.total_mass() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn integrate_examples() {
        let g = Grid::uniform(PI, 4096).unwrap();
        let w = model_density(3.0, g.clone()).unwrap();
        let cos: Vec<f64> = g.nodes().iter().map(|t| t.cos()).collect();
        let cos2: Vec<f64> = cos.iter().map(|c| c * c).collect();
        assert!(integrate(&w, &cos, Rule::Trapezoid).unwrap().abs() < 1e-10);
        assert!((integrate(&w, &cos2, Rule::Trapezoid).unwrap() - 0.25).abs() < 1e-10);
        assert!((integrate(&w, &cos2, Rule::Simpson).unwrap() - 0.25).abs() < 1e-10);
        let p = model_density(2.5, g.clone()).unwrap().normalized().unwrap();
        let ones = vec![1.0; g.nodes().len()];
        assert!((integrate(&p, &ones, Rule::Trapezoid).unwrap() - 1.0).abs() < 1e-10);
        assert!(integrate(&p, &ones[1..], Rule::Trapezoid).is_err());
    }

    #[test]
    fn node_masses_sum_to_total() {
        let w = model_density(2.5, Grid::uniform(PI, 64).unwrap()).unwrap();
        let m = w.node_masses();
        assert!((m.iter().sum::<f64>() - w.total_mass()).abs() < 1e-14);
        assert!(m[0] > 0.0);
        assert!((w.mass_between(0.0, PI) - w.total_mass()).abs() < 1e-14);
        let split = w.mass_between(0.0, 1.234) + w.mass_between(1.234, PI);
        assert!((split - w.total_mass()).abs() < 1e-14);
    }

    #[test]
    fn csv_round_trip_and_rejections() {
        let w = model_density(3.0, Grid::uniform(PI, 32).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_density_csv(&w, &mut buf).unwrap();
        let back = parse_density_csv(buf.as_slice(), 2.0, 3.0).unwrap();
        assert_eq!(back.h(), w.h());
        assert_eq!(back.grid().nodes(), w.grid().nodes());

        let mut bad = String::from("t,h\n");
        for i in 0..20 {
            bad.push_str(&format!("{},{}\n", i as f64 * 0.1, if i == 7 { -1.0 } else { 1.0 }));
        }
        assert!(matches!(parse_density_csv(bad.as_bytes(), 0.0, 2.0), Err(Error::Parse(_))));
        assert!(parse_density_csv("x,y\n0,1\n".as_bytes(), 0.0, 2.0).is_err());
        assert!(parse_density_csv("t,h\n0,1\n0.1,1\n".as_bytes(), 0.0, 2.0).is_err());
    }
}
