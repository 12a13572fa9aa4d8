//! Rays of a synthetic disintegration and the `rayfam-v1` input format.

use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::density::sin_reflected;
use crate::measure::{cd_check, generate_cd_density, parse_density_csv, Excess, Grid, StartData, WeightedInterval, INEQ_SLACK};
use crate::numerics::quad::gauss5;

pub const SCHEMA: &str = "rayfam-v1";

/// Uniform quadrature cells per ray for closed-form profiles.
const QUAD_CELLS: usize = 512;
/// Geometric refinement levels of the two end cells, where `sin^{N−1}` is
/// not smooth for fractional `N`.
const END_LEVELS: usize = 24;
/// Cells of the grid on which each density is sampled for `cd_check`.
const CD_CELLS: usize = 256;
const CD_PAIRS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DensitySpec {
    /// `sin^{N−1}` on `[0, π]`.
    Model,
    /// `sin^{N−1}` restricted to `[0, D]`.
    Truncated,
    /// `sin^{N−1}(πt/D)`.
    Scaled,
    /// Output of the seeded generator on `[0, D]`.
    Generated {
        seed: u64,
        pieces: usize,
        max_level: f64,
        #[serde(default = "default_cells")]
        cells: usize,
    },
    /// `t,h` samples, path relative to the family file.
    Csv { path: String },
}

fn default_cells() -> usize {
    2048
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionSpec {
    /// `amplitude · cos t`.
    Cosine {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude · (cos t + s sin 2t)`.
    Perturbed {
        #[serde(default = "one")]
        amplitude: f64,
        s: f64,
    },
    /// `t,u` samples.
    Csv { path: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnergySpec {
    Zero,
    Const {
        value: f64,
    },
    /// `t,e` samples.
    Csv {
        path: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaySpec {
    pub weight: f64,
    #[serde(rename = "D")]
    pub d: f64,
    /// Distance of the ray's start from the pole `P_N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Distance of the ray's end from the pole `P_S`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub density: DensitySpec,
    pub u: FunctionSpec,
    pub e: EnergySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub schema: String,
    #[serde(rename = "N")]
    pub n: f64,
    pub unspanned_mass: f64,
    /// `π − d(P_N, P_S)` for suspension families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_pole: Option<f64>,
    pub rays: Vec<RaySpec>,
}

/// Piecewise-linear interpolant of samples.
#[derive(Debug, Clone, PartialEq)]
struct Samples {
    t: Vec<f64>,
    v: Vec<f64>,
}

impl Samples {
    fn new(t: Vec<f64>, v: Vec<f64>, length: f64, what: &str) -> Result<Self> {
        if t.len() != v.len() || t.len() < 2 {
            return Err(Error::Parse(format!("{what}: need at least two samples")));
        }
        if t.windows(2).any(|p| !(p[1] > p[0])) || t[0] != 0.0 || (t[t.len() - 1] - length).abs() > 1e-9 * length.max(1.0) {
            return Err(Error::Parse(format!("{what}: samples must increase from 0 to D = {length}")));
        }
        Ok(Self { t, v })
    }

    fn cell(&self, x: f64) -> usize {
        self.t.partition_point(|s| *s <= x).clamp(1, self.t.len() - 1) - 1
    }

    fn value(&self, x: f64) -> f64 {
        let i = self.cell(x);
        let s = (x - self.t[i]) / (self.t[i + 1] - self.t[i]);
        self.v[i] + s * (self.v[i + 1] - self.v[i])
    }

    fn slope(&self, x: f64) -> f64 {
        let i = self.cell(x);
        (self.v[i + 1] - self.v[i]) / (self.t[i + 1] - self.t[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Density {
    /// `sin^{N−1}(stretch · t) / norm`.
    Sine {
        power: f64,
        stretch: f64,
        norm: f64,
    },
    Sampled {
        s: Samples,
        norm: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Function {
    Perturbed { amplitude: f64, s: f64 },
    Sampled(Samples),
}

#[derive(Debug, Clone, PartialEq)]
enum Energy {
    Const(f64),
    Sampled(Samples),
}

/// One ray `(X_q, m_q)` with its weight, function and orthogonal energy.
/// The ray measure `m_q` is a probability measure on `[0, D]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub weight: f64,
    pub length: f64,
    pub a: Option<f64>,
    pub b: Option<f64>,
    density: Density,
    u: Function,
    e: Energy,
    /// The function on the ray is `scale · raw(t) − shift`.
    scale: f64,
    shift: f64,
    breaks: Vec<f64>,
}

impl Ray {
    /// Density of `m_q` at `t`.
    pub fn h(&self, t: f64) -> f64 {
        match &self.density {
            Density::Sine { power, stretch, norm } => sin_reflected(stretch * t).powf(*power) / norm,
            Density::Sampled { s, norm } => s.value(t) / norm,
        }
    }

    pub fn u(&self, t: f64) -> f64 {
        let raw = match &self.u {
            Function::Perturbed { amplitude, s } => amplitude * (t.cos() + s * (2.0 * t).sin()),
            Function::Sampled(s) => s.value(t),
        };
        self.scale * raw - self.shift
    }

    pub fn du(&self, t: f64) -> f64 {
        let raw = match &self.u {
            Function::Perturbed { amplitude, s } => amplitude * (-t.sin() + 2.0 * s * (2.0 * t).cos()),
            Function::Sampled(s) => s.slope(t),
        };
        self.scale * raw
    }

    /// Orthogonal energy density `|∇u|² − |u_q'|² ≥ 0`.
    pub fn e(&self, t: f64) -> f64 {
        match &self.e {
            Energy::Const(v) => *v,
            Energy::Sampled(s) => s.value(t),
        }
    }

    /// `∫_lo^hi f(t) h(t) dt` by composite Gauss rules on the ray's
    /// quadrature breakpoints.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = (lo.max(0.0), hi.min(self.length));
        if hi <= lo {
            return 0.0;
        }
        let start = self.breaks.partition_point(|b| *b <= lo);
        let mut total = 0.0;
        let mut left = lo;
        for &b in self.breaks[start..].iter() {
            let right = b.min(hi);
            if right > left {
                total += gauss5(|t| f(t) * self.h(t), left, right);
            }
            left = right;
            if b >= hi {
                break;
            }
        }
        total
    }

    pub fn mean(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.integrate(f, 0.0, self.length)
    }

    /// `m_q([0, s])`.
    pub fn mass_to(&self, s: f64) -> f64 {
        self.integrate(|_| 1.0, 0.0, s)
    }

    pub(crate) fn rescale(&mut self, k: f64) {
        self.scale *= k;
        self.shift *= k;
    }

    pub(crate) fn recentre(&mut self, mean: f64) {
        self.shift += mean;
    }

    /// The density sampled on a uniform grid as a weighted interval with
    /// `K = N − 1`.
    pub fn sampled_density(&self, n: f64, cells: usize) -> Result<WeightedInterval> {
        let grid = Grid::uniform(self.length, cells)?;
        WeightedInterval::from_fn(grid, |t| self.h(t), n - 1.0, n)
    }

    /// Replaces the orthogonal energy by a constant.
    pub fn set_energy(&mut self, value: f64) {
        self.e = Energy::Const(value);
    }
}

/// Quadrature breakpoints: uniform cells with geometrically refined end
/// cells, merged with sample nodes.
fn breakpoints(length: f64, extra: &[&[f64]]) -> Vec<f64> {
    let dx = length / QUAD_CELLS as f64;
    let mut b: Vec<f64> = (1..=QUAD_CELLS).map(|i| i as f64 * dx).collect();
    for l in 1..=END_LEVELS {
        let s = dx / 2f64.powi(l as i32);
        b.push(s);
        b.push(length - s);
    }
    for e in extra {
        b.extend(e.iter().copied().filter(|t| *t > 0.0 && *t < length));
    }
    b.sort_by(f64::total_cmp);
    b.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * length);
    b
}

fn read_samples(base: &Path, path: &str, column: &str, length: f64) -> Result<Samples> {
    let full = base.join(path);
    let mut rdr = csv::Reader::from_path(&full)?;
    let headers = rdr.headers()?.clone();
    let (Some(it), Some(iv)) = (headers.iter().position(|h| h == "t"), headers.iter().position(|h| h == column)) else {
        return Err(Error::Parse(format!("{}: expected columns t,{column}", full.display())));
    };
    let (mut t, mut v) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        let parse =
            |i: usize| rec.get(i).and_then(|s| s.trim().parse::<f64>().ok()).ok_or_else(|| Error::Parse(format!("{}: bad number", full.display())));
        t.push(parse(it)?);
        v.push(parse(iv)?);
    }
    Samples::new(t, v, length, &full.display().to_string())
}

impl Ray {
    fn from_spec(spec: &RaySpec, n: f64, base: &Path) -> Result<Self> {
        let d = spec.d;
        if !(d > 0.0 && d <= PI + 1e-12) {
            return Err(Error::Domain(format!("ray length D = {d} outside (0, π]")));
        }
        if !(spec.weight > 0.0) {
            return Err(Error::Domain(format!("ray weight {} must be positive", spec.weight)));
        }
        for off in [spec.a, spec.b].into_iter().flatten() {
            if !(off >= 0.0) {
                return Err(Error::Domain(format!("pole offset {off} must be non-negative")));
            }
        }
        let power = n - 1.0;
        let mut extra: Vec<Vec<f64>> = Vec::new();
        let density = match &spec.density {
            DensitySpec::Model | DensitySpec::Truncated => {
                if matches!(spec.density, DensitySpec::Model) && (d - PI).abs() > 1e-12 {
                    return Err(Error::Domain(format!("model ray needs D = π, got {d}")));
                }
                Density::Sine { power, stretch: 1.0, norm: 1.0 }
            }
            DensitySpec::Scaled => Density::Sine { power, stretch: PI / d, norm: 1.0 },
            DensitySpec::Generated { seed, pieces, max_level, cells } => {
                let grid = Grid::uniform(d, *cells)?;
                let g = generate_cd_density(n, *seed, &grid, &Excess::Random { pieces: *pieces, max_level: *max_level }, StartData::default())?;
                if let Some(len) = g.shrunk_to {
                    return Err(Error::Precondition(format!("generated density vanishes before D = {d} (shrunk to {len})")));
                }
                let s = Samples::new(g.interval.grid().nodes().to_vec(), g.interval.h().to_vec(), d, "generated density")?;
                extra.push(s.t.clone());
                Density::Sampled { s, norm: 1.0 }
            }
            DensitySpec::Csv { path } => {
                let full = base.join(path);
                let w = parse_density_csv(std::fs::File::open(&full)?, n - 1.0, n)?;
                let s = Samples::new(w.grid().nodes().to_vec(), w.h().to_vec(), d, &full.display().to_string())?;
                extra.push(s.t.clone());
                Density::Sampled { s, norm: 1.0 }
            }
        };
        let u = match &spec.u {
            FunctionSpec::Cosine { amplitude } => Function::Perturbed { amplitude: *amplitude, s: 0.0 },
            FunctionSpec::Perturbed { amplitude, s } => Function::Perturbed { amplitude: *amplitude, s: *s },
            FunctionSpec::Csv { path } => {
                let s = read_samples(base, path, "u", d)?;
                extra.push(s.t.clone());
                Function::Sampled(s)
            }
        };
        let e = match &spec.e {
            EnergySpec::Zero => Energy::Const(0.0),
            EnergySpec::Const { value } => Energy::Const(*value),
            EnergySpec::Csv { path } => {
                let s = read_samples(base, path, "e", d)?;
                extra.push(s.t.clone());
                Energy::Sampled(s)
            }
        };
        let e_neg = match &e {
            Energy::Const(v) => *v < 0.0,
            Energy::Sampled(s) => s.v.iter().any(|v| *v < 0.0),
        };
        if e_neg {
            return Err(Error::Domain("orthogonal energy must be non-negative".into()));
        }
        let refs: Vec<&[f64]> = extra.iter().map(|v| v.as_slice()).collect();
        let mut ray =
            Ray { weight: spec.weight, length: d, a: spec.a, b: spec.b, density, u, e, scale: 1.0, shift: 0.0, breaks: breakpoints(d, &refs) };
        let mass = ray.mass_to(d);
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Normalization { mass });
        }
        match &mut ray.density {
            Density::Sine { norm, .. } | Density::Sampled { norm, .. } => *norm = mass,
        }
        Ok(ray)
    }
}

/// A discrete disintegration: weighted rays plus mass `m(X∖𝒯)` on which
/// `u ≡ 0`. The unspanned part is distributed like the model measure
/// around the pole `P_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayFamily {
    pub n: f64,
    pub unspanned_mass: f64,
    pub delta_pole: Option<f64>,
    pub rays: Vec<Ray>,
}

/// Tolerance on `Σ q_i + m(X∖𝒯) = 1` for input families.
pub const MASS_SLACK: f64 = 1e-9;

impl RayFamily {
    /// Builds and validates a family; every density must pass `cd_check`
    /// with `K = N − 1`. Relative `csv` paths resolve against `base`.
    pub fn from_spec(spec: &FamilySpec, base: &Path) -> Result<Self> {
        if spec.schema != SCHEMA {
            return Err(Error::Parse(format!("unknown schema {:?}, expected {SCHEMA}", spec.schema)));
        }
        let n = spec.n;
        if !(n > 1.0) {
            return Err(Error::Domain(format!("dimension N = {n} must exceed 1")));
        }
        if spec.rays.is_empty() || spec.rays.len() > 10_000 {
            return Err(Error::Domain(format!("family needs 1 to 10000 rays, got {}", spec.rays.len())));
        }
        if !(spec.unspanned_mass >= 0.0) {
            return Err(Error::Domain("unspanned mass must be non-negative".into()));
        }
        let total = spec.rays.iter().map(|r| r.weight).sum::<f64>() + spec.unspanned_mass;
        if (total - 1.0).abs() > MASS_SLACK {
            return Err(Error::Normalization { mass: total });
        }
        let rays = spec.rays.par_iter().map(|r| Ray::from_spec(r, n, base)).collect::<Result<Vec<_>>>()?;
        rays.par_iter().enumerate().try_for_each(|(i, r)| {
            let w = r.sampled_density(n, CD_CELLS)?;
            match cd_check(&w, CD_PAIRS, INEQ_SLACK) {
                v if v.passed() => Ok(()),
                v => Err(Error::NonCdRay { ray: i, reason: format!("{v:?}") }),
            }
        })?;
        Ok(RayFamily { n, unspanned_mass: spec.unspanned_mass, delta_pole: spec.delta_pole, rays })
    }

    /// Reads a `rayfam-v1` JSON file.
    pub fn load(path: &Path) -> Result<Self> {
        let spec: FamilySpec = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
        Self::from_spec(&spec, path.parent().unwrap_or(Path::new(".")))
    }

    /// `Σ q_i m_i(X_i) + m(X∖𝒯)`.
    pub fn total_mass(&self) -> f64 {
        self.rays.iter().map(|r| r.weight * r.mass_to(r.length)).sum::<f64>() + self.unspanned_mass
    }

    /// Recentres every ray function to zero mean and rescales globally to
    /// `Σ q_i ∫ u_i² dm_i = 1`.
    pub fn normalize(&self) -> Result<RayFamily> {
        let mut out = self.clone();
        out.rays.par_iter_mut().for_each(|r| {
            let m = r.mean(|t| r.u(t));
            r.recentre(m);
        });
        let l2: f64 = out.rays.par_iter().map(|r| r.weight * r.mean(|t| r.u(t).powi(2))).collect::<Vec<_>>().iter().sum();
        if !(l2 > 0.0) {
            return Err(Error::ConstantFunction);
        }
        let k = 1.0 / l2.sqrt();
        for r in &mut out.rays {
            r.rescale(k);
        }
        Ok(out)
    }
}
