//! Deterministic constructions of ray families used as fixtures.
//!
//! The extremal families set each free quantity to a fixed fraction of the
//! largest value the globalisation estimates allow at the target deficit:
//! ray shortening and pole offsets at the `δ^{β/N}` scale, the variance of
//! `c_q` and the missing long-ray mass at their envelopes. Their empirical
//! constants therefore stay of order one along a `δ`-sweep.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pipeline::{global_deficit, Params};
use super::ray::{DensitySpec, EnergySpec, FamilySpec, FunctionSpec, RayFamily, RaySpec, SCHEMA};
use crate::error::{Error, Result};
use crate::numerics::roots::bisect_monotone;

/// A family plus companion sample files, relative to the family file.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub spec: FamilySpec,
    pub files: Vec<(String, String)>,
}

impl Fixture {
    fn plain(spec: FamilySpec) -> Self {
        Self { spec, files: Vec::new() }
    }

    /// Writes `name.json` and its companion files into `dir`.
    pub fn write(&self, dir: &Path, name: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut json = serde_json::to_string_pretty(&self.spec)?;
        json.push('\n');
        std::fs::write(dir.join(format!("{name}.json")), json)?;
        for (file, content) in &self.files {
            std::fs::write(dir.join(file), content)?;
        }
        Ok(())
    }
}

fn family(n: f64, unspanned_mass: f64, delta_pole: Option<f64>, rays: Vec<RaySpec>) -> FamilySpec {
    FamilySpec { schema: SCHEMA.into(), n, unspanned_mass, delta_pole, rays }
}

fn ray(weight: f64, d: f64, a: f64, b: f64, density: DensitySpec, u: FunctionSpec) -> RaySpec {
    RaySpec { weight, d, a: Some(a), b: Some(b), density, u, e: EnergySpec::Zero }
}

/// Model rays from pole to pole carrying `cos`: zero deficit.
pub fn rigid(n: f64, rays: usize) -> Fixture {
    let w = 1.0 / rays as f64;
    let rays = (0..rays).map(|_| ray(w, PI, 0.0, 0.0, DensitySpec::Model, FunctionSpec::Cosine { amplitude: 1.0 })).collect();
    Fixture::plain(family(n, 0.0, Some(0.0), rays))
}

/// `δ(u_q)` of a single ray, scale invariant.
fn ray_deficit(n: f64, spec: &RaySpec) -> Result<(f64, f64)> {
    let one = family(n, 0.0, None, vec![RaySpec { weight: 1.0, ..spec.clone() }]);
    let f = RayFamily::from_spec(&one, Path::new("."))?;
    let r = &f.rays[0];
    let mean = r.mean(|t| r.u(t));
    let raw = r.mean(|t| (r.u(t) - mean).powi(2));
    let ledger = global_deficit(&f.normalize()?)?;
    Ok((ledger.rays[0].delta_q.unwrap_or(0.0), raw))
}

const LONG_RAYS: usize = 8;

/// Extremal family at target deficit `delta` with the optimal `(β, γ)`.
///
/// Eight long rays carry truncated models whose shortening uses a quarter
/// of the deficit budget, amplitudes `1 ± s` with `s²` a fraction of the
/// variance envelope, and pole offsets filling the shortening. A short ray
/// (`D = 2`) and the unspanned set share the missing mass, a fraction of
/// the square root of the mass envelope, and the short ray takes another
/// quarter of the deficit. Constant orthogonal energy on the long rays
/// brings the deficit to exactly `delta`.
pub fn extremal(n: f64, delta: f64) -> Result<Fixture> {
    if !(delta > 0.0 && delta < 1e-1) {
        return Err(Error::Domain(format!("target deficit {delta} outside (0, 0.1)")));
    }
    let Params { beta, gamma } = Params::optimal(n);
    let env_mass = delta.powf(2.0 * gamma / n) + delta.powf((beta - gamma) / n) + delta.powf(1.0 - beta - gamma);
    let env_var = delta.powf(3.0 * gamma / n) + delta.powf(1.0 - beta - gamma + gamma / n) + delta.powf((beta - gamma) * (2.0 / n).min(1.0));
    let missing = 0.1 * env_mass.sqrt();
    let s = 0.3 * env_var.sqrt();
    let q_long = (1.0 - missing) / LONG_RAYS as f64;
    // Ray deficits of truncated models scale like (π − D)^N; one probe
    // fixes the constant.
    let probe = 0.1;
    let (kappa, _) = ray_deficit(n, &ray(1.0, PI - probe, 0.0, 0.0, DensitySpec::Truncated, FunctionSpec::Cosine { amplitude: 1.0 }))?;
    let kappa = kappa / probe.powf(n);
    let mut rays: Vec<RaySpec> = (0..LONG_RAYS)
        .map(|i| {
            let frac = 0.5 + 0.5 * i as f64 / (LONG_RAYS - 1) as f64;
            let eps = frac * (0.25 * delta / kappa).powf(1.0 / n);
            let amp = if i % 2 == 0 { 1.0 + s } else { 1.0 - s };
            ray(q_long, PI - eps, 0.6 * eps, 0.3 * eps, DensitySpec::Truncated, FunctionSpec::Cosine { amplitude: amp })
        })
        .collect();
    let mut short = ray(0.5 * missing, 2.0, 0.0, 0.0, DensitySpec::Truncated, FunctionSpec::Cosine { amplitude: 1.0 });
    // Short-ray amplitude so that it contributes δ/4 to Σ q δ_q c_q².
    let (delta_short, raw_short) = ray_deficit(n, &short)?;
    let long_l2: f64 = rays.iter().map(|r| ray_deficit(n, r).map(|(_, l2)| r.weight * l2)).sum::<Result<f64>>()?;
    let x = 0.25 * delta * long_l2 / (delta_short - 0.25 * delta);
    short.u = FunctionSpec::Cosine { amplitude: (x / (short.weight * raw_short)).sqrt() };
    rays.push(short);
    // Offsets plus lengths stay below π, so antipodal poles are consistent.
    let mut spec = family(n, 0.5 * missing, Some(0.0), rays);
    let ledger = global_deficit(&RayFamily::from_spec(&spec, Path::new("."))?.normalize()?)?;
    let rest = delta - ledger.delta;
    if !(rest > 0.0) {
        return Err(Error::Numerical(format!("ray deficits {} already exceed the target {delta}", ledger.delta)));
    }
    let e0 = rest / (LONG_RAYS as f64 * q_long);
    for r in spec.rays.iter_mut().take(LONG_RAYS) {
        r.e = EnergySpec::Const { value: e0 };
    }
    Ok(Fixture::plain(spec))
}

/// Model rays with `c_q ∈ {1 ± s}` and orthogonal energy `(s/r)²` on the
/// cap `[0, 2r]`, `r = 1/4`: the energy a Poincaré inequality near the pole
/// charges for the oscillation of `c_q`. Here `δ` is of order `s²`.
pub fn poincare_matched(n: f64, s: f64, tag: &str) -> Fixture {
    let r = 0.25;
    let e_level = (s / r).powi(2);
    let file = format!("{tag}-cap.csv");
    let cells = 512;
    let mut csv = String::from("t,e\n");
    for i in 0..=cells {
        let t = PI * i as f64 / cells as f64;
        let v = if t <= 2.0 * r {
            e_level
        } else if t <= 2.0 * r + PI / cells as f64 {
            e_level * (1.0 - (t - 2.0 * r) * cells as f64 / PI)
        } else {
            0.0
        };
        csv.push_str(&format!("{t:.17e},{v:.17e}\n"));
    }
    let rays = (0..LONG_RAYS)
        .map(|i| {
            let amp = if i % 2 == 0 { 1.0 + s } else { 1.0 - s };
            RaySpec {
                e: EnergySpec::Csv { path: file.clone() },
                ..ray(1.0 / LONG_RAYS as f64, PI, 0.0, 0.0, DensitySpec::Model, FunctionSpec::Cosine { amplitude: amp })
            }
        })
        .collect();
    Fixture { spec: family(n, 0.0, Some(0.0), rays), files: vec![(file, csv)] }
}

/// Perturbation `s` with `δ(cos + s sin 2·) = target` on the model ray.
fn perturbation_for(n: f64, target: f64) -> Result<f64> {
    let f = |s: f64| ray_deficit(n, &ray(1.0, PI, 0.0, 0.0, DensitySpec::Model, FunctionSpec::Perturbed { amplitude: 1.0, s })).map(|(d, _)| d);
    if target >= f(1.0)? {
        return Err(Error::Domain(format!("target deficit {target} not reachable by a sin 2t perturbation")));
    }
    Ok(bisect_monotone(|s| f(s).unwrap_or(f64::INFINITY), target, 0.0, 1.0, 1e-15))
}

/// Near-cosine model rays at deficit `delta` next to a fixed unspanned mass
/// `0.1`. Such a family cannot keep `δ` small in an actual space, and the
/// mass bound's constant grows without limit along a sweep.
pub fn unspanned_fixed(n: f64, delta: f64) -> Result<Fixture> {
    let s = perturbation_for(n, delta)?;
    let q = 0.9 / 4.0;
    let rays = (0..4).map(|_| ray(q, PI, 0.0, 0.0, DensitySpec::Model, FunctionSpec::Perturbed { amplitude: 1.0, s })).collect();
    Ok(Fixture::plain(family(n, 0.1, Some(0.0), rays)))
}

/// A rigid ray next to one ray with `δ_q = 1.25 δ^β` carrying `c²`-mass
/// `0.8 δ^{1−β}`: the excluded ray saturates Chebyshev's inequality.
/// The excluded ray keeps half the mass for every `δ`, which no space with
/// deficit `δ` allows, so the long-ray mass bound fails along a sweep.
pub fn chebyshev_tight(n: f64, delta: f64) -> Result<Fixture> {
    let Params { beta, .. } = Params::optimal(n);
    let s = perturbation_for(n, 1.25 * delta.powf(beta))?;
    let share = 0.8 * delta.powf(1.0 - beta);
    let (qr, qx) = (0.5, 0.5);
    let rigid = ray(qr, PI, 0.0, 0.0, DensitySpec::Model, FunctionSpec::Cosine { amplitude: 1.0 });
    let mut bad = ray(qx, PI, 0.0, 0.0, DensitySpec::Model, FunctionSpec::Perturbed { amplitude: 1.0, s });
    let (_, raw_r) = ray_deficit(n, &rigid)?;
    let (_, raw_x) = ray_deficit(n, &bad)?;
    // share = qx A² raw_x / (qr raw_r + qx A² raw_x).
    let amp2 = share * qr * raw_r / ((1.0 - share) * qx * raw_x);
    bad.u = FunctionSpec::Perturbed { amplitude: amp2.sqrt(), s };
    Ok(Fixture::plain(family(n, 0.0, Some(0.0), vec![rigid, bad])))
}

/// Rays from `P_N` to `P_S` at distance `π − delta_pole`: truncated,
/// stretched and generated `CD(N−1, N)` densities, no unspanned mass.
pub fn suspension(n: f64, delta_pole: f64, seed: u64) -> Fixture {
    let d = PI - delta_pole;
    let mut rays = vec![
        ray(0.3, d, 0.0, 0.0, DensitySpec::Truncated, FunctionSpec::Cosine { amplitude: 1.0 }),
        ray(0.3, d, 0.0, 0.0, DensitySpec::Scaled, FunctionSpec::Cosine { amplitude: 1.0 }),
    ];
    for k in 0..2 {
        let density = DensitySpec::Generated { seed: seed + k, pieces: 4, max_level: 0.1 * delta_pole, cells: 2048 };
        rays.push(ray(0.2, d, 0.0, 0.0, density, FunctionSpec::Cosine { amplitude: 1.0 }));
    }
    Fixture::plain(family(n, 0.0, Some(delta_pole), rays))
}

/// Extremal family with one long ray started at distance `a` from the pole.
pub fn displaced_pole(n: f64, delta: f64, a: f64) -> Result<Fixture> {
    let mut fx = extremal(n, delta)?;
    fx.spec.rays[0].a = Some(a);
    Ok(fx)
}

/// Rigid rays plus one `D = 2` truncated ray whose `c²`-share is `share`.
pub fn with_short_ray(n: f64, share: f64) -> Result<Fixture> {
    let mut fx = rigid(n, 4);
    for r in &mut fx.spec.rays {
        r.weight = 0.2;
    }
    let mut short = ray(0.2, 2.0, 0.0, 0.0, DensitySpec::Truncated, FunctionSpec::Cosine { amplitude: 1.0 });
    let (_, raw_s) = ray_deficit(n, &short)?;
    let (_, raw_r) = ray_deficit(n, &fx.spec.rays[0])?;
    let amp2 = share * 0.8 * raw_r / ((1.0 - share) * 0.2 * raw_s);
    short.u = FunctionSpec::Cosine { amplitude: amp2.sqrt() };
    fx.spec.rays.push(short);
    Ok(fx)
}

/// Seeded family of generated and truncated rays with random weights,
/// perturbations and constant orthogonal energies.
pub fn random(n: f64, seed: u64, rays: usize) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..rays).map(|_| rng.gen_range(0.5..1.5)).collect();
    let unspanned = rng.gen_range(0.0..0.05);
    let total: f64 = raw.iter().sum();
    let rays = raw
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let d = rng.gen_range(2.0..2.8);
            let density =
                if i % 2 == 0 { DensitySpec::Generated { seed: rng.gen(), pieces: 3, max_level: 0.2, cells: 1024 } } else { DensitySpec::Truncated };
            let u = FunctionSpec::Perturbed { amplitude: rng.gen_range(0.5..1.5), s: rng.gen_range(-0.3..0.3) };
            let e = EnergySpec::Const { value: rng.gen_range(0.0..0.1) };
            RaySpec { weight: w / total * (1.0 - unspanned), d, a: Some(0.0), b: Some(PI - d), density, u, e }
        })
        .collect();
    Fixture::plain(family(n, unspanned, None, rays))
}
