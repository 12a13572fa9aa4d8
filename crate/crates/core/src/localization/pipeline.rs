//! The globalisation chain on a ray family: localised deficits, long rays,
//! variance of `c_q`, mass of long rays and the final `L²` distance.

use rayon::prelude::*;
use serde::Serialize;

use super::ray::RayFamily;
use crate::error::{Error, Result};
use crate::measure::density::sin_reflected;
use crate::numerics::quad::sin_power_integral;

/// Additive slack for identities that hold exactly in exact arithmetic.
pub const EXACT_SLACK: f64 = 1e-10;

/// Slack on `δ_q ≤ δ^β` when selecting long rays, absorbing quadrature
/// rounding in rigid rays.
pub const SELECT_SLACK: f64 = 1e-12;

/// Pole offsets above `C_POLE · δ^{β/N}` are flagged.
pub const C_POLE: f64 = 4.0;

/// `(β, γ)` of the globalisation argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    pub beta: f64,
    pub gamma: f64,
}

impl Params {
    /// The optimal choice `β = 3N/(4N+2)`, `γ = N/(4N+2)`.
    pub fn optimal(n: f64) -> Self {
        Self { beta: 3.0 * n / (4.0 * n + 2.0), gamma: n / (4.0 * n + 2.0) }
    }

    fn check_variance(&self, n: f64) -> Result<()> {
        let Params { beta, gamma } = *self;
        if !(0.0 < gamma && gamma < beta && beta < 1.0 && gamma < n * (1.0 - beta) / (n - 1.0)) {
            return Err(Error::Precondition(format!("need 0 < γ < β < 1 and γ < N(1−β)/(N−1), got β = {beta}, γ = {gamma}")));
        }
        Ok(())
    }

    fn check_mass(&self) -> Result<()> {
        let Params { beta, gamma } = *self;
        if !(0.0 < beta && beta < 1.0 && 0.0 < gamma && gamma < beta.min(1.0 - beta)) {
            return Err(Error::Precondition(format!("need 0 < γ < min(β, 1−β), got β = {beta}, γ = {gamma}")));
        }
        Ok(())
    }
}

/// Per-ray integrals of a normalised family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayTerms {
    pub weight: f64,
    /// `|c_q| = ‖u_q‖_{L²(m_q)}`.
    pub c_abs: f64,
    /// `∫ |u_q'|² dm_q`.
    pub energy: f64,
    /// `∫ e_q dm_q`.
    pub orth: f64,
    /// `δ(u_q) = ∫ (|u_q'|²/c_q² − N) dm_q`, absent when `c_q = 0`.
    pub delta_q: Option<f64>,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficitLedger {
    pub n: f64,
    /// `δ = Σ q ∫(|u'|² + e) dm − N`.
    pub delta: f64,
    pub rays: Vec<RayTerms>,
    /// `Σ q δ_q c_q²`.
    pub localized: f64,
    /// `Σ q ∫ e dm`.
    pub orth_total: f64,
    /// `Σ q c_q²`.
    pub c2_total: f64,
    pub unspanned_mass: f64,
}

impl DeficitLedger {
    /// `δ ≥ Σ q δ_q c_q²`.
    pub fn localization_holds(&self) -> bool {
        self.delta >= self.localized - EXACT_SLACK
    }

    /// `Σ q ∫ e dm ≤ δ`.
    pub fn orthogonal_holds(&self) -> bool {
        self.orth_total <= self.delta + EXACT_SLACK
    }

    /// `∫ |u_q'|² ≥ N c_q²` on every ray, with index of the first failure.
    pub fn lichnerowicz_failure(&self) -> Option<usize> {
        self.rays.iter().position(|r| r.energy < self.n * r.c_abs * r.c_abs - EXACT_SLACK)
    }
}

fn require_normalized(f: &RayFamily) -> Result<()> {
    let worst_mean = f.rays.iter().map(|r| r.mean(|t| r.u(t)).abs()).fold(0.0, f64::max);
    let l2: f64 = f.rays.iter().map(|r| r.weight * r.mean(|t| r.u(t).powi(2))).sum();
    if worst_mean > 1e-9 || (l2 - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("family is not normalised: max |mean| {worst_mean:e}, Σq c² = {l2}")));
    }
    Ok(())
}

/// Localises the deficit of a normalised family.
pub fn global_deficit(f: &RayFamily) -> Result<DeficitLedger> {
    require_normalized(f)?;
    let n = f.n;
    let rays: Vec<RayTerms> = f
        .rays
        .par_iter()
        .map(|r| {
            let c2 = r.mean(|t| r.u(t).powi(2));
            let energy = r.mean(|t| r.du(t).powi(2));
            let orth = r.mean(|t| r.e(t));
            let delta_q = (c2 > 0.0).then(|| energy / c2 - n);
            RayTerms { weight: r.weight, c_abs: c2.sqrt(), energy, orth, delta_q, length: r.length }
        })
        .collect();
    let total: f64 = rays.iter().map(|r| r.weight * (r.energy + r.orth)).sum();
    let localized = rays.iter().map(|r| r.weight * r.c_abs * r.c_abs * r.delta_q.unwrap_or(0.0)).sum();
    Ok(DeficitLedger {
        n,
        delta: total - n,
        localized,
        orth_total: rays.iter().map(|r| r.weight * r.orth).sum(),
        c2_total: rays.iter().map(|r| r.weight * r.c_abs * r.c_abs).sum(),
        unspanned_mass: f.unspanned_mass,
        rays,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LongRays {
    pub indices: Vec<usize>,
    /// `δ^β`, the selection threshold.
    pub threshold: f64,
    /// `Σ_{Q∖Q_ℓ} q c²`.
    pub outside_c2: f64,
    /// `Σ_{Q_ℓ} q c²`.
    pub inside_c2: f64,
    /// `δ^{1−β}`.
    pub chebyshev_bound: f64,
    /// `𝔮(Q_ℓ)`.
    pub mass: f64,
    /// `max_{Q_ℓ} (π − D_q)^N / δ^β`.
    pub length_ratio: f64,
}

impl LongRays {
    pub fn chebyshev_holds(&self) -> bool {
        self.outside_c2 <= self.chebyshev_bound + EXACT_SLACK && self.inside_c2 >= 1.0 - self.chebyshev_bound - EXACT_SLACK
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

/// `Q_ℓ = {q : δ_q ≤ δ^β, c_q ≠ 0}` with the Chebyshev certificates.
///
/// A long ray violating `(π − D)^N ≤ C_N δ^β` cannot carry a `CD(N−1, N)`
/// density and is reported as an error.
pub fn select_long_rays(ledger: &DeficitLedger, beta: f64, c_n: f64) -> Result<LongRays> {
    if !(0.0 < beta && beta < 1.0) {
        return Err(Error::Precondition(format!("β = {beta} outside (0, 1)")));
    }
    let n = ledger.n;
    let delta = ledger.delta.max(0.0);
    let threshold = delta.powf(beta);
    let indices: Vec<usize> = ledger
        .rays
        .iter()
        .enumerate()
        .filter(|(_, r)| r.c_abs > 0.0 && r.delta_q.is_some_and(|d| d <= threshold + SELECT_SLACK))
        .map(|(i, _)| i)
        .collect();
    let mut inside = 0.0;
    let mut outside = 0.0;
    let mut mass = 0.0;
    let mut length_ratio = 0.0f64;
    for (i, r) in ledger.rays.iter().enumerate() {
        let qc2 = r.weight * r.c_abs * r.c_abs;
        if indices.binary_search(&i).is_ok() {
            inside += qc2;
            mass += r.weight;
            let short = (std::f64::consts::PI - r.length).max(0.0).powf(n);
            // Rigid rays need no slack: a shortened ray has a positive deficit.
            if short > c_n * threshold + SELECT_SLACK {
                return Err(Error::NonCdRay {
                    ray: i, reason: format!("long ray with (π − D)^N = {short:e} above C_N δ^β = {:e}", c_n * threshold)
                });
            }
            if threshold > 0.0 {
                length_ratio = length_ratio.max(short / threshold);
            }
        } else {
            outside += qc2;
        }
    }
    Ok(LongRays { indices, threshold, outside_c2: outside, inside_c2: inside, chebyshev_bound: delta.powf(1.0 - beta), mass, length_ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BadSet {
    /// `∫_{X∖R(Q_ℓ)} |∇u|² dm`.
    pub energy: f64,
    /// `(N + 1) δ^{1−β}`.
    pub bound: f64,
}

impl BadSet {
    pub fn holds(&self) -> bool {
        self.energy <= self.bound + EXACT_SLACK
    }
}

/// Energy off the long rays. The unspanned set carries no gradient.
pub fn bad_set_energy(ledger: &DeficitLedger, long: &LongRays, beta: f64) -> BadSet {
    let energy = ledger.rays.iter().enumerate().filter(|(i, _)| !long.contains(*i)).map(|(_, r)| r.weight * (r.energy + r.orth)).sum();
    BadSet { energy, bound: (ledger.n + 1.0) * ledger.delta.max(0.0).powf(1.0 - beta) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayCosine {
    pub index: usize,
    /// Signed `c_q`.
    pub c: f64,
    /// `min_± ‖u_q/|c_q| ∓ √(N+1) cos‖_{L²(m_q)}`.
    pub dist: f64,
    /// `dist / δ^{β min{1/2, 1/N}}`.
    pub constant: f64,
}

/// Fixes the sign of `c_q` on each long ray by the closer of `±√(N+1) cos`.
pub fn per_ray_cosine(f: &RayFamily, ledger: &DeficitLedger, long: &LongRays, beta: f64) -> Result<Vec<RayCosine>> {
    if long.indices.is_empty() {
        return Err(Error::Precondition("no long rays".into()));
    }
    let n = f.n;
    let root = (n + 1.0).sqrt();
    let scale = ledger.delta.max(0.0).powf(beta * (0.5f64).min(1.0 / n));
    Ok(long
        .indices
        .par_iter()
        .map(|&i| {
            let r = &f.rays[i];
            let c = ledger.rays[i].c_abs;
            let plus = r.mean(|t| (r.u(t) / c - root * t.cos()).powi(2));
            let minus = r.mean(|t| (r.u(t) / c + root * t.cos()).powi(2));
            let (sign, d2) = if plus <= minus { (1.0, plus) } else { (-1.0, minus) };
            let dist = d2.max(0.0).sqrt();
            RayCosine { index: i, c: sign * c, dist, constant: if dist == 0.0 { 0.0 } else { dist / scale } }
        })
        .collect())
}

/// A quantity compared with its power-of-`δ` envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound {
    pub lhs: f64,
    pub envelope: f64,
    /// `lhs / envelope`: the empirical constant.
    pub constant: f64,
}

impl Bound {
    fn new(lhs: f64, envelope: f64) -> Self {
        let constant = if lhs == 0.0 { 0.0 } else { lhs / envelope };
        Self { lhs, envelope, constant }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Variance {
    /// `c̄ = ⨍_{Q_ℓ} c_q`.
    pub cbar: f64,
    /// `Σ_{Q_ℓ} q |c_q − c̄|² / 𝔮(Q_ℓ)` against
    /// `δ^{3γ/N} + δ^{1−β−γ+γ/N} + δ^{(β−γ) min{2/N, 1}}`.
    pub bound: Bound,
}

pub fn variance_bound(ledger: &DeficitLedger, long: &LongRays, signed: &[RayCosine], params: Params) -> Result<Variance> {
    let n = ledger.n;
    params.check_variance(n)?;
    let Params { beta, gamma } = params;
    let q = long.mass;
    let cbar = signed.iter().map(|s| ledger.rays[s.index].weight * s.c).sum::<f64>() / q;
    let var = signed.iter().map(|s| ledger.rays[s.index].weight * (s.c - cbar).powi(2)).sum::<f64>() / q;
    let d = ledger.delta.max(0.0);
    let env = d.powf(3.0 * gamma / n) + d.powf(1.0 - beta - gamma + gamma / n) + d.powf((beta - gamma) * (2.0 / n).min(1.0));
    Ok(Variance { cbar, bound: Bound::new(var, env) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LongMass {
    /// `(1 − 𝔮(Q_ℓ))²` against `δ^{2γ/N} + δ^{(β−γ)/N} + δ^{1−β−γ}`.
    pub bound: Bound,
    /// `m(X∖𝒯)` against `δ^{γ/N} + δ^{(β−γ)/2N} + δ^{(1−β−γ)/2}`.
    pub unspanned: Bound,
}

pub fn long_mass_bound(ledger: &DeficitLedger, long: &LongRays, params: Params) -> Result<LongMass> {
    params.check_mass()?;
    let n = ledger.n;
    let Params { beta, gamma } = params;
    let d = ledger.delta.max(0.0);
    let env = d.powf(2.0 * gamma / n) + d.powf((beta - gamma) / n) + d.powf(1.0 - beta - gamma);
    let env_half = d.powf(gamma / n) + d.powf((beta - gamma) / (2.0 * n)) + d.powf((1.0 - beta - gamma) / 2.0);
    // 𝔮(Q_ℓ) is computed as a sum; the unspanned mass makes up the rest.
    let missing = (1.0 - long.mass).max(0.0);
    Ok(LongMass { bound: Bound::new(missing * missing, env), unspanned: Bound::new(ledger.unspanned_mass, env_half) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Assembly {
    /// `‖u − √(N+1) cos d(P_N, ·)‖_{L²(m)}` after the global sign choice.
    pub final_dist: f64,
    /// Global sign applied to `u`.
    pub sign: f64,
    /// `η = 1/(8N+4)`.
    pub eta: f64,
    /// `final_dist / δ^η`.
    pub bound: Bound,
}

/// `Σ q ∫ |u_q(t) − √(N+1) cos(t + a_q)|² dm_q + m(X∖𝒯)`, the last term
/// being `(N+1) ∫ cos² dm_N` per unit of unspanned mass.
pub fn assemble_main(f: &RayFamily, ledger: &DeficitLedger) -> Result<Assembly> {
    let offsets = f
        .rays
        .iter()
        .enumerate()
        .map(|(i, r)| r.a.ok_or_else(|| Error::Precondition(format!("ray {i} has no start offset"))))
        .collect::<Result<Vec<_>>>()?;
    let root = (f.n + 1.0).sqrt();
    let terms: Vec<[f64; 2]> = f
        .rays
        .par_iter()
        .zip(&offsets)
        .map(|(r, &a)| {
            let p = r.mean(|t| (r.u(t) - root * (t + a).cos()).powi(2));
            let m = r.mean(|t| (r.u(t) + root * (t + a).cos()).powi(2));
            [r.weight * p, r.weight * m]
        })
        .collect();
    let plus: f64 = terms.iter().map(|t| t[0]).sum::<f64>() + f.unspanned_mass;
    let minus: f64 = terms.iter().map(|t| t[1]).sum::<f64>() + f.unspanned_mass;
    let (sign, sq) = if plus <= minus { (1.0, plus) } else { (-1.0, minus) };
    let eta = 1.0 / (8.0 * f.n + 4.0);
    let final_dist = sq.max(0.0).sqrt();
    Ok(Assembly { final_dist, sign, eta, bound: Bound::new(final_dist, ledger.delta.max(0.0).powf(eta)) })
}

/// Pole offsets of a suspension-like family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuspensionGeometry {
    /// `π − d(P_N, P_S)`.
    pub delta_pole: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl SuspensionGeometry {
    pub fn from_family(f: &RayFamily) -> Result<Self> {
        let delta_pole = f.delta_pole.ok_or_else(|| Error::Precondition("family has no pole distance".into()))?;
        if !(0.0..std::f64::consts::PI).contains(&delta_pole) {
            return Err(Error::Domain(format!("δ_pole = {delta_pole} outside [0, π)")));
        }
        let pick = |get: fn(&super::Ray) -> Option<f64>, what: &str| {
            f.rays
                .iter()
                .enumerate()
                .map(|(i, r)| get(r).ok_or_else(|| Error::Precondition(format!("ray {i} has no {what} offset"))))
                .collect::<Result<Vec<_>>>()
        };
        Ok(Self { delta_pole, a: pick(|r| r.a, "start")?, b: pick(|r| r.b, "end")? })
    }
}

/// `m_N([0, r])` for the model probability measure.
fn model_mass(n: f64, r: f64, omega: f64) -> Result<f64> {
    let r = r.clamp(0.0, std::f64::consts::PI);
    Ok(sin_power_integral(n - 1.0, 0.0, r)? / omega)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeReport {
    pub r: f64,
    /// `m(B_r(P_N))`.
    pub ball: f64,
    /// `m_N([0, r])`.
    pub lower: f64,
    /// `m_N([0, r]) + m_N([r, r + δ_pole])`.
    pub upper: f64,
}

/// Relative slack on the volume comparison, absorbing quadrature error.
pub const VOLUME_SLACK: f64 = 1e-10;

/// `m(B_r(P_N)) = m(X∖𝒯) m_N([0, r]) + Σ q m_q([0, r − a_q])` against the
/// two-sided comparison with the model. A violation means some ray is not
/// a `CD(N−1, N)` input consistent with the pole distance.
pub fn volume_control(f: &RayFamily, geo: &SuspensionGeometry, r: f64) -> Result<VolumeReport> {
    let n = f.n;
    let dp = geo.delta_pole;
    if !(r > 0.0 && r < std::f64::consts::PI - dp) {
        return Err(Error::Domain(format!("radius {r} outside (0, π − δ_pole)")));
    }
    let omega = sin_power_integral(n - 1.0, 0.0, std::f64::consts::PI)?;
    let lower = model_mass(n, r, omega)?;
    let upper = model_mass(n, r + dp, omega)?;
    let parts: Vec<f64> = f.rays.iter().zip(&geo.a).map(|(ray, &a)| ray.weight * ray.mass_to((r - a).max(0.0))).collect();
    let ball = f.unspanned_mass * lower + parts.iter().sum::<f64>();
    let report = VolumeReport { r, ball, lower, upper };
    let slack = VOLUME_SLACK * ball.max(lower);
    if ball < lower - slack || ball > upper + slack {
        // Blame the ray deviating most from the model in the violated direction.
        let ratio = |i: usize| f.rays[i].mass_to((r - geo.a[i]).max(0.0)) / lower;
        let idx = (0..f.rays.len()).max_by(|&i, &j| {
            let (x, y) = (ratio(i), ratio(j));
            if ball < lower {
                y.total_cmp(&x)
            } else {
                x.total_cmp(&y)
            }
        });
        return Err(Error::NonCdRay { ray: idx.unwrap_or(0), reason: format!("ball mass {ball} outside [{lower}, {upper}] at r = {r}") });
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleReport {
    pub max_a: f64,
    pub max_b: f64,
    /// `δ^{β/N}`.
    pub scale: f64,
    /// Some offset exceeds `C_POLE δ^{β/N}`.
    pub flagged: bool,
}

/// Largest start and end offsets over the long rays, compared with the
/// `δ^{β/N}` scaling.
pub fn pole_concentration(geo: &SuspensionGeometry, long: &LongRays, delta: f64, beta: f64, n: f64) -> PoleReport {
    let max_a = long.indices.iter().map(|&i| geo.a[i]).fold(0.0, f64::max);
    let max_b = long.indices.iter().map(|&i| geo.b[i]).fold(0.0, f64::max);
    let scale = delta.max(0.0).powf(beta / n);
    PoleReport { max_a, max_b, scale, flagged: max_a.max(max_b) > C_POLE * scale }
}

/// `(N+1) ∫ cos² dm_N = 1`, evaluated by quadrature as a self-check of the
/// unspanned-mass convention.
pub fn unspanned_cos_mass(n: f64) -> Result<f64> {
    let omega = sin_power_integral(n - 1.0, 0.0, std::f64::consts::PI)?;
    let f = |t: f64| t.cos().powi(2) * sin_reflected(t).powf(n - 1.0);
    Ok((n + 1.0) * crate::numerics::integrate_adaptive(f, 0.0, std::f64::consts::PI, Default::default())? / omega)
}
