//! The model isoperimetric profile `I_{N,D}`, the Berard–Besson–Gallot
//! constant `C_{N,D}` and its behaviour as `D → π`.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::quad::{cos_power_integral, sin_power_integral};
use crate::numerics::roots::golden_section_min;

/// Points of the coarse scan over `b` before golden-section refinement.
pub const PROFILE_SCAN: usize = 129;
/// Golden-section tolerance on `b`.
pub const PROFILE_B_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct ProfileQuery {
    pub n: f64,
    pub d: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfileResult {
    pub value: f64,
    pub argmin_b: f64,
    pub r_at_argmin: f64,
    pub iterations: usize,
}

fn check_params(n: f64, d: f64) -> Result<()> {
    if !(n > 1.0) || !n.is_finite() {
        return Err(Error::Domain(format!("dimension N = {n} must exceed 1")));
    }
    if !(d > 0.0) || d > PI {
        return Err(Error::Domain(format!("diameter D = {d} outside (0, π]")));
    }
    Ok(())
}

fn check_b(b: f64, d: f64) -> Result<()> {
    if !(b >= 0.0) || b > PI - d + 1e-14 {
        return Err(Error::Domain(format!("b = {b} outside [0, π − D]")));
    }
    Ok(())
}

/// The `R ∈ [b, b+D]` with `∫_b^R sin^{N−1} = v ∫_b^{b+D} sin^{N−1}`.
pub fn solve_r(n: f64, b: f64, v: f64, d: f64) -> Result<f64> {
    check_params(n, d)?;
    check_b(b, d)?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("volume fraction v = {v} outside [0, 1]")));
    }
    let hi_end = (b + d).min(PI);
    if v == 0.0 {
        return Ok(b);
    }
    if v == 1.0 {
        return Ok(hi_end);
    }
    let p = n - 1.0;
    let rhs = v * sin_power_integral(p, b, hi_end)?;
    let f = |r: f64| sin_power_integral(p, b, r).map(|x| x - rhs);
    let (mut lo, mut hi) = (b, hi_end);
    // Bisection brings R into the basin of Newton's method.
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..50 {
        let res = f(r)?;
        if res.abs() <= 1e-12 * rhs {
            break;
        }
        let slope = r.sin().max(0.0).powf(p);
        let next = r - res / slope;
        r = if slope > 0.0 && next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if f(r)? < 0.0 {
            lo = r;
        } else {
            hi = r;
        }
    }
    Ok(r)
}

/// `g(b,v) = sin^{N−1}(R(b,v)) / ∫_b^{b+D} sin^{N−1}`.
pub fn g_eval(n: f64, b: f64, v: f64, d: f64) -> Result<f64> {
    let r = solve_r(n, b, v, d)?;
    let denom = sin_power_integral(n - 1.0, b, (b + d).min(PI))?;
    Ok(r.sin().max(0.0).powf(n - 1.0) / denom)
}

/// `I_{N,D}(v) = inf_{b ∈ [0, π−D]} g(b, v)`.
pub fn profile(q: ProfileQuery) -> Result<ProfileResult> {
    check_params(q.n, q.d)?;
    if !(q.v > 0.0 && q.v < 1.0) {
        return Err(Error::Domain(format!("volume fraction v = {} outside (0, 1)", q.v)));
    }
    let span = (PI - q.d).max(0.0);
    if span == 0.0 {
        let r = solve_r(q.n, 0.0, q.v, q.d)?;
        return Ok(ProfileResult { value: g_eval(q.n, 0.0, q.v, q.d)?, argmin_b: 0.0, r_at_argmin: r, iterations: 1 });
    }
    let bs: Vec<f64> = (0..PROFILE_SCAN).map(|i| span * i as f64 / (PROFILE_SCAN - 1) as f64).collect();
    let mut values = Vec::with_capacity(PROFILE_SCAN);
    for &b in &bs {
        values.push(g_eval(q.n, b, q.v, q.d)?);
    }
    let best = (0..PROFILE_SCAN).fold(0, |k, i| if values[i] < values[k] { i } else { k });
    let lo = bs[best.saturating_sub(1)];
    let hi = bs[(best + 1).min(PROFILE_SCAN - 1)];
    let mut failure = None;
    let refined = golden_section_min(
        |b| match g_eval(q.n, b.clamp(0.0, span), q.v, q.d) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                f64::INFINITY
            }
        },
        lo,
        hi,
        PROFILE_B_TOL,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let (b, value) = if refined.value < values[best] { (refined.x.clamp(0.0, span), refined.value) } else { (bs[best], values[best]) };
    Ok(ProfileResult { value, argmin_b: b, r_at_argmin: solve_r(q.n, b, q.v, q.d)?, iterations: PROFILE_SCAN + refined.iterations })
}

#[derive(Debug, Clone, Serialize)]
pub struct OdeResidualReport {
    /// `max |(J'' I^{(N−2)/(N−1)} + N)/N|` over the evaluated points, with
    /// `J = I_N^{N/(N−1)}`.
    pub max_residual: f64,
    /// Grid points too close to `0` or `1` for the difference stencil.
    pub excluded: Vec<f64>,
}

/// Finite-difference check of `(I_N^{N/(N−1)})'' I_N^{(N−2)/(N−1)} = −N`.
pub fn profile_ode_residual(n: f64, v_grid: &[f64], step: f64) -> Result<OdeResidualReport> {
    check_params(n, PI)?;
    let band = 2.0 * step;
    let j = |v: f64| -> Result<f64> { Ok(profile(ProfileQuery { n, d: PI, v })?.value.powf(n / (n - 1.0))) };
    let mut report = OdeResidualReport { max_residual: 0.0, excluded: Vec::new() };
    for &v in v_grid {
        if v < band || v > 1.0 - band {
            report.excluded.push(v);
            continue;
        }
        let second = (j(v + step)? - 2.0 * j(v)? + j(v - step)?) / (step * step);
        let i = profile(ProfileQuery { n, d: PI, v })?.value;
        let lhs = second * i.powf((n - 2.0) / (n - 1.0));
        report.max_residual = report.max_residual.max(((lhs + n) / n).abs());
    }
    Ok(report)
}

/// `C²_{N,D} − 1`, computed from the tail `∫_0^{(π−D)/2} sin^{N−1}` so that
/// no cancellation occurs as `D → π`.
pub fn bbg_c2_minus_one(n: f64, d: f64) -> Result<f64> {
    check_params(n, d)?;
    let tail = sin_power_integral(n - 1.0, 0.0, 0.5 * (PI - d))?;
    let core = cos_power_integral(n - 1.0, 0.0, 0.5 * d)?;
    Ok(((2.0 / n) * (tail / core).ln_1p()).exp_m1())
}

/// `C_{N,D} = (∫_0^{π/2} cos^{N−1} / ∫_0^{D/2} cos^{N−1})^{1/N}`.
pub fn bbg_constant(n: f64, d: f64) -> Result<f64> {
    Ok((1.0 + bbg_c2_minus_one(n, d)?).sqrt())
}

/// `min_v I_{N,D}(v)/I_N(v) − C_{N,D}`; non-negative when the lower bound
/// holds on the grid.
pub fn bbg_ratio_check(n: f64, d: f64, v_grid: &[f64]) -> Result<f64> {
    let c = bbg_constant(n, d)?;
    let mut worst = f64::INFINITY;
    for &v in v_grid {
        let num = profile(ProfileQuery { n, d, v })?.value;
        let den = profile(ProfileQuery { n, d: PI, v })?.value;
        worst = worst.min(num / den - c);
    }
    Ok(worst)
}

/// `lim_{D→π} (π−D)^N / (C²_{N,D} − 1) = 2^{N−1} N² ∫_0^{π/2} cos^{N−1}`.
pub fn asymptotic_limit(n: f64) -> Result<f64> {
    check_params(n, PI)?;
    Ok(2f64.powf(n - 1.0) * n * n * cos_power_integral(n - 1.0, 0.0, FRAC_PI_2)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticReport {
    /// `(D, (π−D)^N / (C²_{N,D} − 1))` for each sweep point.
    pub ratios: Vec<(f64, f64)>,
    /// Richardson extrapolation of the last two ratios assuming an
    /// `O((π−D)²)` leading error.
    pub extrapolated: f64,
    pub target: f64,
}

pub fn asymptotic_constant(n: f64, d_sweep: &[f64]) -> Result<AsymptoticReport> {
    if d_sweep.len() < 2 {
        return Err(Error::Domain("asymptotic sweep needs at least two diameters".into()));
    }
    if d_sweep.windows(2).any(|w| !(w[1] > w[0])) || d_sweep.iter().any(|&d| !(d < PI)) {
        return Err(Error::Domain("diameters must increase strictly towards π".into()));
    }
    let mut ratios = Vec::with_capacity(d_sweep.len());
    for &d in d_sweep {
        ratios.push((d, (PI - d).powf(n) / bbg_c2_minus_one(n, d)?));
    }
    let k = ratios.len();
    let (e1, r1) = (PI - ratios[k - 2].0, ratios[k - 2].1);
    let (e2, r2) = (PI - ratios[k - 1].0, ratios[k - 1].1);
    let q = (e1 / e2).powi(2);
    let extrapolated = (q * r2 - r1) / (q - 1.0);
    Ok(AsymptoticReport { ratios, extrapolated, target: asymptotic_limit(n)? })
}

/// Diameters at which `(C²_{N,D} − 1)/(π−D)^N` is sampled for [`c_bar`].
const CBAR_SAMPLES: usize = 256;

/// `C̄(N)`: the smallest value of `(C²_{N,D} − 1)/(π−D)^N` over a dense grid
/// of `D ∈ (0, π)` together with its limit at `D = π`, so that
/// `C²_{N,D} − 1 ≥ C̄ (π−D)^N` holds on the whole range sampled.
///
/// The value is cached per `N`.
pub fn c_bar(n: f64) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&n.to_bits()) {
        return Ok(*v);
    }
    let v = c_bar_uncached(n)?;
    cache.lock().unwrap().insert(n.to_bits(), v);
    Ok(v)
}

fn c_bar_uncached(n: f64) -> Result<f64> {
    let mut best = 1.0 / asymptotic_limit(n)?;
    for i in 1..CBAR_SAMPLES {
        let d = PI * i as f64 / CBAR_SAMPLES as f64;
        best = best.min(bbg_c2_minus_one(n, d)? / (PI - d).powf(n));
    }
    Ok(best)
}

/// `C_N = C̄(N) · N`, the constant in `C_N (π − D)^N ≤ λ₁ − N`.
pub fn c_n(n: f64) -> Result<f64> {
    Ok(c_bar(n)? * n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn solve_r_examples() {
        assert_eq!(solve_r(2.0, 0.0, 0.0, FRAC_PI_2).unwrap(), 0.0);
        assert_eq!(solve_r(2.0, 0.0, 1.0, FRAC_PI_2).unwrap(), FRAC_PI_2);
        assert!((solve_r(2.0, 0.0, 0.5, FRAC_PI_2).unwrap() - PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn g_examples() {
        assert!((g_eval(2.0, 0.0, 0.5, FRAC_PI_2).unwrap() - 0.866_025_403_784_438_6).abs() < 1e-11);
        assert!((g_eval(2.0, 0.0, 0.5, PI).unwrap() - 0.5).abs() < 1e-12);
        let d = 2.8;
        let a = g_eval(3.0, 0.1, 0.3, d).unwrap();
        let b = g_eval(3.0, PI - 0.1 - d, 0.7, d).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn profile_examples() {
        let p = profile(ProfileQuery { n: 2.0, d: PI, v: 0.5 }).unwrap();
        assert!((p.value - 0.5).abs() < 1e-12);
        let p = profile(ProfileQuery { n: 3.0, d: PI, v: 0.5 }).unwrap();
        assert!((p.value - 2.0 / PI).abs() < 1e-11);
    }

    #[test]
    fn profile_matches_dense_b_grid() {
        let (n, d, v) = (3.0, 3.0, 0.37);
        let p = profile(ProfileQuery { n, d, v }).unwrap();
        let span = PI - d;
        let m = 100_000;
        let mut best = f64::INFINITY;
        // Independent oracle: closed-form antiderivative of sin² and bisection.
        let anti = |t: f64| 0.5 * (t - t.sin() * t.cos());
        for i in 0..=m {
            let b = span * i as f64 / m as f64;
            let total = anti(b + d) - anti(b);
            let target = anti(b) + v * total;
            let (mut lo, mut hi) = (b, b + d);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if anti(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let r = 0.5 * (lo + hi);
            best = best.min(r.sin().powi(2) / total);
        }
        assert!((p.value - best).abs() < 1e-7, "{} vs {best}", p.value);
    }

    #[test]
    fn ode_residual_examples() {
        let grid: Vec<f64> = (0..81).map(|i| 0.1 + 0.01 * i as f64).collect();
        let rep = profile_ode_residual(2.0, &grid, 1e-3).unwrap();
        assert!(rep.max_residual <= 1e-4, "{}", rep.max_residual);
        let rep = profile_ode_residual(3.0, &[0.5], 1e-3).unwrap();
        assert!(rep.max_residual <= 1e-5, "{}", rep.max_residual);
        let rep = profile_ode_residual(3.0, &[0.001, 0.5, 0.9995], 1e-3).unwrap();
        assert_eq!(rep.excluded, vec![0.001, 0.9995]);
    }

    #[test]
    fn profile_power_is_midpoint_concave() {
        let n = 2.5;
        let j = |v: f64| profile(ProfileQuery { n, d: PI, v }).unwrap().value.powf(n / (n - 1.0));
        for &(a, b) in &[(0.05, 0.3), (0.2, 0.9), (0.4, 0.6), (0.01, 0.99)] {
            assert!(j(0.5 * (a + b)) >= 0.5 * (j(a) + j(b)) - 1e-12);
        }
    }

    #[test]
    fn bbg_closed_forms() {
        assert!((bbg_constant(2.0, FRAC_PI_2).unwrap() - 2f64.powf(0.25)).abs() < 1e-10);
        for &n in &[1.5, 2.0, 2.5, 3.0, 4.0, 7.0] {
            assert_eq!(bbg_constant(n, PI).unwrap(), 1.0);
        }
    }

    #[test]
    fn bbg_matches_dense_quadrature() {
        let (n, d) = (3.0, 2.9);
        // ∫cos² = t/2 + sin(2t)/4.
        let anti = |t: f64| 0.5 * t + 0.25 * (2.0 * t).sin();
        let expect = (anti(FRAC_PI_2) / anti(d / 2.0)).powf(1.0 / n);
        assert!((bbg_constant(n, d).unwrap() - expect).abs() < 1e-10);
    }

    #[test]
    fn bbg_ratio_examples() {
        let grid: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
        assert!(bbg_ratio_check(2.0, PI, &grid).unwrap().abs() < 1e-10);
        let grid99: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        assert!(bbg_ratio_check(3.0, 2.5, &grid99).unwrap() >= -1e-7);
        assert!(bbg_ratio_check(2.0, 1.5, &[0.5]).unwrap() >= -1e-7);
    }

    #[test]
    fn asymptotic_targets() {
        assert!((asymptotic_limit(2.0).unwrap() - 8.0).abs() < 1e-12);
        assert!((asymptotic_limit(3.0).unwrap() - 9.0 * PI).abs() < 1e-11);
        for &n in &[2.0, 3.0] {
            let rep = asymptotic_constant(n, &[PI - 1e-2, PI - 1e-3]).unwrap();
            let rel = |r: f64| (r - rep.target).abs() / rep.target;
            assert!(rel(rep.ratios[0].1) < 0.05);
            assert!(rel(rep.ratios[1].1) < 0.005);
            assert!(rel(rep.extrapolated) < 1e-5);
        }
    }

    #[test]
    fn c_bar_is_a_valid_lower_constant() {
        for &n in &[2.0, 3.0] {
            let cb = c_bar(n).unwrap();
            assert!(cb > 0.0 && cb <= 1.0 / asymptotic_limit(n).unwrap());
            for k in 1..12 {
                let d = PI - 2f64.powi(-k);
                assert!(bbg_c2_minus_one(n, d).unwrap() >= cb * (PI - d).powf(n));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn solve_r_monotone_in_v(v1 in 0.01f64..0.98, dv in 0.001f64..0.01, b in 0.0f64..0.3) {
            let d = 2.7;
            prop_assert!(solve_r(2.5, b, v1, d).unwrap() < solve_r(2.5, b, v1 + dv, d).unwrap());
        }

        #[test]
        fn g_symmetry(b in 0.0f64..0.4, v in 0.01f64..0.99) {
            let d = PI - 0.4;
            let a = g_eval(3.0, b, v, d).unwrap();
            let c = g_eval(3.0, PI - b - d, 1.0 - v, d).unwrap();
            prop_assert!((a - c).abs() < 1e-10);
        }

        #[test]
        fn model_profile_symmetric(v in 0.01f64..0.99) {
            let a = profile(ProfileQuery { n: 2.5, d: PI, v }).unwrap().value;
            let b = profile(ProfileQuery { n: 2.5, d: PI, v: 1.0 - v }).unwrap().value;
            prop_assert!((a - b).abs() < 1e-10);
        }

        #[test]
        fn bbg_non_increasing(d in 0.3f64..3.0, dd in 0.01f64..0.1) {
            prop_assert!(bbg_constant(2.5, d).unwrap() >= bbg_constant(2.5, (d + dd).min(PI)).unwrap());
        }

        #[test]
        fn profile_dominates_bbg_bound(d in 1.0f64..3.1, v in 0.05f64..0.95) {
            let lhs = profile(ProfileQuery { n: 3.0, d, v }).unwrap().value;
            let rhs = bbg_constant(3.0, d).unwrap() * profile(ProfileQuery { n: 3.0, d: PI, v }).unwrap().value;
            prop_assert!(lhs >= rhs - 1e-7);
        }
    }
}
