//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};

/// Tolerances for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-12, abs_tol: 1e-300, max_intervals: 20_000 }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// One 15-point Kronrod panel: returns (integral, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` by global adaptive bisection of the panel
/// with the largest error estimate.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate_adaptive(f, b, a, opts).map(|v| -v);
    }
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > opts.abs_tol.max(opts.rel_tol * total.abs()) {
        if panels.len() >= opts.max_intervals {
            return Err(Error::Numerical(format!("adaptive quadrature did not converge on [{a}, {b}] (err {err:e})")));
        }
        let (idx, _) = panels.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("non-empty panel list");
        let (pa, pb, pv, pe) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            // Panel cannot be split further in floating point.
            panels.push((pa, pb, pv, 0.0));
            err -= pe;
            continue;
        }
        let (lv, le) = gk15(&f, pa, mid);
        let (rv, re) = gk15(&f, mid, pb);
        total += lv + rv - pv;
        err += le + re - pe;
        panels.push((pa, mid, lv, le));
        panels.push((mid, pb, rv, re));
    }
    // Re-sum to avoid drift from incremental updates.
    Ok(panels.iter().map(|p| p.2).sum())
}

/// `∫_a^b sin^p(t) dt` for `p > -1`, `0 <= a <= b <= π`.
pub fn sin_power_integral(p: f64, a: f64, b: f64) -> Result<f64> {
    integrate_adaptive(|t| t.sin().max(0.0).powf(p), a, b, QuadOptions::default())
}

/// `∫_a^b cos^p(t) dt` for `0 <= a <= b <= π/2`, evaluated as a sine
/// integral so that the small-argument end carries the relative accuracy.
pub fn cos_power_integral(p: f64, a: f64, b: f64) -> Result<f64> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    sin_power_integral(p, half_pi - b, half_pi - a)
}

/// Five-point Gauss–Legendre rule on `[a, b]`; exact for polynomials of
/// degree nine, used on grid cells where integrands are low-degree
/// piecewise polynomials.
pub fn gauss5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    const X: [f64; 5] = [0.0, 0.538_469_310_105_683_1, -0.538_469_310_105_683_1, 0.906_179_845_938_664, -0.906_179_845_938_664];
    const W: [f64; 5] = [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1, 0.236_926_885_056_189_1];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    X.iter().zip(W.iter()).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_and_trig() {
        let v = integrate_adaptive(|x| x * x, 0.0, 3.0, QuadOptions::default()).unwrap();
        assert!((v - 9.0).abs() < 1e-13);
        let v = integrate_adaptive(f64::sin, 0.0, PI, QuadOptions::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let v = integrate_adaptive(f64::exp, 1.0, 0.0, QuadOptions::default()).unwrap();
        assert!((v + (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn fractional_power_endpoint() {
        // ∫_0^1 t^{1.5} = 0.4
        let v = integrate_adaptive(|t: f64| t.powf(1.5), 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((v - 0.4).abs() < 1e-12);
    }

    #[test]
    fn sine_power_known_values() {
        assert!((sin_power_integral(1.0, 0.0, PI).unwrap() - 2.0).abs() < 1e-13);
        assert!((sin_power_integral(2.0, 0.0, PI).unwrap() - PI / 2.0).abs() < 1e-13);
        assert!((cos_power_integral(1.0, 0.0, PI / 4.0).unwrap() - (PI / 4.0).sin()).abs() < 1e-13);
    }

    #[test]
    fn gauss5_exact_for_degree_nine() {
        let v = gauss5(|x| x.powi(9) + x.powi(4), 0.0, 2.0);
        assert!((v - (2f64.powi(10) / 10.0 + 2f64.powi(5) / 5.0)).abs() < 1e-11);
    }
}
