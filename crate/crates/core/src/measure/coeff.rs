//! Distortion coefficients `σ^{(t)}_{K,N}` and `τ^{(t)}_{K,N}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Arguments of a distortion coefficient.
#[derive(Debug, Clone, Copy)]
pub struct CoefficientQuery {
    pub k: f64,
    pub n: f64,
    pub t: f64,
    pub theta: f64,
}

impl CoefficientQuery {
    pub fn new(k: f64, n: f64, t: f64, theta: f64) -> Self {
        Self { k, n, t, theta }
    }

    fn validate(&self, min_n: f64) -> Result<()> {
        if !(self.n > min_n) || !self.n.is_finite() {
            return Err(Error::Domain(format!("dimension N = {} must exceed {min_n}", self.n)));
        }
        if !(0.0..=1.0).contains(&self.t) {
            return Err(Error::Domain(format!("t = {} outside [0,1]", self.t)));
        }
        if !(self.theta >= 0.0) || !self.k.is_finite() {
            return Err(Error::Domain(format!("invalid K = {} or theta = {}", self.k, self.theta)));
        }
        Ok(())
    }
}

/// `σ^{(t)}_{K,N}(θ)`; `+∞` when `K > 0` and `θ ≥ π√(N/K)`.
///
/// Accepts any `N > 0`: the `CD` inequality evaluates `σ_{K,N−1}`, whose
/// dimension drops below one when `N < 2`.
pub fn sigma_coeff(q: CoefficientQuery) -> Result<f64> {
    q.validate(0.0)?;
    Ok(sigma_unchecked(q.k, q.n, q.t, q.theta))
}

pub(crate) fn sigma_unchecked(k: f64, n: f64, t: f64, theta: f64) -> f64 {
    if theta == 0.0 {
        return t;
    }
    if k > 0.0 {
        let a = theta * (k / n).sqrt();
        if a >= PI {
            return f64::INFINITY;
        }
        (t * a).sin() / a.sin()
    } else if k < 0.0 {
        let a = theta * (-k / n).sqrt();
        (t * a).sinh() / a.sinh()
    } else {
        t
    }
}

/// `τ^{(t)}_{K,N}(θ) = t^{1/N} σ^{(t)}_{K,N−1}(θ)^{1−1/N}`.
pub fn tau_coeff(q: CoefficientQuery) -> Result<f64> {
    q.validate(1.0)?;
    let s = sigma_unchecked(q.k, q.n - 1.0, q.t, q.theta);
    if s.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(q.t.powf(1.0 / q.n) * s.powf(1.0 - 1.0 / q.n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_coeff(CoefficientQuery::new(2.0, 2.0, 0.5, 0.0)).unwrap(), 0.5);
        let v = sigma_coeff(CoefficientQuery::new(2.0, 2.0, 0.5, PI / 2.0)).unwrap();
        assert!((v - 0.707_106_781_186_547_5).abs() < 1e-12);
        assert!(sigma_coeff(CoefficientQuery::new(2.0, 2.0, 0.5, PI)).unwrap().is_infinite());
        assert!(sigma_coeff(CoefficientQuery::new(1.0, 0.0, 0.5, 1.0)).is_err());
    }

    #[test]
    fn sigma_nonpositive_curvature() {
        let v = sigma_coeff(CoefficientQuery::new(0.0, 3.0, 0.3, 2.0)).unwrap();
        assert_eq!(v, 0.3);
        let v = sigma_coeff(CoefficientQuery::new(-3.0, 3.0, 0.5, 1.0)).unwrap();
        assert!((v - 0.5f64.sinh() / 1.0f64.sinh()).abs() < 1e-15);
    }

    #[test]
    fn tau_examples() {
        let q = CoefficientQuery::new(1.0, 3.0, 1.0, 1.2);
        assert!((tau_coeff(q).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(tau_coeff(CoefficientQuery::new(1.0, 3.0, 0.0, 0.0)).unwrap(), 0.0);
        assert!(tau_coeff(CoefficientQuery::new(1.0, 1.0, 0.5, 1.0)).is_err());
        // Direct evaluation: σ_{1,2}^{(1/2)}(1) = sin(1/(2√2)) / sin(1/√2).
        let s: f64 = (0.5 / 2f64.sqrt()).sin() / (1.0 / 2f64.sqrt()).sin();
        let expect = 0.5f64.powf(1.0 / 3.0) * s.powf(2.0 / 3.0);
        let got = tau_coeff(CoefficientQuery::new(1.0, 3.0, 0.5, 1.0)).unwrap();
        assert!((got - expect).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn sigma_continuous_on_finite_branch(k in 0.1f64..5.0, n in 1.1f64..6.0, t in 0.0f64..1.0, frac in 0.0f64..0.99) {
            let theta = frac * PI * (n / k).sqrt();
            let a = sigma_unchecked(k, n, t, theta);
            let b = sigma_unchecked(k, n, t, theta + 1e-9);
            prop_assert!(a.is_finite());
            prop_assert!((a - b).abs() < 1e-5 * (1.0 + a.abs()));
            let small = sigma_unchecked(k, n, t, 1e-12);
            prop_assert!((small - t).abs() < 1e-9);
        }
    }
}
