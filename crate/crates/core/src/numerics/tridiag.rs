//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for the
//! eigenvalues, inverse iteration with a pivoted tridiagonal LU for the
//! eigenvectors.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix with `diag.len() == off.len() + 1`.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// Lowest eigenpairs in ascending order; vectors have unit Euclidean norm.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::LengthMismatch { expected: diag.len().saturating_sub(1), got: off.len() });
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn scale(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let pivmin = f64::EPSILON * f64::EPSILON * self.scale();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection to machine
    /// precision.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let pad = f64::EPSILON * self.scale() * 4.0;
        lo -= pad;
        hi += pad;
        for _ in 0..256 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(A - shift I) x = rhs` in place by Gaussian elimination with
    /// partial pivoting.
    fn shifted_solve(&self, shift: f64, rhs: &mut [f64]) {
        let n = self.len();
        if n == 1 {
            let d = self.diag[0] - shift;
            rhs[0] /= if d == 0.0 { f64::EPSILON * self.scale() } else { d };
            return;
        }
        let tiny = f64::EPSILON * self.scale();
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - shift).collect();
        let mut dl = self.off.clone();
        let mut du = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n - 1];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        for i in 0..n - 1 {
            if swapped[i] {
                let temp = rhs[i];
                rhs[i] = rhs[i + 1];
                rhs[i + 1] = temp - dl[i] * rhs[i];
            } else {
                rhs[i + 1] -= dl[i] * rhs[i];
            }
        }
        rhs[n - 1] /= d[n - 1];
        rhs[n - 2] = (rhs[n - 2] - du[n - 2] * rhs[n - 1]) / d[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            rhs[i] = (rhs[i] - du[i] * rhs[i + 1] - du2[i] * rhs[i + 2]) / d[i];
        }
    }

    /// Eigenvector for an eigenvalue estimate, orthogonalised against
    /// `previous` (assumed orthonormal).
    pub fn inverse_iteration(&self, lambda: f64, previous: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).fract()).collect();
        orthonormalize(&mut x, previous)?;
        for _ in 0..12 {
            let mut y = x.clone();
            self.shifted_solve(lambda, &mut y);
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical("inverse iteration overflow".into()));
            }
            orthonormalize(&mut y, previous)?;
            let dot: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            if dot < 0.0 {
                y.iter_mut().for_each(|v| *v = -*v);
            }
            let diff = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            x = y;
            if diff < 1e-14 {
                break;
            }
        }
        Ok(x)
    }

    /// The `count` smallest eigenpairs.
    pub fn lowest(&self, count: usize) -> Result<TridiagEigen> {
        let count = count.min(self.len());
        let mut values = Vec::with_capacity(count);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
        for k in 0..count {
            let lambda = self.eigenvalue(k);
            let v = self.inverse_iteration(lambda, &vectors)?;
            values.push(lambda);
            vectors.push(v);
        }
        Ok(TridiagEigen { values, vectors })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }
}

fn orthonormalize(x: &mut [f64], previous: &[Vec<f64>]) -> Result<()> {
    for _ in 0..2 {
        for p in previous {
            let dot: f64 = x.iter().zip(p).map(|(a, b)| a * b).sum();
            x.iter_mut().zip(p).for_each(|(a, b)| *a -= dot * b);
        }
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Numerical("degenerate vector in inverse iteration".into()));
    }
    x.iter_mut().for_each(|v| *v /= norm);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn laplacian_1d(n: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    #[test]
    fn dirichlet_laplacian_closed_form() {
        let n = 50;
        let a = laplacian_1d(n);
        let eig = a.lowest(4).unwrap();
        for (k, v) in eig.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n as f64 + 1.0)).cos();
            assert!((v - exact).abs() < 1e-13, "k={k}: {v} vs {exact}");
        }
        for (k, vec) in eig.vectors.iter().enumerate() {
            let av = a.apply(vec);
            let res = av.iter().zip(vec).map(|(x, y)| (x - eig.values[k] * y).abs()).fold(0.0, f64::max);
            assert!(res < 1e-12);
        }
    }

    #[test]
    fn sturm_count_brackets() {
        let a = laplacian_1d(10);
        assert_eq!(a.sturm_count(-1.0), 0);
        assert_eq!(a.sturm_count(5.0), 10);
    }

    proptest! {
        #[test]
        fn eigenvectors_orthonormal(seed in 0u64..1000) {
            let n = 30;
            let diag: Vec<f64> = (0..n).map(|i| ((seed as f64 + i as f64) * 1.3).sin() * 3.0).collect();
            let off: Vec<f64> = (0..n - 1).map(|i| 0.5 + ((seed as f64 * 0.7 + i as f64) * 2.1).cos().abs()).collect();
            let a = SymTridiag::new(diag, off).unwrap();
            let eig = a.lowest(5).unwrap();
            for w in eig.values.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            for i in 0..5 {
                for j in 0..5 {
                    let d: f64 = eig.vectors[i].iter().zip(&eig.vectors[j]).map(|(x, y)| x * y).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((d - expect).abs() < 1e-9);
                }
            }
        }
    }
}
