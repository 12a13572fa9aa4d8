//! # obatalab-core
//!
//! Numerical laboratory for the quantitative Obata rigidity program on
//! one-dimensional `CD(N-1, N)` spaces.
//!
//! The crate is organised bottom-up:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`numerics`] | adaptive quadrature, scalar root finding and minimisation, symmetric tridiagonal eigensolver, log-log fits |
//! | [`measure`] | grids, weighted intervals, distortion coefficients, `CD(K,N)` checks, density generation, envelopes |
//! | [`isoperimetry`] | model isoperimetric profile `I_{N,D}`, the Berard–Besson–Gallot constant `C_{N,D}` and its asymptotics |
//! | [`spectral`] | Neumann eigenpairs, Rayleigh quotients, Bochner and Green-operator diagnostics, local Poincaré ratios |
//! | [`obata1d`] | sweep drivers for the one-dimensional stability statements |
//! | [`localization`] | synthetic ray-disintegration simulator and its deficit ledger |
//!
//! Everything is a pure function of its inputs. Parameter sweeps use rayon
//! and collect results in input order, so outputs do not depend on the
//! number of worker threads.

// `!(x > 0.0)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod isoperimetry;
pub mod localization;
pub mod measure;
pub mod numerics;
pub mod obata1d;
pub mod spectral;

pub use error::{Error, Result};
pub use measure::{Grid, WeightedInterval};
