//! Scalar numerical kernels shared by the higher-level modules.

pub mod fit;
pub mod quad;
pub mod roots;
pub mod tridiag;

pub use fit::{loglog_fit, FitResult};
pub use quad::{integrate_adaptive, QuadOptions};
pub use roots::{bisect_monotone, golden_section_min};
pub use tridiag::{SymTridiag, TridiagEigen};
