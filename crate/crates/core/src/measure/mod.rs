//! Grids, weighted intervals and the one-dimensional `CD(K,N)` condition.

pub mod cd;
pub mod coeff;
pub mod density;
pub mod envelope;
pub mod generate;
mod grid;

pub use cd::{cd_check, cd_check_differential, CdVerdict, CdWitness, DifferentialReport, WitnessKind, INEQ_SLACK};
pub use coeff::{sigma_coeff, tau_coeff, CoefficientQuery};
pub use density::{
    integrate, model_density, omega, parse_density_csv, scaled_model, truncated_model, write_density_csv, Rule, WeightedInterval, MASS_TOL,
};
pub use envelope::{envelope_check, EnvelopeReport};
pub use generate::{generate_cd_density, Excess, Generated, StartData};
pub use grid::{Grid, MIN_NODES};
