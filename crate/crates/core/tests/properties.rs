//! Randomised invariants.

use std::f64::consts::PI;

use obatalab_core::isoperimetry::{bbg_constant, profile, ProfileQuery};
use obatalab_core::measure::{cd_check, generate_cd_density, Excess, Grid, StartData, INEQ_SLACK};
use obatalab_core::spectral::{lichnerowicz_check, neumann_eigs};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn generated_densities_are_cd_and_respect_the_gap(seed in 0u64..10_000, d in 1.0f64..3.1, level in 0.0f64..3.0, n in prop_oneof![Just(2.0), Just(2.5), Just(3.0)]) {
        let grid = Grid::uniform(d, 1024).unwrap();
        let g = generate_cd_density(n, seed, &grid, &Excess::Random { pieces: 4, max_level: level }, StartData::default()).unwrap();
        prop_assert!(cd_check(&g.interval, 300, INEQ_SLACK).passed());
        let s = neumann_eigs(&g.interval, 1).unwrap();
        let l = lichnerowicz_check(&g.interval, s.lambda1_refined()).unwrap();
        prop_assert!(l.margin >= -1e-6, "{:?}", l);
    }

    #[test]
    fn bbg_constant_decreases_to_one(n in 1.5f64..5.0, d1 in 0.2f64..3.1, d2 in 0.2f64..3.1) {
        let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        let (a, b) = (bbg_constant(n, lo).unwrap(), bbg_constant(n, hi).unwrap());
        prop_assert!(a >= b - 1e-12 && b >= 1.0 - 1e-12);
    }

    #[test]
    fn model_profile_is_symmetric(n in 1.5f64..5.0, v in 0.01f64..0.99) {
        let p = profile(ProfileQuery { n, d: PI, v }).unwrap().value;
        let q = profile(ProfileQuery { n, d: PI, v: 1.0 - v }).unwrap().value;
        prop_assert!((p - q).abs() <= 1e-8 * p.max(1e-3));
    }

    #[test]
    fn shorter_diameters_raise_the_profile(n in 1.5f64..4.0, d in 0.5f64..3.0, v in 0.05f64..0.95) {
        let model = profile(ProfileQuery { n, d: PI, v }).unwrap().value;
        let short = profile(ProfileQuery { n, d, v }).unwrap().value;
        prop_assert!(short >= bbg_constant(n, d).unwrap() * model - 1e-8);
    }
}
