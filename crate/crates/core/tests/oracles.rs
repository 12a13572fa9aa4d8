//! Closed-form values checked against the public API.

use std::f64::consts::{FRAC_PI_2, PI};

use obatalab_core::isoperimetry::{asymptotic_limit, bbg_c2_minus_one, bbg_constant, profile, ProfileQuery};
use obatalab_core::localization::construct;
use obatalab_core::localization::{run_pipeline, Params, RayFamily};
use obatalab_core::measure::{cd_check, model_density, omega, sigma_coeff, truncated_model, CoefficientQuery, Grid, INEQ_SLACK};
use obatalab_core::obata1d::{deficit_distance_sweep, ExperimentSpec, Family};
use obatalab_core::spectral::{green_apply, lichnerowicz_check, neumann_eigs};

fn model(n: f64, cells: usize) -> obatalab_core::WeightedInterval {
    model_density(n, Grid::uniform(PI, cells).unwrap()).unwrap()
}

#[test]
fn model_neumann_spectrum_is_k_times_k_plus_n_minus_one() {
    for n in [2.0, 2.5, 3.0, 4.0] {
        let s = neumann_eigs(&model(n, 2048), 3).unwrap();
        let ext = s.extrapolated.as_ref().unwrap();
        for k in 1..=3 {
            let exact = (k * k) as f64 + (k as f64) * (n - 1.0);
            assert!((ext[k - 1] - exact).abs() <= 1e-6 * exact, "N = {n}, k = {k}: {}", ext[k - 1]);
            // Lumped masses approximate from below.
            assert!(s.eigenvalues[k - 1] <= exact + 1e-9);
        }
    }
}

#[test]
fn first_model_eigenfunction_is_the_cosine() {
    let w = model(3.0, 1024);
    let s = neumann_eigs(&w, 1).unwrap();
    let u = &s.eigenfunctions[0];
    let nodes = w.grid().nodes();
    let ratio: Vec<f64> = nodes.iter().zip(u).filter(|(t, _)| (*t - FRAC_PI_2).abs() > 0.3).map(|(t, v)| v / t.cos()).collect();
    let (lo, hi) = ratio.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(*r), b.max(*r)));
    assert!((hi - lo).abs() <= 1e-3 * hi.abs(), "{lo} .. {hi}");
}

#[test]
fn omega_is_the_sine_power_integral() {
    assert!((omega(2.0).unwrap() - 2.0).abs() < 1e-12);
    assert!((omega(3.0).unwrap() - FRAC_PI_2).abs() < 1e-12);
    assert!((omega(4.0).unwrap() - 4.0 / 3.0).abs() < 1e-12);
}

#[test]
fn distortion_coefficients() {
    let q = |k, n, t, theta| sigma_coeff(CoefficientQuery::new(k, n, t, theta)).unwrap();
    assert!((q(0.0, 2.0, 0.3, 1.7) - 0.3).abs() < 1e-15);
    let (k, n, t, th): (f64, f64, f64, f64) = (2.0, 3.0, 0.25, 1.1);
    let a = th * (k / n).sqrt();
    assert!((q(k, n, t, th) - (t * a).sin() / a.sin()).abs() < 1e-13);
    let b = th * (2.0f64 / 3.0).sqrt();
    assert!((q(-2.0, 3.0, t, th) - (t * b).sinh() / b.sinh()).abs() < 1e-13);
}

#[test]
fn model_profile_in_dimension_two() {
    for v in [0.05, 0.2, 0.5, 0.8] {
        let p = profile(ProfileQuery { n: 2.0, d: PI, v }).unwrap();
        let exact = (v * (1.0 - v)).sqrt();
        assert!((p.value - exact).abs() < 1e-9, "v = {v}: {} vs {exact}", p.value);
    }
}

#[test]
fn model_profile_in_dimension_three() {
    // ∫_0^R sin² = (R − sin R cos R)/2 = v π/2 and I = sin² R / (π/2).
    for v in [0.1, 0.35, 0.5] {
        let (mut lo, mut hi) = (0.0, PI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (mid - mid.sin() * mid.cos()) < v * PI {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let exact = lo.sin().powi(2) / FRAC_PI_2;
        let p = profile(ProfileQuery { n: 3.0, d: PI, v }).unwrap();
        assert!((p.value - exact).abs() < 1e-9, "v = {v}: {} vs {exact}", p.value);
    }
}

#[test]
fn bbg_constant_closed_forms() {
    assert!((bbg_constant(2.0, FRAC_PI_2).unwrap() - 2f64.powf(0.25)).abs() <= 1e-10);
    for n in [2.0, 2.5, 3.0, 4.0] {
        assert!((bbg_constant(n, PI).unwrap() - 1.0).abs() <= 1e-12);
    }
    // N = 3: C³ = π / (D + sin D).
    for d in [0.5, 1.5, 2.5, 3.0] {
        let exact = (PI / (d + f64::sin(d))).cbrt();
        assert!((bbg_constant(3.0, d).unwrap() - exact).abs() <= 1e-10, "D = {d}");
    }
}

#[test]
fn asymptotic_limits() {
    assert!((asymptotic_limit(2.0).unwrap() - 8.0).abs() < 1e-10);
    assert!((asymptotic_limit(3.0).unwrap() - 9.0 * PI).abs() < 1e-9);
    let eps: f64 = 1e-3;
    for (n, lim) in [(2.0, 8.0), (3.0, 9.0 * PI)] {
        let ratio = eps.powf(n) / bbg_c2_minus_one(n, PI - eps).unwrap();
        assert!((ratio - lim).abs() <= 0.01 * lim, "N = {n}: {ratio}");
    }
}

#[test]
fn truncated_model_satisfies_the_gap_bound() {
    for n in [2.0, 3.0] {
        let w = truncated_model(n, Grid::uniform(2.0, 2048).unwrap()).unwrap();
        assert!(cd_check(&w, 500, INEQ_SLACK).passed());
        let s = neumann_eigs(&w, 1).unwrap();
        let l = lichnerowicz_check(&w, s.lambda1_refined()).unwrap();
        assert!(l.margin >= -1e-6, "N = {n}: {l:?}");
        assert!(l.c2 > 1.0);
    }
}

#[test]
fn green_solution_for_a_cosine_source() {
    // v'' + v = cos with v(π/2) = v'(π/2) = 0.
    let w = model(2.0, 4096);
    let z: Vec<f64> = w.grid().nodes().iter().map(|t| t.cos()).collect();
    let g = green_apply(&w, &z, FRAC_PI_2).unwrap();
    for (t, v) in w.grid().nodes().iter().zip(&g.v0) {
        let exact = 0.5 * ((t - FRAC_PI_2) * t.sin() + t.cos());
        assert!((v - exact).abs() < 1e-6, "t = {t}");
    }
    assert!(g.bound_holds(1e-12));
}

#[test]
fn perturbed_cosine_rate_is_one_half() {
    let spec = ExperimentSpec { n: 3.0, family: Family::PerturbedCosine { scales: vec![0.2, 0.1, 0.05, 0.025, 0.0125] }, cells: 2048 };
    let rep = deficit_distance_sweep(&spec).unwrap();
    let slope = rep.fit.unwrap().slope;
    assert!((slope - 0.5).abs() < 0.01, "{slope}");
    assert!(rep.passes(0.1));
}

#[test]
fn rigid_family_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    construct::rigid(3.0, 3).write(dir.path(), "rigid").unwrap();
    let f = RayFamily::load(&dir.path().join("rigid.json")).unwrap();
    let rep = run_pipeline(&f, Params::optimal(3.0)).unwrap();
    let a = rep.assembly.unwrap();
    assert!(a.final_dist <= 1e-12 && rep.ledger.delta.abs() <= 1e-12);
    assert!(rep.certificates_hold());
}
