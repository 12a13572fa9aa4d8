//! Synthetic disintegrations: a family of weighted rays carrying `CD(N−1, N)`
//! densities and a zero-mean function, on which the inequalities of the
//! globalisation argument are evaluated one by one.
//!
//! The disintegration is an input. The simulator checks every consequence
//! that follows from it; it does not construct rays from a metric space.

pub mod construct;
mod pipeline;
mod ray;

pub use pipeline::{
    assemble_main, bad_set_energy, global_deficit, long_mass_bound, per_ray_cosine, pole_concentration, select_long_rays, unspanned_cos_mass,
    variance_bound, volume_control, Assembly, BadSet, Bound, DeficitLedger, LongMass, LongRays, Params, PoleReport, RayCosine, RayTerms,
    SuspensionGeometry, Variance, VolumeReport, C_POLE, EXACT_SLACK, SELECT_SLACK, VOLUME_SLACK,
};
pub use ray::{DensitySpec, EnergySpec, FamilySpec, FunctionSpec, Ray, RayFamily, RaySpec, MASS_SLACK, SCHEMA};

use serde::Serialize;

use crate::error::Result;
use crate::isoperimetry::c_n;

/// Compact record of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerSummary {
    pub delta: f64,
    /// Signed `c_q` on long rays, `|c_q|` elsewhere.
    pub c: Vec<f64>,
    pub delta_q: Vec<Option<f64>>,
    pub q_long: Vec<usize>,
    pub cbar: f64,
    pub variance: f64,
    pub one_minus_mass: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `r = δ^{γ/N}`.
    pub r: f64,
    /// `η = 1/(8N+4)`.
    pub eta: f64,
    pub final_dist: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub params: Params,
    pub ledger: DeficitLedger,
    pub long: LongRays,
    pub bad_set: BadSet,
    pub cosines: Vec<RayCosine>,
    pub variance: Variance,
    pub long_mass: LongMass,
    /// Present when every ray has a start offset.
    pub assembly: Option<Assembly>,
    /// Present for families with a pole distance and all offsets.
    pub pole: Option<PoleReport>,
}

impl PipelineReport {
    pub fn summary(&self) -> LedgerSummary {
        let mut c: Vec<f64> = self.ledger.rays.iter().map(|r| r.c_abs).collect();
        for s in &self.cosines {
            c[s.index] = s.c;
        }
        let n = self.ledger.n;
        LedgerSummary {
            delta: self.ledger.delta,
            c,
            delta_q: self.ledger.rays.iter().map(|r| r.delta_q).collect(),
            q_long: self.long.indices.clone(),
            cbar: self.variance.cbar,
            variance: self.variance.bound.lhs,
            one_minus_mass: 1.0 - self.long.mass,
            beta: self.params.beta,
            gamma: self.params.gamma,
            r: self.ledger.delta.max(0.0).powf(self.params.gamma / n),
            eta: 1.0 / (8.0 * n + 4.0),
            final_dist: self.assembly.map(|a| a.final_dist),
        }
    }

    /// The exact identities and certificates of the chain all hold.
    pub fn certificates_hold(&self) -> bool {
        self.ledger.localization_holds() && self.ledger.orthogonal_holds() && self.long.chebyshev_holds() && self.bad_set.holds()
    }
}

/// Normalises the family and runs the whole chain.
pub fn run_pipeline(family: &RayFamily, params: Params) -> Result<PipelineReport> {
    let f = family.normalize()?;
    let ledger = global_deficit(&f)?;
    let long = select_long_rays(&ledger, params.beta, c_n(f.n)?)?;
    let bad_set = bad_set_energy(&ledger, &long, params.beta);
    let cosines = per_ray_cosine(&f, &ledger, &long, params.beta)?;
    let variance = variance_bound(&ledger, &long, &cosines, params)?;
    let long_mass = long_mass_bound(&ledger, &long, params)?;
    let assembly = if f.rays.iter().all(|r| r.a.is_some()) { Some(assemble_main(&f, &ledger)?) } else { None };
    let pole = SuspensionGeometry::from_family(&f).ok().map(|g| pole_concentration(&g, &long, ledger.delta, params.beta, f.n));
    Ok(PipelineReport { params, ledger, long, bad_set, cosines, variance, long_mass, assembly, pole })
}

#[cfg(test)]
mod tests {
    use super::construct::{self, Fixture};
    use super::*;
    use crate::error::Error;
    use crate::numerics::quad::sin_power_integral;
    use std::f64::consts::PI;
    use std::path::Path;

    fn build(fx: &Fixture) -> RayFamily {
        RayFamily::from_spec(&fx.spec, Path::new(".")).unwrap()
    }

    fn run(fx: &Fixture) -> PipelineReport {
        let f = build(fx);
        run_pipeline(&f, Params::optimal(f.n)).unwrap()
    }

    #[test]
    fn normalize_is_idempotent() {
        let f = build(&construct::random(2.5, 3, 6)).normalize().unwrap();
        let g = f.normalize().unwrap();
        for (a, b) in f.rays.iter().zip(&g.rays) {
            for i in 0..=20 {
                let t = a.length * i as f64 / 20.0;
                assert!((a.u(t) - b.u(t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cosine_rays_rescale_by_root_n_plus_one() {
        for n in [2.0, 3.0] {
            let f = build(&construct::rigid(n, 3));
            let c = f.rays[0].mean(|t| f.rays[0].u(t).powi(2)).sqrt();
            assert!((c - 1.0 / (n + 1.0).sqrt()).abs() < 1e-12);
            let g = f.normalize().unwrap();
            assert!((g.rays[0].u(0.3) - (n + 1.0).sqrt() * 0.3f64.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn two_rays_have_unit_c2_mass() {
        let mut fx = construct::random(2.0, 11, 2);
        fx.spec.unspanned_mass = 0.0;
        for r in &mut fx.spec.rays {
            r.weight = 0.5;
        }
        let l = global_deficit(&build(&fx).normalize().unwrap()).unwrap();
        assert!((l.c2_total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_rejects_zero_function() {
        let mut fx = construct::rigid(2.0, 2);
        for r in &mut fx.spec.rays {
            r.u = FunctionSpec::Cosine { amplitude: 0.0 };
        }
        assert!(matches!(build(&fx).normalize(), Err(Error::ConstantFunction)));
    }

    #[test]
    fn rigid_family_gives_zeros() {
        for n in [2.0, 3.0] {
            let r = run(&construct::rigid(n, 5));
            let s = r.summary();
            assert!(s.delta.abs() < 1e-10);
            assert!(s.delta_q.iter().all(|d| d.unwrap().abs() < 1e-10));
            assert_eq!(s.q_long, vec![0, 1, 2, 3, 4]);
            assert!(r.bad_set.energy == 0.0 && r.variance.bound.lhs < 1e-20 && r.long_mass.bound.lhs == 0.0);
            assert!(r.cosines.iter().all(|c| c.dist < 1e-10 && (c.c - 1.0).abs() < 1e-12));
            assert!(s.final_dist.unwrap() < 1e-10);
            let pole = r.pole.unwrap();
            assert!(pole.max_a == 0.0 && pole.max_b == 0.0 && !pole.flagged);
            assert!(r.certificates_hold());
        }
    }

    #[test]
    fn constant_energy_adds_exactly() {
        let n = 2.0;
        let base = global_deficit(&build(&construct::rigid(n, 4)).normalize().unwrap()).unwrap();
        let mut fx = construct::rigid(n, 4);
        fx.spec.rays[2].e = EnergySpec::Const { value: 0.3 };
        let l = global_deficit(&build(&fx).normalize().unwrap()).unwrap();
        assert!((l.delta - base.delta - 0.25 * 0.3).abs() < 1e-12);
        assert!(l.localization_holds() && l.orthogonal_holds());
    }

    #[test]
    fn random_families_satisfy_the_localised_deficit() {
        for seed in 0..8 {
            let f = build(&construct::random(2.0 + 0.25 * seed as f64, seed, 7)).normalize().unwrap();
            let l = global_deficit(&f).unwrap();
            assert!(l.delta >= l.localized - 1e-10, "seed {seed}");
            assert!(l.orthogonal_holds() && l.lichnerowicz_failure().is_none());
            assert!((f.total_mass() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn short_ray_is_excluded() {
        let r = run(&construct::with_short_ray(2.0, 0.05).unwrap());
        assert_eq!(r.long.indices, vec![0, 1, 2, 3]);
        let share = r.ledger.rays[4].weight * r.ledger.rays[4].c_abs.powi(2);
        assert!((share - 0.05).abs() < 1e-9);
        assert!(r.certificates_hold());
        assert!((r.long.outside_c2 - share).abs() < 1e-12);
    }

    #[test]
    fn optimal_parameters() {
        let p = Params::optimal(2.0);
        assert!((p.beta - 0.6).abs() < 1e-15 && (p.gamma - 0.2).abs() < 1e-15);
        let p = Params::optimal(3.0);
        assert!((p.beta - 9.0 / 14.0).abs() < 1e-15 && (p.gamma - 3.0 / 14.0).abs() < 1e-15);
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let f = build(&construct::rigid(2.0, 2));
        for p in [Params { beta: 0.5, gamma: 0.6 }, Params { beta: 1.2, gamma: 0.1 }, Params { beta: 0.9, gamma: 0.5 }] {
            assert!(matches!(run_pipeline(&f, p), Err(Error::Precondition(_))), "{p:?}");
        }
    }

    #[test]
    fn chebyshev_tight_family_saturates_within_factor_five() {
        for n in [2.0, 3.0] {
            let r = run(&construct::chebyshev_tight(n, 1e-4).unwrap());
            assert!(r.certificates_hold());
            assert!(r.long.outside_c2 / r.long.chebyshev_bound > 0.2);
            assert!(r.bad_set.energy / r.bad_set.bound > 0.2);
        }
    }

    #[test]
    fn negative_cosine_ray_gets_negative_sign() {
        let mut fx = construct::rigid(2.0, 3);
        fx.spec.rays[1].u = FunctionSpec::Cosine { amplitude: -1.0 };
        let r = run(&fx);
        assert!(r.cosines[1].c < 0.0 && r.cosines[0].c > 0.0);
        assert!(r.cosines.iter().all(|c| c.dist < 1e-10));
    }

    #[test]
    fn perturbed_rays_match_the_one_dimensional_distance() {
        let s = 0.05;
        let mut fx = construct::rigid(3.0, 2);
        fx.spec.rays[1].u = FunctionSpec::Perturbed { amplitude: 1.0, s };
        let r = run(&fx);
        // Closed form on the model ray with N = 3, m = sin²t dt/(π/2):
        // ∫cos² dm = 1/4, ∫sin²2t dm = 1/2, ∫cos sin2t dm = 16/(15π).
        let x = 16.0 / (15.0 * PI);
        let c = (0.25 + 2.0 * s * x + 0.5 * s * s).sqrt();
        let expected = (2.0 - 4.0 * (0.25 + s * x) / c).sqrt();
        let k = 1.0 / (0.5 * (0.25 + c * c)).sqrt();
        let got = r.cosines[1].dist;
        assert!((r.ledger.rays[1].c_abs - k * c).abs() < 1e-12);
        assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
    }

    #[test]
    fn global_flip_keeps_final_distance() {
        let fx = construct::extremal(2.0, 1e-3).unwrap();
        let mut flipped = fx.clone();
        for r in &mut flipped.spec.rays {
            if let FunctionSpec::Cosine { amplitude } = &mut r.u {
                *amplitude = -*amplitude;
            }
        }
        let (a, b) = (run(&fx), run(&flipped));
        for (x, y) in a.cosines.iter().zip(&b.cosines) {
            assert_eq!(x.c, -y.c);
        }
        let (x, y) = (a.assembly.unwrap(), b.assembly.unwrap());
        assert_eq!(x.sign, -y.sign);
        assert!((x.final_dist - y.final_dist).abs() < 1e-14);
    }

    #[test]
    fn extremal_family_hits_its_target() {
        for n in [2.0, 3.0] {
            let r = run(&construct::extremal(n, 1e-4).unwrap());
            assert!((r.ledger.delta - 1e-4).abs() < 1e-12);
            assert!(r.certificates_hold());
            assert_eq!(r.long.indices.len(), 8);
            assert!(!r.pole.unwrap().flagged);
        }
    }

    #[test]
    fn displaced_pole_is_flagged() {
        let r = run(&construct::displaced_pole(2.0, 1e-6, 0.5).unwrap());
        let p = r.pole.unwrap();
        assert_eq!(p.max_a, 0.5);
        assert!(p.flagged);
    }

    #[test]
    fn pole_offsets_are_echoed() {
        let delta: f64 = 1e-4;
        let mut fx = construct::extremal(2.0, delta).unwrap();
        let a = 0.5 * delta.powf(0.6 / 2.0);
        for r in fx.spec.rays.iter_mut() {
            r.a = Some(a);
            r.b = Some(0.0);
        }
        let p = run(&fx).pole.unwrap();
        assert_eq!(p.max_a, a);
        assert!(!p.flagged);
    }

    #[test]
    fn missing_offsets_skip_assembly() {
        let mut fx = construct::rigid(2.0, 2);
        fx.spec.rays[0].a = None;
        let r = run(&fx);
        assert!(r.assembly.is_none() && r.pole.is_none());
        assert!(matches!(assemble_main(&build(&fx).normalize().unwrap(), &r.ledger), Err(Error::Precondition(_))));
    }

    #[test]
    fn rigid_suspension_volume_is_the_model() {
        let f = build(&construct::rigid(3.0, 2));
        let g = SuspensionGeometry::from_family(&f).unwrap();
        for r in [0.1, 1.0, 2.0, 3.1] {
            let v = volume_control(&f, &g, r).unwrap();
            assert!((v.ball - v.lower).abs() < 1e-12 && (v.upper - v.lower).abs() < 1e-15);
        }
        assert!(matches!(volume_control(&f, &g, PI), Err(Error::Domain(_))));
    }

    #[test]
    fn truncated_suspension_volume() {
        let mut fx = construct::suspension(2.0, 0.05, 1);
        fx.spec.rays.truncate(1);
        fx.spec.rays[0].weight = 1.0;
        let f = build(&fx);
        let g = SuspensionGeometry::from_family(&f).unwrap();
        let v = volume_control(&f, &g, 1.0).unwrap();
        // Direct quadrature: (1 − cos 1)/(1 + cos 0.05) against the model.
        assert!((v.ball - (1.0 - 1f64.cos()) / (1.0 + 0.05f64.cos())).abs() < 1e-12);
        assert!(v.lower <= v.ball && v.ball <= v.upper);
        let near = volume_control(&f, &g, PI - 0.05 - 1e-9).unwrap();
        assert!((near.upper - 1.0).abs() < 1e-8 && (near.ball - 1.0).abs() < 1e-8);
    }

    #[test]
    fn suspensions_pass_volume_control() {
        for n in [2.0, 3.0] {
            for dp in [0.2, 0.02] {
                let f = build(&construct::suspension(n, dp, 5));
                let g = SuspensionGeometry::from_family(&f).unwrap();
                let mut last = 0.0;
                for i in 1..=50 {
                    let v = volume_control(&f, &g, (PI - dp) * i as f64 / 51.0).unwrap();
                    assert!(v.ball >= last);
                    last = v.ball;
                }
            }
        }
    }

    #[test]
    fn inconsistent_ray_fails_volume_control() {
        // A ray shorter than the pole distance allows cannot fill its ball.
        let mut fx = construct::rigid(2.0, 2);
        fx.spec.delta_pole = Some(0.01);
        fx.spec.rays[0].density = DensitySpec::Scaled;
        fx.spec.rays[0].d = 2.0;
        let f = build(&fx);
        let g = SuspensionGeometry::from_family(&f).unwrap();
        assert!(matches!(volume_control(&f, &g, 1.5), Err(Error::NonCdRay { ray: 0, .. })));
    }

    #[test]
    fn shrinking_generated_ray_is_a_precondition_error() {
        let mut fx = construct::rigid(2.0, 1);
        fx.spec.rays[0].d = 3.0;
        fx.spec.rays[0].density = DensitySpec::Generated { seed: 0, pieces: 1, max_level: 5.0, cells: 512 };
        assert!(matches!(RayFamily::from_spec(&fx.spec, Path::new(".")), Err(Error::Precondition(_))));
    }

    #[test]
    fn unspanned_cosine_mass_is_one() {
        for n in [2.0, 2.5, 3.0] {
            assert!((unspanned_cos_mass(n).unwrap() - 1.0).abs() < 1e-10);
        }
        assert!(sin_power_integral(1.0, 0.0, PI).unwrap() > 0.0);
    }

    #[test]
    fn mass_mismatch_is_rejected() {
        let mut fx = construct::rigid(2.0, 2);
        fx.spec.rays[0].weight = 0.6;
        assert!(matches!(RayFamily::from_spec(&fx.spec, Path::new(".")), Err(Error::Normalization { .. })));
        let mut fx = construct::rigid(2.0, 2);
        fx.spec.schema = "rayfam-v0".into();
        assert!(matches!(RayFamily::from_spec(&fx.spec, Path::new(".")), Err(Error::Parse(_))));
    }

    #[test]
    fn fixture_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let fx = construct::poincare_matched(2.0, 0.1, "pm");
        fx.write(dir.path(), "pm").unwrap();
        let f = RayFamily::load(&dir.path().join("pm.json")).unwrap();
        let r = run_pipeline(&f, Params::optimal(2.0)).unwrap();
        assert!(r.ledger.orth_total > 0.0 && r.certificates_hold());
    }
}
