//! Comparison of a normalised `CD(N−1, N)` density with the model density.

use crate::error::{Error, Result};
use crate::measure::density::{omega, sin_reflected};
use crate::measure::WeightedInterval;
use crate::numerics::quad::sin_power_integral;

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub epsilon: f64,
    /// Whether `lower ≤ h ≤ upper` held at every interior node.
    pub bounds_hold: bool,
    /// Smallest `h − lower` and `upper − h` over interior nodes.
    pub lower_margin: f64,
    pub upper_margin: f64,
    /// `sup_t |h − h_N|` over the nodes of `[0, D]`.
    pub sup_deviation: f64,
    /// `sup |h − h_N| / (r^{N−2} ε)` over `[0,r] ∪ [π−r, D]`, when `r` given.
    pub windowed: Option<f64>,
}

/// Checks
/// `ω/(ωλ_D + ε) · min{h_N(t), h_N(t+ε)} ≤ h(t) ≤ ω/(ω − ε) · max{h_N(t), h_N(t+ε)}`
/// at interior nodes, where `λ_D = ∫_0^D h_N`, and reports the deviation
/// from `h_N`.
pub fn envelope_check(w: &WeightedInterval, r: Option<f64>) -> Result<EnvelopeReport> {
    w.require_probability()?;
    let n = w.dim();
    let om = omega(n)?;
    let d = w.length();
    let eps = w.epsilon();
    let lambda_d = sin_power_integral(n - 1.0, 0.0, d)? / om;
    let hn = |t: f64| sin_reflected(t).powf(n - 1.0) / om;
    let lo_factor = om / (om * lambda_d + eps);
    let hi_factor = if om > eps { om / (om - eps) } else { f64::INFINITY };
    let hmax = w.h().iter().fold(0.0f64, |a, b| a.max(*b));
    let slack = 1e-6 * hmax;
    let nodes = w.grid().nodes();
    let mut report = EnvelopeReport {
        epsilon: eps,
        bounds_hold: true,
        lower_margin: f64::INFINITY,
        upper_margin: f64::INFINITY,
        sup_deviation: 0.0,
        windowed: None,
    };
    for (i, (&t, &h)) in nodes.iter().zip(w.h()).enumerate() {
        let model = hn(t);
        report.sup_deviation = report.sup_deviation.max((h - model).abs());
        if i == 0 || i + 1 == nodes.len() {
            continue;
        }
        let (a, b) = (model, hn(t + eps));
        report.lower_margin = report.lower_margin.min(h - lo_factor * a.min(b));
        report.upper_margin = report.upper_margin.min(hi_factor * a.max(b) - h);
    }
    report.bounds_hold = report.lower_margin >= -slack && report.upper_margin >= -slack;
    if let Some(r) = r {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("window radius must be positive, got {r}")));
        }
        let pi = std::f64::consts::PI;
        let mut sup = 0.0f64;
        for (&t, &h) in nodes.iter().zip(w.h()) {
            if t <= r || t >= pi - r {
                sup = sup.max((h - hn(t)).abs());
            }
        }
        report.windowed = Some(if eps > 0.0 { sup / (r.powf(n - 2.0) * eps) } else { 0.0 });
    }
    Ok(report)
}
