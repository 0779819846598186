//! Gluing a rescaled bubble into the cone tip of a surgery metric.
//!
//! The glued radial coordinate is `u = s r` on the bubble side, where `r` is
//! the bubble's own radius, and `u = rho + s R3` on the surgery side. The two
//! descriptions are the same warped cone on the collar `r_hat/2 <= rho <= r_hat`,
//! and the metric switches from bubble to surgery at `rho = r_hat`.

use serde::{Deserialize, Serialize};

use crate::construction::bubble::{splice, Bubble};
use crate::construction::surgery::SurgeryMetric;
use crate::construction::MetricParams;
use crate::curvature::{MetricForm, WarpedMetric};
use crate::error::{param, Error, Result};
use crate::profiles::{lin_grid, Profile};

/// Largest relative mismatch allowed on the collar.
pub const COLLAR_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlueParams {
    pub epsilon: f64,
    pub alpha: f64,
    pub r_hat: f64,
    /// Length scale applied to the bubble.
    pub scale: f64,
    /// `s R3`: where the surgery's `rho = 0` sits in the glued coordinate.
    pub offset: f64,
    /// Inner warp coefficients of the surgery and of the rescaled bubble.
    pub delta_i: f64,
    pub delta_ii: f64,
    pub delta_common: f64,
    /// Glued coordinate of `rho = r_hat`.
    pub switch: f64,
    /// Max relative difference of `phi` and `f` between the two sides on the collar.
    pub collar_mismatch: f64,
    /// Ricci lower bound the glued metric should satisfy: the surgery's degraded bound.
    pub lambda_target: f64,
}

/// Relative tolerance for matching the bubble's cone angle and exponent.
const MATCH_TOL: f64 = 1e-9;

/// Glues `b` into `s`; the bubble's exterior cone must have the surgery's `eps` and `alpha`.
pub fn glue_bubble(s: &SurgeryMetric, b: &Bubble, c_const: f64) -> Result<WarpedMetric> {
    let (sp, bp) = (&s.params, &b.params);
    let close = |x: f64, y: f64| (x - y).abs() <= MATCH_TOL * x.abs().max(y.abs());
    if !close(sp.epsilon, bp.epsilon) {
        return Err(param(format!("cone angle mismatch: surgery eps {} vs bubble eps {}", sp.epsilon, bp.epsilon)));
    }
    if !close(sp.alpha, bp.alpha) {
        return Err(param(format!("warp exponent mismatch: surgery alpha {} vs bubble alpha {}", sp.alpha, bp.alpha)));
    }
    let MetricForm::Berger { a, b: bb, f } = &b.metric.form else {
        return Err(Error::Internal("bubble metric is not in Berger form".into()));
    };
    let (eps, alpha, r_hat) = (sp.epsilon, sp.alpha, sp.r_hat);
    // bubble exterior t = r - R3 >= t_ext; its collar must land in [r_hat/2, r_hat]
    let t_ext = b.exterior_start - bp.big_r3;
    let scale = 0.5 * r_hat / t_ext;
    let offset = scale * bp.big_r3;
    let switch = offset + r_hat;
    let delta_i = sp.delta;
    let delta_ii = scale.powf(1.0 - alpha) * bp.delta;
    let delta_common = delta_i.min(delta_ii);
    if !(delta_ii > 0.0 && delta_ii.is_finite()) {
        return Err(param(format!("rescaled bubble warp coefficient {delta_ii} underflows; the bubble is too large")));
    }

    let bubble_side = |p: &Profile, y: f64, label: &str| p.transformed(label, scale, 0.0, y);
    let surgery_side = |p: &Profile, y: f64, label: &str| p.transformed(label, 1.0, offset, y);
    let (ya, yf_b) = (scale, scale * delta_common / delta_ii);
    let yf_s = delta_common / delta_i;
    let phi_s = s.phi();
    let (a_b, b_b, f_b) = (bubble_side(a, ya, "A")?, bubble_side(bb, ya, "B")?, bubble_side(f, yf_b, "f")?);
    let (phi_g, f_g) = (surgery_side(phi_s, 1.0, "phi")?, surgery_side(s.f(), yf_s, "f")?);

    let mut mismatch = 0.0f64;
    for u in lin_grid(offset + 0.5 * r_hat, switch, 100) {
        let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs());
        mismatch = mismatch
            .max(rel(a_b.value(u)?, phi_g.value(u)?))
            .max(rel(b_b.value(u)?, phi_g.value(u)?))
            .max(rel(f_b.value(u)?, f_g.value(u)?));
    }
    if !(mismatch <= COLLAR_TOL) {
        return Err(Error::Internal(format!("collar mismatch {mismatch:e} exceeds {COLLAR_TOL:e}")));
    }

    let a_out = splice(&a_b, switch, &phi_g, "A")?;
    let b_out = splice(&b_b, switch, &phi_g, "B")?;
    let f_out = splice(&f_b, switch, &f_g, "f")?;
    let params = GlueParams {
        epsilon: eps,
        alpha,
        r_hat,
        scale,
        offset,
        delta_i,
        delta_ii,
        delta_common,
        switch,
        collar_mismatch: mismatch,
        lambda_target: sp.lambda_bound - c_const * eps,
    };
    Ok(WarpedMetric::new(
        format!("glued(bubble {} into surgery eps={eps}, r_hat={r_hat})", bp.h3_rule),
        MetricForm::Berger { a: a_out, b: b_out, f: f_out },
        (0.0, offset + 2.0),
        MetricParams::Glued(params),
    ))
}

/// The glued metric's parameter record.
pub fn glue_params(m: &WarpedMetric) -> Option<&GlueParams> {
    match &m.params {
        MetricParams::Glued(p) => Some(p),
        _ => None,
    }
}
