//! Radial profiles of the conical surgery on a model base.

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::jet::Jet2;
use crate::profiles::{hermite5, lin_grid, Piece, Profile, Rule, TAU_C1};

/// Sup of `(|h-r| + |h'-1| + |h''|) / eps` over the Step-2 bridge must stay below this.
///
/// A bound of `10 eps` is out of reach: `h'` has to climb by `eps` while `h`
/// makes up a `eps/2` deficit on an interval of length `1/2`, which already
/// forces `sup |h''| > 12 eps`. The quintic Hermite bridge measures `20.45`.
pub const STEP2_BRIDGE_CONST: f64 = 24.0;

/// Universal constant in the smallness conditions of the log-warp interpolation.
pub const LOGWARP_C: f64 = 8.0;

/// Default half-width of the interpolation interval relative to `r_m`.
pub const DEFAULT_RHO: f64 = 1.0 / 32.0;

/// `h = (1-eps) r` on `[0, 1/2]`, quintic Hermite bridge on `[1/2, 1]`, `h = r` after.
pub fn make_step2_h(eps: f64, r_max: f64) -> Result<Profile> {
    if !(eps > 0.0 && eps < 0.1) {
        return Err(param(format!("epsilon = {eps} outside (0, 1/10)")));
    }
    let left = Jet2::new(0.5 * (1.0 - eps), 1.0 - eps, 0.0);
    let right = Jet2::new(1.0, 1.0, 0.0);
    let p = Profile::new(
        "h",
        vec![
            Piece::new(0.0, 0.5, Rule::Affine { v0: 0.0, slope: 1.0 - eps, r0: 0.0 }),
            Piece::new(0.5, 1.0, hermite5(0.5, 1.0, left, right)),
            Piece::new(1.0, r_max.max(2.0), Rule::Affine { v0: 0.0, slope: 1.0, r0: 0.0 }),
        ],
    )?;
    p.check_c1(TAU_C1)?;
    let sup = step2_bridge_sup(&p)?;
    if sup > STEP2_BRIDGE_CONST * eps {
        return Err(Error::Internal(format!("bridge bound {sup} exceeds {STEP2_BRIDGE_CONST} eps")));
    }
    Ok(p)
}

/// `sup (|h-r| + |h'-1| + |h''|)` over the bridge `[1/2, 1]`.
pub fn step2_bridge_sup(h: &Profile) -> Result<f64> {
    let mut sup = 0.0f64;
    for r in lin_grid(0.5, 1.0, 4001) {
        let j = h.eval_with(0.75, r)?;
        sup = sup.max((j.v - r).abs() + (j.d1 - 1.0).abs() + j.d2.abs());
    }
    Ok(sup)
}

/// Cutoff `xi`: 0 below `r3`, 1 above `2 r3`, and in between the quintic
/// smoothstep `10t^3 - 15t^4 + 6t^5` of `t = log2(r / r3)`.
///
/// Taking the smoothstep in `ln r` keeps `|xi''| <= 16/r^2`; the same
/// polynomial in `r` peaks at `16.03/r^2` near the top of the bridge.
pub fn make_xi(r3: f64, r_max: f64) -> Result<Profile> {
    if !(r3 > 0.0 && 2.0 * r3 < r_max) {
        return Err(param(format!("cutoff radius r3 = {r3} must satisfy 0 < 2 r3 < {r_max}")));
    }
    let p = Profile::new(
        "xi",
        vec![
            Piece::new(0.0, r3, Rule::Constant { c: 0.0 }),
            Piece::new(
                r3,
                2.0 * r3,
                Rule::LogPoly { lo: r3, len: std::f64::consts::LN_2, coeffs: vec![0.0, 0.0, 0.0, 10.0, -15.0, 6.0] },
            ),
            Piece::new(2.0 * r3, r_max, Rule::Constant { c: 1.0 }),
        ],
    )?;
    for r in lin_grid(r3, 2.0 * r3, 2001) {
        let j = p.eval_with(1.5 * r3, r)?;
        if j.d1.abs() > 4.0 / r || j.d2.abs() > 16.0 / (r * r) {
            return Err(Error::Internal(format!("cutoff derivative bound fails at r = {r}: {j}")));
        }
    }
    Ok(p)
}

/// `mu = sn_kappa(r) / r` on `[0, r_max]`.
pub fn make_model_mu(kappa: f64, r_max: f64) -> Result<Profile> {
    if kappa > 0.0 && kappa * r_max * r_max >= std::f64::consts::PI.powi(2) / 4.0 {
        return Err(param(format!("kappa r_max^2 = {} reaches pi^2/4", kappa * r_max * r_max)));
    }
    Profile::single("mu", r_max, Rule::Mu { kappa })
}

/// One inequality of the interpolation smallness regime.
#[derive(Clone, Debug, Serialize)]
pub struct SmallnessCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Result of the log-warp interpolation.
#[derive(Clone, Debug)]
pub struct CubicLogwarp {
    pub profile: Profile,
    pub delta: f64,
    pub r2: f64,
    pub r2plus: f64,
    pub checks: Vec<SmallnessCheck>,
}

/// Smallness inequalities for `(alpha, r_m, rho, eta)`.
pub fn smallness_checks(alpha: f64, r_m: f64, rho: f64, eta: f64) -> Vec<SmallnessCheck> {
    let c = LOGWARP_C;
    let e = (-4.0 * eta * r_m / alpha).exp();
    let chk = |name, lhs: f64, rhs: f64, holds: bool| SmallnessCheck { name, lhs, rhs, holds };
    vec![
        chk("rho: -1/(2 rho) + C/(1-rho) < -4/(1-rho)", -1.0 / (2.0 * rho) + c / (1.0 - rho), -4.0 / (1.0 - rho), -1.0 / (2.0 * rho) + c / (1.0 - rho) < -4.0 / (1.0 - rho)),
        chk("exp(-4 eta r_m / alpha) > 1 - rho", e, 1.0 - rho, e > 1.0 - rho),
        chk("|1 - exp(-4 eta r_m / alpha)| <= 2 rho^2 / (3 (1-rho))", (1.0 - e).abs(), 2.0 * rho * rho / (3.0 * (1.0 - rho)), (1.0 - e).abs() <= 2.0 * rho * rho / (3.0 * (1.0 - rho))),
        {
            let rhs = alpha / ((1.0 / (2.0 * rho) + 1.0 / (1.0 - rho) + c * r_m) * (1.0 - rho).powi(2) * r_m * r_m);
            chk("eta / r_m <= (1/(2 rho) + 1/(1-rho) + C r_m)^-1 alpha / ((1-rho)^2 r_m^2)", eta / r_m, rhs, eta / r_m <= rhs)
        },
        chk("alpha <= ((1-rho)/(1+rho))^2", alpha, ((1.0 - rho) / (1.0 + rho)).powi(2), alpha <= ((1.0 - rho) / (1.0 + rho)).powi(2)),
    ]
}

/// `f2 = delta r^alpha` below `(1-rho) r_m`, `exp` of the cubic Hermite
/// interpolant of `ln f2` across `[(1-rho) r_m, (1+rho) r_m]`, `f_plus` above.
/// `delta = f_plus(0) r_m^-alpha e^(2 eta r_m)`.
pub fn make_cubic_logwarp(f_plus: &Profile, alpha: f64, r_m: f64, rho: f64, eta: f64) -> Result<CubicLogwarp> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(param(format!("alpha = {alpha} outside (0, 1)")));
    }
    if !(rho > 0.0 && rho < 0.5 && r_m > 0.0 && eta >= 0.0) {
        return Err(param(format!("need 0 < rho < 1/2, r_m > 0, eta >= 0 (got {rho}, {r_m}, {eta})")));
    }
    let checks = smallness_checks(alpha, r_m, rho, eta);
    if let Some(bad) = checks.iter().find(|c| !c.holds) {
        return Err(param(format!("smallness regime violated: {} ({} vs {}); decrease r_m", bad.name, bad.lhs, bad.rhs)));
    }
    let (r2, r2plus) = ((1.0 - rho) * r_m, (1.0 + rho) * r_m);
    if f_plus.r_max() <= r2plus {
        return Err(param("f_plus must extend past the interpolation interval"));
    }
    // radial log-derivative of f_plus must stay below eta near the center
    for r in lin_grid(0.0, 2.0 * r_m, 257) {
        let j = f_plus.eval(r)?;
        if (j.d1 / j.v).abs() > eta * (1.0 + 1e-12) {
            return Err(param(format!("|d ln f_plus/dr| = {} exceeds eta = {eta} at r = {r}", (j.d1 / j.v).abs())));
        }
    }
    let delta = f_plus.value(0.0)? * r_m.powf(-alpha) * (2.0 * eta * r_m).exp();
    let outer = f_plus.eval(r2plus)?;
    let inter = Rule::LogHermite {
        lo: r2,
        hi: r2plus,
        l0: delta.ln() + alpha * r2.ln(),
        s0: alpha / r2,
        l1: outer.v.ln(),
        s1: outer.d1 / outer.v,
    };
    let mut pieces = vec![
        Piece::new(0.0, r2, Rule::PowerLaw { c: delta, shift: 0.0, scale: 1.0, p: alpha }),
        Piece::new(r2, r2plus, inter),
    ];
    for p in &f_plus.pieces {
        if p.hi > r2plus {
            pieces.push(Piece::new(p.lo.max(r2plus), p.hi, p.rule.clone()));
        }
    }
    let profile = Profile::new("f_surgery", pieces)?;
    profile.check_c1(TAU_C1)?;
    for r in lin_grid(r2, r2plus, 10_001).into_iter().skip(1).take(9_999) {
        let j = profile.eval_with(r_m, r)?;
        if j.d2 / j.v > -alpha / (r * r) {
            return Err(param(format!(
                "log-warp concavity fails at r = {r}: f''/f = {} > -alpha/r^2 = {}; decrease r_m",
                j.d2 / j.v,
                -alpha / (r * r)
            )));
        }
    }
    Ok(CubicLogwarp { profile, delta, r2, r2plus, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::log_grid;

    #[test]
    fn step2_h_anchors_and_affine_ends() {
        let h = make_step2_h(0.05, 2.0).unwrap();
        assert!((h.eval_with(0.75, 0.5).unwrap().v - 0.475).abs() < 1e-15);
        assert!((h.eval_with(0.75, 1.0).unwrap().v - 1.0).abs() < 1e-15);
        assert_eq!(h.eval(0.3).unwrap().d2, 0.0);
        assert_eq!(h.eval(1.5).unwrap().d2, 0.0);
        let sup = step2_bridge_sup(&h).unwrap();
        assert!(sup <= STEP2_BRIDGE_CONST * 0.05);
    }

    /// No C2 bridge can meet `sup |h''| <= 10 eps`: integrating `|h''| <= M`
    /// twice from the left end, the largest value `h(1) - 1` can reach is
    /// attained by `h'' = M` then `-M` (bang-bang), which still falls short.
    #[test]
    fn ten_eps_bridge_is_infeasible() {
        let eps = 0.05;
        let reach = |m: f64| {
            // h' must go from 1-eps to 1; maximize u(1) = h(1) - 1 with u(1/2) = -eps/2.
            // Switch time s solves: eps + M s - M (1/2 - s) = 0.
            let s = (eps + 0.5 * m) / (2.0 * m);
            let mut u = -eps / 2.0;
            let mut du = -eps;
            let n = 200_000;
            let dt = 0.5 / n as f64;
            for i in 0..n {
                let t = i as f64 * dt;
                let a = if t < s { m } else { -m };
                u += du * dt + 0.5 * a * dt * dt;
                du += a * dt;
            }
            u
        };
        assert!(reach(10.0 * eps) < 0.0, "10 eps would be feasible");
        // the remaining |h-r| + |h'-1| terms only make it worse; the threshold is above 12 eps
        assert!(reach(12.0 * eps) < 0.0);
        assert!(reach(13.0 * eps) > 0.0);
    }

    #[test]
    fn xi_endpoints() {
        let xi = make_xi(0.05, 2.0).unwrap();
        let a = xi.eval_with(0.07, 0.05).unwrap();
        let b = xi.eval_with(0.07, 0.1).unwrap();
        assert_eq!((a.v, a.d1), (0.0, 0.0));
        assert!((b.v - 1.0).abs() < 1e-15 && b.d1.abs() < 1e-12);
        xi.check_c1(TAU_C1).unwrap();
    }

    #[test]
    fn mu_limits_and_decay() {
        for kappa in [-1.0, 0.0, 1.0] {
            let mu = make_model_mu(kappa, 1.0).unwrap();
            assert!((mu.value(1e-12).unwrap() - 1.0).abs() < 1e-15);
            // continuity across the series switch
            let a = mu.eval(SWITCH_BELOW).unwrap();
            let b = mu.eval(SWITCH_ABOVE).unwrap();
            assert!((a.v - b.v).abs() < 1e-12 && (a.d1 - b.d1).abs() < 1e-9);
        }
        let mu = make_model_mu(1.0, 1.0).unwrap();
        for r in log_grid(1e-6, 1.0, 500) {
            let v = mu.value(r).unwrap();
            assert!((v - 1.0).abs() <= (1.0 / 6.0 + 1e-3) * r * r);
        }
        assert!(make_model_mu(3.0, 1.0).is_err());
    }

    const SWITCH_BELOW: f64 = 0.999_999e-3;
    const SWITCH_ABOVE: f64 = 1.000_001e-3;

    #[test]
    fn default_rho_satisfies_its_inequality() {
        let checks = smallness_checks(0.01, 0.25, DEFAULT_RHO, 0.0);
        assert!(checks.iter().all(|c| c.holds), "{checks:?}");
        let bad = smallness_checks(0.01, 0.25, 1.0 / 16.0, 0.0);
        assert!(!bad[0].holds);
    }

    #[test]
    fn constant_f_plus_interpolation() {
        let c = 0.3;
        let fp = Profile::single("f_plus", 2.0, Rule::Constant { c }).unwrap();
        let (alpha, r_m) = (0.01, 0.25);
        let lw = make_cubic_logwarp(&fp, alpha, r_m, DEFAULT_RHO, 0.0).unwrap();
        assert!((lw.delta - c * r_m.powf(-alpha)).abs() < 1e-15);
        for j in lw.profile.joints().unwrap() {
            assert!(j.rel_dv < 1e-10 && j.rel_d1 < 1e-10, "{j:?}");
        }
        let at = lw.profile.eval_with(r_m, lw.r2).unwrap();
        assert!((at.d1 / at.v - alpha / lw.r2).abs() < 1e-10);
        assert_eq!(lw.profile.eval(1.5).unwrap().v, c);
    }

    #[test]
    fn logwarp_rejects_large_eta() {
        let fp = Profile::single("f_plus", 2.0, Rule::Constant { c: 1.0 }).unwrap();
        assert!(make_cubic_logwarp(&fp, 0.01, 0.25, DEFAULT_RHO, 1.0).is_err());
        assert!(make_cubic_logwarp(&fp, 0.01, 1e-7, DEFAULT_RHO, 1.0).is_ok());
    }
}
