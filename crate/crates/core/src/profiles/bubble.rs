//! Radial profiles of the positive-Ricci bubble.

use crate::error::{param, Error, Result};
use crate::profiles::{Piece, Profile, Rule, TAU_C1};

/// `k` with `cos(k r1) = m`.
pub fn solve_k(m: f64, r1: f64) -> f64 {
    m.acos() / r1
}

fn check_m(m: f64, r1: f64) -> Result<()> {
    if !(m > 0.0 && m < 0.01) {
        return Err(param(format!("m = {m} outside (0, 1/100)")));
    }
    if !(r1 > 0.0 && r1.is_finite()) {
        return Err(param(format!("r1 = {r1} must be positive")));
    }
    Ok(())
}

/// `A = sin(k r)/k` on `[0, r1]`, slope-`m` affine continuation up to `r_max`.
/// Returns the profile and `k`.
pub fn make_a(m: f64, r1: f64, r_max: f64) -> Result<(Profile, f64)> {
    check_m(m, r1)?;
    let k = solve_k(m, r1);
    let a_r1 = (1.0 - m * m).sqrt() / k;
    let p = Profile::new(
        "A",
        vec![
            Piece::new(0.0, r1, Rule::SinK { k }),
            Piece::new(r1, r_max.max(2.0 * r1), Rule::Affine { v0: a_r1, slope: m, r0: r1 }),
        ],
    )?;
    Ok((p, k))
}

/// `B = b` on `[0, r1/2]`, bump bridge with total slope gain `m` on
/// `[r1/2, r1]`, then matching `A`'s affine continuation. Returns the profile and `b`.
pub fn make_b(m: f64, r1: f64, k: f64, a: &Profile, r_max: f64) -> Result<(Profile, f64)> {
    check_m(m, r1)?;
    let at = a.eval_with(0.5 * r1, r1)?;
    // mean position of the bump is the bridge midpoint, so B gains m * r1/4
    let b = at.v - m * r1 / 4.0;
    let upper = (1.0 - m * m).sqrt() / k;
    let lower = 1.0 / (2.0 * k);
    if !(b > lower && b < upper) {
        return Err(Error::Construction(format!(
            "plateau b = {b} outside (1/(2k), sqrt(1-m^2)/k) = ({lower}, {upper}); m too large"
        )));
    }
    let p = Profile::new(
        "B",
        vec![
            Piece::new(0.0, 0.5 * r1, Rule::Constant { c: b }),
            Piece::new(0.5 * r1, r1, Rule::BumpBridge { lo: 0.5 * r1, hi: r1, b, m }),
            Piece::new(r1, r_max.max(2.0 * r1), Rule::Affine { v0: at.v, slope: m, r0: r1 }),
        ],
    )?;
    Ok((p, b))
}

/// `f2 = delta2 (1 + r^2)^(alpha2/2)` on `[0, r_max]`.
pub fn make_f2(delta2: f64, alpha2: f64, r_max: f64) -> Result<Profile> {
    if !(alpha2 > 0.0 && alpha2 <= 0.5) {
        return Err(param(format!("alpha2 = {alpha2} outside (0, 1/2]")));
    }
    if !(delta2 > 0.0 && delta2 < 1.0) {
        return Err(param(format!("delta2 = {delta2} outside (0, 1)")));
    }
    Profile::single("f2", r_max, Rule::F2 { delta2, alpha2 })
}

/// The cone-forming profile and the data it determines.
#[derive(Clone, Debug)]
pub struct H3 {
    pub profile: Profile,
    /// Coefficient of `h'' = c / r` (or the Euler `kappa` for the balanced rule).
    pub c: f64,
    pub r3: f64,
    /// Cone vertex offset: `h = (1-eps)(r - R3)` past `r3`.
    pub big_r3: f64,
}

fn h3_profile(eps: f64, r1: f64, r3: f64, a_r1: f64, m: f64, middle: Rule, r_max: f64) -> Result<H3> {
    let h_r3 = middle.eval(r3)?.v;
    let big_r3 = r3 - h_r3 / (1.0 - eps);
    if !(big_r3 > 0.0) {
        return Err(Error::Construction(format!("cone offset R3 = {big_r3} is not positive")));
    }
    let profile = Profile::new(
        "h3",
        vec![
            Piece::new(0.0, r1, Rule::Affine { v0: a_r1, slope: m, r0: r1 }),
            Piece::new(r1, r3, middle),
            Piece::new(r3, r_max.max(2.0 * r3), Rule::Affine { v0: 0.0, slope: 1.0 - eps, r0: big_r3 }),
        ],
    )?;
    profile.check_c1(TAU_C1)?;
    Ok(H3 { profile, c: 0.0, r3, big_r3 })
}

/// `h3'' = c/r` on `[r1, r3]` raising the slope from `m` to `1-eps`.
pub fn make_h3(m: f64, eps: f64, r1: f64, r3: f64, a_r1: f64, r_max: f64) -> Result<H3> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(param(format!("epsilon = {eps} outside (0, 1)")));
    }
    if !(r3 > r1) {
        return Err(param(format!("r3 = {r3} must exceed r1 = {r1}")));
    }
    let c = (1.0 - eps - m) / (r3 / r1).ln();
    if c > 10.0 / r3.ln() {
        // c <= 10/ln r3  <=>  ln r3 (1-eps-m) <= 10 ln(r3/r1)
        let min_r3 = (10.0 * r1.ln() / (10.0 - (1.0 - eps - m))).exp();
        return Err(param(format!("slope budget infeasible: c = {c} > 10/ln r3; need r3 > {min_r3}")));
    }
    let mut h = h3_profile(eps, r1, r3, a_r1, m, Rule::H3Log { a0: a_r1, m, c, r1 }, r_max)?;
    h.c = c;
    Ok(h)
}

/// Alternative cone-forming profile solving `h'' = kappa h / r^2` from `(a_r1, m)`
/// at `r1`; `r3` is where the slope reaches `1-eps`.
///
/// With `kappa` below `(2/3) alpha2 (1 - alpha2)` the radial Ricci block stays
/// positive on `[r1, r3]`, at the price of a very large `r3`.
pub fn make_h3_balanced(m: f64, eps: f64, r1: f64, kappa: f64, a_r1: f64, r_max_factor: f64) -> Result<H3> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(param(format!("epsilon = {eps} outside (0, 1)")));
    }
    if !(kappa > 0.0 && kappa < 0.25) {
        return Err(param(format!("kappa = {kappa} outside (0, 1/4)")));
    }
    let disc = (1.0 + 4.0 * kappa).sqrt();
    let (q1, q2) = ((1.0 + disc) / 2.0, (1.0 - disc) / 2.0);
    let c1 = (m * r1 - q2 * a_r1) / (q1 - q2);
    let c2 = a_r1 - c1;
    let rule = Rule::Euler { r1, c1, q1, c2, q2 };
    let target = 1.0 - eps;
    // slope grows monotonically; bracket in ln r then bisect
    let slope = |ln_r: f64| rule.eval(ln_r.exp()).map(|j| j.d1);
    let (mut lo, mut hi) = (r1.ln(), r1.ln() + 1.0);
    while slope(hi)? < target {
        lo = hi;
        hi = lo + 2.0 * (hi - r1.ln());
        if hi > 700.0 {
            return Err(param(format!("kappa = {kappa}: slope 1-eps not reached below r = e^700")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r3 = hi.exp();
    // continue affinely with the exact slope reached at r3
    let j = rule.eval(r3)?;
    let eps_eff = 1.0 - j.d1;
    let mut h = h3_profile(eps_eff, r1, r3, a_r1, m, rule, r_max_factor * r3)?;
    h.c = kappa;
    Ok(h)
}

/// `f4 = f2` up to `r3`, `delta (r - R3)^alpha` after; returns `(profile, alpha, delta)`.
pub fn make_f4(delta2: f64, alpha2: f64, eps: f64, h3: &H3, r_max: f64) -> Result<(Profile, f64, f64)> {
    let r3 = h3.r3;
    let t3 = h3.profile.eval_with(0.5 * (h3.profile.pieces[1].lo + r3), r3)?.v / (1.0 - eps);
    let alpha = alpha2 * (t3 / r3) / (1.0 + 1.0 / (r3 * r3));
    let f2_r3 = Rule::F2 { delta2, alpha2 }.eval(r3)?.v;
    let delta = f2_r3 / t3.powf(alpha);
    if !(alpha < alpha2) {
        return Err(Error::Construction(format!("alpha = {alpha} not below alpha2 = {alpha2}")));
    }
    let p = Profile::new(
        "f4",
        vec![
            Piece::new(0.0, r3, Rule::F2 { delta2, alpha2 }),
            Piece::new(r3, r_max.max(2.0 * r3), Rule::PowerLaw { c: delta, shift: h3.big_r3, scale: 1.0, p: alpha }),
        ],
    )?;
    p.check_c1(TAU_C1)?;
    Ok((p, alpha, delta))
}

/// Blow-down reparametrization `lambda`.
pub fn make_lambda(r3: f64, big_r3: f64, r_max: f64) -> Result<Profile> {
    if !(big_r3 > 0.0 && big_r3 < r3) {
        return Err(param(format!("need 0 < R3 = {big_r3} < r3 = {r3}")));
    }
    let t3 = r3 - big_r3;
    let p = r3 / t3;
    Profile::new(
        "lambda",
        vec![
            Piece::new(0.0, r3, Rule::PowerLaw { c: t3, shift: 0.0, scale: r3, p }),
            Piece::new(r3, r_max.max(2.0 * r3), Rule::Affine { v0: 0.0, slope: 1.0, r0: big_r3 }),
        ],
    )
}
