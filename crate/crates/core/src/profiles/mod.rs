//! Piecewise radial profiles.
//!
//! A [`Profile`] is an ordered list of [`Piece`]s partitioning `[0, r_max]`,
//! each carrying a closed-form [`Rule`] that evaluates to a [`Jet2`]. The last
//! piece extends past `r_max` so profiles can be evaluated on any `r >= 0`.

pub mod bubble;
pub mod join;
pub mod surgery;

use std::io::Write;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::jet::Jet2;

pub use bubble::{make_a, make_b, make_f2, make_f4, make_h3, make_h3_balanced, make_lambda, solve_k, H3};
pub use join::join_rule;
pub use surgery::{
    make_cubic_logwarp, make_model_mu, make_step2_h, make_xi, CubicLogwarp, SmallnessCheck, DEFAULT_RHO, LOGWARP_C,
    STEP2_BRIDGE_CONST,
};

/// Default relative tolerance for the C1 breakpoint check.
pub const TAU_C1: f64 = 1e-9;

/// Closed-form rule of one piece.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    Constant { c: f64 },
    /// `v0 + slope (r - r0)`
    Affine { v0: f64, slope: f64, r0: f64 },
    /// `sin(k r) / k`
    SinK { k: f64 },
    /// `c ((r - shift) / scale)^p`
    PowerLaw { c: f64, shift: f64, scale: f64, p: f64 },
    /// `delta2 (1 + r^2)^(alpha2 / 2)`
    F2 { delta2: f64, alpha2: f64 },
    /// `a0 + m (r - r1) + c (r ln(r/r1) - (r - r1))`, so that `h'' = c / r`.
    H3Log { a0: f64, m: f64, c: f64, r1: f64 },
    /// `c1 (r/r1)^q1 + c2 (r/r1)^q2`, the solutions of `h'' = kappa h / r^2`.
    Euler { r1: f64, c1: f64, q1: f64, c2: f64, q2: f64 },
    /// `b + m * double integral` of a normalized `exp(-1/(1-x^2))` bump on `[lo, hi]`.
    BumpBridge { lo: f64, hi: f64, b: f64, m: f64 },
    /// `sum coeffs[i] t^i` with `t = (r - lo) / len`.
    Poly { lo: f64, len: f64, coeffs: Vec<f64> },
    /// `sum coeffs[i] t^i` with `t = ln(r / lo) / len`.
    LogPoly { lo: f64, len: f64, coeffs: Vec<f64> },
    /// `exp(Q)` where `Q` is the cubic Hermite interpolant on `[lo, hi]` of
    /// values `l0, l1` and slopes `s0, s1`.
    LogHermite { lo: f64, hi: f64, l0: f64, s0: f64, l1: f64, s1: f64 },
    /// `sn_kappa(r)`
    SnKappa { kappa: f64 },
    /// `sn_kappa(r) / r`
    Mu { kappa: f64 },
    /// `h(r) sqrt(xi(r) mu(r)^2 + 1 - xi(r))`
    ModelBlend { h: Box<Rule>, xi: Box<Rule>, kappa: f64 },
    Product { factors: Vec<Rule> },
    /// `y_scale * inner((r - x_shift) / x_scale)`
    Scaled { inner: Box<Rule>, x_scale: f64, x_shift: f64, y_scale: f64 },
    /// C2 join of two rules that agree to first order at `at`, on
    /// `[at - half_width, at + half_width]`; build with [`join_rule`].
    Join { left: Box<Rule>, right: Box<Rule>, at: f64, half_width: f64, tau: f64, shift: f64, beta: f64, below: bool },
}

/// Below this radius `mu` is evaluated from its Taylor series.
pub const SERIES_SWITCH: f64 = 1e-3;

impl Rule {
    pub fn eval(&self, r: f64) -> Result<Jet2> {
        let x = Jet2::variable(r);
        let j = match self {
            Rule::Constant { c } => Jet2::constant(*c),
            Rule::Affine { v0, slope, r0 } => Jet2::new(v0 + slope * (r - r0), *slope, 0.0),
            Rule::SinK { k } => (x * *k).sin().scale(1.0 / k),
            Rule::PowerLaw { c, shift, scale, p } => {
                let t = (r - shift) / scale;
                if t < 0.0 || (t == 0.0 && *p < 2.0 && *p != 0.0 && *p != 1.0) {
                    return Err(Error::Domain { what: format!("power law base {t} with exponent {p}"), r });
                }
                let v = c * t.powf(*p);
                let d1 = if *p == 0.0 { 0.0 } else { c * p * t.powf(p - 1.0) / scale };
                let d2 = if *p == 0.0 || *p == 1.0 { 0.0 } else { c * p * (p - 1.0) * t.powf(p - 2.0) / (scale * scale) };
                Jet2::new(v, d1, d2)
            }
            Rule::F2 { delta2, alpha2 } => {
                let (v, l1, l2) = if r <= 1.0 {
                    let q = 1.0 + r * r;
                    (delta2 * q.powf(alpha2 / 2.0), alpha2 * r / q, alpha2 * (1.0 - r * r) / (q * q))
                } else {
                    // in u = 1/r so that (1 + r^2)^2 cannot overflow
                    let u = 1.0 / r;
                    let q = 1.0 + u * u;
                    let v = delta2 * r.powf(*alpha2) * q.powf(alpha2 / 2.0);
                    (v, alpha2 * u / q, alpha2 * u * u * (u * u - 1.0) / (q * q))
                };
                Jet2::new(v, v * l1, v * (l2 + l1 * l1))
            }
            Rule::H3Log { a0, m, c, r1 } => {
                if r <= 0.0 {
                    return Err(Error::Domain { what: "logarithmic profile at r <= 0".into(), r });
                }
                let l = (r / r1).ln();
                Jet2::new(a0 + m * (r - r1) + c * (r * l - (r - r1)), m + c * l, c / r)
            }
            Rule::Euler { r1, c1, q1, c2, q2 } => {
                if r <= 0.0 {
                    return Err(Error::Domain { what: "Euler profile at r <= 0".into(), r });
                }
                let t = r / r1;
                let term = |c: f64, q: f64| {
                    let v = c * t.powf(q);
                    Jet2::new(v, q * v / r, q * (q - 1.0) * v / (r * r))
                };
                term(*c1, *q1) + term(*c2, *q2)
            }
            Rule::BumpBridge { lo, hi, b, m } => bump_bridge(*lo, *hi, *b, *m, r),
            Rule::Poly { lo, len, coeffs } => {
                let t = Jet2::new((r - lo) / len, 1.0 / len, 0.0);
                let mut acc = Jet2::ZERO;
                for c in coeffs.iter().rev() {
                    acc = acc * t + *c;
                }
                acc
            }
            Rule::LogPoly { lo, len, coeffs } => {
                if r <= 0.0 {
                    return Err(Error::Domain { what: "log-variable polynomial at r <= 0".into(), r });
                }
                let t = Jet2::new((r / lo).ln() / len, 1.0 / (r * len), -1.0 / (r * r * len));
                let mut acc = Jet2::ZERO;
                for c in coeffs.iter().rev() {
                    acc = acc * t + *c;
                }
                acc
            }
            Rule::LogHermite { lo, hi, l0, s0, l1, s1 } => {
                let len = hi - lo;
                let t = (x - *lo).scale(1.0 / len);
                let u = Jet2::ONE - t;
                let right = Jet2::constant(*l1) - (Jet2::constant(*hi) - x).scale(s1 - 2.0 * l1 / len);
                let left = Jet2::constant(*l0) + (x - *lo).scale(s0 + 2.0 * l0 / len);
                (t * t * right + u * u * left).exp()
            }
            Rule::SnKappa { kappa } => sn_kappa(*kappa, r),
            Rule::Mu { kappa } => mu_jet(*kappa, r)?,
            Rule::ModelBlend { h, xi, kappa } => {
                let h = h.eval(r)?;
                let xi = xi.eval(r)?;
                let mu = mu_jet(*kappa, r)?;
                let inner = xi * (mu * mu - 1.0) + 1.0;
                if inner.v <= 0.0 {
                    return Err(Error::Domain { what: "model blend radicand not positive".into(), r });
                }
                h * inner.sqrt()
            }
            Rule::Product { factors } => {
                let mut acc = Jet2::ONE;
                for f in factors {
                    acc = acc * f.eval(r)?;
                }
                acc
            }
            Rule::Scaled { inner, x_scale, x_shift, y_scale } => {
                let j = inner.eval((r - x_shift) / x_scale)?;
                Jet2::new(y_scale * j.v, y_scale * j.d1 / x_scale, y_scale * j.d2 / (x_scale * x_scale))
            }
            Rule::Join { left, right, at, half_width, tau, shift, beta, below } => {
                join::join_jet(left, right, *at, *half_width, *tau, *shift, *beta, *below, r)?
            }
        };
        if !j.is_finite() {
            return Err(Error::Domain { what: format!("non-finite jet {j}"), r });
        }
        Ok(j)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Rule::Constant { .. } => "constant",
            Rule::Affine { .. } => "affine",
            Rule::SinK { .. } => "sin_k",
            Rule::PowerLaw { .. } => "power_law",
            Rule::F2 { .. } => "f2",
            Rule::H3Log { .. } => "h3_log",
            Rule::Euler { .. } => "euler",
            Rule::BumpBridge { .. } => "bump_bridge",
            Rule::Poly { .. } => "poly",
            Rule::LogPoly { .. } => "log_poly",
            Rule::LogHermite { .. } => "log_hermite",
            Rule::SnKappa { .. } => "sn_kappa",
            Rule::Mu { .. } => "mu",
            Rule::ModelBlend { .. } => "model_blend",
            Rule::Product { .. } => "product",
            Rule::Scaled { .. } => "scaled",
            Rule::Join { .. } => "join",
        }
    }
}

/// `sn_kappa` as a jet: `sin(sqrt(k) r)/sqrt(k)`, `r`, or the `sinh` analog.
pub fn sn_kappa(kappa: f64, r: f64) -> Jet2 {
    let x = Jet2::variable(r);
    if kappa > 0.0 {
        let s = kappa.sqrt();
        (x * s).sin().scale(1.0 / s)
    } else if kappa < 0.0 {
        let s = (-kappa).sqrt();
        (x * s).sinh().scale(1.0 / s)
    } else {
        x
    }
}

fn mu_jet(kappa: f64, r: f64) -> Result<Jet2> {
    if r < 0.0 {
        return Err(Error::Domain { what: "mu at negative radius".into(), r });
    }
    if r < SERIES_SWITCH {
        let (k, r2) = (kappa, r * r);
        let v = 1.0 - k * r2 / 6.0 + k * k * r2 * r2 / 120.0 - k * k * k * r2 * r2 * r2 / 5040.0;
        let d1 = -k * r / 3.0 + k * k * r2 * r / 30.0 - k * k * k * r2 * r2 * r / 840.0;
        let d2 = -k / 3.0 + k * k * r2 / 10.0 - k * k * k * r2 * r2 / 168.0;
        return Ok(Jet2::new(v, d1, d2));
    }
    Ok(sn_kappa(kappa, r) / Jet2::variable(r))
}

/// Quintic Hermite interpolant on `[lo, hi]` matching full jets at both ends.
pub fn hermite5(lo: f64, hi: f64, left: Jet2, right: Jet2) -> Rule {
    let len = hi - lo;
    let (v0, d0, dd0) = (left.v, left.d1 * len, left.d2 * len * len);
    let (v1, d1, dd1) = (right.v, right.d1 * len, right.d2 * len * len);
    let dv = v1 - v0;
    let coeffs = vec![
        v0,
        d0,
        dd0 / 2.0,
        10.0 * dv - 6.0 * d0 - 4.0 * d1 - (3.0 * dd0 - dd1) / 2.0,
        -15.0 * dv + 8.0 * d0 + 7.0 * d1 + (3.0 * dd0 - 2.0 * dd1) / 2.0,
        6.0 * dv - 3.0 * d0 - 3.0 * d1 - (dd0 - dd1) / 2.0,
    ];
    Rule::Poly { lo, len, coeffs }
}

// ---------------------------------------------------------------------------
// Bump quadrature

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = -x;
        xs[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

const GL_ORDER: usize = 12;
const GL_PANELS: usize = 24;

fn gl_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Composite Gauss-Legendre integral of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (xs, ws) = gl_rule();
    let h = (b - a) / GL_PANELS as f64;
    let mut total = 0.0;
    for p in 0..GL_PANELS {
        let mid = a + (p as f64 + 0.5) * h;
        let mut s = 0.0;
        for (x, w) in xs.iter().zip(ws) {
            s += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}

fn raw_bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

/// `∫_{-1}^{1} exp(-1/(1-x^2)) dx`
pub fn bump_mass() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| integrate(raw_bump, -1.0, 1.0))
}

/// Peak-to-mean ratio of the normalized bump on `[-1, 1]`.
pub fn bump_peak_ratio() -> f64 {
    2.0 * (-1.0f64).exp() / bump_mass()
}

fn bump_bridge(lo: f64, hi: f64, b: f64, m: f64, r: f64) -> Jet2 {
    let half = 0.5 * (hi - lo);
    let x = ((r - lo) / half - 1.0).clamp(-1.0, 1.0);
    let z = bump_mass();
    let w = raw_bump(x) / z;
    let cdf = integrate(raw_bump, -1.0, x) / z;
    let first = integrate(|y| (x - y) * raw_bump(y), -1.0, x) / z;
    // past the bridge the profile continues affinely
    let extra = if r > hi { r - hi } else if r < lo { r - lo } else { 0.0 };
    let cdf_out = if r < lo { 0.0 } else { cdf };
    Jet2::new(b + m * (half * first + extra * cdf_out), m * cdf_out, m * w / half)
}

// ---------------------------------------------------------------------------
// Profiles

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub rule: Rule,
}

impl Piece {
    pub fn new(lo: f64, hi: f64, rule: Rule) -> Self {
        Piece { lo, hi, rule }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    C1,
    Smooth,
}

/// Value and slope mismatch at one interior breakpoint.
#[derive(Clone, Debug, Serialize)]
pub struct Joint {
    pub r: f64,
    pub left: Jet2,
    pub right: Jet2,
    pub rel_dv: f64,
    pub rel_d1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub label: String,
    pub pieces: Vec<Piece>,
    pub smoothness: Smoothness,
}

impl Profile {
    /// Validates that the pieces partition `[0, r_max]`.
    pub fn new(label: impl Into<String>, pieces: Vec<Piece>) -> Result<Self> {
        let label = label.into();
        if pieces.is_empty() {
            return Err(param(format!("profile {label}: no pieces")));
        }
        if pieces[0].lo != 0.0 {
            return Err(param(format!("profile {label}: first piece starts at {} not 0", pieces[0].lo)));
        }
        for (i, p) in pieces.iter().enumerate() {
            if !(p.hi > p.lo) || !p.hi.is_finite() {
                return Err(param(format!("profile {label}: empty piece [{}, {}]", p.lo, p.hi)));
            }
            if i + 1 < pieces.len() && pieces[i + 1].lo != p.hi {
                return Err(param(format!(
                    "profile {label}: gap or overlap between {} and {}",
                    p.hi,
                    pieces[i + 1].lo
                )));
            }
        }
        let mut prof = Profile { label, pieces, smoothness: Smoothness::C1 };
        prof.smoothness = if prof.second_derivative_continuous() { Smoothness::Smooth } else { Smoothness::C1 };
        Ok(prof)
    }

    pub fn single(label: impl Into<String>, r_max: f64, rule: Rule) -> Result<Self> {
        Profile::new(label, vec![Piece::new(0.0, r_max, rule)])
    }

    pub fn r_max(&self) -> f64 {
        self.pieces.last().map(|p| p.hi).unwrap_or(0.0)
    }

    /// Interior breakpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.lo).collect()
    }

    pub fn piece_index(&self, r: f64) -> usize {
        self.pieces.iter().position(|p| r < p.hi).unwrap_or(self.pieces.len() - 1)
    }

    pub fn eval(&self, r: f64) -> Result<Jet2> {
        if r < 0.0 || r.is_nan() {
            return Err(Error::Domain { what: format!("profile {} at negative radius", self.label), r });
        }
        self.pieces[self.piece_index(r)].rule.eval(r)
    }

    /// Evaluates the rule of the piece containing `anchor` at `r` (one-sided
    /// evaluation at breakpoints).
    pub fn eval_with(&self, anchor: f64, r: f64) -> Result<Jet2> {
        self.pieces[self.piece_index(anchor)].rule.eval(r)
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        self.eval(r).map(|j| j.v)
    }

    pub fn joints(&self) -> Result<Vec<Joint>> {
        let mut out = Vec::new();
        for w in self.pieces.windows(2) {
            let x = w[1].lo;
            let (l, r) = (w[0].rule.eval(x)?, w[1].rule.eval(x)?);
            let vs = l.v.abs().max(r.v.abs());
            let ds = l.d1.abs().max(r.d1.abs()).max(vs / x.max(f64::MIN_POSITIVE));
            let rel = |a: f64, s: f64| if s == 0.0 { a } else { a / s };
            out.push(Joint {
                r: x,
                left: l,
                right: r,
                rel_dv: rel((l.v - r.v).abs(), vs),
                rel_d1: rel((l.d1 - r.d1).abs(), ds),
            });
        }
        Ok(out)
    }

    /// Fails if value or slope jumps by more than `tol` (relative) at any breakpoint.
    pub fn check_c1(&self, tol: f64) -> Result<()> {
        for j in self.joints()? {
            if j.rel_dv > tol || j.rel_d1 > tol {
                return Err(Error::Internal(format!(
                    "profile {} not C1 at r = {}: left {} right {} (rel dv {:.3e}, rel d1 {:.3e})",
                    self.label, j.r, j.left, j.right, j.rel_dv, j.rel_d1
                )));
            }
        }
        Ok(())
    }

    fn second_derivative_continuous(&self) -> bool {
        self.pieces.windows(2).all(|w| {
            let x = w[1].lo;
            match (w[0].rule.eval(x), w[1].rule.eval(x)) {
                (Ok(l), Ok(r)) => {
                    let s = l.d2.abs().max(r.d2.abs()).max(l.v.abs() / (x * x));
                    (l.d2 - r.d2).abs() <= 1e-9 * s
                }
                _ => false,
            }
        })
    }

    /// Rebuilds with `r_max` moved to `r_end`, dropping or extending the tail.
    pub fn truncated(&self, r_end: f64) -> Result<Profile> {
        let mut pieces: Vec<Piece> = self.pieces.iter().filter(|p| p.lo < r_end).cloned().collect();
        if let Some(last) = pieces.last_mut() {
            last.hi = r_end;
        }
        Profile::new(self.label.clone(), pieces)
    }

    /// `y_scale * p((r - x_shift) / x_scale)` with pieces moved accordingly.
    /// The first piece is stretched back to 0 when `x_shift > 0`.
    pub fn transformed(&self, label: impl Into<String>, x_scale: f64, x_shift: f64, y_scale: f64) -> Result<Profile> {
        let pieces = self
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let lo = if i == 0 { 0.0 } else { p.lo * x_scale + x_shift };
                Piece::new(
                    lo,
                    p.hi * x_scale + x_shift,
                    Rule::Scaled { inner: Box::new(p.rule.clone()), x_scale, x_shift, y_scale },
                )
            })
            .collect();
        Profile::new(label, pieces)
    }

    /// Writes `r,v,d1,d2` rows at the given radii.
    pub fn write_csv<W: Write>(&self, out: W, grid: &[f64]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "v", "d1", "d2"])?;
        for &r in grid {
            let j = self.eval(r)?;
            w.write_record(&[fmt_f64(r), fmt_f64(j.v), fmt_f64(j.d1), fmt_f64(j.d2)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Log-spaced grid of `n >= 2` points on `[lo, hi]`, `lo > 0`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

pub fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64 })
        .collect()
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// 5-point stencil derivatives of the value channel.
    pub fn fd_check(rule: &Rule, r: f64, h: f64) -> (Jet2, f64, f64) {
        let f = |x: f64| rule.eval(x).unwrap().v;
        let (fm2, fm1, f0, fp1, fp2) = (f(r - 2.0 * h), f(r - h), f(r), f(r + h), f(r + 2.0 * h));
        let d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
        let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
        (rule.eval(r).unwrap(), d1, d2)
    }

    /// Relative mismatch with a scale floor.
    pub fn rel(a: f64, b: f64, floor: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(floor)
    }
}
