//! C2 join of two rules that agree to first order at a point.
//!
//! On the window `[at - w, at + w]` the joined second derivative is
//! `L'' + s(t) (R'' - L'')` pointwise, with `s` a quintic ramp of width `tau`
//! (in window units) plus a small zero-mass lobe pair. Value and slope come
//! from quadrature. The ramp centre and the lobe amplitude are solved once so
//! that the result lands on `R` to first order at the right end; then it
//! matches `L` and `R` to second order at the two ends.
//!
//! Where `s` leaves `[0, 1]` it does so only on the side of the smaller second
//! derivative. Every Ricci block of a warped product sees a profile's second
//! derivative only through `-X''/X`, so that excursion can only raise
//! curvature.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::profiles::{gauss_legendre, Rule};

/// Length of the lobe interval, in window units.
const LOBE: f64 = 0.4;
/// Largest allowed ramp shift, in window units.
const MAX_SHIFT: f64 = 0.04;
const NODES: usize = 16;

fn nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static N: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    N.get_or_init(|| gauss_legendre(NODES))
}

/// Shape of the join; `t` runs over `[0, 1]` across the window.
#[derive(Clone, Copy, Debug)]
struct Shape {
    tau: f64,
    shift: f64,
    beta: f64,
    below: bool,
}

impl Shape {
    fn ramp(&self, t: f64) -> f64 {
        let y = ((t - 0.5 - self.shift) / self.tau + 0.5).clamp(0.0, 1.0);
        y * y * y * (10.0 - 15.0 * y + 6.0 * y * y)
    }

    fn lobe(&self, t: f64) -> f64 {
        let start = if self.below { 0.0 } else { 1.0 - LOBE };
        let v = (t - start) / LOBE;
        if (0.0..=1.0).contains(&v) {
            v * (1.0 - v) * (2.0 * v - 1.0)
        } else {
            0.0
        }
    }

    fn sigma(&self, t: f64) -> f64 {
        self.ramp(t) + self.beta * self.lobe(t)
    }

    /// Points in `(0, 1)` where `sigma` is not smooth.
    fn kinks(&self) -> [f64; 3] {
        let c = 0.5 + self.shift;
        let l = if self.below { LOBE } else { 1.0 - LOBE };
        [l, c - 0.5 * self.tau, c + 0.5 * self.tau]
    }
}

struct Window<'a> {
    left: &'a Rule,
    right: &'a Rule,
    lo: f64,
    len: f64,
}

impl Window<'_> {
    fn dd(&self, r: f64) -> Result<f64> {
        Ok(self.right.eval(r)?.d2 - self.left.eval(r)?.d2)
    }

    /// `(∫ w(s) D''(s) ds, ∫ (r - s) w(s) D''(s) ds)` over `[lo, r]`.
    fn moments(&self, r: f64, shape: &Shape, weight: impl Fn(&Shape, f64) -> f64) -> Result<(f64, f64)> {
        let t_end = (r - self.lo) / self.len;
        let mut cuts = vec![0.0];
        cuts.extend(shape.kinks().into_iter().filter(|k| *k > 0.0 && *k < t_end));
        cuts.push(t_end);
        cuts.sort_by(f64::total_cmp);
        let (xs, ws) = nodes();
        let (mut m0, mut m1) = (0.0, 0.0);
        for pair in cuts.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b <= a {
                continue;
            }
            let half = 0.5 * (b - a);
            for (x, w) in xs.iter().zip(ws) {
                let t = a + half * (1.0 + x);
                let s = self.lo + t * self.len;
                let g = weight(shape, t) * self.dd(s)? * w * half * self.len;
                m0 += g;
                m1 += (r - s) * g;
            }
        }
        Ok((m0, m1))
    }
}

/// Builds [`Rule::Join`] on `[at - w, at + w]` with a ramp of relative width `tau`.
pub fn join_rule(left: &Rule, right: &Rule, at: f64, w: f64, tau: f64) -> Result<Rule> {
    let mk = |shift: f64, beta: f64, below: bool| Rule::Join {
        left: Box::new(left.clone()),
        right: Box::new(right.clone()),
        at,
        half_width: w,
        tau,
        shift,
        beta,
        below,
    };
    if left == right {
        return Ok(mk(0.0, 0.0, true));
    }
    if !(tau > 0.0 && tau < 0.2) || !(w > 0.0) {
        return Err(Error::Smoothing(format!("bad join shape: tau {tau}, half width {w}")));
    }
    let win = Window { left, right, lo: at - w, len: 2.0 * w };
    let hi = at + w;
    let jump = win.dd(at)?;
    let below = jump > 0.0;
    let d_hi = right.eval(hi)? - left.eval(hi)?;
    // residuals scaled to be O(1) when the jump is
    let scale = jump.abs().max(win.dd(win.lo)?.abs()).max(win.dd(hi)?.abs());
    if scale == 0.0 {
        return Ok(mk(0.0, 0.0, below));
    }
    let (k0, k1) = (1.0 / (scale * win.len), 1.0 / (scale * win.len * win.len));

    let ramp_res = |shift: f64| -> Result<(f64, f64)> {
        let sh = Shape { tau, shift, beta: 0.0, below };
        let (a0, a1) = win.moments(hi, &sh, |s, t| s.ramp(t))?;
        Ok(((a0 - d_hi.d1) * k0, (a1 - d_hi.v) * k1))
    };
    let lobe_sh = Shape { tau, shift: 0.0, beta: 0.0, below };
    let (b0, b1) = win.moments(hi, &lobe_sh, |s, t| s.lobe(t))?;
    let (b0, b1) = (b0 * k0, b1 * k1);

    let (mut shift, mut beta) = (0.0, 0.0);
    for _ in 0..30 {
        let (f0, f1) = ramp_res(shift)?;
        let (r0, r1) = (f0 + beta * b0, f1 + beta * b1);
        if r0.abs().max(r1.abs()) < 1e-14 {
            break;
        }
        let h = 1e-6;
        let (g0, g1) = ramp_res(shift + h)?;
        let (j00, j10) = ((g0 - f0) / h, (g1 - f1) / h);
        let det = j00 * b1 - b0 * j10;
        if !(det.abs() > 1e-300) {
            return Err(Error::Smoothing(format!("join at {at}: singular moment system")));
        }
        shift -= (r0 * b1 - b0 * r1) / det;
        beta -= (j00 * r1 - j10 * r0) / det;
        if !(shift.abs() <= MAX_SHIFT) || !beta.is_finite() {
            return Err(Error::Smoothing(format!(
                "join at {at}: third-order mismatch too large for the window; use a smaller window"
            )));
        }
    }
    let (f0, f1) = ramp_res(shift)?;
    let res = (f0 + beta * b0).abs().max((f1 + beta * b1).abs());
    if !(res < 1e-10) {
        return Err(Error::Smoothing(format!("join at {at}: moment residual {res:e}")));
    }
    Ok(mk(shift, beta, below))
}

/// Evaluates a [`Rule::Join`].
#[allow(clippy::too_many_arguments)]
pub(crate) fn join_jet(
    left: &Rule,
    right: &Rule,
    at: f64,
    w: f64,
    tau: f64,
    shift: f64,
    beta: f64,
    below: bool,
    r: f64,
) -> Result<Jet2> {
    let l = left.eval(r)?;
    if left == right || r <= at - w {
        return Ok(l);
    }
    if r >= at + w {
        return right.eval(r);
    }
    let win = Window { left, right, lo: at - w, len: 2.0 * w };
    let shape = Shape { tau, shift, beta, below };
    let (g1, g0) = win.moments(r, &shape, |s, t| s.sigma(t))?;
    let t = (r - win.lo) / win.len;
    let g2 = shape.sigma(t) * win.dd(r)?;
    Ok(l + Jet2::new(g0, g1, g2))
}
