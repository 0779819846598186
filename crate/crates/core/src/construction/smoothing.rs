//! Local C2 smoothing of C1 joints.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profiles::{join_rule, lin_grid, Piece, Profile};

/// Width of the second-derivative ramp inside a join window, as a fraction of it.
pub const JOIN_TAU: f64 = 0.1;

/// What a smoothing pass changed.
#[derive(Clone, Debug, Serialize)]
pub struct SmoothingReport {
    pub profile: String,
    pub at: f64,
    pub window: f64,
    /// `max |new - old| + |new' - old'|` over the window (old is evaluated one-sided).
    pub deviation_c1: f64,
    /// Jump of the second derivative that was removed.
    pub d2_jump: f64,
}

/// Default half-width: `1e-3` times the shorter of the two pieces meeting at `at`.
pub fn default_window(p: &Profile, at: f64) -> f64 {
    let i = p.piece_index(at);
    let right = &p.pieces[i];
    let len = if i > 0 && right.lo == at {
        let left = &p.pieces[i - 1];
        (left.hi - left.lo).min(right.hi - right.lo)
    } else {
        right.hi - right.lo
    };
    1e-3 * len
}

/// Replaces `p` on `[at - window, at + window]` by a [`Rule::Join`] of the two
/// pieces meeting at `at`. The new second derivative stays between the two old
/// ones except for an excursion of about `0.5%` of the jump on the concave
/// side; a plain quintic Hermite bridge overshoots by 8% on both sides.
pub fn c1_smooth(p: &Profile, at: f64, window: f64) -> Result<(Profile, SmoothingReport)> {
    let (lo, hi) = (at - window, at + window);
    if !(window > 0.0) || lo < 0.0 {
        return Err(Error::Smoothing(format!("invalid window {window} at {at}")));
    }
    let il = p.piece_index(lo);
    let ir = p.piece_index(hi);
    let adjacent = ir == il || (ir == il + 1 && p.pieces[ir].lo == at);
    if !adjacent || p.pieces[il].lo >= lo || p.pieces[ir].hi <= hi {
        return Err(Error::Smoothing(format!(
            "window [{lo}, {hi}] around {at} touches another breakpoint of {}; use a smaller window",
            p.label
        )));
    }
    let bridge = join_rule(&p.pieces[il].rule, &p.pieces[ir].rule, at, window, JOIN_TAU)?;

    let mut pieces = Vec::with_capacity(p.pieces.len() + 2);
    for (i, piece) in p.pieces.iter().enumerate() {
        if i < il || i > ir {
            pieces.push(piece.clone());
        }
        if i == il {
            pieces.push(Piece::new(piece.lo, lo, piece.rule.clone()));
            pieces.push(Piece::new(lo, hi, bridge.clone()));
        }
        if i == ir {
            pieces.push(Piece::new(hi, piece.hi, piece.rule.clone()));
        }
    }
    let out = Profile::new(p.label.clone(), pieces)?;

    let mut dev = 0.0f64;
    for r in lin_grid(lo, hi, 401) {
        let old = if r < at { p.pieces[il].rule.eval(r)? } else { p.pieces[ir].rule.eval(r)? };
        let new = bridge.eval(r)?;
        dev = dev.max((new.v - old.v).abs() + (new.d1 - old.d1).abs());
    }
    let d2_jump = if ir == il + 1 {
        (p.pieces[ir].rule.eval(at)?.d2 - p.pieces[il].rule.eval(at)?.d2).abs()
    } else {
        0.0
    };
    Ok((out, SmoothingReport { profile: p.label.clone(), at, window, deviation_c1: dev, d2_jump }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{Rule, Smoothness, TAU_C1};

    #[test]
    fn smoothing_a_smooth_piece_is_identity() {
        let p = Profile::single("s", 3.0, Rule::SinK { k: 1.3 }).unwrap();
        let (q, rep) = c1_smooth(&p, 1.0, 1e-3).unwrap();
        assert!(rep.deviation_c1 < 1e-12, "{}", rep.deviation_c1);
        for r in lin_grid(0.99, 1.01, 101) {
            assert!((q.value(r).unwrap() - p.value(r).unwrap()).abs() < 1e-12);
        }
    }

    fn kinked() -> Profile {
        // C1 but with a jump in the second derivative at 1
        Profile::new(
            "k",
            vec![
                Piece::new(0.0, 1.0, Rule::Poly { lo: 0.0, len: 1.0, coeffs: vec![0.0, 0.0, 0.5] }),
                Piece::new(1.0, 3.0, Rule::Affine { v0: 0.5, slope: 1.0, r0: 1.0 }),
            ],
        )
        .unwrap()
    }

    #[test]
    fn smoothing_removes_the_curvature_jump() {
        let p = kinked();
        assert_eq!(p.smoothness, Smoothness::C1);
        let (q, rep) = c1_smooth(&p, 1.0, 0.01).unwrap();
        q.check_c1(TAU_C1).unwrap();
        assert_eq!(q.smoothness, Smoothness::Smooth);
        assert!((rep.d2_jump - 1.0).abs() < 1e-15);
        assert!(rep.deviation_c1 > 0.0);
    }

    #[test]
    fn join_is_c2_and_barely_overshoots() {
        let p = kinked();
        let (q, _) = c1_smooth(&p, 1.0, 0.01).unwrap();
        let bridge = &q.pieces[1].rule;
        // matches both sides to second order at the window ends
        for (r, side) in [(0.99, &p.pieces[0].rule), (1.01, &p.pieces[1].rule)] {
            let (a, b) = (bridge.eval(r).unwrap(), side.eval(r).unwrap());
            assert!((a.v - b.v).abs() < 1e-14 && (a.d1 - b.d1).abs() < 1e-12 && (a.d2 - b.d2).abs() < 1e-9);
        }
        // d2 ramps from 1 down to 0; the small overshoot goes below 0, never above 1
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for r in lin_grid(0.99, 1.01, 2001) {
            let d2 = bridge.eval(r).unwrap().d2;
            lo = lo.min(d2);
            hi = hi.max(d2);
        }
        assert!(lo > -1e-2 && lo < 0.0 && hi <= 1.0 + 1e-9, "{lo} {hi}");
        // the mirrored joint overshoots on its own concave side
        let up = Profile::new(
            "u",
            vec![
                Piece::new(0.0, 1.0, Rule::Affine { v0: 0.0, slope: 1.0, r0: 0.0 }),
                Piece::new(1.0, 3.0, Rule::Poly { lo: 1.0, len: 1.0, coeffs: vec![1.0, 1.0, 0.5] }),
            ],
        )
        .unwrap();
        let (q, _) = c1_smooth(&up, 1.0, 0.01).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for r in lin_grid(0.99, 1.01, 2001) {
            let d2 = q.pieces[1].rule.eval(r).unwrap().d2;
            lo = lo.min(d2);
            hi = hi.max(d2);
        }
        assert!(lo < 0.0 && lo > -1e-2 && hi <= 1.0 + 1e-9, "{lo} {hi}");
    }

    #[test]
    fn join_jets_match_finite_differences() {
        let p = Profile::new(
            "m",
            vec![
                Piece::new(0.0, 1.0, Rule::SinK { k: 1.0 }),
                Piece::new(1.0, 3.0, Rule::Poly { lo: 1.0, len: 1.0, coeffs: vec![1.0f64.sin(), 1.0f64.cos(), 0.3, -0.2] }),
            ],
        )
        .unwrap();
        let (q, _) = c1_smooth(&p, 1.0, 0.05).unwrap();
        let b = &q.pieces[1].rule;
        let h = 1e-5;
        for r in lin_grid(0.96, 1.04, 17) {
            let j = b.eval(r).unwrap();
            let (m, pl) = (b.eval(r - h).unwrap(), b.eval(r + h).unwrap());
            assert!((j.d1 - (pl.v - m.v) / (2.0 * h)).abs() < 1e-7, "d1 at {r}");
            assert!((j.d2 - (pl.d1 - m.d1) / (2.0 * h)).abs() < 1e-5, "d2 at {r}");
        }
    }

    #[test]
    fn join_stays_between_the_sides_when_the_third_derivatives_differ() {
        // L'' = -sin r, R'' = 0.6 - 1.2 (r - 1) + 30 (r - 1)^2: big third-order gap
        let (l, r) = (
            Rule::SinK { k: 1.0 },
            Rule::Poly { lo: 1.0, len: 1.0, coeffs: vec![1.0f64.sin(), 1.0f64.cos(), 0.3, -0.2, 2.5] },
        );
        let p = Profile::new("g", vec![Piece::new(0.0, 1.0, l.clone()), Piece::new(1.0, 3.0, r.clone())]).unwrap();
        let w = 0.05;
        let (q, _) = c1_smooth(&p, 1.0, w).unwrap();
        q.check_c1(TAU_C1).unwrap();
        let b = &q.pieces[1].rule;
        let jump = r.eval(1.0).unwrap().d2 - l.eval(1.0).unwrap().d2;
        for x in lin_grid(1.0 - w, 1.0 + w, 801) {
            let (a, c) = (l.eval(x).unwrap().d2, r.eval(x).unwrap().d2);
            let d2 = b.eval(x).unwrap().d2;
            // may dip below the smaller side a little, never above the larger one
            assert!(d2 <= a.max(c) + 1e-12, "{x}: {d2} vs {a} {c}");
            assert!(d2 >= a.min(c) - 1e-2 * jump.abs(), "{x}: {d2} vs {a} {c}");
        }
    }

    #[test]
    fn deviation_scales_with_window() {
        let p = kinked();
        let d = |w: f64| c1_smooth(&p, 1.0, w).unwrap().1.deviation_c1;
        let (a, b) = (d(0.02), d(0.01));
        // slope deviation ~ window * |jump|
        assert!((a / b - 2.0).abs() < 0.1, "{a} {b}");
        assert!(b < 0.01 * 1.0);
    }

    #[test]
    fn rejects_windows_spanning_breakpoints() {
        assert!(c1_smooth(&kinked(), 1.0, 1.5).is_err());
        assert!(c1_smooth(&kinked(), 1.0, 0.0).is_err());
    }
}
