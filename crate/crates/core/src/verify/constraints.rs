//! Pointwise inequalities on a single profile, such as `0 <= r h'' <= c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::profiles::{log_grid, Profile};

/// Quantity computed from the jet `(v, d1, d2)` of a profile at `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "expr", rename_all = "snake_case")]
pub enum Expr {
    Value,
    D1,
    D2,
    /// `r * d2`
    RD2,
    /// `d1 / v`
    LogDeriv,
    /// `d2 / v`
    D2OverV,
    /// `v - r`
    ValueMinusR,
    /// `|v - r| + |d1 - 1| + |d2|`
    IdentityDefect,
}

impl Expr {
    pub fn eval(&self, j: Jet2, r: f64) -> f64 {
        match self {
            Expr::Value => j.v,
            Expr::D1 => j.d1,
            Expr::D2 => j.d2,
            Expr::RD2 => r * j.d2,
            Expr::LogDeriv => j.d1 / j.v,
            Expr::D2OverV => j.d2 / j.v,
            Expr::ValueMinusR => j.v - r,
            Expr::IdentityDefect => (j.v - r).abs() + (j.d1 - 1.0).abs() + j.d2.abs(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cmp {
    Le,
    Ge,
}

/// Right-hand side `c r^p` (`p = 0` for a constant).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub c: f64,
    #[serde(default)]
    pub p: f64,
}

impl Bound {
    pub fn constant(c: f64) -> Self {
        Bound { c, p: 0.0 }
    }

    pub fn at(&self, r: f64) -> f64 {
        if self.p == 0.0 {
            self.c
        } else {
            self.c * r.powf(self.p)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub expr: Expr,
    pub cmp: Cmp,
    pub bound: Bound,
    /// Closed interval to check, inside the profile's domain.
    pub range: [f64; 2],
}

impl Constraint {
    pub fn new(name: impl Into<String>, expr: Expr, cmp: Cmp, bound: Bound, range: [f64; 2]) -> Self {
        Constraint { name: name.into(), expr, cmp, bound, range }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub name: String,
    pub min: f64,
    pub argmin: f64,
    pub max: f64,
    pub argmax: f64,
    /// Smallest `bound - expr` (for `le`) or `expr - bound` (for `ge`).
    pub margin: f64,
    pub passed: bool,
}

const POINTS: usize = 4096;

/// Evaluates each constraint on a log grid of every piece overlapping its
/// range; each piece is evaluated with its own rule up to its closed ends.
pub fn check_profile_constraints(p: &Profile, constraints: &[Constraint]) -> Result<Vec<ConstraintReport>> {
    constraints.iter().map(|c| check_one(p, c)).collect()
}

fn check_one(p: &Profile, c: &Constraint) -> Result<ConstraintReport> {
    let [lo, hi] = c.range;
    if !(lo >= 0.0 && hi > lo && hi <= p.r_max()) || !c.bound.c.is_finite() || !c.bound.p.is_finite() {
        return Err(Error::Config(format!(
            "constraint {}: range [{lo}, {hi}] must lie in [0, {}] with finite bound",
            c.name,
            p.r_max()
        )));
    }
    let mut rep = ConstraintReport {
        name: c.name.clone(),
        min: f64::INFINITY,
        argmin: f64::NAN,
        max: f64::NEG_INFINITY,
        argmax: f64::NAN,
        margin: f64::INFINITY,
        passed: true,
    };
    for piece in &p.pieces {
        let (a, b) = (piece.lo.max(lo), piece.hi.min(hi));
        if !(b > a) {
            continue;
        }
        let start = if a > 0.0 { a } else { 1e-8 * hi };
        for r in log_grid(start, b, POINTS) {
            let x = c.expr.eval(piece.rule.eval(r)?, r);
            if x < rep.min {
                rep.min = x;
                rep.argmin = r;
            }
            if x > rep.max {
                rep.max = x;
                rep.argmax = r;
            }
            let m = match c.cmp {
                Cmp::Le => c.bound.at(r) - x,
                Cmp::Ge => x - c.bound.at(r),
            };
            rep.margin = rep.margin.min(m);
        }
    }
    if rep.argmin.is_nan() {
        return Err(Error::Config(format!("constraint {}: empty range", c.name)));
    }
    rep.passed = rep.margin >= 0.0;
    Ok(rep)
}
