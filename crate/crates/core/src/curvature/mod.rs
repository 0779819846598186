//! Closed-form Ricci blocks of rotationally symmetric warped products
//! `dr^2 + (S^3 part) + f(r)^2 g_{S^2}`.
//!
//! The `S^3` part is either Berger, `A^2 dX^2 + B^2 (dY^2 + dZ^2)` in a
//! left-invariant coframe, or round, `phi^2 g_{S^3}`. All blocks are reported in
//! an orthonormal frame; `s2` is the coefficient of `g_{S^2}` per unit metric.

mod oracle;

pub use oracle::{fd_ricci_oracle, oracle_rel_err, OracleConfig};

use serde::{Deserialize, Serialize};

use crate::construction::MetricParams;
use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::profiles::Profile;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RicciBlocks {
    pub rr: f64,
    /// Hopf-fiber direction (Berger) or the whole round `S^3` block (cone form).
    pub sx: f64,
    /// The two directions orthogonal to the fiber; equals `sx` in cone form.
    pub syz: f64,
    pub s2: f64,
    /// Size of the mixed radial/tangential block; zero under exact rotational symmetry.
    pub cross_ir_mag: f64,
}

impl RicciBlocks {
    pub fn s3(&self) -> f64 {
        self.sx
    }

    pub fn min(&self) -> f64 {
        self.rr.min(self.sx).min(self.syz).min(self.s2)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.rr, self.sx, self.syz, self.s2]
    }
}

fn positive(what: &str, j: Jet2, r: f64) -> Result<()> {
    if j.v > 0.0 && j.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what: format!("{what} = {} is not positive", j.v), r })
    }
}

/// Blocks of `dr^2 + A^2 dX^2 + B^2 (dY^2 + dZ^2) + f^2 g_{S^2}`.
pub fn ricci_berger(a: Jet2, b: Jet2, f: Jet2, r: f64) -> Result<RicciBlocks> {
    ricci_berger_scaled(a, b, f, 1.0, r)
}

/// As [`ricci_berger`] with the warp replaced by `lambda f`. Only the `1/f^2`
/// term sees `lambda`; every other term is a log-derivative of `f`.
pub fn ricci_berger_scaled(a: Jet2, b: Jet2, f: Jet2, lambda: f64, r: f64) -> Result<RicciBlocks> {
    positive("A", a, r)?;
    positive("B", b, r)?;
    positive("f", f, r)?;
    let (a1, a2) = a.log_ratios();
    let (b1, b2) = b.log_ratios();
    let (f1, f2) = f.log_ratios();
    // A^2/B^4 = q^2/B^2 with q = A/B; B^4 itself overflows once B > 1e77
    let q = a.v / b.v;
    let inv_b2 = 1.0 / b.v / b.v;
    let lf = lambda * f.v;
    Ok(RicciBlocks {
        rr: -a2 - 2.0 * b2 - 2.0 * f2,
        sx: -a2 - 2.0 * a1 * b1 + 2.0 * q * q * inv_b2 - 2.0 * a1 * f1,
        syz: -b2 - a1 * b1 - b1 * b1 + 2.0 * (2.0 - q * q) * inv_b2 - 2.0 * b1 * f1,
        s2: 1.0 / (lf * lf) - f2 - f1 * f1 - a1 * f1 - 2.0 * b1 * f1,
        cross_ir_mag: 0.0,
    })
}

/// Blocks of `dr^2 + phi^2 g_{S^3} + f^2 g_{S^2}`.
pub fn ricci_cone_warp(phi: Jet2, f: Jet2, r: f64) -> Result<RicciBlocks> {
    positive("phi", phi, r)?;
    positive("f", f, r)?;
    let (p1, p2) = phi.log_ratios();
    let (f1, f2) = f.log_ratios();
    let s3 = 2.0 * (1.0 - phi.d1 * phi.d1) / phi.v / phi.v - p2 - 2.0 * p1 * f1;
    Ok(RicciBlocks {
        rr: -3.0 * p2 - 2.0 * f2,
        sx: s3,
        syz: s3,
        s2: (1.0 - f.d1 * f.d1) / f.v / f.v - f2 - 3.0 * f1 * p1,
        cross_ir_mag: 0.0,
    })
}

/// Ricci blocks `(rr, s3)` of the 4-dimensional base `dr^2 + phi^2 g_{S^3}`.
pub fn base_cone_blocks(phi: Jet2, r: f64) -> Result<(f64, f64)> {
    positive("phi", phi, r)?;
    let (_, p2) = phi.log_ratios();
    Ok((-3.0 * p2, 2.0 * (1.0 - phi.d1 * phi.d1) / phi.v / phi.v - p2))
}

/// Warped-product blocks from base blocks: the base loses `2 Hess f / f`, the
/// fiber gets `1/f^2 - Lap f / f - |grad f|^2 / f^2`.
pub fn ricci_warp_from_base(base: (f64, f64), phi: Jet2, f: Jet2, r: f64) -> Result<RicciBlocks> {
    positive("phi", phi, r)?;
    positive("f", f, r)?;
    let (p1, _) = phi.log_ratios();
    let (f1, f2) = f.log_ratios();
    let hess_rr = f2;
    let hess_tan = p1 * f1;
    let lap = f2 + 3.0 * p1 * f1;
    let s3 = base.1 - 2.0 * hess_tan;
    Ok(RicciBlocks {
        rr: base.0 - 2.0 * hess_rr,
        sx: s3,
        syz: s3,
        s2: 1.0 / (f.v * f.v) - lap - f1 * f1,
        cross_ir_mag: 0.0,
    })
}

/// Blocks after `f -> lambda f`: base blocks untouched, `s2` recomputed.
pub fn scale_warp(blocks: RicciBlocks, f: Jet2, lambda: f64) -> Result<RicciBlocks> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::Parameter(format!("warp scale {lambda} outside (0, 1]")));
    }
    let mut out = blocks;
    let fv2 = f.v * f.v;
    out.s2 = blocks.s2 + (1.0 / (lambda * lambda) - 1.0) / fv2;
    if out.s2 < blocks.s2 {
        return Err(Error::Internal(format!("warp scaling decreased s2: {} -> {}", blocks.s2, out.s2)));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum MetricForm {
    Berger { a: Profile, b: Profile, f: Profile },
    Cone { phi: Profile, f: Profile },
}

/// A warped metric on `r_range` with its construction parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarpedMetric {
    pub id: String,
    pub form: MetricForm,
    pub r_range: (f64, f64),
    /// Constant multiplier of the warp seen by the `1/f^2` term.
    #[serde(default = "one")]
    pub warp_scale: f64,
    #[serde(default)]
    pub params: MetricParams,
}

fn one() -> f64 {
    1.0
}

/// Jets of `(A, B, f)` at one radius; `A = B = phi` in cone form.
#[derive(Clone, Copy, Debug)]
pub struct MetricJets {
    pub a: Jet2,
    pub b: Jet2,
    pub f: Jet2,
}

impl WarpedMetric {
    pub fn new(id: impl Into<String>, form: MetricForm, r_range: (f64, f64), params: MetricParams) -> Self {
        WarpedMetric { id: id.into(), form, r_range, warp_scale: 1.0, params }
    }

    pub fn profiles(&self) -> Vec<&Profile> {
        match &self.form {
            MetricForm::Berger { a, b, f } => vec![a, b, f],
            MetricForm::Cone { phi, f } => vec![phi, f],
        }
    }

    pub fn is_cone(&self) -> bool {
        matches!(self.form, MetricForm::Cone { .. })
    }

    pub fn warp(&self) -> &Profile {
        match &self.form {
            MetricForm::Berger { f, .. } | MetricForm::Cone { f, .. } => f,
        }
    }

    /// Union of all profile breakpoints strictly inside `r_range`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.r_range;
        let mut bps: Vec<f64> = self
            .profiles()
            .iter()
            .flat_map(|p| p.breakpoints())
            .filter(|&x| x > lo && x < hi)
            .collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        bps
    }

    /// Intervals between consecutive breakpoints, covering `r_range`.
    pub fn segments(&self) -> Vec<(f64, f64)> {
        let mut edges = vec![self.r_range.0];
        edges.extend(self.breakpoints());
        edges.push(self.r_range.1);
        edges.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Profile jets at `r`, each from the piece containing `anchor`.
    pub fn jets_with(&self, anchor: f64, r: f64) -> Result<MetricJets> {
        Ok(match &self.form {
            MetricForm::Berger { a, b, f } => {
                MetricJets { a: a.eval_with(anchor, r)?, b: b.eval_with(anchor, r)?, f: f.eval_with(anchor, r)? }
            }
            MetricForm::Cone { phi, f } => {
                let p = phi.eval_with(anchor, r)?;
                MetricJets { a: p, b: p, f: f.eval_with(anchor, r)? }
            }
        })
    }

    pub fn blocks(&self, r: f64) -> Result<RicciBlocks> {
        self.blocks_with(r, r)
    }

    pub fn blocks_with(&self, anchor: f64, r: f64) -> Result<RicciBlocks> {
        let j = self.jets_with(anchor, r)?;
        match self.form {
            MetricForm::Berger { .. } => ricci_berger_scaled(j.a, j.b, j.f, self.warp_scale, r),
            MetricForm::Cone { .. } => {
                let base = ricci_cone_warp(j.a, j.f, r)?;
                if self.warp_scale == 1.0 {
                    Ok(base)
                } else {
                    scale_warp(base, j.f, self.warp_scale)
                }
            }
        }
    }

    /// Copy with the warp multiplied by `lambda`.
    pub fn with_warp_scale(&self, lambda: f64) -> Result<WarpedMetric> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::Parameter(format!("warp scale {lambda} outside (0, 1]")));
        }
        let mut m = self.clone();
        m.warp_scale *= lambda;
        Ok(m)
    }

    /// Same metric written in Berger form (`A = B = phi`).
    pub fn to_berger(&self) -> WarpedMetric {
        let mut m = self.clone();
        if let MetricForm::Cone { phi, f } = &self.form {
            m.form = MetricForm::Berger { a: phi.clone(), b: phi.clone(), f: f.clone() };
        }
        m
    }

    /// Natural curvature scale `1 / max(A, B)^2` at `r`.
    pub fn curvature_scale(&self, r: f64) -> Result<f64> {
        let j = self.jets_with(r, r)?;
        let s = j.a.v.max(j.b.v);
        Ok(1.0 / (s * s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{Rule, TAU_C1};
    use proptest::prelude::*;

    fn j(v: f64, d1: f64, d2: f64) -> Jet2 {
        Jet2::new(v, d1, d2)
    }

    #[test]
    fn round_s4_blocks() {
        for r in [0.1, 0.7, 1.5, 3.0] {
            let phi = Jet2::variable(r).sin();
            let b = ricci_cone_warp(phi, Jet2::constant(0.2), r).unwrap();
            assert!((b.rr - 3.0).abs() < 1e-12 && (b.s3() - 3.0).abs() < 1e-12);
            assert!((b.s2 - 25.0).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_cone_blocks() {
        let b = ricci_cone_warp(Jet2::variable(0.3), Jet2::constant(0.1), 0.3).unwrap();
        assert_eq!((b.rr, b.s3()), (0.0, 0.0));
        assert!((b.s2 - 100.0).abs() < 1e-12);
    }

    #[test]
    fn warped_cone_closed_forms() {
        let (eps, alpha, delta) = (0.05, 0.01, 0.02);
        for t in [0.5, 3.0, 40.0] {
            let phi = j((1.0 - eps) * t, 1.0 - eps, 0.0);
            let f = Rule::PowerLaw { c: delta, shift: 0.0, scale: 1.0, p: alpha }.eval(t).unwrap();
            let b = ricci_cone_warp(phi, f, t).unwrap();
            let rr = -2.0 * alpha * (alpha - 1.0) / (t * t);
            let s3 = 2.0 * (1.0 / (1.0 - eps).powi(2) - 1.0 - alpha) / (t * t);
            let s2 = (alpha * (1.0 - alpha) + t.powf(2.0 - 2.0 * alpha) / (delta * delta) - alpha * alpha - 3.0 * alpha)
                / (t * t);
            assert!((b.rr - rr).abs() <= 1e-12 * rr.abs());
            assert!((b.s3() - s3).abs() <= 1e-12 * s3.abs());
            assert!((b.s2 - s2).abs() <= 1e-12 * s2.abs());
        }
    }

    #[test]
    fn berger_plateau_identities() {
        let (m, r1) = (1e-3, 2.0);
        let k = crate::profiles::solve_k(m, r1);
        // A = sin(kr)/k, B = b, f constant
        let r = 0.3;
        let a = Rule::SinK { k }.eval(r).unwrap();
        let b = ricci_berger(a, Jet2::constant(0.7), Jet2::constant(0.1), r).unwrap();
        assert!((b.rr - k * k).abs() < 1e-12);
        // A = B affine with slope m
        let a = j(1.3, m, 0.0);
        let b = ricci_berger(a, a, Jet2::constant(0.1), r).unwrap();
        assert_eq!(b.rr, 0.0);
        assert!((b.sx - 2.0 * (1.0 - m * m) / (1.3 * 1.3)).abs() < 1e-14);
    }

    #[test]
    fn scale_warp_identity_and_constant_case() {
        let blocks = ricci_cone_warp(j(0.4, 0.9, -0.1), Jet2::constant(0.5), 0.4).unwrap();
        assert_eq!(scale_warp(blocks, Jet2::constant(0.5), 1.0).unwrap(), blocks);
        let s = scale_warp(blocks, Jet2::constant(0.5), 0.5).unwrap();
        assert!((s.s2 - blocks.s2 - 3.0 / 0.25).abs() < 1e-12);
        assert!(scale_warp(blocks, Jet2::constant(0.5), 1.5).is_err());
        assert!(scale_warp(blocks, Jet2::constant(0.5), 0.0).is_err());
    }

    #[test]
    fn metric_segments_use_union_of_breakpoints() {
        let phi = Profile::new(
            "phi",
            vec![
                crate::profiles::Piece::new(0.0, 1.0, Rule::Affine { v0: 0.0, slope: 1.0, r0: 0.0 }),
                crate::profiles::Piece::new(1.0, 3.0, Rule::Affine { v0: 0.0, slope: 1.0, r0: 0.0 }),
            ],
        )
        .unwrap();
        let f = Profile::new(
            "f",
            vec![
                crate::profiles::Piece::new(0.0, 2.0, Rule::Constant { c: 1.0 }),
                crate::profiles::Piece::new(2.0, 3.0, Rule::Constant { c: 1.0 }),
            ],
        )
        .unwrap();
        phi.check_c1(TAU_C1).unwrap();
        let m = WarpedMetric::new("t", MetricForm::Cone { phi, f }, (0.5, 3.0), MetricParams::None);
        assert_eq!(m.segments(), vec![(0.5, 1.0), (1.0, 2.0), (2.0, 3.0)]);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<WarpedMetric>(&json).unwrap(), m);
    }

    fn jet_strategy() -> impl Strategy<Value = Jet2> {
        (0.1f64..3.0, -2.0f64..2.0, -5.0f64..5.0).prop_map(|(v, d1, d2)| Jet2::new(v, d1, d2))
    }

    proptest! {
        #[test]
        fn berger_with_equal_radii_is_cone_form(phi in jet_strategy(), f in jet_strategy(), r in 0.1f64..5.0) {
            let a = ricci_berger(phi, phi, f, r).unwrap();
            let c = ricci_cone_warp(phi, f, r).unwrap();
            for (x, y) in a.as_array().iter().zip(c.as_array()) {
                prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(y.abs()).max(1.0), "{a:?} vs {c:?}");
            }
        }

        #[test]
        fn warp_from_base_agrees_with_cone_form(phi in jet_strategy(), f in jet_strategy(), r in 0.1f64..5.0) {
            let base = base_cone_blocks(phi, r).unwrap();
            let a = ricci_warp_from_base(base, phi, f, r).unwrap();
            let c = ricci_cone_warp(phi, f, r).unwrap();
            for (x, y) in a.as_array().iter().zip(c.as_array()) {
                prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(y.abs()).max(1.0));
            }
        }

        #[test]
        fn constant_warp_adds_inverse_square(phi in jet_strategy(), c in 0.05f64..2.0, r in 0.1f64..5.0) {
            let base = base_cone_blocks(phi, r).unwrap();
            let b = ricci_warp_from_base(base, phi, Jet2::constant(c), r).unwrap();
            prop_assert_eq!((b.rr, b.sx), base);
            prop_assert!((b.s2 - 1.0 / (c * c)).abs() < 1e-12 / (c * c));
        }

        #[test]
        fn scaling_is_monotone(phi in jet_strategy(), f in jet_strategy(), r in 0.1f64..5.0) {
            let b = ricci_cone_warp(phi, f, r).unwrap();
            let mut prev = b.s2;
            for lam in [1.0, 0.5, 0.1, 0.01] {
                let s = scale_warp(b, f, lam).unwrap();
                prop_assert!(s.s2 >= prev);
                prop_assert_eq!((s.rr, s.sx, s.syz), (b.rr, b.sx, b.syz));
                prev = s.s2;
            }
        }
    }
}
