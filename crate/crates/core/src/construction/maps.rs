//! Lipschitz bounds for the blow-down map of a bubble onto its cone.
//!
//! The map sends radius `r` to `lambda(r)` and is the identity on the sphere
//! directions, so `|D phi|` is `lambda'` radially and `(1 - eps) lambda / X`
//! along a direction of length `X`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::construction::bubble::Bubble;
use crate::curvature::MetricForm;
use crate::error::{param, Error, Result};
use crate::profiles::{log_grid, Profile};

/// Samples per region.
pub const BLOWDOWN_SAMPLES: usize = 20_001;

/// Largest stretch factors of `D phi` over one radial region.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct DphiMax {
    pub radial: f64,
    pub x: f64,
    pub yz: f64,
    /// Smallest of all factors; equals 1 where the map is an isometry.
    pub min: f64,
}

impl DphiMax {
    pub fn max(&self) -> f64 {
        self.radial.max(self.x).max(self.yz)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowdownReport {
    /// `[0, r1]`, `[r1, r3]` and `[r3, 10 r3]`.
    pub core: DphiMax,
    pub neck: DphiMax,
    pub exterior: DphiMax,
    /// The global Lipschitz constant `C`.
    pub global: f64,
    pub bound_x_core: f64,
    pub bound_yz_core: f64,
    pub bound_neck: f64,
}

/// `(lambda', (1 - eps) lambda / A, (1 - eps) lambda / B)` at `r`.
pub fn dphi_factors(a: &Profile, b: &Profile, lambda: &Profile, eps: f64, r: f64) -> Result<(f64, f64, f64)> {
    let l = lambda.eval(r)?;
    let k = (1.0 - eps) * l.v;
    Ok((l.d1, k / a.value(r)?, k / b.value(r)?))
}

/// Maxima of the three factors over a log grid on `[lo, hi]`.
pub fn dphi_max(a: &Profile, b: &Profile, lambda: &Profile, eps: f64, lo: f64, hi: f64, n: usize) -> Result<DphiMax> {
    let mut out = DphiMax { min: f64::INFINITY, ..Default::default() };
    for r in log_grid(lo, hi, n) {
        let (d, x, y) = dphi_factors(a, b, lambda, eps, r)?;
        out.radial = out.radial.max(d);
        out.x = out.x.max(x);
        out.yz = out.yz.max(y);
        out.min = out.min.min(d).min(x).min(y);
    }
    Ok(out)
}

/// Measures `|D phi|` on the unsmoothed bubble region by region and asserts
/// the regional bounds: `pi/2 (1 - eps)` along `X` and `pi (1 - eps)` along
/// `Y, Z` on the core, `(1 - eps)/m` on the neck, exactly 1 outside `r3`, and
/// `lambda' <= 1` everywhere.
pub fn blowdown_lipschitz(bubble: &Bubble, lambda: &Profile) -> Result<BlowdownReport> {
    let p = &bubble.params;
    let (r1, r3, eps) = (p.r1, p.r3, p.epsilon);
    let t3 = r3 - p.big_r3;
    let end = lambda.eval(r3)?.v;
    if !((end - t3).abs() <= 1e-12 * t3) {
        return Err(param(format!("lambda(r3) = {end} but this bubble needs r3 - R3 = {t3}")));
    }
    let MetricForm::Berger { a, b, .. } = &bubble.raw.form else {
        return Err(Error::Internal("bubble metric is not in Berger form".into()));
    };
    let n = BLOWDOWN_SAMPLES;
    let core = dphi_max(a, b, lambda, eps, 1e-8 * r1, r1, n)?;
    let neck = dphi_max(a, b, lambda, eps, r1, r3, n)?;
    let exterior = dphi_max(a, b, lambda, eps, r3, 10.0 * r3, n)?;
    let rep = BlowdownReport {
        core,
        neck,
        exterior,
        global: core.max().max(neck.max()).max(exterior.max()),
        bound_x_core: 0.5 * PI * (1.0 - eps),
        bound_yz_core: PI * (1.0 - eps),
        bound_neck: (1.0 - eps) / p.m,
    };
    let fail = |what: &str, v: f64, bound: f64| Err(Error::Assertion(format!("blow-down {what}: {v} > {bound}")));
    let slack = 1.0 + 1e-12;
    for (name, d) in [("core", core), ("neck", neck), ("exterior", exterior)] {
        if d.radial > slack {
            return fail(&format!("radial factor on the {name}"), d.radial, 1.0);
        }
    }
    if core.x > rep.bound_x_core {
        return fail("X factor on [0, r1]", core.x, rep.bound_x_core);
    }
    if core.yz > rep.bound_yz_core {
        return fail("Y,Z factor on [0, r1]", core.yz, rep.bound_yz_core);
    }
    if neck.max() > rep.bound_neck {
        return fail("factor on [r1, r3]", neck.max(), rep.bound_neck);
    }
    if exterior.max() > slack || exterior.min < 1.0 / slack {
        return Err(Error::Assertion(format!(
            "blow-down is not an isometry beyond r3: factors in [{}, {}]",
            exterior.min,
            exterior.max()
        )));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{assemble_bubble, BubbleConfig, H3Choice};
    use crate::profiles::Rule;

    #[test]
    fn identity_map_of_flat_space_has_unit_factors() {
        let id = Profile::single("id", 10.0, Rule::Affine { v0: 0.0, slope: 1.0, r0: 0.0 }).unwrap();
        let d = dphi_max(&id, &id, &id, 0.0, 1e-6, 10.0, 1001).unwrap();
        assert_eq!((d.radial, d.x, d.yz, d.min), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn balanced_bubble_meets_the_regional_bounds() {
        let mut cfg = BubbleConfig::new(0.09, 0.08, 1e-3, 1e3);
        cfg.h3 = H3Choice::Balanced { kappa: 0.02 };
        let b = assemble_bubble(&cfg).unwrap();
        let rep = blowdown_lipschitz(&b, &b.lambda).unwrap();
        assert!(rep.global <= (1.0 - b.params.epsilon) / b.params.m);
        assert!(rep.global > 1.0);
        // the wrong lambda is refused
        let other = crate::profiles::make_lambda(2.0 * b.params.r3, b.params.big_r3, 1.0).unwrap();
        assert!(blowdown_lipschitz(&b, &other).is_err());
    }
}
