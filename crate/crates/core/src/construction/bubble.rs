//! The positive-Ricci bubble: Berger core, cone-forming neck, warped cone end.

use serde::{Deserialize, Serialize};

use crate::construction::smoothing::{c1_smooth, default_window, SmoothingReport};
use crate::construction::MetricParams;
use crate::curvature::{MetricForm, WarpedMetric};
use crate::error::{param, Error, Result};
use crate::profiles::{
    lin_grid, make_a, make_b, make_f2, make_f4, make_h3, make_h3_balanced, make_lambda, Piece, Profile, Rule,
    TAU_C1,
};

/// Shape of the neck profile between `r1` and `r3`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum H3Choice {
    /// `h'' = c / r`, with `r3` given.
    #[default]
    Log,
    /// `h'' = kappa h / r^2`; `r3` is wherever the slope reaches `1 - eps`.
    Balanced { kappa: f64 },
}

fn default_m() -> f64 {
    1e-3
}
fn default_r1() -> f64 {
    2.0
}
fn default_r3() -> f64 {
    1e3
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BubbleConfig {
    pub epsilon: f64,
    pub alpha2: f64,
    pub delta2: f64,
    #[serde(default = "default_m")]
    pub m: f64,
    #[serde(default = "default_r1")]
    pub r1: f64,
    #[serde(default = "default_r3")]
    pub r3: f64,
    #[serde(default)]
    pub h3: H3Choice,
    #[serde(default = "yes")]
    pub smooth: bool,
}

impl BubbleConfig {
    pub fn new(epsilon: f64, alpha2: f64, delta2: f64, r3: f64) -> Self {
        BubbleConfig { epsilon, alpha2, delta2, m: 1e-3, r1: 2.0, r3, h3: H3Choice::Log, smooth: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub m: f64,
    pub r1: f64,
    pub k: f64,
    pub b: f64,
    pub epsilon: f64,
    pub alpha2: f64,
    pub delta2: f64,
    pub r3: f64,
    /// Cone vertex offset `R3`.
    pub big_r3: f64,
    pub alpha: f64,
    pub delta: f64,
    /// `c` of the log neck or `kappa` of the balanced neck.
    pub h3_coeff: f64,
    pub h3_rule: String,
}

/// One named inequality of the parameter budget.
#[derive(Clone, Debug, Serialize)]
pub struct BudgetCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct Bubble {
    pub metric: WarpedMetric,
    /// The same metric before smoothing.
    pub raw: WarpedMetric,
    pub params: BubbleParams,
    pub exterior_start: f64,
    pub lambda: Profile,
    pub smoothing: Vec<SmoothingReport>,
    pub budget: Vec<BudgetCheck>,
}

pub(crate) fn splice(head: &Profile, upto: f64, tail: &Profile, label: &str) -> Result<Profile> {
    let mut pieces: Vec<Piece> = head.pieces.iter().filter(|p| p.lo < upto).cloned().collect();
    if let Some(last) = pieces.last_mut() {
        last.hi = upto;
    }
    pieces.extend(tail.pieces.iter().filter(|p| p.hi > upto).map(|p| Piece::new(p.lo.max(upto), p.hi, p.rule.clone())));
    let out = Profile::new(label, pieces)?;
    out.check_c1(TAU_C1)?;
    Ok(out)
}

/// Parameter budget of the bubble. Every entry must hold for [`build_bubble`].
pub fn bubble_budget(p: &BubbleParams) -> Vec<BudgetCheck> {
    let chk = |name: &str, lhs: f64, rhs: f64, holds: bool| BudgetCheck { name: name.into(), lhs, rhs, holds };
    let t3 = p.r3 - p.big_r3;
    let s2_end = (p.alpha * (1.0 - p.alpha) - p.alpha * p.alpha - 3.0 * p.alpha) + t3.powf(2.0 - 2.0 * p.alpha) / (p.delta * p.delta);
    vec![
        chk("epsilon < 1/10", p.epsilon, 0.1, p.epsilon < 0.1),
        chk("alpha2 <= 1/2", p.alpha2, 0.5, p.alpha2 <= 0.5),
        chk("delta2 < 1", p.delta2, 1.0, p.delta2 < 1.0),
        chk("core radial block: 2 alpha2 < k^2/2", 2.0 * p.alpha2, 0.5 * p.k * p.k, 2.0 * p.alpha2 < 0.5 * p.k * p.k),
        chk("plateau: b > 1/(2k)", p.b, 0.5 / p.k, p.b > 0.5 / p.k),
        chk("cone offset R3 > 0", p.big_r3, 0.0, p.big_r3 > 0.0),
        chk("alpha < alpha2", p.alpha, p.alpha2, p.alpha < p.alpha2),
        {
            let lhs = 1.0 / (1.0 - p.epsilon).powi(2) - 1.0;
            chk("cone end S3 block: 1/(1-eps)^2 - 1 > alpha", lhs, p.alpha, lhs > p.alpha)
        },
        chk("cone end S2 block positive at t3", s2_end, 0.0, s2_end > 0.0),
    ]
}

/// Assembles the bubble without enforcing the budget (the report still lists it).
pub fn assemble_bubble(cfg: &BubbleConfig) -> Result<Bubble> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0) {
        return Err(param(format!("epsilon = {} outside (0, 1)", cfg.epsilon)));
    }
    let (m, r1) = (cfg.m, cfg.r1);
    let (a, k) = make_a(m, r1, 2.0 * r1)?;
    let (b, plateau) = make_b(m, r1, k, &a, 2.0 * r1)?;
    let a_r1 = a.eval_with(0.5 * r1, r1)?.v;
    let (h3, rule) = match cfg.h3 {
        H3Choice::Log => (make_h3(m, cfg.epsilon, r1, cfg.r3, a_r1, 3.0 * cfg.r3)?, "log"),
        H3Choice::Balanced { kappa } => (make_h3_balanced(m, cfg.epsilon, r1, kappa, a_r1, 3.0)?, "balanced"),
    };
    let r3 = h3.r3;
    let r_max = 3.0 * r3;
    // the balanced neck stops wherever its slope crosses 1 - eps
    let eps_eff = match cfg.h3 {
        H3Choice::Log => cfg.epsilon,
        H3Choice::Balanced { .. } => 1.0 - h3.profile.pieces[1].rule.eval(r3)?.d1,
    };
    make_f2(cfg.delta2, cfg.alpha2, r_max)?;
    let (f4, alpha, delta) = make_f4(cfg.delta2, cfg.alpha2, eps_eff, &h3, r_max)?;
    let a_full = splice(&a, r1, &h3.profile, "A")?;
    let b_full = splice(&b, r1, &h3.profile, "B")?;
    let params = BubbleParams {
        m,
        r1,
        k,
        b: plateau,
        epsilon: eps_eff,
        alpha2: cfg.alpha2,
        delta2: cfg.delta2,
        r3,
        big_r3: h3.big_r3,
        alpha,
        delta,
        h3_coeff: h3.c,
        h3_rule: rule.into(),
    };
    let id = format!("bubble(eps={}, alpha2={}, delta2={}, r3={:e})", cfg.epsilon, cfg.alpha2, cfg.delta2, r3);
    let raw = WarpedMetric::new(
        id.clone(),
        MetricForm::Berger { a: a_full.clone(), b: b_full.clone(), f: f4.clone() },
        (0.0, r_max),
        MetricParams::Bubble(params.clone()),
    );
    let mut smoothing = Vec::new();
    let (mut a_s, mut b_s, mut f_s) = (a_full, b_full, f4);
    if cfg.smooth {
        for at in [r1, r3] {
            for prof in [&mut a_s, &mut b_s] {
                let w = default_window(prof, at);
                let (p, rep) = c1_smooth(prof, at, w)?;
                *prof = p;
                smoothing.push(rep);
            }
        }
        let w = default_window(&f_s, r3);
        let (p, rep) = c1_smooth(&f_s, r3, w)?;
        f_s = p;
        smoothing.push(rep);
    }
    let metric = WarpedMetric::new(
        if cfg.smooth { format!("{id} smoothed") } else { id },
        MetricForm::Berger { a: a_s, b: b_s, f: f_s },
        (0.0, r_max),
        MetricParams::Bubble(params.clone()),
    );
    let lambda = make_lambda(r3, h3.big_r3, r_max)?;
    let budget = bubble_budget(&params);
    Ok(Bubble { metric, raw, params, exterior_start: 2.0 * r3, lambda, smoothing, budget })
}

/// Builds the bubble and rejects any violated budget inequality.
pub fn build_bubble(cfg: &BubbleConfig) -> Result<Bubble> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 0.1) {
        return Err(param(format!("epsilon = {} outside (0, 1/10)", cfg.epsilon)));
    }
    if !(cfg.alpha2 > 0.0 && cfg.alpha2 <= 0.5) {
        return Err(param(format!("alpha2 = {} outside (0, 1/2]", cfg.alpha2)));
    }
    let bubble = assemble_bubble(cfg)?;
    if let Some(bad) = bubble.budget.iter().find(|c| !c.holds) {
        return Err(param(format!("bubble budget violated: {} ({} vs {})", bad.name, bad.lhs, bad.rhs)));
    }
    Ok(bubble)
}

/// The core metric alone: `A`, `B` with their slope-`m` continuation and a constant warp.
pub fn step1_metric(m: f64, r1: f64, r_max: f64, f_const: f64) -> Result<(WarpedMetric, f64)> {
    let (a, k) = make_a(m, r1, r_max)?;
    let (b, _) = make_b(m, r1, k, &a, r_max)?;
    let f = Profile::single("f", r_max, Rule::Constant { c: f_const })?;
    Ok((WarpedMetric::new("step1", MetricForm::Berger { a, b, f }, (0.0, r_max), MetricParams::None), k))
}

/// Worst drop of the smallest Ricci block caused by smoothing, over each window.
pub fn smoothing_degradation(raw: &WarpedMetric, smooth: &WarpedMetric, reports: &[SmoothingReport]) -> Result<f64> {
    let mut worst = 0.0f64;
    for rep in reports {
        let (lo, hi) = (rep.at - rep.window, rep.at + rep.window);
        let mut old_min = f64::INFINITY;
        let mut new_min = f64::INFINITY;
        for r in lin_grid(lo, hi, 257) {
            let anchor = if r < rep.at { 0.5 * (lo + rep.at) } else { 0.5 * (hi + rep.at) };
            old_min = old_min.min(raw.blocks_with(anchor, r)?.min());
            new_min = new_min.min(smooth.blocks_with(r, r)?.min());
        }
        worst = worst.max(old_min - new_min);
    }
    if !worst.is_finite() {
        return Err(Error::Smoothing("non-finite curvature in a smoothing window".into()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bubble_parameters() {
        let b = assemble_bubble(&BubbleConfig::new(0.05, 0.01, 0.01, 1e3)).unwrap();
        let p = &b.params;
        assert!((p.k - 0.784898).abs() < 1e-6);
        assert!(p.big_r3 > 0.0 && p.alpha < p.alpha2);
        assert!(b.budget.iter().all(|c| c.holds), "{:?}", b.budget);
        assert_eq!(b.smoothing.len(), 5);
        for prof in b.metric.profiles() {
            prof.check_c1(TAU_C1).unwrap();
        }
    }

    #[test]
    fn exterior_is_the_exact_warped_cone() {
        let b = build_bubble(&BubbleConfig::new(0.05, 0.01, 0.01, 1e3)).unwrap();
        let p = &b.params;
        if let MetricForm::Berger { a, b: bb, f } = &b.metric.form {
            for r in lin_grid(b.exterior_start, 3e3, 101) {
                assert_eq!(a.value(r).unwrap(), (1.0 - p.epsilon) * (r - p.big_r3));
                assert_eq!(bb.value(r).unwrap(), (1.0 - p.epsilon) * (r - p.big_r3));
                assert_eq!(f.value(r).unwrap(), p.delta * (r - p.big_r3).powf(p.alpha));
            }
        } else {
            panic!("bubble is in Berger form");
        }
    }

    #[test]
    fn strict_build_rejects_budget_violations() {
        assert!(build_bubble(&BubbleConfig::new(0.2, 0.01, 0.01, 1e3)).is_err());
        let e = build_bubble(&BubbleConfig::new(0.05, 0.4, 0.01, 1e3)).unwrap_err();
        assert!(e.to_string().contains("core radial block"), "{e}");
        assert!(assemble_bubble(&BubbleConfig::new(0.05, 0.4, 0.01, 1e3)).is_ok());
    }

    #[test]
    fn step1_metric_plateau() {
        let (m, k) = step1_metric(1e-3, 2.0, 1e3, 0.1).unwrap();
        let b = m.blocks(0.5).unwrap();
        assert!((b.rr - k * k).abs() <= 1e-9 * k * k);
        let b = m.blocks(10.0).unwrap();
        assert_eq!(b.rr, 0.0);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let ok: BubbleConfig = serde_json::from_str(r#"{"epsilon":0.05,"alpha2":0.01,"delta2":0.01}"#).unwrap();
        assert_eq!((ok.m, ok.r1, ok.r3), (1e-3, 2.0, 1e3));
        assert!(serde_json::from_str::<BubbleConfig>(r#"{"epsilon":0.05,"alpha2":0.01,"delta2":0.01,"x":1}"#).is_err());
        let bal: BubbleConfig =
            serde_json::from_str(r#"{"epsilon":0.09,"alpha2":0.1,"delta2":1e-3,"h3":{"rule":"balanced","kappa":0.02}}"#)
                .unwrap();
        assert_eq!(bal.h3, H3Choice::Balanced { kappa: 0.02 });
    }
}
