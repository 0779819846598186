//! Dense-grid verification of Ricci lower bounds and profile constraints.

pub mod constraints;
pub mod scan;

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{fd_ricci_oracle, oracle_rel_err, OracleConfig, RicciBlocks, WarpedMetric};
use crate::error::{param, Result};
use crate::profiles::{fmt_f64, log_grid};

pub use constraints::{check_profile_constraints, Bound, Cmp, Constraint, ConstraintReport, Expr};
pub use scan::{scan_params, ScanRow, ScanSpace, ScanTable};

fn default_points() -> usize {
    4096
}
fn default_refine() -> usize {
    16
}
fn default_oracle_points() -> usize {
    32
}
fn default_seed() -> u64 {
    0x5eed_2024
}
fn yes() -> bool {
    true
}

/// Sampling density and oracle settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_points")]
    pub points_per_piece: usize,
    /// Extra points near each piece end, as a multiple of `points_per_piece / 100`.
    #[serde(default = "default_refine")]
    pub refine_factor: usize,
    #[serde(default = "yes")]
    pub oracle: bool,
    #[serde(default = "default_oracle_points")]
    pub oracle_points: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            points_per_piece: default_points(),
            refine_factor: default_refine(),
            oracle: true,
            oracle_points: default_oracle_points(),
            seed: default_seed(),
        }
    }
}

impl GridConfig {
    pub fn without_oracle(mut self) -> Self {
        self.oracle = false;
        self
    }

    pub fn with_points(mut self, n: usize) -> Self {
        self.points_per_piece = n;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.points_per_piece < 2 {
            return Err(param("points_per_piece must be at least 2"));
        }
        Ok(())
    }
}

/// Minimum of one Ricci block over a piece.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockMin {
    pub min: f64,
    pub argmin: f64,
    /// `min - bound`.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockMins {
    pub rr: BlockMin,
    /// Round `S^3` block, or the Hopf-fiber block in Berger form.
    pub s3: BlockMin,
    #[serde(rename = "sYZ", skip_serializing_if = "Option::is_none", default)]
    pub syz: Option<BlockMin>,
    pub s2: BlockMin,
}

impl BlockMins {
    pub fn named(&self) -> Vec<(&'static str, BlockMin)> {
        let mut v = vec![("rr", self.rr), ("s3", self.s3)];
        if let Some(s) = self.syz {
            v.push(("sYZ", s));
        }
        v.push(("s2", self.s2));
        v
    }

    /// The block with the smallest margin.
    pub fn worst(&self) -> (&'static str, BlockMin) {
        self.named().into_iter().fold(("rr", self.rr), |acc, x| if x.1.margin < acc.1.margin { x } else { acc })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceReport {
    pub interval: [f64; 2],
    pub grid: usize,
    pub blocks: BlockMins,
}

impl PieceReport {
    pub fn margin(&self) -> f64 {
        self.blocks.worst().1.margin
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub metric_id: String,
    pub bound: f64,
    pub passed: bool,
    pub oracle_checked: bool,
    pub oracle_max_rel_err: f64,
    pub pieces: Vec<PieceReport>,
}

impl VerificationReport {
    /// Smallest margin over all pieces and blocks.
    pub fn worst_margin(&self) -> f64 {
        self.pieces.iter().map(PieceReport::margin).fold(f64::INFINITY, f64::min)
    }

    /// `(interval, block, min)` of the worst violation, if any.
    pub fn worst_violation(&self) -> Option<([f64; 2], &'static str, BlockMin)> {
        self.pieces
            .iter()
            .map(|p| (p.interval, p.blocks.worst()))
            .filter(|(_, (_, b))| b.margin <= 0.0)
            .min_by(|a, b| a.1 .1.margin.total_cmp(&b.1 .1.margin))
            .map(|(i, (n, b))| (i, n, b))
    }

    /// Pieces whose worst block fails the bound.
    pub fn failing_pieces(&self) -> Vec<&PieceReport> {
        self.pieces.iter().filter(|p| p.margin() <= 0.0).collect()
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: Ric > {} {} (worst margin {:.6e}",
            self.metric_id,
            self.bound,
            if self.passed { "PASSED" } else { "FAILED" },
            self.worst_margin()
        );
        if self.oracle_checked {
            s.push_str(&format!(", oracle max rel err {:.3e}", self.oracle_max_rel_err));
        }
        s.push(')');
        if let Some((iv, name, b)) = self.worst_violation() {
            s.push_str(&format!("\n  worst violation: {name} = {:.6e} at r = {:.6e} in [{:.6e}, {:.6e}]", b.min, b.argmin, iv[0], iv[1]));
        }
        s
    }
}

/// Sample radii for one segment: log-spaced, plus geometric clusters within
/// 1% of each end. Starts at `1e-8 r_max` when the segment starts at 0.
pub fn segment_grid(lo: f64, hi: f64, r_max: f64, cfg: &GridConfig) -> Vec<f64> {
    let start = if lo > 0.0 { lo } else { (1e-8 * r_max).min(0.5 * hi) };
    let mut pts = log_grid(start, hi, cfg.points_per_piece);
    let extra = cfg.refine_factor * cfg.points_per_piece.div_ceil(100);
    if extra > 0 {
        let w = 0.01 * (hi - start);
        for i in 0..extra {
            // offsets from w down to 1e-6 w
            let d = w * (1e-6f64).powf(i as f64 / (extra.max(2) - 1) as f64);
            if lo > 0.0 {
                pts.push(lo + d);
            }
            pts.push(hi - d);
        }
    }
    pts.retain(|&r| r >= start && r <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn block_min(samples: &[(f64, RicciBlocks)], pick: impl Fn(&RicciBlocks) -> f64, bound: f64) -> BlockMin {
    let mut best = BlockMin { min: f64::INFINITY, argmin: f64::NAN, margin: f64::INFINITY };
    for (r, b) in samples {
        let v = pick(b);
        // strict comparison: ties keep the smallest radius
        if v < best.min || best.argmin.is_nan() {
            best.min = v;
            best.argmin = *r;
        }
    }
    best.margin = best.min - bound;
    best
}

/// Closed-form block samples on one segment, each evaluated with the piece
/// containing the segment midpoint.
pub fn sample_segment(m: &WarpedMetric, lo: f64, hi: f64, cfg: &GridConfig) -> Result<Vec<(f64, RicciBlocks)>> {
    let mid = 0.5 * (lo + hi);
    segment_grid(lo, hi, m.r_range.1, cfg)
        .into_par_iter()
        .map(|r| m.blocks_with(mid, r).map(|b| (r, b)))
        .collect()
}

/// Largest oracle disagreement over `n` random radii per segment.
pub fn oracle_max_rel_err(m: &WarpedMetric, n: usize, seed: u64) -> Result<f64> {
    let cfg = OracleConfig::default();
    let mut worst = 0.0f64;
    for (i, (lo, hi)) in m.segments().into_iter().enumerate() {
        // Coordinate differences lose ~1e-8 / min(A, B)^2 to cancellation where
        // a sphere factor collapses, so stay away from r = 0.
        let a = if lo > 0.0 { lo * (1.0 + 2e-3) } else { 0.05 * hi };
        let b = hi * (1.0 - 2e-3);
        if !(b > a) {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let radii: Vec<f64> = (0..n).map(|_| (a.ln() + rng.gen::<f64>() * (b / a).ln()).exp()).collect();
        let errs: Vec<f64> = radii
            .into_par_iter()
            .map(|r| {
                let formula = m.blocks(r)?;
                let oracle = fd_ricci_oracle(m, r, cfg)?;
                Ok(oracle_rel_err(&formula, &oracle, m.curvature_scale(r)?))
            })
            .collect::<Result<_>>()?;
        worst = errs.into_iter().fold(worst, f64::max);
    }
    Ok(worst)
}

/// Checks `Ric > bound` block by block on every smooth segment of `m.r_range`.
pub fn verify_ric_lower(m: &WarpedMetric, bound: f64, cfg: &GridConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let mut pieces = Vec::new();
    for (lo, hi) in m.segments() {
        let samples = sample_segment(m, lo, hi, cfg)?;
        let berger = !m.is_cone();
        let blocks = BlockMins {
            rr: block_min(&samples, |b| b.rr, bound),
            s3: block_min(&samples, |b| b.sx, bound),
            syz: berger.then(|| block_min(&samples, |b| b.syz, bound)),
            s2: block_min(&samples, |b| b.s2, bound),
        };
        pieces.push(PieceReport { interval: [lo, hi], grid: samples.len(), blocks });
    }
    let passed = pieces.iter().all(|p| p.margin() > 0.0);
    let (oracle_checked, oracle_max_rel_err) =
        if cfg.oracle { (true, oracle_max_rel_err(m, cfg.oracle_points, cfg.seed)?) } else { (false, 0.0) };
    Ok(VerificationReport { metric_id: m.id.clone(), bound, passed, oracle_checked, oracle_max_rel_err, pieces })
}

/// The same check restricted to `[lo, hi]`.
pub fn verify_ric_lower_on(m: &WarpedMetric, lo: f64, hi: f64, bound: f64, cfg: &GridConfig) -> Result<VerificationReport> {
    let mut sub = m.clone();
    sub.r_range = (lo.max(m.r_range.0), hi.min(m.r_range.1));
    verify_ric_lower(&sub, bound, cfg)
}

/// Writes `r,phi_or_A,B,f,ric_rr,ric_s3_or_sX,ric_sYZ,ric_s2` rows. Radii on a
/// breakpoint use the piece to their right.
pub fn write_curvature_csv<W: Write>(m: &WarpedMetric, grid: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "phi_or_A", "B", "f", "ric_rr", "ric_s3_or_sX", "ric_sYZ", "ric_s2"])?;
    let rows: Vec<[String; 8]> = grid
        .par_iter()
        .map(|&r| {
            let j = m.jets_with(r, r)?;
            let b = m.blocks(r)?;
            Ok([
                fmt_f64(r),
                fmt_f64(j.a.v),
                fmt_f64(j.b.v),
                fmt_f64(j.f.v * m.warp_scale),
                fmt_f64(b.rr),
                fmt_f64(b.sx),
                fmt_f64(b.syz),
                fmt_f64(b.s2),
            ])
        })
        .collect::<Result<_>>()?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Default export grid: `n` log-spaced radii over the metric range.
pub fn export_grid(m: &WarpedMetric, n: usize) -> Vec<f64> {
    let (lo, hi) = m.r_range;
    let start = if lo > 0.0 { lo } else { 1e-6 * hi };
    log_grid(start, hi, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::MetricParams;
    use crate::curvature::MetricForm;
    use crate::profiles::{Piece, Profile, Rule};
    use std::f64::consts::PI;

    fn sphere() -> WarpedMetric {
        WarpedMetric::new(
            "round S4 x S2",
            MetricForm::Cone {
                phi: Profile::single("phi", PI, Rule::SinK { k: 1.0 }).unwrap(),
                f: Profile::single("f", PI, Rule::Constant { c: 0.1 }).unwrap(),
            },
            (1e-3, PI - 1e-3),
            MetricParams::None,
        )
    }

    #[test]
    fn round_sphere_passes_with_min_three() {
        let rep = verify_ric_lower(&sphere(), 2.9, &GridConfig::default()).unwrap();
        assert!(rep.passed);
        assert!(rep.oracle_checked && rep.oracle_max_rel_err < 1e-5, "{}", rep.oracle_max_rel_err);
        let b = &rep.pieces[0].blocks;
        assert!((b.rr.min - 3.0).abs() < 1e-9 && (b.s3.min - 3.0).abs() < 1e-9);
        assert!(b.syz.is_none());
        assert!((rep.worst_margin() - 0.1).abs() < 1e-9);
    }

    #[test]
    fn failing_bound_reports_negative_margin() {
        let rep = verify_ric_lower(&sphere(), 3.5, &GridConfig::default().without_oracle()).unwrap();
        assert!(!rep.passed);
        let (_, name, b) = rep.worst_violation().unwrap();
        assert!(b.margin < 0.0);
        assert!(name == "rr" || name == "s3");
    }

    #[test]
    fn grid_is_sorted_and_refined_at_both_ends() {
        let cfg = GridConfig::default();
        let g = segment_grid(2.0, 1000.0, 3000.0, &cfg);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g[0], 2.0);
        assert_eq!(*g.last().unwrap(), 1000.0);
        let near_top = g.iter().filter(|&&r| r > 990.0).count();
        assert!(near_top > 16 * 41 / 2, "{near_top}");
        let z = segment_grid(0.0, 1.0, 10.0, &cfg);
        assert!((z[0] - 1e-7).abs() < 1e-20);
    }

    #[test]
    fn report_is_independent_of_thread_count() {
        let m = sphere();
        let cfg = GridConfig::default();
        let a = verify_ric_lower(&m, 0.0, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| verify_ric_lower(&m, 0.0, &cfg).unwrap());
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn report_json_schema() {
        let rep = verify_ric_lower(&sphere(), 0.0, &GridConfig::default().with_points(64).without_oracle()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        for k in ["metric_id", "bound", "passed", "oracle_checked", "oracle_max_rel_err", "pieces"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        let p = &v["pieces"][0];
        assert!(p["interval"].is_array() && p["grid"].is_u64());
        for k in ["min", "argmin", "margin"] {
            assert!(p["blocks"]["rr"][k].is_f64());
        }
    }

    #[test]
    fn csv_has_declared_columns() {
        let m = WarpedMetric::new(
            "flat",
            MetricForm::Berger {
                a: Profile::single("A", 2.0, Rule::Affine { v0: 0.0, slope: 1.0, r0: 0.0 }).unwrap(),
                b: Profile::single("B", 2.0, Rule::Affine { v0: 0.0, slope: 1.0, r0: 0.0 }).unwrap(),
                f: Profile::new(
                    "f",
                    vec![
                        Piece::new(0.0, 1.0, Rule::Constant { c: 0.5 }),
                        Piece::new(1.0, 2.0, Rule::Constant { c: 0.5 }),
                    ],
                )
                .unwrap(),
            },
            (0.0, 2.0),
            MetricParams::None,
        );
        let mut buf = Vec::new();
        write_curvature_csv(&m, &[0.5, 1.0, 1.5], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "r,phi_or_A,B,f,ric_rr,ric_s3_or_sX,ric_sYZ,ric_s2");
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(row, vec![0.5, 0.5, 0.5, 0.5, 0.0, 0.0, 0.0, 4.0]);
    }
}
