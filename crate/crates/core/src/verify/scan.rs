//! Feasibility scans over bubble parameters.

use serde::{Deserialize, Serialize};

use crate::construction::{build_bubble, BubbleConfig};
use crate::error::{Error, Result};
use crate::verify::{verify_ric_lower, GridConfig};

fn bubble_target() -> String {
    "bubble".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRanges {
    pub epsilon: Vec<f64>,
    pub alpha2: Vec<f64>,
    /// Defaults to the base config's `delta2`.
    #[serde(default)]
    pub delta2: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpace {
    #[serde(default = "bubble_target")]
    pub target: String,
    pub base: BubbleConfig,
    pub ranges: ScanRanges,
    #[serde(default)]
    pub bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanStatus {
    Pass,
    Fail,
    /// The builder refused the parameters.
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub epsilon: f64,
    pub alpha2: f64,
    pub delta2: f64,
    pub status: ScanStatus,
    pub worst_margin: Option<f64>,
    pub worst_block: Option<String>,
    pub worst_at: Option<f64>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub epsilon: f64,
    pub delta2: f64,
    /// Largest `alpha2` below which every scanned value passes.
    pub alpha2_max: Option<f64>,
    /// Whether passes form a prefix of the sorted `alpha2` list.
    pub monotone: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub target: String,
    pub bound: f64,
    pub rows: Vec<ScanRow>,
    pub frontier: Vec<FrontierPoint>,
}

impl ScanTable {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["epsilon", "alpha2", "delta2", "status", "worst_margin", "worst_block", "worst_at"])?;
        for r in &self.rows {
            let opt = |x: Option<f64>| x.map(crate::profiles::fmt_f64).unwrap_or_default();
            w.write_record(&[
                crate::profiles::fmt_f64(r.epsilon),
                crate::profiles::fmt_f64(r.alpha2),
                crate::profiles::fmt_f64(r.delta2),
                format!("{:?}", r.status).to_lowercase(),
                opt(r.worst_margin),
                r.worst_block.clone().unwrap_or_default(),
                opt(r.worst_at),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Builds and verifies the bubble at every grid point; failures are rows, not errors.
pub fn scan_params(space: &ScanSpace, grid: &GridConfig) -> Result<ScanTable> {
    if space.target != "bubble" {
        return Err(Error::Config(format!("unknown scan target {:?}; only \"bubble\" is supported", space.target)));
    }
    let eps = sorted(&space.ranges.epsilon);
    let a2s = sorted(&space.ranges.alpha2);
    let d2s = if space.ranges.delta2.is_empty() { vec![space.base.delta2] } else { sorted(&space.ranges.delta2) };
    if eps.is_empty() || a2s.is_empty() {
        return Err(Error::Config("scan ranges must be non-empty".into()));
    }
    let mut rows = Vec::new();
    let mut frontier = Vec::new();
    for &e in &eps {
        for &d2 in &d2s {
            let mut statuses = Vec::new();
            for &a2 in &a2s {
                let cfg = BubbleConfig { epsilon: e, alpha2: a2, delta2: d2, ..space.base.clone() };
                let row = match build_bubble(&cfg) {
                    Err(err) => ScanRow {
                        epsilon: e,
                        alpha2: a2,
                        delta2: d2,
                        status: ScanStatus::Rejected,
                        worst_margin: None,
                        worst_block: None,
                        worst_at: None,
                        note: err.to_string(),
                    },
                    Ok(b) => {
                        let rep = verify_ric_lower(&b.metric, space.bound, grid)?;
                        let (iv, (name, bm)) = rep
                            .pieces
                            .iter()
                            .map(|p| (p.interval, p.blocks.worst()))
                            .min_by(|x, y| x.1 .1.margin.total_cmp(&y.1 .1.margin))
                            .expect("at least one piece");
                        ScanRow {
                            epsilon: e,
                            alpha2: a2,
                            delta2: d2,
                            status: if rep.passed { ScanStatus::Pass } else { ScanStatus::Fail },
                            worst_margin: Some(bm.margin),
                            worst_block: Some(name.to_string()),
                            worst_at: Some(bm.argmin),
                            note: format!("worst piece [{:.4e}, {:.4e}]", iv[0], iv[1]),
                        }
                    }
                };
                statuses.push(row.status == ScanStatus::Pass);
                rows.push(row);
            }
            let prefix = statuses.iter().take_while(|&&p| p).count();
            let monotone = statuses.iter().skip(prefix).all(|&p| !p);
            frontier.push(FrontierPoint {
                epsilon: e,
                delta2: d2,
                alpha2_max: (prefix > 0).then(|| a2s[prefix - 1]),
                monotone,
            });
        }
    }
    Ok(ScanTable { target: space.target.clone(), bound: space.bound, rows, frontier })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_range_epsilon_row_is_rejected() {
        let space = ScanSpace {
            target: "bubble".into(),
            base: BubbleConfig::new(0.05, 0.01, 0.01, 1e3),
            ranges: ScanRanges { epsilon: vec![0.2], alpha2: vec![1e-3, 0.01], delta2: vec![] },
            bound: 0.0,
        };
        let t = scan_params(&space, &GridConfig::default().with_points(64).without_oracle()).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows.iter().all(|r| r.status == ScanStatus::Rejected && r.note.contains("epsilon")));
        assert_eq!(t.frontier[0].alpha2_max, None);
        assert!(t.frontier[0].monotone);
    }

    #[test]
    fn unknown_target_is_a_config_error() {
        let space = ScanSpace {
            target: "torus".into(),
            base: BubbleConfig::new(0.05, 0.01, 0.01, 1e3),
            ranges: ScanRanges { epsilon: vec![0.05], alpha2: vec![0.01], delta2: vec![] },
            bound: 0.0,
        };
        assert!(matches!(scan_params(&space, &GridConfig::default()), Err(Error::Config(_))));
    }
}
