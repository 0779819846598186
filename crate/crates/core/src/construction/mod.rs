//! End-to-end builders: bubble, surgery, gluing, smoothing and blow-down maps.

use serde::{Deserialize, Serialize};

pub mod bubble;
pub mod glue;
pub mod maps;
pub mod smoothing;
pub mod surgery;

pub use bubble::{assemble_bubble, build_bubble, step1_metric, Bubble, BubbleConfig, BubbleParams, H3Choice};
pub use glue::{glue_bubble, glue_params, GlueParams, COLLAR_TOL};
pub use maps::{blowdown_lipschitz, dphi_factors, dphi_max, BlowdownReport, DphiMax};
pub use smoothing::{c1_smooth, SmoothingReport};
pub use surgery::{
    bilipschitz_check, build_surgery, measured_c, surgery_checks, SurgeryCheck, SurgeryConfig, SurgeryMetric, SurgeryParams,
    SURGERY_C,
};

/// Parameter record carried by a [`crate::WarpedMetric`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricParams {
    #[default]
    None,
    Bubble(BubbleParams),
    Surgery(SurgeryParams),
    Glued(GlueParams),
}
