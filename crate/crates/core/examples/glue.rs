//! Glues the balanced bubble into the tip of a flat surgery.

use warpforge::construction::{assemble_bubble, build_surgery, glue_bubble, glue_params, BubbleConfig, H3Choice, SurgeryConfig, SURGERY_C};
use warpforge::verify::{verify_ric_lower, GridConfig};

fn main() {
    let mut bc = BubbleConfig::new(0.09, 0.08, 1e-3, 1e3);
    bc.h3 = H3Choice::Balanced { kappa: 0.02 };
    let b = assemble_bubble(&bc).unwrap();
    // the surgery's cone must match the bubble's end
    let s = build_surgery(&SurgeryConfig::new(0.0, 1.0, -0.1, b.params.epsilon, b.params.alpha, 1e-3, 1e-3)).unwrap();
    let g = glue_bubble(&s, &b, SURGERY_C).unwrap();
    let p = glue_params(&g).unwrap();
    println!("scale {:.4e}, delta_I {:.4e}, delta_II {:.4e}, collar mismatch {:.1e}", p.scale, p.delta_i, p.delta_ii, p.collar_mismatch);
    println!("{}", verify_ric_lower(&g, p.lambda_target, &GridConfig::default()).unwrap().summary());
}
