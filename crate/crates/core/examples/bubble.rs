//! Builds the balanced bubble and verifies Ric > 0 before and after smoothing.

use warpforge::construction::{build_bubble, BubbleConfig, H3Choice};
use warpforge::verify::{verify_ric_lower, GridConfig};

fn main() {
    let mut cfg = BubbleConfig::new(0.09, 0.08, 1e-3, 1e3);
    cfg.h3 = H3Choice::Balanced { kappa: 0.02 };
    let b = build_bubble(&cfg).unwrap();
    let p = &b.params;
    println!("k = {:.6}, r3 = {:.4e}, R3 = {:.4e}, alpha = {:.6}, delta = {:.4e}", p.k, p.r3, p.big_r3, p.alpha, p.delta);
    for c in &b.budget {
        println!("  {:<48} {:>12.4e} vs {:>12.4e}  {}", c.name, c.lhs, c.rhs, if c.holds { "ok" } else { "VIOLATED" });
    }
    let grid = GridConfig::default();
    println!("{}", verify_ric_lower(&b.raw, 0.0, &grid).unwrap().summary());
    println!("{}", verify_ric_lower(&b.metric, 0.0, &grid).unwrap().summary());

    // the default log neck is not positive near r1
    let log = build_bubble(&BubbleConfig::new(0.05, 0.01, 0.01, 1e3)).unwrap();
    println!("{}", verify_ric_lower(&log.raw, 0.0, &grid.without_oracle()).unwrap().summary());
}
