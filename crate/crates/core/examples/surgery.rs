//! Conical surgery on a flat and a hyperbolic model base, checked item by item.

use warpforge::construction::{build_surgery, measured_c, surgery_checks, SurgeryConfig, SURGERY_C};
use warpforge::verify::GridConfig;

fn main() {
    // the hyperbolic base has Ric = -3 on S^3, so its bound sits below that;
    // its tip needs a much smaller r_hat
    for (kappa, lambda, r_hat, dh) in [(0.0, -0.1, 1e-3, 1e-3), (-1.0, -3.5, 1e-7, 1e-9)] {
        let s = build_surgery(&SurgeryConfig::new(kappa, 1.0, lambda, 0.02, 0.01, r_hat, dh)).unwrap();
        let p = &s.params;
        println!("kappa = {kappa}: r_m = {}, r2 = {}, delta = {:.4e}", p.r_m, p.r2, p.delta);
        let (checks, rep) = surgery_checks(&s, SURGERY_C, &GridConfig::default()).unwrap();
        for c in checks {
            println!("  item {} {:<44} {:>12.5e} vs {:>12.5e}  {}", c.item, c.name, c.value, c.bound, c.holds);
        }
        println!("  measured C = {:.1}", measured_c(&s, &rep));
    }
}
