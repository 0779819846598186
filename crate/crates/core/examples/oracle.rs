//! Closed-form Ricci blocks against the finite-difference oracle on a round S^4 x S^2.

use warpforge::curvature::{fd_ricci_oracle, OracleConfig};
use warpforge::profiles::lin_grid;
use warpforge::{MetricForm, Profile, Rule, WarpedMetric};

fn main() {
    let phi = Profile::single("phi", 3.0, Rule::SinK { k: 1.0 }).unwrap();
    let f = Profile::single("f", 3.0, Rule::Constant { c: 0.5 }).unwrap();
    let m = WarpedMetric::new("S4 x S2(1/2)", MetricForm::Cone { phi, f }, (0.0, 3.0), Default::default());
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "r", "rr", "oracle rr", "s2", "oracle s2");
    for r in lin_grid(0.3, 2.8, 6) {
        let b = m.blocks(r).unwrap();
        let o = fd_ricci_oracle(&m, r, OracleConfig::default()).unwrap();
        println!("{r:>6.3} {:>12.9} {:>12.9} {:>12.9} {:>12.9}", b.rr, o.rr, b.s2, o.s2);
    }
}
