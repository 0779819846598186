//! Feasibility scan of the balanced bubble over (eps, alpha2).

use warpforge::construction::{BubbleConfig, H3Choice};
use warpforge::verify::scan::{ScanRanges, ScanSpace};
use warpforge::verify::{scan_params, GridConfig};

fn main() {
    let mut base = BubbleConfig::new(0.09, 0.08, 1e-3, 1e3);
    base.h3 = H3Choice::Balanced { kappa: 0.02 };
    let space = ScanSpace {
        target: "bubble".into(),
        base,
        ranges: ScanRanges { epsilon: vec![0.05, 0.09, 0.2], alpha2: vec![0.01, 0.08, 0.1, 0.2], delta2: vec![] },
        bound: 0.0,
    };
    let t = scan_params(&space, &GridConfig::default().with_points(512).without_oracle()).unwrap();
    t.write_csv(std::io::stdout()).unwrap();
    for f in &t.frontier {
        println!("eps {}: largest passing alpha2 prefix {:?}, monotone {}", f.epsilon, f.alpha2_max, f.monotone);
    }
}
