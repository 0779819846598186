//! Lipschitz constants of the blow-down map, region by region.

use warpforge::construction::{blowdown_lipschitz, build_bubble, BubbleConfig};

fn main() {
    let b = build_bubble(&BubbleConfig::new(0.05, 0.01, 0.01, 1e3)).unwrap();
    let rep = blowdown_lipschitz(&b, &b.lambda).unwrap();
    println!("core      {:?}  bounds X {:.4}, YZ {:.4}", rep.core, rep.bound_x_core, rep.bound_yz_core);
    println!("neck      {:?}  bound {:.1}", rep.neck, rep.bound_neck);
    println!("exterior  {:?}", rep.exterior);
    println!("C = {}", rep.global);
}
