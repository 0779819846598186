//! C1 joint made C2 by the quadrature join, and what it does to the curvature.

use warpforge::construction::c1_smooth;
use warpforge::profiles::lin_grid;
use warpforge::{Piece, Profile, Rule};

fn main() {
    // sin r glued to its tangent line at r = 1: C1, with a jump in the second derivative
    let at = 1.0f64;
    let p = Profile::new(
        "kinked",
        vec![
            Piece::new(0.0, at, Rule::SinK { k: 1.0 }),
            Piece::new(at, 2.0, Rule::Affine { v0: at.sin(), slope: at.cos(), r0: at }),
        ],
    )
    .unwrap();
    let (s, rep) = c1_smooth(&p, at, 0.05).unwrap();
    println!("{rep:?}");
    for r in lin_grid(at - 0.008, at + 0.008, 9) {
        let (a, b) = (p.eval_with(r, r).unwrap(), s.eval_with(r, r).unwrap());
        println!("r = {r:.3}  f'' before {:>9.5}  after {:>9.5}", a.d2, b.d2);
    }
}
