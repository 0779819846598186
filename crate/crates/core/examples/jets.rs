//! Second-order jets: derivatives travel through arithmetic exactly.

use warpforge::curvature::ricci_berger;
use warpforge::Jet2;

fn main() {
    let (r, k) = (0.7, 1.3);
    let a = (Jet2::variable(r) * k).sin().scale(1.0 / k);
    println!("A = sin(kr)/k   {a}");
    println!("by hand         ({}, {}, {})", (k * r).sin() / k, (k * r).cos(), -k * (k * r).sin());

    // Berger core with B and f constant: the radial block is exactly k^2
    let blocks = ricci_berger(a, Jet2::constant(0.9), Jet2::constant(0.1), r).unwrap();
    println!("Ric(dr, dr) = {}   k^2 = {}", blocks.rr, k * k);
}
