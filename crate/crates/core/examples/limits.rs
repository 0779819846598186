//! Parameter schedule, Hölder exponent and GH error sums for the sequence of spaces.

use warpforge::limits::{compose_distortion, gh_error_limit, holder_exponent, schedule};

fn main() {
    let (eps, delta, c) = (0.05, 0.01, 1.382);
    for j in [1, 3, 10] {
        let s = schedule(j, eps, delta, 1.0);
        println!("j = {j:>2}: r_j = {:.4e}, delta_j = {:.1e}, eps_j = {:.4e}, lambda_j = {}", s.r_j, s.delta_j, s.epsilon_j, s.lambda_j);
    }
    let alpha = holder_exponent(delta, c).unwrap();
    println!("alpha(delta) = {alpha}");
    for r in [1e-1, 1e-4, 1e-8] {
        let (prod, bound) = compose_distortion(r, 12, delta, c).unwrap();
        println!("r = {r:e}: distortion {prod:.4e} <= {bound:.4e}");
    }
    for i in 0..3 {
        println!("GH error from stage {i} to the limit: {:.3e}", gh_error_limit(i, delta, c).unwrap());
    }
}
