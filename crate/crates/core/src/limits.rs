//! Bookkeeping for the inductive sequence of spaces: parameter schedules,
//! Gromov-Hausdorff error sums and Hölder bounds for composed blow-down maps.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Parameters at stage `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub j: u32,
    pub r_j: f64,
    pub delta_j: f64,
    pub epsilon_j: f64,
    pub lambda_j: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub lambda_plus: f64,
}

/// `r_j = 2^-j`, `delta_j = delta^(1+j)`, `eps_j = eps 2^-j` and
/// `lambda_j = lambda_plus - sum_{k=1..j} eps_k`, which stays above `lambda_plus - eps`.
pub fn schedule(j: u32, epsilon: f64, delta: f64, lambda_plus: f64) -> Schedule {
    let spent: f64 = (1..=j).map(|k| epsilon * 0.5f64.powi(k as i32)).sum();
    Schedule {
        j,
        r_j: 0.5f64.powi(j as i32),
        delta_j: delta.powi(1 + j as i32),
        epsilon_j: epsilon * 0.5f64.powi(j as i32),
        lambda_j: lambda_plus - spent,
        epsilon,
        delta,
        lambda_plus,
    }
}

/// `1 + ln C / ln(delta/2)`.
pub fn holder_exponent(delta: f64, c: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain { what: format!("Hölder exponent needs 0 < delta < 1, got {delta}"), r: delta });
    }
    if !(c >= 1.0) {
        return Err(param(format!("distortion constant C = {c} must be at least 1")));
    }
    Ok(1.0 + c.ln() / (0.5 * delta).ln())
}

/// Distortion bound of the chain of `j` blow-down maps at scale `r`: a
/// factor `C` for every stage whose bubble is larger than `r`, and
/// `1 + delta_k` for the others.
pub fn distortion_product(r: f64, j: u32, delta: f64, c: f64) -> f64 {
    let mut acc = r;
    for k in 1..=j {
        let (dk, rk) = (delta.powi(1 + k as i32), 0.5f64.powi(k as i32));
        acc *= if r <= dk * rk { c } else { 1.0 + dk };
    }
    acc
}

/// [`distortion_product`] checked against `(1 + delta) r^alpha(delta)`.
/// Returns `(product, bound)`; meant for `0 < r <= 1` and `delta <= 0.3`.
pub fn compose_distortion(r: f64, j: u32, delta: f64, c: f64) -> Result<(f64, f64)> {
    if !(r > 0.0) {
        return Err(param(format!("distance r = {r} must be positive")));
    }
    let alpha = holder_exponent(delta, c)?;
    let prod = distortion_product(r, j, delta, c);
    let bound = (1.0 + delta) * r.powf(alpha);
    if !(prod <= bound) {
        return Err(Error::Assertion(format!(
            "distortion {prod} exceeds (1 + delta) r^alpha = {bound} at r = {r}, j = {j}"
        )));
    }
    Ok((prod, bound))
}

/// `C sum_{k=i+1..j} delta^(1+k)`, the GH error of the map from stage `j`
/// to stage `i`; checked against `C 2^-i delta` when `delta <= 1/2`.
pub fn gh_error(i: u32, j: u32, delta: f64, c: f64) -> Result<f64> {
    let sum: f64 = (i + 1..=j).map(|k| delta.powi(1 + k as i32)).sum();
    check_gh(i, c * sum, delta, c)
}

/// The `j -> infinity` limit of [`gh_error`]: `C delta^(i+2) / (1 - delta)`.
pub fn gh_error_limit(i: u32, delta: f64, c: f64) -> Result<f64> {
    if !(delta < 1.0) {
        return Err(param(format!("delta = {delta} must be below 1 for the series to converge")));
    }
    check_gh(i, c * delta.powi(i as i32 + 2) / (1.0 - delta), delta, c)
}

fn check_gh(i: u32, err: f64, delta: f64, c: f64) -> Result<f64> {
    let bound = c * 0.5f64.powi(i as i32) * delta;
    if delta <= 0.5 && !(err <= bound) {
        return Err(Error::Assertion(format!("GH error {err} exceeds C 2^-i delta = {bound} at i = {i}")));
    }
    Ok(err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn schedule_at_stage_three() {
        let s = schedule(3, 0.05, 0.1, 1.0);
        assert_eq!(s.r_j, 0.125);
        assert_eq!(s.epsilon_j, 0.00625);
        assert!((s.lambda_j - 0.95625).abs() < 1e-15);
        assert!((s.delta_j - 1e-4).abs() < 1e-18);
        assert_eq!(schedule(0, 0.05, 0.1, 1.0).lambda_j, 1.0);
    }

    #[test]
    fn holder_exponent_values() {
        let a = holder_exponent(0.01, 2.0).unwrap();
        let want = 1.0 + 2f64.ln() / 0.005f64.ln();
        assert_eq!(a, want);
        assert!((a - 0.86918).abs() < 1e-5);
        assert_eq!(holder_exponent(0.3, 1.0).unwrap(), 1.0);
        assert!(holder_exponent(1.0, 2.0).is_err());
        let ladder: Vec<f64> = (2..=8).map(|e| holder_exponent(10f64.powi(-e), 2.0).unwrap()).collect();
        assert!(ladder.windows(2).all(|w| w[1] > w[0] && w[1] < 1.0), "{ladder:?}");
    }

    #[test]
    fn distortion_of_coarse_scales_is_nearly_isometric() {
        // r above every delta_k r_k: only (1 + delta_k) factors
        let (r, d) = (0.5, 0.01);
        let prod = distortion_product(r, 5, d, 2.0);
        let want: f64 = r * (1..=5).map(|k| 1.0 + d.powi(1 + k)).product::<f64>();
        assert_eq!(prod, want);
        assert!(prod <= (1.0 + d) * r);
        assert_eq!(distortion_product(0.3, 0, d, 2.0), 0.3);
    }

    #[test]
    fn gh_error_series() {
        let lim = gh_error_limit(0, 0.1, 1.0).unwrap();
        assert!((lim - 0.01 / 0.9).abs() < 1e-16);
        assert_eq!(gh_error(2, 2, 0.1, 1.0).unwrap(), 0.0);
        let partial = gh_error(0, 40, 0.1, 1.0).unwrap();
        assert!((partial - lim).abs() < 1e-15);
        let tails: Vec<f64> = (0..10).map(|i| gh_error_limit(i, 0.1, 3.0).unwrap()).collect();
        assert!(tails.windows(2).all(|w| w[1] < w[0]));
    }

    proptest! {
        // past j ~ 40 the gap eps 2^-j drops below one ulp of lambda_plus
        #[test]
        fn lambda_stays_above_lambda_plus_minus_eps(j in 0u32..30, eps in 1e-4f64..1.0, lp in -5.0f64..5.0) {
            let s = schedule(j, eps, 0.1, lp);
            prop_assert!(s.lambda_j > lp - eps);
            prop_assert!(schedule(j + 1, eps, 0.1, lp).lambda_j < s.lambda_j);
        }

        #[test]
        fn composed_distortion_is_holder(r in 1e-12f64..1.0, j in 0u32..40, delta in 1e-6f64..0.3, c in 1.0f64..2000.0) {
            prop_assert!(compose_distortion(r, j, delta, c).is_ok());
        }

        #[test]
        fn gh_error_is_bounded(i in 0u32..30, n in 0u32..30, delta in 1e-6f64..0.5, c in 1.0f64..100.0) {
            let e = gh_error(i, i + n, delta, c).unwrap();
            prop_assert!(e <= gh_error_limit(i, delta, c).unwrap() * (1.0 + 1e-12));
        }
    }
}
