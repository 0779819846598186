//! Coordinate finite-difference Ricci oracle.
//!
//! Works on the full 6-dimensional chart `(r, theta, phi, psi, vartheta, varphi)`
//! using only the value channel of every profile, so it shares nothing with
//! the closed-form evaluator except the profiles themselves. The Berger sphere
//! is written in Euler angles,
//! `(1/4)[B^2 (dtheta^2 + sin^2 theta dphi^2) + A^2 (dpsi + cos theta dphi)^2]`,
//! which is not diagonal, and the `S^2` factor as `f^2 (dvartheta^2 + sin^2 vartheta dvarphi^2)`.

use crate::curvature::{RicciBlocks, WarpedMetric};
use crate::error::{Error, Result};

const N: usize = 6;
type Mat = [[f64; N]; N];
type Chr = [[[f64; N]; N]; N];

#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    /// Radial step relative to `r`.
    pub h_rel: f64,
    /// Angular step.
    pub h_ang: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { h_rel: 1e-4, h_ang: 1e-4 }
    }
}

impl OracleConfig {
    pub fn radial_step(&self, r: f64) -> f64 {
        self.h_rel * r
    }
}

/// Chart of the rescaled metric `g / L^2`, radial coordinate `r / L`. Keeps
/// every entry of order one when the spheres are huge, which is what the
/// angular differences need to survive rounding.
struct Chart<'a> {
    metric: &'a WarpedMetric,
    anchor: f64,
    scale: f64,
    h: [f64; N],
}

impl Chart<'_> {
    fn g(&self, x: &[f64; N]) -> Result<Mat> {
        let j = self.metric.jets_with(self.anchor, self.scale * x[0])?;
        let (a, b) = (j.a.v / self.scale, j.b.v / self.scale);
        let f = self.metric.warp_scale * j.f.v / self.scale;
        let (st, ct) = x[1].sin_cos();
        let s2 = x[4].sin();
        let mut g = [[0.0; N]; N];
        g[0][0] = 1.0;
        g[1][1] = 0.25 * b * b;
        g[2][2] = 0.25 * (b * b * st * st + a * a * ct * ct);
        g[3][3] = 0.25 * a * a;
        g[2][3] = 0.25 * a * a * ct;
        g[3][2] = g[2][3];
        g[4][4] = f * f;
        g[5][5] = f * f * s2 * s2;
        Ok(g)
    }

    fn shifted(x: &[f64; N], k: usize, d: f64) -> [f64; N] {
        let mut y = *x;
        y[k] += d;
        y
    }

    /// `dg[k][i][j] = d_k g_ij`
    fn dg(&self, x: &[f64; N]) -> Result<Chr> {
        let mut out = [[[0.0; N]; N]; N];
        for k in 0..N {
            let h = self.h[k];
            let gm2 = self.g(&Self::shifted(x, k, -2.0 * h))?;
            let gm1 = self.g(&Self::shifted(x, k, -h))?;
            let gp1 = self.g(&Self::shifted(x, k, h))?;
            let gp2 = self.g(&Self::shifted(x, k, 2.0 * h))?;
            for i in 0..N {
                for j in 0..N {
                    out[k][i][j] = stencil(gm2[i][j], gm1[i][j], gp1[i][j], gp2[i][j], h);
                }
            }
        }
        Ok(out)
    }

    /// `gamma[k][i][j] = Gamma^k_ij`
    fn christoffel(&self, x: &[f64; N]) -> Result<Chr> {
        let g = self.g(x)?;
        let gi = invert(&g).ok_or_else(|| Error::Domain { what: "singular chart metric".into(), r: x[0] })?;
        let dg = self.dg(x)?;
        let mut out = [[[0.0; N]; N]; N];
        for k in 0..N {
            for i in 0..N {
                for j in 0..N {
                    let mut s = 0.0;
                    for l in 0..N {
                        s += gi[k][l] * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j]);
                    }
                    out[k][i][j] = 0.5 * s;
                }
            }
        }
        Ok(out)
    }

    fn ricci(&self, x: &[f64; N]) -> Result<Mat> {
        let gam = self.christoffel(x)?;
        // dgam[m][k][i][j] = d_m Gamma^k_ij
        let mut dgam = vec![[[[0.0; N]; N]; N]; N];
        for (m, slot) in dgam.iter_mut().enumerate() {
            let h = self.h[m];
            let cm2 = self.christoffel(&Self::shifted(x, m, -2.0 * h))?;
            let cm1 = self.christoffel(&Self::shifted(x, m, -h))?;
            let cp1 = self.christoffel(&Self::shifted(x, m, h))?;
            let cp2 = self.christoffel(&Self::shifted(x, m, 2.0 * h))?;
            for k in 0..N {
                for i in 0..N {
                    for j in 0..N {
                        slot[k][i][j] = stencil(cm2[k][i][j], cm1[k][i][j], cp1[k][i][j], cp2[k][i][j], h);
                    }
                }
            }
        }
        let mut ric = [[0.0; N]; N];
        for i in 0..N {
            for j in 0..N {
                let mut s = 0.0;
                for k in 0..N {
                    s += dgam[k][k][i][j] - dgam[j][k][i][k];
                    for l in 0..N {
                        s += gam[k][k][l] * gam[l][i][j] - gam[k][j][l] * gam[l][i][k];
                    }
                }
                ric[i][j] = s;
            }
        }
        Ok(ric)
    }
}

/// Fourth-order central difference. Differences are taken first so that a
/// quantity which does not depend on the coordinate differentiates to exactly
/// zero; otherwise the rounding residue gets multiplied by `g^-1` of the
/// smallest factor.
fn stencil(m2: f64, m1: f64, p1: f64, p2: f64, h: f64) -> f64 {
    (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h)
}

fn invert(m: &Mat) -> Option<Mat> {
    let mut a = *m;
    let mut inv = [[0.0; N]; N];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..N {
        let piv = (col..N).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col];
        for j in 0..N {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for row in 0..N {
            if row != col {
                let fct = a[row][col];
                if fct != 0.0 {
                    for j in 0..N {
                        a[row][j] -= fct * a[col][j];
                        inv[row][j] -= fct * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Ricci blocks at `r` by finite differences in the 6-dimensional chart,
/// evaluated at `theta = 1`, `vartheta = pi/2` (a generic point of the Euler chart).
pub fn fd_ricci_oracle(metric: &WarpedMetric, r: f64, cfg: OracleConfig) -> Result<RicciBlocks> {
    let h = cfg.radial_step(r);
    if r - 4.0 * h <= 0.0 {
        return Err(Error::Domain { what: "oracle stencil reaches r <= 0".into(), r });
    }
    for bp in metric.breakpoints() {
        if (r - bp).abs() <= 10.0 * h {
            return Err(Error::Domain { what: format!("oracle point within 10 h of breakpoint {bp}"), r });
        }
    }
    let j = metric.jets_with(r, r)?;
    let l = j.a.v.max(j.b.v);
    let chart = Chart { metric, anchor: r, scale: l, h: [h / l, cfg.h_ang, cfg.h_ang, cfg.h_ang, cfg.h_ang, cfg.h_ang] };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let x = [r / l, 1.0, 0.3, 0.7, half_pi, 1.1];
    let g = chart.g(&x)?;
    let ric = chart.ricci(&x)?;
    let gi = invert(&g).ok_or_else(|| Error::Domain { what: "singular chart metric".into(), r })?;
    // trace of g^-1 Ric over the S^3 block
    let mut tr3 = 0.0;
    for i in 1..4 {
        for j in 1..4 {
            tr3 += gi[i][j] * ric[j][i];
        }
    }
    let sx = ric[3][3] / g[3][3];
    let cross = (1..N).map(|i| ric[0][i].abs() / g[i][i].sqrt()).fold(0.0, f64::max);
    let k = 1.0 / (l * l);
    Ok(RicciBlocks {
        rr: k * ric[0][0],
        sx: k * sx,
        syz: k * 0.5 * (tr3 - sx),
        s2: k * ric[4][4] / g[4][4],
        cross_ir_mag: k * cross,
    })
}

/// Largest block mismatch, relative to `max(|value|, scale)`.
pub fn oracle_rel_err(formula: &RicciBlocks, oracle: &RicciBlocks, scale: f64) -> f64 {
    formula
        .as_array()
        .iter()
        .zip(oracle.as_array())
        .map(|(a, b)| (a - b).abs() / a.abs().max(scale))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::MetricParams;
    use crate::curvature::MetricForm;
    use crate::profiles::{Profile, Rule};

    fn cone(phi: Rule, f: Rule, hi: f64) -> WarpedMetric {
        WarpedMetric::new(
            "t",
            MetricForm::Cone {
                phi: Profile::single("phi", hi, phi).unwrap(),
                f: Profile::single("f", hi, f).unwrap(),
            },
            (0.0, hi),
            MetricParams::None,
        )
    }

    #[test]
    fn round_s4_chart() {
        let m = cone(Rule::SinK { k: 1.0 }, Rule::Constant { c: 0.5 }, 3.0);
        for r in [0.4, 1.2, 2.5] {
            let b = fd_ricci_oracle(&m, r, OracleConfig::default()).unwrap();
            assert!((b.rr - 3.0).abs() < 1e-5 && (b.sx - 3.0).abs() < 1e-5 && (b.syz - 3.0).abs() < 1e-5, "{b:?}");
            assert!((b.s2 - 4.0).abs() < 1e-5 && b.cross_ir_mag < 1e-5);
        }
    }

    #[test]
    fn flat_times_small_sphere() {
        let m = cone(Rule::Affine { v0: 0.0, slope: 1.0, r0: 0.0 }, Rule::Constant { c: 0.1 }, 3.0);
        let b = fd_ricci_oracle(&m, 1.3, OracleConfig::default()).unwrap();
        assert!(b.rr.abs() < 1e-4 && b.sx.abs() < 1e-4 && b.syz.abs() < 1e-4);
        assert!((b.s2 - 100.0).abs() < 1e-4);
    }

    #[test]
    fn flat_base_gaussian_warp() {
        let f = Rule::LogHermite { lo: -1.0, hi: 1.0, l0: -1.0, s0: 2.0, l1: -1.0, s1: -2.0 };
        // ln f = -r^2 is the cubic Hermite with these end data on [-1, 1]
        let m = cone(Rule::Affine { v0: 0.0, slope: 1.0, r0: 0.0 }, f, 1.0);
        for r in [0.3, 0.6, 0.9] {
            let o = fd_ricci_oracle(&m, r, OracleConfig::default()).unwrap();
            let c = m.blocks(r).unwrap();
            assert!((o.s2 - c.s2).abs() < 1e-5 * c.s2.abs().max(1.0), "{o:?} vs {c:?}");
            let e = (-r * r).exp();
            assert!((m.warp().value(r).unwrap() - e).abs() < 1e-14);
        }
    }

    #[test]
    fn berger_sphere_matches_closed_form() {
        let m = WarpedMetric::new(
            "berger",
            MetricForm::Berger {
                a: Profile::single("a", 2.0, Rule::Affine { v0: 0.4, slope: 0.3, r0: 0.0 }).unwrap(),
                b: Profile::single("b", 2.0, Rule::SinK { k: 0.8 }).unwrap(),
                f: Profile::single("f", 2.0, Rule::F2 { delta2: 0.2, alpha2: 0.4 }).unwrap(),
            },
            (0.0, 2.0),
            MetricParams::None,
        );
        for r in [0.5, 1.0, 1.7] {
            let o = fd_ricci_oracle(&m, r, OracleConfig::default()).unwrap();
            let c = m.blocks(r).unwrap();
            let err = oracle_rel_err(&c, &o, m.curvature_scale(r).unwrap());
            assert!(err < 1e-6, "r={r}: {c:?} vs {o:?} ({err:e})");
        }
    }

    #[test]
    fn rejects_points_near_breakpoints() {
        let phi = Profile::new(
            "phi",
            vec![
                crate::profiles::Piece::new(0.0, 1.0, Rule::Affine { v0: 0.0, slope: 1.0, r0: 0.0 }),
                crate::profiles::Piece::new(1.0, 2.0, Rule::Affine { v0: 0.0, slope: 1.0, r0: 0.0 }),
            ],
        )
        .unwrap();
        let f = Profile::single("f", 2.0, Rule::Constant { c: 1.0 }).unwrap();
        let m = WarpedMetric::new("t", MetricForm::Cone { phi, f }, (0.0, 2.0), MetricParams::None);
        assert!(fd_ricci_oracle(&m, 1.0005, OracleConfig::default()).is_err());
        assert!(fd_ricci_oracle(&m, 1.01, OracleConfig::default()).is_ok());
    }
}
