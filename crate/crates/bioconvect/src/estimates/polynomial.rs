//! Roots of `p(z) = 2 D1 z^3 - (D3/2) z + D5`.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicRoots {
    /// Ascending; present only with three real roots.
    pub roots: Option<[f64; 3]>,
    /// Smaller positive root.
    pub z2: Option<f64>,
    /// Discriminant of the monic depressed cubic, `-(4p^3 + 27q^2)`.
    pub discriminant: f64,
    /// `max |p(z_i)| / max |coefficient|`
    pub scaled_residual: f64,
}

pub fn eval_p(d1: f64, d3: f64, d5: f64, z: f64) -> f64 {
    2.0 * d1 * z * z * z - 0.5 * d3 * z + d5
}

fn polish(d1: f64, d3: f64, d5: f64, mut z: f64) -> f64 {
    for _ in 0..4 {
        let f = eval_p(d1, d3, d5, z);
        let df = 6.0 * d1 * z * z - 0.5 * d3;
        if df == 0.0 {
            break;
        }
        let dz = f / df;
        z -= dz;
        if dz.abs() <= 1e-17 * z.abs() {
            break;
        }
    }
    z
}

pub fn polynomial_p_roots(d1: f64, d3: f64, d5: f64) -> Result<CubicRoots> {
    if !(d1 > 0.0) || !(d3 > 0.0) || !(d5 >= 0.0) || !d5.is_finite() {
        return Err(Error::Config("polynomial_p_roots needs D1, D3 > 0 and finite D5 >= 0".into()));
    }
    // z^3 + p z + q
    let p = -d3 / (4.0 * d1);
    let q = d5 / (2.0 * d1);
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    let scale = (2.0 * d1).max(0.5 * d3).max(d5);
    if d5 == 0.0 {
        let r = 0.5 * (d3 / d1).sqrt();
        return Ok(CubicRoots { roots: Some([-r, 0.0, r]), z2: Some(0.0), discriminant: disc, scaled_residual: 0.0 });
    }
    if !(disc > 0.0) {
        return Ok(CubicRoots { roots: None, z2: None, discriminant: disc, scaled_residual: f64::NAN });
    }
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = ((3.0 * q) / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
    let th = arg.acos() / 3.0;
    let mut r: Vec<f64> = (0..3).map(|k| polish(d1, d3, d5, m * (th - 2.0 * PI * k as f64 / 3.0).cos())).collect();
    r.sort_by(|a, b| a.total_cmp(b));
    // The small positive root is ill-conditioned in the trig form; refine it
    // from the fixed point z = (D5 + 2 D1 z^3) / (D3/2) when D5 is tiny.
    let mut z2 = r[1];
    if z2 < 0.25 * r[2] {
        let mut z = d5 / (0.5 * d3);
        for _ in 0..200 {
            let zn = (d5 + 2.0 * d1 * z * z * z) / (0.5 * d3);
            if (zn - z).abs() <= 1e-17 * zn {
                z = zn;
                break;
            }
            z = zn;
        }
        z2 = polish(d1, d3, d5, z);
        r[1] = z2;
    }
    let res = r.iter().map(|&z| eval_p(d1, d3, d5, z).abs()).fold(0.0, f64::max) / scale;
    Ok(CubicRoots { roots: Some([r[0], r[1], r[2]]), z2: Some(z2), discriminant: disc, scaled_residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_d5_is_exact() {
        let r = polynomial_p_roots(3.0, 5.0, 0.0).unwrap().roots.unwrap();
        let s = 0.5 * (5.0_f64 / 3.0).sqrt();
        assert_eq!(r, [-s, 0.0, s]);
    }

    #[test]
    fn large_d5_flags() {
        let r = polynomial_p_roots(2.0, 2.0, 10.0).unwrap();
        assert!(r.roots.is_none() && r.discriminant < 0.0);
    }

    proptest! {
        #[test]
        fn residuals_small(d1 in 0.1f64..100.0, d3 in 0.1f64..100.0, e in -12.0f64..0.0) {
            let d5 = 10f64.powf(e) * d3 * (d3 / d1).sqrt() / 20.0;
            let r = polynomial_p_roots(d1, d3, d5).unwrap();
            prop_assert!(r.roots.is_some());
            prop_assert!(r.scaled_residual <= 1e-12);
            prop_assert!(r.z2.unwrap() > 0.0);
        }
    }
}
