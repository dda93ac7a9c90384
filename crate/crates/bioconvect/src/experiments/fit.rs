use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Least-squares fit of `log E(t) = intercept - lambda t` on `[t_a, t_b]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub lambda: f64,
    pub intercept: f64,
    pub window: [f64; 2],
    pub r2: f64,
    pub points: usize,
}

impl DecayFit {
    pub fn line(&self, t: f64) -> f64 {
        self.intercept - self.lambda * t
    }
}

/// Fits samples with `t >= discard * t_last`.
pub fn fit_decay(t: &[f64], e: &[f64], discard: f64) -> Result<DecayFit> {
    if t.len() != e.len() || t.is_empty() {
        return Err(Error::Shape("decay fit needs matching nonempty series".into()));
    }
    let t0 = t[0];
    let tb = *t.last().unwrap();
    let ta = t0 + discard.clamp(0.0, 1.0) * (tb - t0);
    let pts: Vec<(f64, f64)> = t.iter().zip(e).filter(|(s, v)| **s >= ta && **v > 0.0).map(|(s, v)| (*s, v.ln())).collect();
    if pts.len() < 3 {
        return Err(Error::Missing("fewer than three positive samples in the fit window".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Shape("decay fit window has zero length".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(DecayFit { lambda: -slope, intercept, window: [ta, tb], r2, points: pts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_exponential() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let e: Vec<f64> = t.iter().map(|s| 3.0 * (-0.7 * s).exp()).collect();
        let f = fit_decay(&t, &e, 0.1).unwrap();
        assert!((f.lambda - 0.7).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(f.window[0] >= 0.49 - 1e-12);
    }

    #[test]
    fn too_few_points() {
        assert!(fit_decay(&[0.0, 1.0], &[1.0, 0.5], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn recovers_rate(lam in 0.01f64..5.0, a in -3.0f64..3.0) {
            let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.05).collect();
            let e: Vec<f64> = t.iter().map(|s| (a - lam * s).exp()).collect();
            let f = fit_decay(&t, &e, 0.1).unwrap();
            prop_assert!((f.lambda - lam).abs() < 1e-9 * (1.0 + lam));
        }
    }
}
