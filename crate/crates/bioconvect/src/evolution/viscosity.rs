use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Concentration-dependent viscosity `nu(m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ViscosityModel {
    Constant { nu: f64 },
    /// `nu_mid + nu_amp * tanh((m - center) / scale)`
    Tanh { nu_mid: f64, nu_amp: f64, scale: f64, center: f64 },
}

impl Default for ViscosityModel {
    fn default() -> Self {
        ViscosityModel::Constant { nu: 1.0 }
    }
}

impl ViscosityModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ViscosityModel::Constant { nu } => nu > 0.0 && nu.is_finite(),
            ViscosityModel::Tanh { nu_mid, nu_amp, scale, center } => {
                scale > 0.0 && center.is_finite() && nu_mid.is_finite() && nu_mid - nu_amp.abs() > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid viscosity model {self:?}")))
        }
    }

    pub fn nu(&self, m: f64) -> f64 {
        match *self {
            ViscosityModel::Constant { nu } => nu,
            ViscosityModel::Tanh { nu_mid, nu_amp, scale, center } => nu_mid + nu_amp * ((m - center) / scale).tanh(),
        }
    }

    pub fn dnu(&self, m: f64) -> f64 {
        match *self {
            ViscosityModel::Constant { .. } => 0.0,
            ViscosityModel::Tanh { nu_amp, scale, center, .. } => {
                let c = ((m - center) / scale).cosh();
                nu_amp / (scale * c * c)
            }
        }
    }

    /// inf nu
    pub fn nu0(&self) -> f64 {
        match *self {
            ViscosityModel::Constant { nu } => nu,
            ViscosityModel::Tanh { nu_mid, nu_amp, .. } => nu_mid - nu_amp.abs(),
        }
    }

    /// sup nu
    pub fn nu1(&self) -> f64 {
        match *self {
            ViscosityModel::Constant { nu } => nu,
            ViscosityModel::Tanh { nu_mid, nu_amp, .. } => nu_mid + nu_amp.abs(),
        }
    }

    /// sup |nu'|
    pub fn nu1_prime(&self) -> f64 {
        match *self {
            ViscosityModel::Constant { .. } => 0.0,
            ViscosityModel::Tanh { nu_amp, scale, .. } => nu_amp.abs() / scale,
        }
    }

    /// Samples `[lo, hi]` and confirms the declared bounds.
    pub fn check_bounds(&self, lo: f64, hi: f64, samples: usize) -> bool {
        let (n0, n1, d1) = (self.nu0(), self.nu1(), self.nu1_prime());
        (0..=samples).all(|i| {
            let m = lo + (hi - lo) * i as f64 / samples.max(1) as f64;
            let v = self.nu(m);
            v >= n0 * (1.0 - 1e-14) && v <= n1 * (1.0 + 1e-14) && self.dnu(m).abs() <= d1 * (1.0 + 1e-14)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn tanh_within_declared_bounds(mid in 0.5f64..2.0, amp in -0.4f64..0.4, scale in 0.05f64..2.0, m in -50.0f64..50.0) {
            let v = ViscosityModel::Tanh { nu_mid: mid, nu_amp: amp, scale, center: 0.1 };
            prop_assert!(v.nu(m) >= v.nu0() - 1e-14 && v.nu(m) <= v.nu1() + 1e-14);
            prop_assert!(v.dnu(m).abs() <= v.nu1_prime() + 1e-14);
        }
    }
}
