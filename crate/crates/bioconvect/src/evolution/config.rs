//! Simulation configuration. TOML and JSON are accepted; both map onto the
//! same serde structure.

use super::viscosity::ViscosityModel;
use crate::domain_grid::{Domain, DomainSpec, VectorField};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Unknown `zeta = m - alpha/|Omega|`.
    #[default]
    Weak,
    /// Unknown `xi = m - m_alpha - eta0`.
    Strong,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub theta: f64,
    #[serde(alias = "U")]
    pub u_swim: f64,
    pub alpha: f64,
    /// Tangential stress datum on Gamma: `b1 cos(b1_k * 2 pi x / lx)`.
    #[serde(default)]
    pub b1: f64,
    #[serde(default)]
    pub b1_k: usize,
    #[serde(default = "default_chi")]
    pub chi: [f64; 2],
    #[serde(default)]
    pub variant: Variant,
    #[serde(default)]
    pub viscosity: ViscosityModel,
}

fn default_chi() -> [f64; 2] {
    [0.0, 1.0]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingKind {
    #[default]
    Zero,
    /// `(A z / H, 0)`
    Shear,
    /// `A (sin(pi z/H) cos(kx), sin(kx) sin(pi z/H) / 2)` with the lowest k.
    Cellular,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    #[serde(default)]
    pub kind: ForcingKind,
    #[serde(default)]
    pub amplitude: f64,
    /// Piecewise-constant factors `[t_i, s_i]`: `s_i` applies on `[t_i, t_{i+1})`.
    #[serde(default)]
    pub schedule: Vec<[f64; 2]>,
}

impl ForcingSpec {
    pub fn factor(&self, t: f64) -> f64 {
        if self.schedule.is_empty() {
            return 1.0;
        }
        let mut s = if t < self.schedule[0][0] { 0.0 } else { self.schedule[0][1] };
        for p in &self.schedule {
            if t >= p[0] {
                s = p[1];
            }
        }
        s
    }

    pub fn is_time_constant(&self) -> bool {
        self.schedule.iter().all(|p| p[1] == self.schedule.first().map_or(1.0, |q| q[1]))
    }

    pub fn field(&self, domain: &Domain) -> VectorField {
        let a = self.amplitude;
        let h = domain.h();
        let kap = domain.wavenumber(1);
        match self.kind {
            ForcingKind::Zero => domain.vector(),
            ForcingKind::Shear => domain.sample_vector(|_, z| (a * z / h, 0.0)),
            ForcingKind::Cellular => domain.sample_vector(|x, z| {
                let s = (PI * z / h).sin();
                (a * s * (kap * x).cos(), 0.5 * a * s * (kap * x).sin())
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    #[default]
    Zero,
    /// Seeded band-limited field.
    Random,
    /// A single basis mode (`velocity_mode` / `concentration_mode`).
    Mode,
    /// Lowest horizontal wavenumber cell.
    Cellular,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default)]
    pub velocity: InitKind,
    /// L2 norm of the initial velocity.
    #[serde(default)]
    pub velocity_amplitude: f64,
    #[serde(default)]
    pub velocity_mode: usize,
    #[serde(default)]
    pub concentration: InitKind,
    /// L2 norm of the initial concentration perturbation.
    #[serde(default)]
    pub concentration_amplitude: f64,
    #[serde(default)]
    pub concentration_mode: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Ars222,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    pub n_modes: usize,
    /// Fixed step; chosen by a CFL rule when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub t_end: f64,
    /// Steps between saved states.
    #[serde(default = "one")]
    pub save_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default)]
    pub scheme: Scheme,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub div_tol: f64,
    pub blowup_threshold: f64,
    pub mass_tol: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub cfl_safety: f64,
    pub dt_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            div_tol: 1e-8,
            blowup_threshold: 1e6,
            mass_tol: 1e-8,
            picard_tol: 1e-10,
            picard_max_iter: 200,
            cfl_safety: 0.5,
            dt_max: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "schema")]
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub domain: DomainSpec,
    pub model: ModelParams,
    #[serde(default)]
    pub forcing: ForcingSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    pub discretization: Discretization,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn schema() -> u32 {
    SCHEMA_VERSION
}

impl SimConfig {
    /// Small default used by tests and examples.
    pub fn small(variant: Variant) -> Self {
        SimConfig {
            schema_version: SCHEMA_VERSION,
            seed: 1,
            domain: DomainSpec { nx: 32, nz: 32, ..DomainSpec::default() },
            model: ModelParams {
                theta: 1.0,
                u_swim: 0.0,
                alpha: 1.0,
                b1: 0.0,
                b1_k: 0,
                chi: default_chi(),
                variant,
                viscosity: ViscosityModel::Constant { nu: 1.0 },
            },
            forcing: ForcingSpec::default(),
            initial: InitialSpec::default(),
            discretization: Discretization {
                n_modes: 8,
                dt: Some(0.01),
                t_end: 1.0,
                save_every: 10,
                degree: None,
                scheme: Scheme::Ars222,
            },
            tolerances: Tolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported schema_version {}", self.schema_version)));
        }
        let m = &self.model;
        if !(m.theta > 0.0) {
            return Err(Error::Config("theta must be positive".into()));
        }
        if !m.u_swim.is_finite() || !m.alpha.is_finite() || m.alpha < 0.0 {
            return Err(Error::Config("U must be finite and alpha >= 0".into()));
        }
        let cn = (m.chi[0].powi(2) + m.chi[1].powi(2)).sqrt();
        if (cn - 1.0).abs() > 1e-12 {
            return Err(Error::Config("chi must be a unit vector".into()));
        }
        if m.variant == Variant::Strong && m.b1 != 0.0 {
            return Err(Error::Config("strong variant requires b1 = 0".into()));
        }
        m.viscosity.validate()?;
        let d = &self.discretization;
        if d.n_modes == 0 {
            return Err(Error::Config("n_modes must be at least 1".into()));
        }
        if !(d.t_end > 0.0) {
            return Err(Error::Config("t_end must be positive".into()));
        }
        if let Some(dt) = d.dt {
            if !(dt > 0.0) {
                return Err(Error::Config("dt must be positive".into()));
            }
        }
        if d.save_every == 0 {
            return Err(Error::Config("save_every must be at least 1".into()));
        }
        let t = &self.tolerances;
        if !(t.cfl_safety > 0.0) || !(t.dt_max > 0.0) || !(t.blowup_threshold > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: SimConfig = toml::from_str(s).map_err(|e| Error::Toml(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let c: SimConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    /// Reads `.toml` or `.json` by extension.
    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&s),
            _ => Self::from_toml_str(&s),
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Toml(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_json_equivalent() {
        let c = SimConfig::small(Variant::Weak);
        let t = c.to_toml_string().unwrap();
        let j = serde_json::to_string(&c).unwrap();
        assert_eq!(SimConfig::from_toml_str(&t).unwrap(), SimConfig::from_json_str(&j).unwrap());
    }

    #[test]
    fn strong_rejects_b1() {
        let mut c = SimConfig::small(Variant::Strong);
        c.model.b1 = 0.1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn schedule_is_piecewise_constant() {
        let f = ForcingSpec { kind: ForcingKind::Shear, amplitude: 1.0, schedule: vec![[0.0, 1.0], [0.5, 2.0]] };
        assert_eq!(f.factor(0.25), 1.0);
        assert_eq!(f.factor(0.5), 2.0);
        assert!(!f.is_time_constant());
    }
}
