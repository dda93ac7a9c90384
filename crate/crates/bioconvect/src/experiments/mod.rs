//! Canned experiments. Each takes an [`ExperimentSpec`] (a base configuration
//! plus sweep parameters), runs one or more trajectories and returns an
//! [`ExperimentReport`] with named assertions.

mod fit;
mod plots;
mod runs;

pub use fit::{fit_decay, DecayFit};
pub use plots::emit_plot_data;
pub use runs::{
    perturb_state, run_global_smalldata, run_local_window, run_stability_decay, run_uniqueness_twin,
    run_weak_convergence, DecayRun,
};

use crate::evolution::SimConfig;
use crate::operators::constants::Labeled;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    WeakConvergence,
    LocalWindow,
    GlobalSmalldata,
    StabilityDecay,
    UniquenessTwin,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::WeakConvergence => "weak_convergence",
            ExperimentKind::LocalWindow => "local_window",
            ExperimentKind::GlobalSmalldata => "global_smalldata",
            ExperimentKind::StabilityDecay => "stability_decay",
            ExperimentKind::UniquenessTwin => "uniqueness_twin",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let k = s.replace('-', "_");
        serde_json::from_value(serde_json::Value::String(k)).map_err(|_| Error::Config(format!("unknown experiment kind '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    /// Galerkin sizes for the convergence sweep.
    pub n_values: Vec<usize>,
    /// Twin-run perturbation size.
    pub delta: f64,
    /// Fraction of the horizon discarded before the decay fit.
    pub fit_discard: f64,
    /// Samples per sampled constant.
    pub samples: usize,
    /// Horizon for the local window search; `t_end` when absent.
    pub horizon: Option<f64>,
    /// Extra runs for the decay rate (halved amplitude, doubled n) and the twin (doubled delta).
    pub robustness: bool,
    /// Smallest accepted ratio between the flip amplitude and the configured one.
    pub margin: f64,
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep {
            n_values: vec![8, 16, 32],
            delta: 1e-6,
            fit_discard: 0.1,
            samples: 200,
            horizon: None,
            robustness: true,
            margin: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Overrides `base.seed` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub sweep: Sweep,
    pub base: SimConfig,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, base: SimConfig) -> Self {
        ExperimentSpec { kind, out: None, seed: None, sweep: Sweep::default(), base }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let e: ExperimentSpec = toml::from_str(s).map_err(|e| Error::Toml(e.to_string()))?;
        e.resolved_config().validate()?;
        Ok(e)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => {
                let e: ExperimentSpec = serde_json::from_str(&s)?;
                e.resolved_config().validate()?;
                Ok(e)
            }
            _ => Self::from_toml_str(&s),
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Toml(e.to_string()))
    }

    /// Base configuration with the seed override applied.
    pub fn resolved_config(&self) -> SimConfig {
        let mut c = self.base.clone();
        if let Some(s) = self.seed {
            c.seed = s;
        }
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
}

impl Assertion {
    /// `value < threshold`
    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Assertion { name: name.into(), pass: value < threshold, value, threshold }
    }

    /// `value <= threshold`
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Assertion { name: name.into(), pass: value <= threshold, value, threshold }
    }

    /// `value > threshold`
    pub fn above(name: &str, value: f64, threshold: f64) -> Self {
        Assertion { name: name.into(), pass: value > threshold, value, threshold }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Assertion { name: name.into(), pass: value >= threshold, value, threshold }
    }

    pub fn flag(name: &str, pass: bool) -> Self {
        Assertion { name: name.into(), pass, value: f64::from(u8::from(pass)), threshold: 1.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub pass: bool,
    pub assertions: Vec<Assertion>,
    pub config: SimConfig,
    pub sweep: Sweep,
    pub constants: BTreeMap<String, Labeled>,
    pub details: serde_json::Value,
}

impl ExperimentReport {
    pub(crate) fn new(spec: &ExperimentSpec, assertions: Vec<Assertion>, constants: BTreeMap<String, Labeled>, details: serde_json::Value) -> Self {
        ExperimentReport {
            kind: spec.kind,
            pass: assertions.iter().all(|a| a.pass),
            assertions,
            config: spec.resolved_config(),
            sweep: spec.sweep.clone(),
            constants,
            details,
        }
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn failures(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.pass).collect()
    }
}

/// Worker pool for sweeps, capped by `BIOCONVECT_THREADS` when set.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("BIOCONVECT_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| Error::Config(format!("BIOCONVECT_THREADS='{v}' is not a count")))?;
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let report = match spec.kind {
        ExperimentKind::WeakConvergence => run_weak_convergence(spec)?,
        ExperimentKind::LocalWindow => run_local_window(spec)?,
        ExperimentKind::GlobalSmalldata => run_global_smalldata(spec)?,
        ExperimentKind::StabilityDecay => run_stability_decay(spec)?.1,
        ExperimentKind::UniquenessTwin => run_uniqueness_twin(spec, spec.sweep.delta)?,
    };
    if let Some(dir) = &spec.out {
        crate::io::write_json(&dir.join("report.json"), &report)?;
    }
    Ok(report)
}
