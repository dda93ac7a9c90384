//! The energy envelope `G(t)` for the weak scheme.
//!
//! With `K = (2/alpha_1)^{1/2}` (so `|u| <= K |D u|`), the trace constant
//! `C_tr` and the mean-zero Poincare constant `C_P`:
//!
//! ```text
//! C_nu0  = max(K^2, 4 C_tr^2) / nu0
//! C_thU  = U^2 / theta
//! C0     = 4 C_nu0 max(1, C_P^2) / theta
//! C1     = 2 C_thU
//! C2     = 2 C_nu0 + 2 C0 C_thU
//! G(t)   = (|u0|^2 + C0 |zeta0|^2 + C2 int_0^t (|f|^2 + alpha^2/|Omega| + |b1|_Gamma^2)) e^{C1 t}
//! ```
//!
//! and the monitored combination is
//! `|u|^2 + C0 |zeta|^2 + int_0^t (nu0 |D u|^2 + 2 C_nu0 |grad zeta|^2)`.

use super::gronwall::cumulative_trapezoid;
use crate::evolution::config::Variant;
use crate::evolution::{GalerkinSystem, Trajectory};
use crate::operators::constants::{estimate_poincare, estimate_trace_constant, Labeled, PoincareClass};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnvelopeSpec {
    pub c_nu0: Labeled,
    pub c_theta_u: Labeled,
    pub c0: Labeled,
    pub c1: Labeled,
    pub c2: Labeled,
    pub k: Labeled,
    pub c_trace: Labeled,
    pub c_p: Labeled,
    pub nu0: f64,
    pub u0_sq: f64,
    pub zeta0_sq: f64,
    /// `|f|^2` at unit schedule factor.
    pub f_sq: f64,
    pub schedule: Vec<[f64; 2]>,
    pub alpha_sq_area: f64,
    pub b1_sq: f64,
}

impl EnvelopeSpec {
    pub fn new(sys: &GalerkinSystem, u0_sq: f64, zeta0_sq: f64) -> Result<Self> {
        let d = &sys.domain;
        let alpha1 = sys.alpha_v.iter().cloned().fold(f64::INFINITY, f64::min);
        let k = (2.0 / alpha1).sqrt();
        let ctr = estimate_trace_constant(d)?;
        let cp = estimate_poincare(d, PoincareClass::MeanZeroScalar)?.c_p;
        let m = &sys.config.model;
        let f = &sys.f_field;
        let f_sq = d.inner_vec(f, f);
        let b1_sq = d.wx() * sys.b1_top.iter().map(|v| v * v).sum::<f64>();
        Ok(Self::from_constants(sys.nu0, m.theta, m.u_swim, k, ctr, cp, u0_sq, zeta0_sq, f_sq, sys.config.forcing.schedule.clone(), m.alpha * m.alpha / d.area(), b1_sq))
    }

    #[allow(clippy::too_many_arguments)]
    pub fn from_constants(
        nu0: f64,
        theta: f64,
        u_swim: f64,
        k: f64,
        c_trace: f64,
        c_p: f64,
        u0_sq: f64,
        zeta0_sq: f64,
        f_sq: f64,
        schedule: Vec<[f64; 2]>,
        alpha_sq_area: f64,
        b1_sq: f64,
    ) -> Self {
        let c_nu0 = (k * k).max(4.0 * c_trace * c_trace) / nu0;
        let cthu = u_swim * u_swim / theta;
        let c0 = 4.0 * c_nu0 * c_p.powi(2).max(1.0) / theta;
        EnvelopeSpec {
            c_nu0: Labeled::formula(c_nu0, "max(K^2, 4 C_tr^2) / nu0"),
            c_theta_u: Labeled::formula(cthu, "U^2 / theta"),
            c0: Labeled::formula(c0, "4 C_nu0 max(1, C_P^2) / theta"),
            c1: Labeled::formula(2.0 * cthu, "2 C_thU"),
            c2: Labeled::formula(2.0 * c_nu0 + 2.0 * c0 * cthu, "2 C_nu0 + 2 C0 C_thU"),
            k: Labeled::estimate(k, "(2 / alpha_1)^{1/2}, smallest Stokes eigenvalue"),
            c_trace: Labeled::estimate(c_trace, "trace quotient over the Stokes Ritz space"),
            c_p: Labeled::estimate(c_p, "mean-zero scalar Poincare constant"),
            nu0,
            u0_sq,
            zeta0_sq,
            f_sq,
            schedule,
            alpha_sq_area,
            b1_sq,
        }
    }

    /// `int_0^t s(tau)^2 dtau` for the piecewise-constant schedule.
    pub fn schedule_sq_integral(&self, t: f64) -> f64 {
        if self.schedule.is_empty() {
            return t;
        }
        let mut acc = 0.0;
        for (i, p) in self.schedule.iter().enumerate() {
            let a = p[0].max(0.0);
            let b = self.schedule.get(i + 1).map_or(f64::INFINITY, |q| q[0]).min(t);
            if b > a {
                acc += p[1] * p[1] * (b - a);
            }
        }
        acc
    }

    pub fn g(&self, t: f64) -> f64 {
        let data = self.f_sq * self.schedule_sq_integral(t) + (self.alpha_sq_area + self.b1_sq) * t;
        (self.u0_sq + self.c0.value * self.zeta0_sq + self.c2.value * data) * (self.c1.value * t).exp()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub spec: EnvelopeSpec,
    pub t: Vec<f64>,
    pub lhs: Vec<f64>,
    pub g: Vec<f64>,
    pub min_margin: f64,
    pub pass: bool,
    pub reestimated: bool,
}

fn monitored(spec: &EnvelopeSpec, traj: &Trajectory) -> (Vec<f64>, Vec<f64>) {
    let n = &traj.ledger.norms;
    let t: Vec<f64> = n.iter().map(|r| r.t).collect();
    let integrand: Vec<f64> =
        n.iter().map(|r| spec.nu0 * r.du_l2.powi(2) + 2.0 * spec.c_nu0.value * r.grad_conc_l2.powi(2)).collect();
    let int = cumulative_trapezoid(&t, &integrand);
    let lhs = n.iter().zip(&int).map(|(r, i)| r.u_l2.powi(2) + spec.c0.value * r.conc_l2.powi(2) + i).collect();
    (t, lhs)
}

/// Compares the monitored combination with `G(t)` at every save time. On a
/// violation the trace and Poincare-type constants are re-estimated from the
/// trajectory states and the comparison is repeated once.
pub fn energy_envelope_monitor(sys: &GalerkinSystem, traj: &Trajectory) -> Result<EnvelopeReport> {
    if sys.variant != Variant::Weak {
        return Err(Error::Unsupported("the energy envelope monitors the weak scheme".into()));
    }
    let s0 = &traj.states[0];
    let u0_sq = s0.c.iter().map(|v| v * v).sum();
    let z0_sq = s0.d.iter().map(|v| v * v).sum();
    let mut spec = EnvelopeSpec::new(sys, u0_sq, z0_sq)?;
    let mut reestimated = false;
    loop {
        let (t, lhs) = monitored(&spec, traj);
        let g: Vec<f64> = t.iter().map(|&s| spec.g(s)).collect();
        let tol = 1e-12 * (1.0 + g.iter().cloned().fold(0.0, f64::max));
        let min_margin = g.iter().zip(&lhs).map(|(g, l)| g - l).fold(f64::INFINITY, f64::min);
        let pass = min_margin >= -tol;
        if pass || reestimated {
            return Ok(EnvelopeReport { spec, t, lhs, g, min_margin, pass, reestimated });
        }
        reestimated = true;
        spec = reestimate(sys, traj, &spec);
    }
}

fn reestimate(sys: &GalerkinSystem, traj: &Trajectory, spec: &EnvelopeSpec) -> EnvelopeSpec {
    let d = &sys.domain;
    let nx = d.nx();
    let top = (d.nz() - 1) * nx;
    let (mut k, mut ctr, mut cp) = (spec.k.value, spec.c_trace.value, spec.c_p.value);
    for (s, n) in traj.states.iter().zip(&traj.ledger.norms) {
        if n.du_l2 > 0.0 {
            k = k.max(n.u_l2 / n.du_l2);
            let u = sys.velocity(s);
            let tr = (d.wx() * u.u.data[top..top + nx].iter().map(|v| v * v).sum::<f64>()).sqrt();
            ctr = ctr.max(tr / n.du_l2);
        }
        if n.grad_conc_l2 > 0.0 {
            cp = cp.max(n.conc_l2 / n.grad_conc_l2);
        }
    }
    let m = &sys.config.model;
    let mut out = EnvelopeSpec::from_constants(
        spec.nu0,
        m.theta,
        m.u_swim,
        k,
        ctr,
        cp,
        spec.u0_sq,
        spec.zeta0_sq,
        spec.f_sq,
        spec.schedule.clone(),
        spec.alpha_sq_area,
        spec.b1_sq,
    );
    for l in [&mut out.k, &mut out.c_trace, &mut out.c_p] {
        l.recipe.push_str(" (re-estimated with trajectory quotients)");
    }
    out
}
