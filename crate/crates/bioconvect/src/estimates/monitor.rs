//! Trajectory monitors for the strong scheme: the local window `T*`, the
//! `H1` bound, and the Gronwall envelope for the difference of two runs.

use super::envelope::EnvelopeSpec;
use super::gronwall::{cumulative_trapezoid, lemma10_window, Lemma10Window};
use super::sampled::SampledConstants;
use super::smallness::InitialNorms;
use crate::evolution::config::Variant;
use crate::evolution::{GalerkinState, GalerkinSystem, Trajectory};
use crate::operators::constants::{estimate_poincare, Labeled, PoincareClass};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Data of the window computation.
///
/// ```text
/// phi0 = |D u0|^2
/// C    = 54 q^4 / nu0^3
/// C_e  = 54 (2 nu1' e6)^4 / nu0^3
/// C_e0 = max(|grad eta0|_4, |A1 eta0|)
/// h    = C_e (1 + |grad m_a|_4^8 + |grad m_a|_4^2 + C_e0^8 + C_e0^2)
/// g(t) = (6/nu0) (G(t) / (2 C_nu0) + 2 |eta0|^2 + C_e0^2 + |m_a|^2 + |f(t)|^2)
/// ```
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WindowPrediction {
    pub t_star: f64,
    pub window: Lemma10Window,
    pub phi0: f64,
    pub c_cubic: Labeled,
    pub c_eps: Labeled,
    pub c_eta0: Labeled,
    pub h0: f64,
    pub g0: f64,
    pub horizon: f64,
}

pub fn zeta0_sq(sys: &GalerkinSystem, s0: &GalerkinState) -> f64 {
    let d = &sys.domain;
    let mut z = sys.eta_field(s0);
    let mean = sys.config.model.alpha / d.area();
    for (v, r) in z.data.iter_mut().zip(&sys.m_ref) {
        *v += r - mean;
    }
    d.integrate(&z.data.iter().map(|v| v * v).collect::<Vec<_>>())
}

pub fn predict_window(
    sys: &GalerkinSystem,
    s0: &GalerkinState,
    sampled: &SampledConstants,
    horizon: f64,
) -> Result<WindowPrediction> {
    if sys.variant != Variant::Strong {
        return Err(Error::Unsupported("the local window is defined for the strong scheme".into()));
    }
    let init = InitialNorms::of_state(sys, s0);
    predict_window_from(sys, &init, s0.c.iter().map(|v| v * v).sum(), zeta0_sq(sys, s0), sampled, horizon)
}

pub fn predict_window_from(
    sys: &GalerkinSystem,
    init: &InitialNorms,
    u0_sq: f64,
    zeta0_sq: f64,
    sampled: &SampledConstants,
    horizon: f64,
) -> Result<WindowPrediction> {
    let nu0 = sys.nu0;
    let nu1p = sys.viscosity.nu1_prime();
    let c = 54.0 * sampled.q_adv.value.powi(4) / nu0.powi(3);
    let ce = 54.0 * (2.0 * nu1p * sampled.e6.value).powi(4) / nu0.powi(3);
    let ce0 = init.grad_eta0_l4.max(init.a1_eta0_sq.sqrt());
    let (gm, ma) = sys.malpha.as_ref().map_or((0.0, 0.0), |m| (m.diagnostics.grad_l4, m.l2()));
    let h0 = ce * (1.0 + gm.powi(8) + gm * gm + ce0.powi(8) + ce0 * ce0);
    let env = EnvelopeSpec::new(sys, u0_sq, zeta0_sq)?;
    let npts = 4001;
    let t: Vec<f64> = (0..npts).map(|i| horizon * i as f64 / (npts - 1) as f64).collect();
    let h = vec![h0; npts];
    let g: Vec<f64> = t
        .iter()
        .map(|&s| {
            let fs = sys.config.forcing.factor(s);
            (6.0 / nu0)
                * (env.g(s) / (2.0 * env.c_nu0.value) + 2.0 * init.eta0_sq + ce0 * ce0 + ma * ma + env.f_sq * fs * fs)
        })
        .collect();
    let c = c.max(1e-300);
    let window = lemma10_window(init.du0_sq, &t, &h, &g, c)?;
    Ok(WindowPrediction {
        t_star: window.t1,
        window,
        phi0: init.du0_sq,
        c_cubic: Labeled::formula(c, "54 q_adv^4 / nu0^3"),
        c_eps: Labeled::formula(ce, "54 (2 nu1' e6)^4 / nu0^3"),
        c_eta0: Labeled::estimate(ce0, "max(|grad eta0|_4, |A1 eta0|) of the projected datum"),
        h0,
        g0: g[0],
        horizon,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonitorCheck {
    pub t: f64,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrongMonitorReport {
    pub t_star: f64,
    pub xi_l4_checks: Vec<MonitorCheck>,
    /// `|grad xi|^2 <= H1(t; sup |D u|)`
    pub h1_checks: Vec<MonitorCheck>,
    pub c_h: Labeled,
    /// `max |d(t_{k+1}) - d(t_k)| / (t_{k+1} - t_k)` over saves.
    pub dt_xi_sup: f64,
    pub all_finite: bool,
    pub pass: bool,
}

/// `H1(t; z) = 2 C_H S (1 + z^2) t exp(C_H (z^4 + 1) t)`,
/// `S = C_e0^2 + |grad m_a|_4^2`.
pub fn h1_bound(c_h: f64, s: f64, t: f64, z: f64) -> f64 {
    2.0 * c_h * s * (1.0 + z * z) * t * (c_h * (z.powi(4) + 1.0) * t).exp()
}

pub fn monitor_strong_estimates(
    sys: &GalerkinSystem,
    traj: &Trajectory,
    sampled: &SampledConstants,
    t_star: f64,
) -> Result<StrongMonitorReport> {
    if sys.variant != Variant::Strong {
        return Err(Error::Unsupported("strong monitors need a strong trajectory".into()));
    }
    let init = InitialNorms::of_state(sys, &traj.states[0]);
    let ce0 = init.grad_eta0_l4.max(init.a1_eta0_sq.sqrt());
    let gm = sys.grad_mref_l4();
    let u = sys.config.model.u_swim;
    let cg = 2.0 * sampled.c_hat.value.max(1.0);
    let c_h = 8.0
        * 1f64.max(sampled.e4.value.powi(2) * cg).max(u * u * sampled.c_a.value.powi(2))
        / sampled.kappa_a.value.min(1.0);
    let s = ce0 * ce0 + gm * gm;
    let mut sup_du = 0.0_f64;
    let mut xi = Vec::new();
    let mut h1 = Vec::new();
    for n in &traj.ledger.norms {
        sup_du = sup_du.max(n.du_l2);
        if n.t <= t_star * (1.0 + 1e-12) {
            xi.push(MonitorCheck { t: n.t, value: n.grad_xi_l4, bound: 1.0, pass: n.grad_xi_l4 < 1.0 });
        }
        let b = h1_bound(c_h, s, n.t, sup_du);
        let v = n.grad_conc_l2.powi(2);
        h1.push(MonitorCheck { t: n.t, value: v, bound: b, pass: v <= b * (1.0 + 1e-12) });
    }
    let mut dt_xi = 0.0_f64;
    for w in traj.states.windows(2) {
        let dt = w[1].t - w[0].t;
        if dt > 0.0 {
            let dd = w[1].d.iter().zip(&w[0].d).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            dt_xi = dt_xi.max(dd / dt);
        }
    }
    let all_finite = traj.states.iter().all(|s| s.is_finite()) && dt_xi.is_finite();
    let pass = all_finite && xi.iter().all(|c| c.pass) && h1.iter().all(|c| c.pass);
    Ok(StrongMonitorReport {
        t_star,
        xi_l4_checks: xi,
        h1_checks: h1,
        c_h: Labeled::formula(c_h, "8 max(1, e4^2 c_g, U^2 c_a^2) / min(1, kappa_a)"),
        dt_xi_sup: dt_xi,
        all_finite,
        pass,
    })
}

/// Gronwall envelope for the difference of two strong trajectories.
///
/// ```text
/// E(t)   = lam |v|^2 + sum_l beta_l e_l^2
/// lam    = (e4^2 sup |grad m_2|_4^2 + 2) / nu0
/// c_Y(t) = ((4/nu0) nu1'^2 e5^2 |D u_1|_4^2 + C_P^2) / kappa_a
/// N(t)   = max(2 |grad u_1|_inf + 1, lam c_Y + 3 (U^2 + |u_1|_inf^2) / kappa_a)
/// E(t)  <= E(0) exp(int_0^t N)
/// ```
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub t: Vec<f64>,
    pub e: Vec<f64>,
    pub n: Vec<f64>,
    pub bound: Vec<f64>,
    pub lambda: f64,
    pub min_margin: f64,
    pub pass: bool,
}

pub fn uniqueness_envelope(
    sys: &GalerkinSystem,
    a: &Trajectory,
    b: &Trajectory,
    sampled: &SampledConstants,
) -> Result<UniquenessReport> {
    if a.states.len() != b.states.len() {
        return Err(Error::Shape("twin trajectories must share save times".into()));
    }
    let nu0 = sys.nu0;
    let u = sys.config.model.u_swim;
    let kap = sampled.kappa_a.value;
    let cp = estimate_poincare(&sys.domain, PoincareClass::MeanZeroScalar)?.c_p;
    let sup_gm2 = b.ledger.norms.iter().map(|n| n.grad_m_l4).fold(0.0, f64::max);
    let lam = (sampled.e4.value.powi(2) * sup_gm2 * sup_gm2 + 2.0) / nu0;
    let nu1p = sys.viscosity.nu1_prime();
    let mut t = Vec::new();
    let mut e = Vec::new();
    let mut nn = Vec::new();
    for ((sa, sb), na) in a.states.iter().zip(&b.states).zip(&a.ledger.norms) {
        let v2: f64 = sa.c.iter().zip(&sb.c).map(|(x, y)| (x - y).powi(2)).sum();
        let ea = sa.eta();
        let eb = sb.eta();
        let h1: f64 = ea.iter().zip(&eb).zip(&sys.beta).map(|((x, y), bb)| bb * (x - y).powi(2)).sum();
        t.push(sa.t);
        e.push(lam * v2 + h1);
        let cy = ((4.0 / nu0) * nu1p * nu1p * sampled.e5.value.powi(2) * na.du_l4.powi(2) + cp * cp) / kap;
        let n1 = 2.0 * na.grad_u_inf + 1.0;
        let n2 = lam * cy + 3.0 * (u * u + na.u_inf * na.u_inf) / kap;
        nn.push(n1.max(n2));
    }
    let int = cumulative_trapezoid(&t, &nn);
    let bound: Vec<f64> = int.iter().map(|i| e[0] * i.exp()).collect();
    let min_margin = bound.iter().zip(&e).map(|(b, x)| b - x).fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * (1.0 + e[0]);
    Ok(UniquenessReport { t, e, n: nn, bound, lambda: lam, pass: min_margin >= -tol, min_margin })
}
