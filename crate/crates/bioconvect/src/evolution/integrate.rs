//! IMEX ARS(2,2,2) time stepping with diagnostics.

use super::system::{GalerkinState, GalerkinSystem, StateNorms};
use crate::Result;
use serde::{Deserialize, Serialize};

const GAMMA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

/// One row of `diagnostics.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub u_l2: f64,
    pub du_l2: f64,
    pub conc_l2: f64,
    pub div_max: f64,
    pub a1_xi: f64,
    pub mass: f64,
    pub energy_residual: f64,
}

impl DiagnosticsRow {
    pub const HEADER: &'static str = "t,u_l2,du_l2,conc_l2,div_max,a1_xi,mass,energy_residual";

    pub fn csv(&self) -> String {
        format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            self.t, self.u_l2, self.du_l2, self.conc_l2, self.div_max, self.a1_xi, self.mass, self.energy_residual
        )
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DiagnosticsLedger {
    pub rows: Vec<DiagnosticsRow>,
    /// Full norms at each saved state.
    pub norms: Vec<StateNorms>,
    /// `(t_{n+1}, r_n)` for every step.
    pub step_residuals: Vec<(f64, f64)>,
    /// Quadrature nodes where `nu(m)` left `[nu0, nu1]`, summed over evaluations.
    pub nu_out_of_bounds: usize,
}

impl DiagnosticsLedger {
    pub fn max_abs_residual(&self) -> f64 {
        self.step_residuals.iter().map(|r| r.1.abs()).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(DiagnosticsRow::HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv());
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub steps: usize,
    pub states: Vec<GalerkinState>,
    pub ledger: DiagnosticsLedger,
    pub blowup: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &GalerkinState {
        self.states.last().expect("trajectory has at least the initial state")
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }
}

/// Automatic step: CFL on the grid plus a bound on the explicit linear terms.
pub fn automatic_dt(sys: &GalerkinSystem, s: &GalerkinState) -> f64 {
    let tol = &sys.config.tolerances;
    let d = &sys.domain;
    let hx = d.lx() / d.nx() as f64;
    let hz = d.z().windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let n = sys.norms(s);
    let umax = n.u_inf + sys.config.model.u_swim.abs();
    let cfl = if umax > 0.0 { tol.cfl_safety * hx.min(hz) / umax } else { f64::INFINITY };
    let alpha_max = sys.alpha_v.iter().cloned().fold(0.0, f64::max);
    let tz_norm = sys.tz.norm();
    let stiff = (sys.viscosity.nu1() - sys.nu0) * alpha_max + sys.config.model.u_swim.abs() * tz_norm;
    let lin = if stiff > 0.0 { tol.cfl_safety / stiff } else { f64::INFINITY };
    tol.dt_max.min(cfl).min(lin)
}

fn energy(c: &[f64]) -> f64 {
    0.5 * c.iter().map(|x| x * x).sum::<f64>()
}

/// One ARS(2,2,2) step. Returns the new state and the energy rate at the old one.
pub fn step(sys: &GalerkinSystem, s: &GalerkinState, dt: f64) -> (GalerkinState, f64, usize) {
    let delta = 1.0 - 1.0 / (2.0 * GAMMA);
    let (lv, lc) = sys.implicit_diagonal();
    let k1 = sys.evaluate(s.t, &s.c, &s.d, &s.e0);
    let solve = |y: &[f64], r: &[f64], lam: &[f64]| -> Vec<f64> {
        y.iter().zip(r).zip(lam).map(|((y, r), l)| (y + r) / (1.0 + dt * GAMMA * l)).collect()
    };
    let rv2: Vec<f64> = k1.fv.iter().map(|f| dt * GAMMA * f).collect();
    let rc2: Vec<f64> = k1.fc.iter().map(|f| dt * GAMMA * f).collect();
    let c2 = solve(&s.c, &rv2, &lv);
    let d2 = solve(&s.d, &rc2, &lc);
    let k2 = sys.evaluate(s.t + GAMMA * dt, &c2, &d2, &s.e0);
    let rv3: Vec<f64> = (0..c2.len())
        .map(|i| dt * (delta * k1.fv[i] + (1.0 - delta) * k2.fv[i] - (1.0 - GAMMA) * lv[i] * c2[i]))
        .collect();
    let rc3: Vec<f64> = (0..d2.len())
        .map(|i| dt * (delta * k1.fc[i] + (1.0 - delta) * k2.fc[i] - (1.0 - GAMMA) * lc[i] * d2[i]))
        .collect();
    let c3 = solve(&s.c, &rv3, &lv);
    let d3 = solve(&s.d, &rc3, &lc);
    let next = GalerkinState { t: s.t + dt, c: c3, d: d3, e0: s.e0.clone(), variant: s.variant };
    (next, k1.energy_rate, k1.nu_out_of_bounds + k2.nu_out_of_bounds)
}

fn row(n: &StateNorms, residual: f64) -> DiagnosticsRow {
    DiagnosticsRow {
        t: n.t,
        u_l2: n.u_l2,
        du_l2: n.du_l2,
        conc_l2: n.conc_l2,
        div_max: n.div_max,
        a1_xi: n.a1_xi,
        mass: n.mass,
        energy_residual: residual,
    }
}

/// Integrates from `s0` to `t_end` using the configured or automatic step.
pub fn integrate(sys: &GalerkinSystem, s0: GalerkinState) -> Result<Trajectory> {
    let disc = &sys.config.discretization;
    let dt = disc.dt.unwrap_or_else(|| automatic_dt(sys, &s0));
    integrate_with(sys, s0, dt, disc.t_end, disc.save_every)
}

/// Integrates with a fixed step, adjusted so that a whole number of steps hits `t_end`.
pub fn integrate_with(
    sys: &GalerkinSystem,
    s0: GalerkinState,
    dt: f64,
    t_end: f64,
    save_every: usize,
) -> Result<Trajectory> {
    let span = t_end - s0.t;
    let steps = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    let threshold = sys.config.tolerances.blowup_threshold;
    let mut ledger = DiagnosticsLedger::default();
    let mut states = vec![s0.clone()];
    let mut saved_steps = vec![0usize];
    let mut rates = Vec::with_capacity(steps + 1);
    let mut energies = vec![energy(&s0.c)];
    let mut s = s0;
    let mut blowup = None;
    let mut done = 0;
    for k in 1..=steps {
        let (next, rate, oob) = step(sys, &s, dt);
        rates.push(rate);
        ledger.nu_out_of_bounds += oob;
        s = next;
        done = k;
        energies.push(energy(&s.c));
        let big = s.c.iter().chain(&s.d).map(|v| v.abs()).fold(0.0, f64::max);
        if !s.is_finite() || big > threshold {
            blowup = Some(s.t);
            states.push(s.clone());
            saved_steps.push(k);
            break;
        }
        if k % save_every == 0 || k == steps {
            states.push(s.clone());
            saved_steps.push(k);
        }
    }
    if blowup.is_none() {
        rates.push(sys.evaluate(s.t, &s.c, &s.d, &s.e0).energy_rate);
    }
    let t0 = states[0].t;
    let mut residual_at = vec![0.0; done + 1];
    for k in 0..done.min(rates.len().saturating_sub(1)) {
        let r = (energies[k + 1] - energies[k]) / dt - 0.5 * (rates[k] + rates[k + 1]);
        residual_at[k + 1] = r;
        ledger.step_residuals.push((t0 + (k + 1) as f64 * dt, r));
    }
    for (st, &k) in states.iter().zip(&saved_steps) {
        let n = if st.is_finite() { sys.norms(st) } else { StateNorms { t: st.t, u_l2: f64::INFINITY, ..Default::default() } };
        ledger.rows.push(row(&n, residual_at[k]));
        ledger.norms.push(n);
    }
    Ok(Trajectory { dt, steps: done, states, ledger, blowup })
}
