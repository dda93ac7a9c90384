//! Picard iteration for the stationary system in Galerkin form.
//!
//! The stationary concentration is written `m_stat = m_alpha + eta` with the
//! auxiliary `m_alpha` and mean-zero `eta`; velocity and `eta` are expanded in
//! the same eigenbases as the evolution.

use crate::domain_grid::{ScalarField, VectorField};
use crate::evolution::config::Variant;
use crate::evolution::{GalerkinState, GalerkinSystem};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PicardStep {
    pub iter: usize,
    /// `|D(u_{k+1} - u_k)|`
    pub du: f64,
    /// `|grad(eta_{k+1} - eta_k)|`
    pub dgrad: f64,
    /// Coefficient norm of the full stationary residual.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct StationarySolution {
    pub c: Vec<f64>,
    pub eta: Vec<f64>,
    pub u_stat: VectorField,
    /// Stationary concentration (not the auxiliary profile).
    pub m_stat: ScalarField,
    pub residual: f64,
    pub mass: f64,
    pub trace: Vec<PicardStep>,
    pub converged: bool,
}

impl StationarySolution {
    /// Strong-variant state with `e0 = eta`, `xi = 0`.
    pub fn as_state(&self) -> GalerkinState {
        let n = self.c.len();
        GalerkinState { t: 0.0, c: self.c.clone(), d: vec![0.0; n], e0: self.eta.clone(), variant: Variant::Strong }
    }

    /// Ratios of successive velocity increments.
    pub fn contraction_factors(&self) -> Vec<f64> {
        self.trace
            .windows(2)
            .filter(|w| w[0].du + w[0].dgrad > 0.0)
            .map(|w| (w[1].du + w[1].dgrad) / (w[0].du + w[0].dgrad))
            .collect()
    }
}

/// Residual of the stationary Galerkin equations at `(c, eta)`.
pub fn stationary_residual(sys: &GalerkinSystem, c: &[f64], eta: &[f64]) -> f64 {
    let z = vec![0.0; c.len()];
    let ev = sys.evaluate(0.0, c, eta, &z);
    let rv = ev.fv.iter().zip(c).zip(&sys.alpha_v).map(|((f, c), a)| (f - sys.nu0 * a * c).powi(2)).sum::<f64>();
    let rc = ev.fc.iter().zip(eta).zip(&sys.beta).map(|((f, e), b)| (f - b * e).powi(2)).sum::<f64>();
    (rv + rc).sqrt()
}

fn weights(sys: &GalerkinSystem) -> Vec<f64> {
    let d = &sys.domain;
    let nx = d.nx();
    let mut w = vec![0.0; d.npts()];
    for (j, wz) in d.wz().iter().enumerate() {
        for i in 0..nx {
            w[j * nx + i] = wz * d.wx();
        }
    }
    w
}

/// Velocity step: `nu0 alpha c + 2((nu(m_k) - nu0) D u, D w) + (u_k.grad u, w) = rhs`.
fn velocity_matrix(sys: &GalerkinSystem, ck: &[f64], eta_k: &[f64], w: &[f64]) -> DMatrix<f64> {
    let n = sys.n();
    let d = &sys.domain;
    let ug = sys.basis.velocity.reconstruct_with_gradient(d, ck);
    let eg = sys.basis.concentration.reconstruct(d, eta_k);
    let npts = d.npts();
    let ne: Vec<f64> =
        (0..npts).map(|i| 2.0 * w[i] * (sys.viscosity.nu(sys.m_ref[i] + eg.data[i]) - sys.nu0)).collect();
    let modes = &sys.basis.velocity.modes;
    let mut m = DMatrix::zeros(n, n);
    for (i, mi) in modes.iter().enumerate() {
        let g = &mi.grid;
        // weighted contributions of trial mode i
        let a: Vec<f64> = (0..npts).map(|p| ne[p] * g.ux[p]).collect();
        let b: Vec<f64> = (0..npts).map(|p| ne[p] * g.wz[p]).collect();
        let cxz: Vec<f64> = (0..npts).map(|p| ne[p] * 0.5 * (g.uz[p] + g.wx[p])).collect();
        let au: Vec<f64> = (0..npts).map(|p| w[p] * (ug.u[p] * g.ux[p] + ug.w[p] * g.uz[p])).collect();
        let aw: Vec<f64> = (0..npts).map(|p| w[p] * (ug.u[p] * g.wx[p] + ug.w[p] * g.wz[p])).collect();
        for (j, mj) in modes.iter().enumerate() {
            let h = &mj.grid;
            let mut s = 0.0;
            for p in 0..npts {
                s += a[p] * h.ux[p] + b[p] * h.wz[p] + cxz[p] * (h.uz[p] + h.wx[p]) + au[p] * h.u[p] + aw[p] * h.w[p];
            }
            m[(j, i)] = s;
        }
        m[(i, i)] += sys.nu0 * sys.alpha_v[i];
    }
    m
}

/// Concentration step: `beta eta + U Tz eta + (u.grad eta, phi) = -(w m_ref', phi) + src`.
fn concentration_matrix(sys: &GalerkinSystem, c: &[f64], w: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
    let n = sys.n();
    let d = &sys.domain;
    let ug = sys.basis.velocity.reconstruct(d, c);
    let npts = d.npts();
    let u_swim = sys.config.model.u_swim;
    let modes = &sys.basis.concentration.modes;
    let mut m = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    let src: Vec<f64> = (0..npts).map(|p| w[p] * ug.w.data[p] * sys.m_ref_z[p]).collect();
    for (i, mi) in modes.iter().enumerate() {
        let g = &mi.grid;
        let adv: Vec<f64> = (0..npts).map(|p| w[p] * (ug.u.data[p] * g.phix[p] + ug.w.data[p] * g.phiz[p])).collect();
        for (j, mj) in modes.iter().enumerate() {
            m[(j, i)] = adv.iter().zip(&mj.grid.phi).map(|(a, b)| a * b).sum::<f64>() + u_swim * sys.tz[(j, i)];
        }
        m[(i, i)] += sys.beta[i];
        rhs[i] = sys.conc_src[i] - src.iter().zip(&g.phi).map(|(a, b)| a * b).sum::<f64>();
    }
    (m, rhs)
}

/// Picard iteration with lagged advection and frozen viscosity. Requires a
/// strong-variant system (so `m_ref` is the auxiliary profile) with time-constant forcing.
pub fn solve_stationary(sys: &GalerkinSystem) -> Result<StationarySolution> {
    if sys.variant != Variant::Strong {
        return Err(Error::Config("the stationary solver uses the strong representation".into()));
    }
    if sys.config.model.b1 != 0.0 {
        return Err(Error::Config("stationary solutions require b1 = 0".into()));
    }
    if !sys.config.forcing.is_time_constant() {
        return Err(Error::Config("stationary forcing must be time-constant".into()));
    }
    let n = sys.n();
    let tol = sys.config.tolerances.picard_tol;
    let max_iter = sys.config.tolerances.picard_max_iter;
    let fs = sys.config.forcing.factor(0.0);
    let w = weights(sys);
    let mut c = vec![0.0; n];
    let mut eta = vec![0.0; n];
    let mut trace = Vec::new();
    let mut converged = false;
    for iter in 1..=max_iter {
        let ed = DVector::from_column_slice(&eta);
        let buoy = &sys.bchi * &ed;
        let rhs = DVector::from_iterator(n, (0..n).map(|j| -buoy[j] + sys.src_ref[j] + fs * sys.f_proj[j]));
        let mv = velocity_matrix(sys, &c, &eta, &w);
        let cn = mv.lu().solve(&rhs).ok_or_else(|| Error::Singular("stationary velocity step".into()))?;
        let cn: Vec<f64> = cn.iter().cloned().collect();
        let (mc, rc) = concentration_matrix(sys, &cn, &w);
        let en = mc.lu().solve(&rc).ok_or_else(|| Error::Singular("stationary concentration step".into()))?;
        let en: Vec<f64> = en.iter().cloned().collect();
        let du = (0.5 * cn.iter().zip(&c).zip(&sys.alpha_v).map(|((a, b), l)| l * (a - b).powi(2)).sum::<f64>()).sqrt();
        let diff: Vec<f64> = en.iter().zip(&eta).map(|(a, b)| a - b).collect();
        let gd = sys.basis.concentration.reconstruct_with_gradient(&sys.domain, &diff);
        let dgrad = sys
            .domain
            .integrate(&gd.phix.iter().zip(&gd.phiz).map(|(a, b)| a * a + b * b).collect::<Vec<_>>())
            .max(0.0)
            .sqrt();
        c = cn;
        eta = en;
        let residual = stationary_residual(sys, &c, &eta);
        trace.push(PicardStep { iter, du, dgrad, residual });
        if !(du.is_finite() && dgrad.is_finite()) {
            break;
        }
        if du <= tol && dgrad <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        let last = trace.last().map_or(f64::NAN, |s| s.du + s.dgrad);
        return Err(Error::NoConvergence(format!("Picard iteration after {} steps (increment {last:.3e})", trace.len())));
    }
    let u_stat = sys.basis.velocity.reconstruct(&sys.domain, &c);
    let mut m_stat = sys.basis.concentration.reconstruct(&sys.domain, &eta);
    for (v, r) in m_stat.data.iter_mut().zip(&sys.m_ref) {
        *v += r;
    }
    let mass = sys.domain.integrate(&m_stat.data);
    let residual = trace.last().map_or(0.0, |s| s.residual);
    Ok(StationarySolution { c, eta, u_stat, m_stat, residual, mass, trace, converged })
}
