//! The Galerkin ODE system in coefficient form.
//!
//! The concentration is split as `m = m_ref(z) + eta`. In the weak variant
//! `m_ref = alpha/|Omega|` and `eta = zeta = d`; in the strong variant
//! `m_ref = m_alpha` and `eta = xi + eta0 = d + e0`. Both variants then share
//! one right-hand side.

use super::config::{InitKind, SimConfig, Variant};
use super::viscosity::ViscosityModel;
use crate::domain_grid::{band_limited_scalar, band_limited_solenoidal, lp_norm, Domain, Lp, ScalarField, VectorField};
use crate::operators::basis::{build_concentration_basis_with_degree, build_stokes_basis_with_degree, default_degree};
use crate::operators::SpectralBasis;
use crate::stationary::{solve_malpha, AuxiliaryMalpha};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalerkinState {
    pub t: f64,
    /// Velocity coefficients.
    pub c: Vec<f64>,
    /// Concentration coefficients (zeta or xi).
    pub d: Vec<f64>,
    /// Stored `eta0^n` coefficients; zero in the weak variant.
    pub e0: Vec<f64>,
    pub variant: Variant,
}

impl GalerkinState {
    pub fn zeros(n: usize, variant: Variant) -> Self {
        GalerkinState { t: 0.0, c: vec![0.0; n], d: vec![0.0; n], e0: vec![0.0; n], variant }
    }

    /// Coefficients of `eta = d + e0`.
    pub fn eta(&self) -> Vec<f64> {
        self.d.iter().zip(&self.e0).map(|(a, b)| a + b).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().chain(&self.d).chain(&self.e0).all(|v| v.is_finite())
    }
}

/// Grid data of one explicit evaluation.
pub struct Evaluation {
    pub fv: Vec<f64>,
    pub fc: Vec<f64>,
    /// `d/dt (|u|^2/2)` from the continuous energy identity.
    pub energy_rate: f64,
    pub nu_out_of_bounds: usize,
}

pub struct GalerkinSystem {
    pub domain: Domain,
    pub basis: SpectralBasis,
    pub config: SimConfig,
    pub variant: Variant,
    pub viscosity: ViscosityModel,
    pub nu0: f64,
    pub malpha: Option<AuxiliaryMalpha>,
    pub m_ref: Vec<f64>,
    pub m_ref_z: Vec<f64>,
    pub alpha_v: Vec<f64>,
    pub beta: Vec<f64>,
    /// `tz[(l, m)] = (d phi^m / dz, phi^l)`
    pub tz: DMatrix<f64>,
    /// `bchi[(j, l)] = (phi^l chi, w^j)`
    pub bchi: DMatrix<f64>,
    /// `-(m_ref chi, w^j)`
    pub src_ref: Vec<f64>,
    pub f_field: VectorField,
    pub f_proj: Vec<f64>,
    pub b1_top: Vec<f64>,
    pub b1_proj: Vec<f64>,
    /// Constant concentration source, `U alpha/|Omega| (1, d phi/dz)` (weak).
    pub conc_src: Vec<f64>,
    weights: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl GalerkinSystem {
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let domain = Domain::new(config.domain.clone())?;
        let n = config.discretization.n_modes;
        let degree = config.discretization.degree.unwrap_or_else(|| default_degree(&domain));
        let m = &config.model;
        let basis = SpectralBasis {
            n,
            velocity: build_stokes_basis_with_degree(&domain, n, degree)?,
            concentration: build_concentration_basis_with_degree(&domain, m.theta, m.u_swim, n, degree)?,
        };
        Self::with_basis(config, domain, basis)
    }

    /// Reuses a prebuilt basis (its n must match the config).
    pub fn with_basis(config: &SimConfig, domain: Domain, basis: SpectralBasis) -> Result<Self> {
        config.validate()?;
        let n = config.discretization.n_modes;
        if basis.velocity.len() != n || basis.concentration.len() != n {
            return Err(Error::Shape(format!("basis has {} modes, config asks for {n}", basis.velocity.len())));
        }
        let m = &config.model;
        let variant = m.variant;
        let npts = domain.npts();
        let nx = domain.nx();
        let mut weights = vec![0.0; npts];
        for (j, wz) in domain.wz().iter().enumerate() {
            for i in 0..nx {
                weights[j * nx + i] = wz * domain.wx();
            }
        }
        let (malpha, m_ref, m_ref_z) = match variant {
            Variant::Weak => (None, vec![m.alpha / domain.area(); npts], vec![0.0; npts]),
            Variant::Strong => {
                let ma = solve_malpha(&domain, m.theta, m.u_swim, m.alpha)?;
                let r = ma.field.data.clone();
                let rz = ma.dz.clone();
                (Some(ma), r, rz)
            }
        };
        let vb = &basis.velocity;
        let cb = &basis.concentration;
        let chi_w: Vec<Vec<f64>> = vb
            .modes
            .iter()
            .map(|md| md.grid.u.iter().zip(&md.grid.w).map(|(u, w)| m.chi[0] * u + m.chi[1] * w).collect())
            .collect();
        let mut tz = DMatrix::zeros(n, n);
        let mut bchi = DMatrix::zeros(n, n);
        for l in 0..n {
            for mm in 0..n {
                tz[(l, mm)] = dot(&weights.iter().zip(&cb.modes[mm].grid.phiz).map(|(a, b)| a * b).collect::<Vec<_>>(), &cb.modes[l].grid.phi);
            }
        }
        for j in 0..n {
            for l in 0..n {
                bchi[(j, l)] = domain.inner(&cb.modes[l].grid.phi, &chi_w[j]);
            }
        }
        let src_ref: Vec<f64> = chi_w.iter().map(|cw| -domain.inner(&m_ref, cw)).collect();
        let f_field = config.forcing.field(&domain);
        let f_proj = vb.project(&domain, &f_field);
        let kb = domain.wavenumber(m.b1_k);
        let b1_top: Vec<f64> = domain.x().iter().map(|&x| m.b1 * (kb * x).cos()).collect();
        let top = (domain.nz() - 1) * nx;
        let b1_proj: Vec<f64> =
            vb.modes.iter().map(|md| 2.0 * domain.wx() * dot(&b1_top, &md.grid.u[top..top + nx])).collect();
        let conc_src: Vec<f64> = match variant {
            Variant::Weak => {
                let s = m.u_swim * m.alpha / domain.area();
                cb.modes.iter().map(|md| s * domain.integrate(&md.grid.phiz)).collect()
            }
            Variant::Strong => vec![0.0; n],
        };
        Ok(GalerkinSystem {
            alpha_v: vb.eigenvalues(),
            beta: cb.eigenvalues(),
            nu0: m.viscosity.nu0(),
            viscosity: m.viscosity.clone(),
            domain,
            basis,
            config: config.clone(),
            variant,
            malpha,
            m_ref,
            m_ref_z,
            tz,
            bchi,
            src_ref,
            f_field,
            f_proj,
            b1_top,
            b1_proj,
            conc_src,
            weights,
        })
    }

    pub fn n(&self) -> usize {
        self.basis.n
    }

    /// Diagonal of the implicit operator: `nu0 alpha_j` then `beta_l`.
    pub fn implicit_diagonal(&self) -> (Vec<f64>, Vec<f64>) {
        (self.alpha_v.iter().map(|a| self.nu0 * a).collect(), self.beta.clone())
    }

    pub fn grad_mref_l4(&self) -> f64 {
        self.malpha.as_ref().map_or(0.0, |m| m.diagnostics.grad_l4)
    }

    /// Explicit part of the right-hand side and the energy rate at `(c, eta)`.
    pub fn evaluate(&self, t: f64, c: &[f64], d: &[f64], e0: &[f64]) -> Evaluation {
        let n = self.n();
        let npts = self.domain.npts();
        let eta: Vec<f64> = d.iter().zip(e0).map(|(a, b)| a + b).collect();
        let ug = self.basis.velocity.reconstruct_with_gradient(&self.domain, c);
        let eg = self.basis.concentration.reconstruct_with_gradient(&self.domain, &eta);
        let fs = self.config.forcing.factor(t);
        let chi = self.config.model.chi;
        let (n0, n1) = (self.viscosity.nu0(), self.viscosity.nu1());
        let mut a = vec![0.0; npts];
        let mut b = vec![0.0; npts];
        let mut cc = vec![0.0; npts];
        let mut au = vec![0.0; npts];
        let mut aw = vec![0.0; npts];
        let mut ac = vec![0.0; npts];
        let mut oob = 0;
        let mut rate_integrand = vec![0.0; npts];
        for i in 0..npts {
            let w = self.weights[i];
            let mt = self.m_ref[i] + eg.phi[i];
            let nu = self.viscosity.nu(mt);
            if nu < n0 * (1.0 - 1e-12) || nu > n1 * (1.0 + 1e-12) {
                oob += 1;
            }
            let dxx = ug.ux[i];
            let dzz = ug.wz[i];
            let dxz = 0.5 * (ug.uz[i] + ug.wx[i]);
            let ne = 2.0 * w * (nu - self.nu0);
            a[i] = ne * dxx;
            b[i] = ne * dzz;
            cc[i] = ne * dxz;
            au[i] = w * (ug.u[i] * ug.ux[i] + ug.w[i] * ug.uz[i]);
            aw[i] = w * (ug.u[i] * ug.wx[i] + ug.w[i] * ug.wz[i]);
            ac[i] = w * (ug.u[i] * eg.phix[i] + ug.w[i] * (eg.phiz[i] + self.m_ref_z[i]));
            let dd = dxx * dxx + dzz * dzz + 2.0 * dxz * dxz;
            rate_integrand[i] = w
                * (-2.0 * nu * dd - mt * (chi[0] * ug.u[i] + chi[1] * ug.w[i])
                    + fs * (self.f_field.u.data[i] * ug.u[i] + self.f_field.w.data[i] * ug.w[i]));
        }
        let eta_v = DVector::from_column_slice(&eta);
        let buoy = &self.bchi * &eta_v;
        let mut fv = vec![0.0; n];
        for (j, md) in self.basis.velocity.modes.iter().enumerate() {
            let g = &md.grid;
            let visc = dot(&a, &g.ux) + dot(&b, &g.wz) + dot(&cc, &g.uz) + dot(&cc, &g.wx);
            let adv = dot(&au, &g.u) + dot(&aw, &g.w);
            fv[j] = -visc - adv - buoy[j] + self.src_ref[j] + fs * self.f_proj[j] + self.b1_proj[j];
        }
        let tze = &self.tz * &eta_v;
        let u_swim = self.config.model.u_swim;
        let mut fc = vec![0.0; n];
        for (l, md) in self.basis.concentration.modes.iter().enumerate() {
            let nl = dot(&ac, &md.grid.phi);
            fc[l] = -self.beta[l] * e0[l] - u_swim * tze[l] - nl + self.conc_src[l];
        }
        let nx = self.domain.nx();
        let top = (self.domain.nz() - 1) * nx;
        let bterm = 2.0 * self.domain.wx() * dot(&self.b1_top, &ug.u[top..top + nx]);
        let energy_rate = rate_integrand.iter().sum::<f64>() + bterm;
        Evaluation { fv, fc, energy_rate, nu_out_of_bounds: oob }
    }

    /// Full time derivative `(dc/dt, dd/dt)`.
    pub fn rhs(&self, s: &GalerkinState) -> (Vec<f64>, Vec<f64>) {
        let ev = self.evaluate(s.t, &s.c, &s.d, &s.e0);
        let dc = ev.fv.iter().zip(&s.c).zip(&self.alpha_v).map(|((f, c), a)| f - self.nu0 * a * c).collect();
        let dd = ev.fc.iter().zip(&s.d).zip(&self.beta).map(|((f, d), b)| f - b * d).collect();
        (dc, dd)
    }

    /// Velocity field of a state.
    pub fn velocity(&self, s: &GalerkinState) -> VectorField {
        self.basis.velocity.reconstruct(&self.domain, &s.c)
    }

    /// `eta` on the grid.
    pub fn eta_field(&self, s: &GalerkinState) -> ScalarField {
        self.basis.concentration.reconstruct(&self.domain, &s.eta())
    }

    /// Total concentration `m = m_ref + eta`.
    pub fn concentration(&self, s: &GalerkinState) -> ScalarField {
        let mut f = self.eta_field(s);
        for (a, b) in f.data.iter_mut().zip(&self.m_ref) {
            *a += b;
        }
        f
    }

    /// Builds the initial state from the configuration.
    pub fn initial_state(&self) -> Result<GalerkinState> {
        let (u0, s0) = self.initial_fields()?;
        Ok(initial_projection(&self.domain, &u0, &s0, &self.basis, self.variant))
    }

    /// Initial velocity and concentration perturbation on the grid.
    pub fn initial_fields(&self) -> Result<(VectorField, ScalarField)> {
        let d = &self.domain;
        let ini = &self.config.initial;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let kr = d.kmax_dealiased().min(4);
        let dr = d.degree_cap().min(8);
        let h = d.h();
        let kap = d.wavenumber(1);
        let mut u0 = match ini.velocity {
            InitKind::Zero => d.vector(),
            InitKind::Random => band_limited_solenoidal(d, &mut rng, kr, dr),
            InitKind::Mode => {
                if ini.velocity_mode >= self.n() {
                    return Err(Error::Config("velocity_mode out of range".into()));
                }
                self.basis.velocity.mode_field(d, ini.velocity_mode)
            }
            InitKind::Cellular => d.sample_vector(|x, z| {
                // stream function z^2 (h - z) cos(kx)
                let dpsi = 2.0 * z * (h - z) - z * z;
                (dpsi * (kap * x).cos(), kap * z * z * (h - z) * (kap * x).sin())
            }),
        };
        if ini.velocity != InitKind::Zero {
            let nrm = d.inner_vec(&u0, &u0).sqrt();
            if nrm > 0.0 {
                u0 = u0.scaled(ini.velocity_amplitude / nrm);
            }
            u0.solenoidal = true;
        }
        let mut s0 = match ini.concentration {
            InitKind::Zero => d.scalar(),
            InitKind::Random => band_limited_scalar(d, &mut rng, kr, dr, true),
            InitKind::Mode => {
                if ini.concentration_mode >= self.n() {
                    return Err(Error::Config("concentration_mode out of range".into()));
                }
                self.basis.concentration.mode_field(d, ini.concentration_mode)
            }
            InitKind::Cellular => d.sample(|x, z| (kap * x).cos() * (PI * z / h).cos()),
        };
        if ini.concentration != InitKind::Zero {
            let nrm = d.l2(&s0.data);
            if nrm > 0.0 {
                s0 = s0.scaled(ini.concentration_amplitude / nrm);
            }
        }
        Ok((u0, s0))
    }

    /// Norms used by the diagnostics and monitors.
    pub fn norms(&self, s: &GalerkinState) -> StateNorms {
        let d = &self.domain;
        let eta = s.eta();
        let ug = self.basis.velocity.reconstruct_with_gradient(d, &s.c);
        let u = VectorField {
            u: ScalarField { nx: d.nx(), nz: d.nz(), data: ug.u.clone() },
            w: ScalarField { nx: d.nx(), nz: d.nz(), data: ug.w.clone() },
            solenoidal: true,
        };
        let xg = self.basis.concentration.reconstruct_with_gradient(d, &s.d);
        let eg = self.basis.concentration.reconstruct_with_gradient(d, &eta);
        let npts = d.npts();
        let grad_xi: Vec<f64> = (0..npts).map(|i| xg.phix[i].hypot(xg.phiz[i])).collect();
        let grad_eta: Vec<f64> = (0..npts).map(|i| eg.phix[i].hypot(eg.phiz[i])).collect();
        let grad_m: Vec<f64> = (0..npts).map(|i| eg.phix[i].hypot(eg.phiz[i] + self.m_ref_z[i])).collect();
        let l4 = |v: &[f64]| d.integrate(&v.iter().map(|x| x.powi(4)).collect::<Vec<_>>()).max(0.0).powf(0.25);
        let du2: Vec<f64> = (0..npts)
            .map(|i| {
                let dxz = 0.5 * (ug.uz[i] + ug.wx[i]);
                ug.ux[i] * ug.ux[i] + ug.wz[i] * ug.wz[i] + 2.0 * dxz * dxz
            })
            .collect();
        let grad_u_inf = (0..npts)
            .map(|i| (ug.ux[i].powi(2) + ug.uz[i].powi(2) + ug.wx[i].powi(2) + ug.wz[i].powi(2)).sqrt())
            .fold(0.0_f64, f64::max);
        let mass = d.integrate(&self.concentration(s).data);
        let au = s.c.iter().zip(&self.alpha_v).map(|(c, a)| (a * c).powi(2)).sum::<f64>().sqrt();
        let a1_xi = s.d.iter().zip(&self.beta).map(|(x, b)| (b * x).powi(2)).sum::<f64>().sqrt();
        let a1_eta = eta.iter().zip(&self.beta).map(|(x, b)| (b * x).powi(2)).sum::<f64>().sqrt();
        let gm4 = self.grad_mref_l4();
        StateNorms {
            t: s.t,
            u_l2: s.c.iter().map(|x| x * x).sum::<f64>().sqrt(),
            du_l2: (0.5 * s.c.iter().zip(&self.alpha_v).map(|(c, a)| a * c * c).sum::<f64>()).sqrt(),
            du_l4: d.integrate(&du2.iter().map(|x| x * x).collect::<Vec<_>>()).max(0.0).powf(0.25),
            au_l2: au,
            u_inf: lp_norm(d, &u, Lp::Inf),
            grad_u_inf,
            div_max: d.max_abs_divergence(&u),
            conc_l2: s.d.iter().map(|x| x * x).sum::<f64>().sqrt(),
            eta_l2: eta.iter().map(|x| x * x).sum::<f64>().sqrt(),
            grad_conc_l2: d.integrate(&grad_xi.iter().map(|x| x * x).collect::<Vec<_>>()).max(0.0).sqrt(),
            grad_xi_l4: l4(&grad_xi),
            grad_eta_l4: l4(&grad_eta),
            grad_m_l4: l4(&grad_m),
            a1_xi,
            a1_eta,
            pi: a1_eta * a1_eta + gm4 * gm4,
            mass,
            conc_mean: d.integrate(&xg.phi),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StateNorms {
    pub t: f64,
    pub u_l2: f64,
    pub du_l2: f64,
    pub du_l4: f64,
    pub au_l2: f64,
    pub u_inf: f64,
    pub grad_u_inf: f64,
    pub div_max: f64,
    /// `|zeta|` (weak) or `|xi|` (strong)
    pub conc_l2: f64,
    pub eta_l2: f64,
    pub grad_conc_l2: f64,
    pub grad_xi_l4: f64,
    pub grad_eta_l4: f64,
    pub grad_m_l4: f64,
    pub a1_xi: f64,
    pub a1_eta: f64,
    pub pi: f64,
    pub mass: f64,
    pub conc_mean: f64,
}

/// `u0^n = P_n u0`, `eta0^n = Pbar_n s0`. In the strong variant the projected
/// concentration is stored as `e0` and `xi(0) = 0`.
pub fn initial_projection(
    domain: &Domain,
    u0: &VectorField,
    s0: &ScalarField,
    basis: &SpectralBasis,
    variant: Variant,
) -> GalerkinState {
    let c = basis.velocity.project(domain, u0);
    let p = basis.concentration.project(domain, s0);
    let n = c.len();
    match variant {
        Variant::Weak => GalerkinState { t: 0.0, c, d: p, e0: vec![0.0; n], variant },
        Variant::Strong => GalerkinState { t: 0.0, c, d: vec![0.0; n], e0: p, variant },
    }
}
