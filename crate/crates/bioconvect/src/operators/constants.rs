//! Domain constants: Poincare, Korn, trace, and the `2 U C_P < theta` check.

use super::basis::{concentration_spectrum_k, default_degree, top_tangential_profile, velocity_spectrum_k};
use super::ritz::constrained_ritz;
use crate::domain_grid::legendre::{gauss_legendre, orthonormal_table};
use crate::domain_grid::Domain;
use crate::{Error, Result};
use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoincareClass {
    /// Vector fields vanishing on S.
    VelocityOnS,
    /// Scalars with zero mean.
    MeanZeroScalar,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Formula,
    NumericalEstimate,
}

/// A constant together with how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Labeled {
    pub value: f64,
    pub provenance: Provenance,
    pub recipe: String,
}

impl Labeled {
    pub fn formula(value: f64, recipe: impl Into<String>) -> Self {
        Labeled { value, provenance: Provenance::Formula, recipe: recipe.into() }
    }
    pub fn estimate(value: f64, recipe: impl Into<String>) -> Self {
        Labeled { value, provenance: Provenance::NumericalEstimate, recipe: recipe.into() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoincareEstimate {
    pub c_p: f64,
    pub lambda_min: f64,
    pub residual: f64,
}

pub fn estimate_poincare(domain: &Domain, which: PoincareClass) -> Result<PoincareEstimate> {
    let d = default_degree(domain);
    match which {
        PoincareClass::MeanZeroScalar => {
            // The Rayleigh quotient grows with |k|, so k = 0 and k = 1 suffice.
            let l0 = concentration_spectrum_k(domain, 0, d, 1.0, 0.0)?[0];
            let l1 = concentration_spectrum_k(domain, 1, d, 1.0, 0.0)?[0];
            let lam = l0.min(l1);
            Ok(PoincareEstimate { c_p: 1.0 / lam.sqrt(), lambda_min: lam, residual: 0.0 })
        }
        PoincareClass::VelocityOnS => {
            // Each component separately: p(0) = 0, free at the top, k = 0.
            let h2 = domain.h() / 2.0;
            let (gs, gw) = gauss_legendre(d + 4);
            let dim = d + 1;
            let mut s = DMatrix::zeros(dim, dim);
            let mut m = DMatrix::zeros(dim, dim);
            for (q, &x) in gs.iter().enumerate() {
                let (p, dp, _) = orthonormal_table(x, d);
                for a in 0..dim {
                    for b in 0..dim {
                        s[(a, b)] += gw[q] * dp[a] * dp[b] / h2;
                        m[(a, b)] += gw[q] * h2 * p[a] * p[b];
                    }
                }
            }
            let (pb, _, _) = orthonormal_table(-1.0, d);
            let c = DMatrix::from_row_slice(1, dim, &pb);
            let r = constrained_ritz(&s, &m, &c)?;
            let lam = r.values[0];
            Ok(PoincareEstimate { c_p: 1.0 / lam.sqrt(), lambda_min: lam, residual: r.residual })
        }
    }
}

/// Largest `|grad u| / |D(u)|` over polynomial fields with `u = 0` on S and
/// `w = 0` on both walls (not necessarily solenoidal).
pub fn estimate_korn(domain: &Domain) -> Result<f64> {
    let d = default_degree(domain).min(20);
    let h2 = domain.h() / 2.0;
    let (gs, gw) = gauss_legendre(d + 4);
    let dim = d + 1;
    let mut worst = 0.0_f64;
    for k in 0..=domain.kmax_dealiased().min(8) {
        let kap = domain.wavenumber(k);
        // unknowns: p (u-profile) then q (w-profile)
        let mut g = DMatrix::zeros(2 * dim, 2 * dim);
        let mut dd = DMatrix::zeros(2 * dim, 2 * dim);
        for (qi, &x) in gs.iter().enumerate() {
            let (p, dp, _) = orthonormal_table(x, d);
            let wq = gw[qi] * h2;
            let dz: Vec<f64> = dp.iter().map(|v| v / h2).collect();
            for a in 0..dim {
                for b in 0..dim {
                    let pp = p[a] * p[b];
                    let zz = dz[a] * dz[b];
                    // |grad u|^2 = k^2 p^2 + p'^2 + k^2 q^2 + q'^2
                    g[(a, b)] += wq * (kap * kap * pp + zz);
                    g[(dim + a, dim + b)] += wq * (kap * kap * pp + zz);
                    // |D u|^2 = k^2 p^2 + q'^2 + (p' + k q)^2 / 2
                    dd[(a, b)] += wq * (kap * kap * pp + 0.5 * zz);
                    dd[(dim + a, dim + b)] += wq * (zz + 0.5 * kap * kap * pp);
                    dd[(a, dim + b)] += wq * 0.5 * kap * dz[a] * p[b];
                    dd[(dim + b, a)] += wq * 0.5 * kap * dz[a] * p[b];
                }
            }
        }
        let (pb, _, _) = orthonormal_table(-1.0, d);
        let (pt, _, _) = orthonormal_table(1.0, d);
        let mut c = DMatrix::zeros(3, 2 * dim);
        for a in 0..dim {
            c[(0, a)] = pb[a];
            c[(1, dim + a)] = pb[a];
            c[(2, dim + a)] = pt[a];
        }
        let n = super::ritz::null_space(&c, 2 * dim);
        let gr = n.transpose() * &g * &n;
        let dr = n.transpose() * &dd * &n;
        let ch = Cholesky::new(0.5 * (&dr + dr.transpose())).ok_or_else(|| Error::Singular("Korn pencil".into()))?;
        let linv = ch.l().solve_lower_triangular(&DMatrix::identity(dr.nrows(), dr.nrows())).unwrap();
        let b = &linv * gr * linv.transpose();
        let eig = SymmetricEigen::new(0.5 * (&b + b.transpose()));
        worst = worst.max(eig.eigenvalues.max());
    }
    Ok(worst.sqrt())
}

/// Smallest `C` with `|u|_{L2(Gamma)} <= C |D(u)|` on the velocity basis space.
pub fn estimate_trace_constant(domain: &Domain) -> Result<f64> {
    let d = default_degree(domain);
    let mut best = 0.0_f64;
    for k in 0..=domain.kmax_dealiased() {
        let (vals, coeffs) = velocity_spectrum_k(domain, k, d)?;
        let xfac = if k == 0 { domain.lx() } else { 0.5 * domain.lx() };
        // Eigenvectors are mass-orthonormal, so the stiffness is diagonal and
        // 2|D u|^2 = |grad u|^2 = sum alpha_i a_i^2.
        let s: f64 = vals
            .iter()
            .zip(&coeffs)
            .map(|(lam, c)| {
                let t = top_tangential_profile(c);
                xfac * t * t / (0.5 * lam)
            })
            .sum();
        best = best.max(s);
    }
    Ok(best.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub margin: f64,
}

/// Strict test of `2 U C_P < theta`.
pub fn check_smallness_u(theta: f64, u_swim: f64, c_p: f64) -> Verdict {
    let margin = theta - 2.0 * u_swim.abs() * c_p;
    Verdict { pass: margin > 0.0, margin }
}

/// Domain constants with provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub c_p_scalar: Labeled,
    pub c_p_velocity: Labeled,
    pub c_korn: Labeled,
    pub c_trace: Labeled,
    pub alpha1: Labeled,
    pub smallness_u: Verdict,
}

pub fn constants_report(domain: &Domain, theta: f64, u_swim: f64) -> Result<ConstantsReport> {
    let ps = estimate_poincare(domain, PoincareClass::MeanZeroScalar)?;
    let pv = estimate_poincare(domain, PoincareClass::VelocityOnS)?;
    let korn = estimate_korn(domain)?;
    let tr = estimate_trace_constant(domain)?;
    let alpha1 = super::basis::build_stokes_basis(domain, 1)?.modes[0].eigenvalue;
    Ok(ConstantsReport {
        c_p_scalar: Labeled::estimate(ps.c_p, "1/sqrt(lambda_min), mean-zero Neumann Ritz eigenproblem"),
        c_p_velocity: Labeled::estimate(pv.c_p, "1/sqrt(lambda_min), Dirichlet on S Ritz eigenproblem"),
        c_korn: Labeled::estimate(korn, "sqrt(max |grad u|^2/|D u|^2), generalized eigenproblem"),
        c_trace: Labeled::estimate(tr, "sqrt(max_k t^T (S/2)^{-1} t) over the Stokes Ritz space"),
        alpha1: Labeled::estimate(alpha1, "smallest Stokes eigenvalue"),
        smallness_u: check_smallness_u(theta, u_swim, ps.c_p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain_grid::DomainSpec;
    use std::f64::consts::PI;

    #[test]
    fn smallness_boundary_fails() {
        assert!(!check_smallness_u(1.0, 0.5, 1.0).pass);
        let v = check_smallness_u(1.0, 0.1, 1.0);
        assert!(v.pass && (v.margin - 0.8).abs() < 1e-15);
    }

    #[test]
    fn velocity_poincare_quarter_wave() {
        let d = Domain::new(DomainSpec { lx: 2.0 * PI, h: 1.0, nx: 16, nz: 24 }).unwrap();
        let p = estimate_poincare(&d, PoincareClass::VelocityOnS).unwrap();
        assert!((p.c_p - 2.0 / PI).abs() < 1e-10);
    }
}
