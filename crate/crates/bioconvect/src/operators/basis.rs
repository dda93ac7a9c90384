//! Eigenbases of the Stokes operator A and the concentration operator A1.
//!
//! Each horizontal wavenumber decouples. For k >= 1 a velocity mode is
//! generated by a stream function `psi(z) cos(kx)` (or `sin`), so it is
//! divergence free by construction; `psi'` is expanded in orthonormal
//! Legendre polynomials and the boundary conditions are imposed as linear
//! constraints on the coefficients. The horizontal mean flow (k = 0) is a
//! profile `U(z)` with `w = 0`.

use super::ritz::{constrained_ritz, Ritz};
use crate::domain_grid::legendre::{gauss_legendre, orthonormal_antiderivative, orthonormal_table};
use crate::domain_grid::{Domain, ScalarField, VectorField};
use crate::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Parity {
    Cos,
    Sin,
}

/// Grid values of a velocity mode and its first derivatives.
#[derive(Clone, Debug)]
pub struct VelocityGrid {
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub ux: Vec<f64>,
    pub uz: Vec<f64>,
    pub wx: Vec<f64>,
    pub wz: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct VelocityMode {
    pub k: usize,
    pub parity: Parity,
    pub branch: usize,
    pub eigenvalue: f64,
    /// Legendre coefficients of `psi'` (or of `U` when k = 0).
    pub coeffs: Vec<f64>,
    pub grid: VelocityGrid,
}

#[derive(Clone, Debug)]
pub struct ScalarGrid {
    pub phi: Vec<f64>,
    pub phix: Vec<f64>,
    pub phiz: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ScalarMode {
    pub k: usize,
    pub parity: Parity,
    pub branch: usize,
    pub eigenvalue: f64,
    pub coeffs: Vec<f64>,
    pub grid: ScalarGrid,
}

#[derive(Clone, Debug)]
pub struct StokesBasis {
    pub degree: usize,
    pub modes: Vec<VelocityMode>,
    pub ritz_residual: f64,
}

#[derive(Clone, Debug)]
pub struct ConcentrationBasis {
    pub theta: f64,
    pub u_swim: f64,
    pub degree: usize,
    pub modes: Vec<ScalarMode>,
    pub ritz_residual: f64,
}

/// Velocity and concentration bases with a common mode count.
#[derive(Clone, Debug)]
pub struct SpectralBasis {
    pub n: usize,
    pub velocity: StokesBasis,
    pub concentration: ConcentrationBasis,
}

/// Legendre data at a set of reference points.
struct Tables {
    p: Vec<Vec<f64>>,
    dp: Vec<Vec<f64>>,
    anti: Vec<Vec<f64>>,
}

impl Tables {
    fn new(s: &[f64], d: usize) -> Self {
        let mut p = Vec::with_capacity(s.len());
        let mut dp = Vec::with_capacity(s.len());
        let mut anti = Vec::with_capacity(s.len());
        for &x in s {
            let (a, b, _) = orthonormal_table(x, d);
            p.push(a);
            dp.push(b);
            anti.push(orthonormal_antiderivative(x, d));
        }
        Tables { p, dp, anti }
    }
}

/// Default polynomial degree for both bases on a given domain.
pub fn default_degree(domain: &Domain) -> usize {
    domain.degree_cap().min(36)
}

fn reference_nodes(domain: &Domain) -> Vec<f64> {
    domain.z().iter().map(|z| 2.0 * z / domain.h() - 1.0).collect()
}

/// Eigenpairs for one wavenumber; only the lower half of the spectrum of the
/// reduced pencil is retained as resolved.
struct Branches {
    values: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
    residual: f64,
}

fn keep_resolved(r: Ritz) -> Branches {
    let keep = (r.reduced_dim / 2).max(1);
    Branches {
        values: r.values.into_iter().take(keep).collect(),
        coeffs: r.vectors.into_iter().take(keep).map(|v| v.iter().copied().collect()).collect(),
        residual: r.residual,
    }
}

fn velocity_branches(domain: &Domain, k: usize, d: usize) -> Result<Branches> {
    let h2 = domain.h() / 2.0;
    let (gs, gw) = gauss_legendre(d + 4);
    let t = Tables::new(&gs, d);
    let dim = d + 1;
    let mut s = DMatrix::zeros(dim, dim);
    let mut m = DMatrix::zeros(dim, dim);
    let kap = domain.wavenumber(k);
    if k == 0 {
        let fac = domain.lx() * h2;
        for q in 0..gs.len() {
            for a in 0..dim {
                for b in 0..dim {
                    s[(a, b)] += fac * gw[q] * t.dp[q][a] * t.dp[q][b] / (h2 * h2);
                    m[(a, b)] += fac * gw[q] * t.p[q][a] * t.p[q][b];
                }
            }
        }
        let (pb, _, _) = orthonormal_table(-1.0, d);
        let (_, dpt, _) = orthonormal_table(1.0, d);
        let mut c = DMatrix::zeros(2, dim);
        for a in 0..dim {
            c[(0, a)] = pb[a];
            c[(1, a)] = dpt[a];
        }
        return Ok(keep_resolved(constrained_ritz(&s, &m, &c)?));
    }
    let fac = 0.5 * domain.lx() * h2;
    let (k2, k4) = (kap * kap, kap.powi(4));
    for q in 0..gs.len() {
        for a in 0..dim {
            let (p0a, p1a, p2a) = (h2 * t.anti[q][a], t.p[q][a], t.dp[q][a] / h2);
            for b in 0..dim {
                let (p0b, p1b, p2b) = (h2 * t.anti[q][b], t.p[q][b], t.dp[q][b] / h2);
                s[(a, b)] += fac * gw[q] * (p2a * p2b + 2.0 * k2 * p1a * p1b + k4 * p0a * p0b);
                m[(a, b)] += fac * gw[q] * (p1a * p1b + k2 * p0a * p0b);
            }
        }
    }
    // psi'(0) = 0, psi(H) = 0, psi''(H) = 0
    let (pb, _, _) = orthonormal_table(-1.0, d);
    let (_, dpt, _) = orthonormal_table(1.0, d);
    let at = orthonormal_antiderivative(1.0, d);
    let mut c = DMatrix::zeros(3, dim);
    for a in 0..dim {
        c[(0, a)] = pb[a];
        c[(1, a)] = at[a];
        c[(2, a)] = dpt[a];
    }
    Ok(keep_resolved(constrained_ritz(&s, &m, &c)?))
}

fn concentration_branches(domain: &Domain, k: usize, d: usize, theta: f64, u_swim: f64) -> Result<Branches> {
    let h2 = domain.h() / 2.0;
    let (gs, gw) = gauss_legendre(d + 4);
    let t = Tables::new(&gs, d);
    let dim = d + 1;
    let kap = domain.wavenumber(k);
    let xfac = if k == 0 { domain.lx() } else { 0.5 * domain.lx() };
    let mut s = DMatrix::zeros(dim, dim);
    let mut m = DMatrix::zeros(dim, dim);
    for q in 0..gs.len() {
        for a in 0..dim {
            for b in 0..dim {
                let grad = t.dp[q][a] * t.dp[q][b] / (h2 * h2) + kap * kap * t.p[q][a] * t.p[q][b];
                s[(a, b)] += xfac * h2 * gw[q] * theta * grad;
                m[(a, b)] += xfac * h2 * gw[q] * t.p[q][a] * t.p[q][b];
            }
        }
    }
    let (pt, dpt, _) = orthonormal_table(1.0, d);
    let (pb, dpb, _) = orthonormal_table(-1.0, d);
    for a in 0..dim {
        for b in 0..dim {
            s[(a, b)] -= xfac * u_swim * (pt[a] * pt[b] - pb[a] * pb[b]);
        }
    }
    // Robin condition theta dg/dz - U g = 0 on both walls.
    let rows = if k == 0 { 3 } else { 2 };
    let mut c = DMatrix::zeros(rows, dim);
    for a in 0..dim {
        c[(0, a)] = theta * dpt[a] / h2 - u_swim * pt[a];
        c[(1, a)] = theta * dpb[a] / h2 - u_swim * pb[a];
    }
    if k == 0 {
        c[(2, 0)] = 1.0;
    }
    Ok(keep_resolved(constrained_ritz(&s, &m, &c)?))
}

struct Candidate {
    value: f64,
    k: usize,
    branch: usize,
    parity: Parity,
}

fn select(per_k: &[Branches], n: usize, what: &str) -> Result<Vec<Candidate>> {
    let mut all = Vec::new();
    for (k, br) in per_k.iter().enumerate() {
        for (b, &v) in br.values.iter().enumerate() {
            all.push(Candidate { value: v, k, branch: b, parity: Parity::Cos });
            if k > 0 {
                all.push(Candidate { value: v, k, branch: b, parity: Parity::Sin });
            }
        }
    }
    all.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.k.cmp(&b.k))
            .then(a.branch.cmp(&b.branch))
            .then(a.parity.cmp(&b.parity))
    });
    if n == 0 {
        return Err(Error::Capacity("mode count must be positive".into()));
    }
    if all.len() < n {
        return Err(Error::Capacity(format!("{what}: requested {n} modes, resolution supports {}", all.len())));
    }
    all.truncate(n);
    Ok(all)
}

fn velocity_grid(domain: &Domain, k: usize, parity: Parity, coeffs: &[f64]) -> VelocityGrid {
    let (nx, nz) = (domain.nx(), domain.nz());
    let d = coeffs.len() - 1;
    let h2 = domain.h() / 2.0;
    let kap = domain.wavenumber(k);
    let s = reference_nodes(domain);
    let t = Tables::new(&s, d);
    let mut g = VelocityGrid {
        u: vec![0.0; nx * nz],
        w: vec![0.0; nx * nz],
        ux: vec![0.0; nx * nz],
        uz: vec![0.0; nx * nz],
        wx: vec![0.0; nx * nz],
        wz: vec![0.0; nx * nz],
    };
    for j in 0..nz {
        let mut p0 = 0.0;
        let mut p1 = 0.0;
        let mut p2 = 0.0;
        for (a, &ca) in coeffs.iter().enumerate() {
            p0 += ca * h2 * t.anti[j][a];
            p1 += ca * t.p[j][a];
            p2 += ca * t.dp[j][a] / h2;
        }
        for (i, &x) in domain.x().iter().enumerate() {
            let id = j * nx + i;
            if k == 0 {
                g.u[id] = p1;
                g.uz[id] = p2;
                continue;
            }
            let (c, sn) = ((kap * x).cos(), (kap * x).sin());
            match parity {
                Parity::Cos => {
                    g.u[id] = p1 * c;
                    g.w[id] = kap * p0 * sn;
                    g.ux[id] = -kap * p1 * sn;
                    g.uz[id] = p2 * c;
                    g.wx[id] = kap * kap * p0 * c;
                    g.wz[id] = kap * p1 * sn;
                }
                Parity::Sin => {
                    g.u[id] = p1 * sn;
                    g.w[id] = -kap * p0 * c;
                    g.ux[id] = kap * p1 * c;
                    g.uz[id] = p2 * sn;
                    g.wx[id] = kap * kap * p0 * sn;
                    g.wz[id] = -kap * p1 * c;
                }
            }
        }
    }
    g
}

fn scalar_grid(domain: &Domain, k: usize, parity: Parity, coeffs: &[f64]) -> ScalarGrid {
    let (nx, nz) = (domain.nx(), domain.nz());
    let d = coeffs.len() - 1;
    let h2 = domain.h() / 2.0;
    let kap = domain.wavenumber(k);
    let s = reference_nodes(domain);
    let t = Tables::new(&s, d);
    let mut g = ScalarGrid { phi: vec![0.0; nx * nz], phix: vec![0.0; nx * nz], phiz: vec![0.0; nx * nz] };
    for j in 0..nz {
        let mut v = 0.0;
        let mut dv = 0.0;
        for (a, &ca) in coeffs.iter().enumerate() {
            v += ca * t.p[j][a];
            dv += ca * t.dp[j][a] / h2;
        }
        for (i, &x) in domain.x().iter().enumerate() {
            let id = j * nx + i;
            let (c, sn) = if k == 0 { (1.0, 0.0) } else { ((kap * x).cos(), (kap * x).sin()) };
            match parity {
                Parity::Cos => {
                    g.phi[id] = v * c;
                    g.phix[id] = -kap * v * sn;
                    g.phiz[id] = dv * c;
                }
                Parity::Sin => {
                    g.phi[id] = v * sn;
                    g.phix[id] = kap * v * c;
                    g.phiz[id] = dv * sn;
                }
            }
        }
    }
    g
}

fn kmax(domain: &Domain) -> usize {
    domain.kmax_dealiased()
}

/// First `n` eigenpairs of the discrete Stokes operator.
pub fn build_stokes_basis(domain: &Domain, n: usize) -> Result<StokesBasis> {
    build_stokes_basis_with_degree(domain, n, default_degree(domain))
}

pub fn build_stokes_basis_with_degree(domain: &Domain, n: usize, degree: usize) -> Result<StokesBasis> {
    if degree < 4 || degree > domain.degree_cap() {
        return Err(Error::Capacity(format!("degree {degree} outside [4, {}]", domain.degree_cap())));
    }
    let per_k: Vec<Branches> = (0..=kmax(domain)).map(|k| velocity_branches(domain, k, degree)).collect::<Result<_>>()?;
    let chosen = select(&per_k, n, "stokes basis")?;
    let mut modes = Vec::with_capacity(n);
    for c in chosen {
        let coeffs = per_k[c.k].coeffs[c.branch].clone();
        let grid = velocity_grid(domain, c.k, c.parity, &coeffs);
        modes.push(VelocityMode { k: c.k, parity: c.parity, branch: c.branch, eigenvalue: c.value, coeffs, grid });
    }
    let ritz_residual = per_k.iter().fold(0.0_f64, |m, b| m.max(b.residual));
    Ok(StokesBasis { degree, modes, ritz_residual })
}

/// First `n` eigenpairs of the concentration operator on mean-zero scalars.
pub fn build_concentration_basis(domain: &Domain, theta: f64, u_swim: f64, n: usize) -> Result<ConcentrationBasis> {
    build_concentration_basis_with_degree(domain, theta, u_swim, n, default_degree(domain))
}

pub fn build_concentration_basis_with_degree(
    domain: &Domain,
    theta: f64,
    u_swim: f64,
    n: usize,
    degree: usize,
) -> Result<ConcentrationBasis> {
    if !(theta > 0.0) || !u_swim.is_finite() {
        return Err(Error::Config("theta must be positive and U finite".into()));
    }
    if degree < 4 || degree > domain.degree_cap() {
        return Err(Error::Capacity(format!("degree {degree} outside [4, {}]", domain.degree_cap())));
    }
    let cp = super::constants::estimate_poincare(domain, super::constants::PoincareClass::MeanZeroScalar)?;
    let verdict = super::constants::check_smallness_u(theta, u_swim, cp.c_p);
    if !verdict.pass {
        return Err(Error::Smallness(format!("2 U C_P < theta fails (margin {:.3e})", verdict.margin)));
    }
    let per_k: Vec<Branches> =
        (0..=kmax(domain)).map(|k| concentration_branches(domain, k, degree, theta, u_swim)).collect::<Result<_>>()?;
    let chosen = select(&per_k, n, "concentration basis")?;
    let mut modes = Vec::with_capacity(n);
    for c in chosen {
        if !(c.value > 0.0) {
            return Err(Error::Singular(format!("non-positive concentration eigenvalue {}", c.value)));
        }
        let coeffs = per_k[c.k].coeffs[c.branch].clone();
        let grid = scalar_grid(domain, c.k, c.parity, &coeffs);
        modes.push(ScalarMode { k: c.k, parity: c.parity, branch: c.branch, eigenvalue: c.value, coeffs, grid });
    }
    let ritz_residual = per_k.iter().fold(0.0_f64, |m, b| m.max(b.residual));
    Ok(ConcentrationBasis { theta, u_swim, degree, modes, ritz_residual })
}

pub fn build_spectral_basis(domain: &Domain, theta: f64, u_swim: f64, n: usize) -> Result<SpectralBasis> {
    Ok(SpectralBasis {
        n,
        velocity: build_stokes_basis(domain, n)?,
        concentration: build_concentration_basis(domain, theta, u_swim, n)?,
    })
}

/// All resolved eigenvalues of one wavenumber, used by constant estimates.
pub(crate) fn velocity_spectrum_k(domain: &Domain, k: usize, degree: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let b = velocity_branches(domain, k, degree)?;
    Ok((b.values, b.coeffs))
}

pub(crate) fn concentration_spectrum_k(domain: &Domain, k: usize, degree: usize, theta: f64, u_swim: f64) -> Result<Vec<f64>> {
    Ok(concentration_branches(domain, k, degree, theta, u_swim)?.values)
}

/// Value of `psi'` (or `U` for k = 0) at the top wall.
pub(crate) fn top_tangential_profile(coeffs: &[f64]) -> f64 {
    let (p, _, _) = orthonormal_table(1.0, coeffs.len() - 1);
    coeffs.iter().zip(&p).map(|(a, b)| a * b).sum()
}

impl StokesBasis {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.eigenvalue).collect()
    }

    pub fn mode_field(&self, domain: &Domain, j: usize) -> VectorField {
        let g = &self.modes[j].grid;
        VectorField {
            u: ScalarField { nx: domain.nx(), nz: domain.nz(), data: g.u.clone() },
            w: ScalarField { nx: domain.nx(), nz: domain.nz(), data: g.w.clone() },
            solenoidal: true,
        }
    }

    /// `sum_j c_j w^j` on the grid.
    pub fn reconstruct(&self, domain: &Domain, c: &[f64]) -> VectorField {
        let mut v = domain.vector();
        for (m, &cj) in self.modes.iter().zip(c) {
            if cj != 0.0 {
                for (a, b) in v.u.data.iter_mut().zip(&m.grid.u) {
                    *a += cj * b;
                }
                for (a, b) in v.w.data.iter_mut().zip(&m.grid.w) {
                    *a += cj * b;
                }
            }
        }
        v.solenoidal = true;
        v
    }

    /// Reconstruction together with the four first derivatives
    /// `(u, w, ux, uz, wx, wz)`.
    pub fn reconstruct_with_gradient(&self, domain: &Domain, c: &[f64]) -> VelocityGrid {
        let npts = domain.npts();
        let mut g = VelocityGrid {
            u: vec![0.0; npts],
            w: vec![0.0; npts],
            ux: vec![0.0; npts],
            uz: vec![0.0; npts],
            wx: vec![0.0; npts],
            wz: vec![0.0; npts],
        };
        for (m, &cj) in self.modes.iter().zip(c) {
            if cj == 0.0 {
                continue;
            }
            let pairs: [(&mut Vec<f64>, &Vec<f64>); 6] = [
                (&mut g.u, &m.grid.u),
                (&mut g.w, &m.grid.w),
                (&mut g.ux, &m.grid.ux),
                (&mut g.uz, &m.grid.uz),
                (&mut g.wx, &m.grid.wx),
                (&mut g.wz, &m.grid.wz),
            ];
            for (dst, src) in pairs {
                for (a, b) in dst.iter_mut().zip(src) {
                    *a += cj * b;
                }
            }
        }
        g
    }

    /// `(v, w^j)` for all j.
    pub fn project(&self, domain: &Domain, v: &VectorField) -> Vec<f64> {
        self.modes
            .iter()
            .map(|m| domain.inner(&v.u.data, &m.grid.u) + domain.inner(&v.w.data, &m.grid.w))
            .collect()
    }

    pub fn gram(&self, domain: &Domain) -> DMatrix<f64> {
        let n = self.len();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let a = &self.modes[i].grid;
                let b = &self.modes[j].grid;
                let v = domain.inner(&a.u, &b.u) + domain.inner(&a.w, &b.w);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }
}

impl ConcentrationBasis {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.eigenvalue).collect()
    }

    pub fn mode_field(&self, domain: &Domain, j: usize) -> ScalarField {
        ScalarField { nx: domain.nx(), nz: domain.nz(), data: self.modes[j].grid.phi.clone() }
    }

    pub fn reconstruct(&self, domain: &Domain, d: &[f64]) -> ScalarField {
        let mut f = domain.scalar();
        for (m, &dj) in self.modes.iter().zip(d) {
            if dj != 0.0 {
                for (a, b) in f.data.iter_mut().zip(&m.grid.phi) {
                    *a += dj * b;
                }
            }
        }
        f
    }

    /// `(value, d/dx, d/dz)` of `sum_j d_j phi^j`.
    pub fn reconstruct_with_gradient(&self, domain: &Domain, d: &[f64]) -> ScalarGrid {
        let npts = domain.npts();
        let mut g = ScalarGrid { phi: vec![0.0; npts], phix: vec![0.0; npts], phiz: vec![0.0; npts] };
        for (m, &dj) in self.modes.iter().zip(d) {
            if dj == 0.0 {
                continue;
            }
            for (a, b) in g.phi.iter_mut().zip(&m.grid.phi) {
                *a += dj * b;
            }
            for (a, b) in g.phix.iter_mut().zip(&m.grid.phix) {
                *a += dj * b;
            }
            for (a, b) in g.phiz.iter_mut().zip(&m.grid.phiz) {
                *a += dj * b;
            }
        }
        g
    }

    pub fn project(&self, domain: &Domain, f: &ScalarField) -> Vec<f64> {
        self.modes.iter().map(|m| domain.inner(&f.data, &m.grid.phi)).collect()
    }

    pub fn gram(&self, domain: &Domain) -> DMatrix<f64> {
        let n = self.len();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = domain.inner(&self.modes[i].grid.phi, &self.modes[j].grid.phi);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// Largest Robin residual `|theta dphi/dz - U phi|` over both walls and
    /// all modes.
    pub fn robin_residual(&self, domain: &Domain) -> f64 {
        let nx = domain.nx();
        let top = (domain.nz() - 1) * nx;
        let mut r = 0.0_f64;
        for m in &self.modes {
            for base in [0, top] {
                for i in 0..nx {
                    let id = base + i;
                    r = r.max((self.theta * m.grid.phiz[id] - self.u_swim * m.grid.phi[id]).abs());
                }
            }
        }
        r
    }
}

/// Largest velocity boundary-condition residual over all modes:
/// `|u|, |w|` on S, `|w|` and `|du/dz|` on Gamma.
pub fn stokes_bc_residual(domain: &Domain, basis: &StokesBasis) -> f64 {
    let nx = domain.nx();
    let top = (domain.nz() - 1) * nx;
    let mut r = 0.0_f64;
    for m in &basis.modes {
        for i in 0..nx {
            r = r.max(m.grid.u[i].abs()).max(m.grid.w[i].abs());
            r = r.max(m.grid.w[top + i].abs()).max(m.grid.uz[top + i].abs());
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain_grid::DomainSpec;
    use std::f64::consts::PI;

    fn dom() -> Domain {
        Domain::new(DomainSpec { lx: 2.0 * PI, h: 1.0, nx: 32, nz: 32 }).unwrap()
    }

    #[test]
    fn mean_flow_eigenvalues() {
        let d = dom();
        let (vals, _) = velocity_spectrum_k(&d, 0, default_degree(&d)).unwrap();
        for (j, v) in vals.iter().take(4).enumerate() {
            let exact = (PI * (2 * j + 1) as f64 / 2.0).powi(2);
            assert!((v - exact).abs() < 1e-9 * exact, "{v} {exact}");
        }
    }

    #[test]
    fn stokes_modes_orthonormal_and_divergence_free() {
        let d = dom();
        let b = build_stokes_basis(&d, 12).unwrap();
        let g = b.gram(&d);
        assert!((g - DMatrix::<f64>::identity(12, 12)).amax() < 1e-10);
        for j in 0..12 {
            assert!(d.max_abs_divergence(&b.mode_field(&d, j)) < 1e-8);
        }
        assert!(stokes_bc_residual(&d, &b) < 1e-8);
    }
}
