//! Periodic channel geometry, Fourier x Gauss-Lobatto grid, quadrature and
//! grid differential operators.
//!
//! Fields are stored row-major with x fastest: `index = j * nx + i`, where
//! `j` runs over the vertical Lobatto nodes (bottom `z = 0` is the rigid wall
//! S, top `z = H` is the free surface Gamma).

pub mod legendre;

use crate::{Error, Result};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Geometry and resolution of the channel `[0, lx) x [0, h]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainSpec {
    pub lx: f64,
    pub h: f64,
    pub nx: usize,
    pub nz: usize,
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec { lx: 2.0 * PI, h: 1.0, nx: 64, nz: 64 }
    }
}

#[derive(Clone)]
pub struct Domain {
    pub spec: DomainSpec,
    x: Vec<f64>,
    z: Vec<f64>,
    wz: Vec<f64>,
    dz: DMatrix<f64>,
    dzz: DMatrix<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Domain").field("spec", &self.spec).finish()
    }
}

/// Scalar grid values.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub nx: usize,
    pub nz: usize,
    pub data: Vec<f64>,
}

/// Two-component velocity-like field. `solenoidal` is only set by projection
/// or basis reconstruction.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub u: ScalarField,
    pub w: ScalarField,
    pub solenoidal: bool,
}

/// Symmetric 2x2 tensor field.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    pub xx: ScalarField,
    pub xz: ScalarField,
    pub zz: ScalarField,
}

impl ScalarField {
    pub fn zeros(nx: usize, nz: usize) -> Self {
        ScalarField { nx, nz, data: vec![0.0; nx * nz] }
    }

    pub fn from_data(nx: usize, nz: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != nx * nz {
            return Err(Error::Shape(format!("expected {} values, got {}", nx * nz, data.len())));
        }
        Ok(ScalarField { nx, nz, data })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, a: f64) -> Self {
        ScalarField { nx: self.nx, nz: self.nz, data: self.data.iter().map(|v| a * v).collect() }
    }

    pub fn axpy(&mut self, a: f64, other: &ScalarField) {
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
    }
}

impl VectorField {
    pub fn zeros(nx: usize, nz: usize) -> Self {
        VectorField { u: ScalarField::zeros(nx, nz), w: ScalarField::zeros(nx, nz), solenoidal: false }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.w.is_finite()
    }

    pub fn scaled(&self, a: f64) -> Self {
        VectorField { u: self.u.scaled(a), w: self.w.scaled(a), solenoidal: self.solenoidal }
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        let mut u = self.u.clone();
        u.axpy(-1.0, &other.u);
        let mut w = self.w.clone();
        w.axpy(-1.0, &other.w);
        VectorField { u, w, solenoidal: false }
    }
}

/// Anything with a pointwise Euclidean magnitude.
pub trait Pointwise {
    fn len(&self) -> usize;
    fn magnitude_at(&self, idx: usize) -> f64;
}

impl Pointwise for ScalarField {
    fn len(&self) -> usize {
        self.data.len()
    }
    fn magnitude_at(&self, idx: usize) -> f64 {
        self.data[idx].abs()
    }
}

impl Pointwise for VectorField {
    fn len(&self) -> usize {
        self.u.data.len()
    }
    fn magnitude_at(&self, idx: usize) -> f64 {
        self.u.data[idx].hypot(self.w.data[idx])
    }
}

impl Pointwise for TensorField {
    fn len(&self) -> usize {
        self.xx.data.len()
    }
    fn magnitude_at(&self, idx: usize) -> f64 {
        let a = self.xx.data[idx];
        let b = self.xz.data[idx];
        let c = self.zz.data[idx];
        (a * a + 2.0 * b * b + c * c).sqrt()
    }
}

impl Domain {
    pub fn new(spec: DomainSpec) -> Result<Self> {
        if !(spec.lx > 0.0) || !(spec.h > 0.0) || !spec.lx.is_finite() || !spec.h.is_finite() {
            return Err(Error::InvalidDomain("lengths must be positive and finite".into()));
        }
        if spec.nx < 4 || spec.nz < 4 {
            return Err(Error::InvalidDomain("need nx, nz >= 4".into()));
        }
        if spec.nx % 2 != 0 {
            return Err(Error::InvalidDomain("nx must be even".into()));
        }
        let x = (0..spec.nx).map(|i| spec.lx * i as f64 / spec.nx as f64).collect();
        let (xi, wi) = legendre::gauss_lobatto(spec.nz);
        let half = spec.h / 2.0;
        let z = xi.iter().map(|r| half * (r + 1.0)).collect();
        let wz = wi.iter().map(|w| half * w).collect();
        let dz = legendre::lobatto_derivative(&xi) / half;
        let dzz = &dz * &dz;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(spec.nx);
        let inv = planner.plan_fft_inverse(spec.nx);
        Ok(Domain { spec, x, z, wz, dz, dzz, fwd, inv })
    }

    pub fn nx(&self) -> usize {
        self.spec.nx
    }
    pub fn nz(&self) -> usize {
        self.spec.nz
    }
    pub fn npts(&self) -> usize {
        self.spec.nx * self.spec.nz
    }
    pub fn lx(&self) -> f64 {
        self.spec.lx
    }
    pub fn h(&self) -> f64 {
        self.spec.h
    }
    /// |Omega|
    pub fn area(&self) -> f64 {
        self.spec.lx * self.spec.h
    }
    pub fn x(&self) -> &[f64] {
        &self.x
    }
    pub fn z(&self) -> &[f64] {
        &self.z
    }
    /// Vertical quadrature weights on [0, h].
    pub fn wz(&self) -> &[f64] {
        &self.wz
    }
    pub fn wx(&self) -> f64 {
        self.spec.lx / self.spec.nx as f64
    }
    pub fn dz_matrix(&self) -> &DMatrix<f64> {
        &self.dz
    }

    /// Horizontal wavenumber of Fourier index k.
    pub fn wavenumber(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.spec.lx
    }

    /// Largest Fourier index kept by 2/3 truncation: 3k < nx.
    pub fn kmax_dealiased(&self) -> usize {
        (self.spec.nx - 1) / 3
    }

    /// Largest polynomial degree `d` for which cubic products of basis
    /// profiles (degree up to d + 1 after one integration) integrate exactly.
    pub fn degree_cap(&self) -> usize {
        ((2 * self.spec.nz).saturating_sub(5) / 3).min(40)
    }

    pub fn scalar(&self) -> ScalarField {
        ScalarField::zeros(self.spec.nx, self.spec.nz)
    }

    pub fn vector(&self) -> VectorField {
        VectorField::zeros(self.spec.nx, self.spec.nz)
    }

    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> ScalarField {
        let mut out = self.scalar();
        for j in 0..self.spec.nz {
            for i in 0..self.spec.nx {
                out.data[j * self.spec.nx + i] = f(self.x[i], self.z[j]);
            }
        }
        out
    }

    pub fn sample_vector<F: Fn(f64, f64) -> (f64, f64)>(&self, f: F) -> VectorField {
        let mut v = self.vector();
        for j in 0..self.spec.nz {
            for i in 0..self.spec.nx {
                let (a, b) = f(self.x[i], self.z[j]);
                v.u.data[j * self.spec.nx + i] = a;
                v.w.data[j * self.spec.nx + i] = b;
            }
        }
        v
    }

    pub fn check(&self, f: &ScalarField) -> Result<()> {
        if f.nx != self.spec.nx || f.nz != self.spec.nz || f.data.len() != self.npts() {
            return Err(Error::Shape(format!(
                "field {}x{} on domain {}x{}",
                f.nx, f.nz, self.spec.nx, self.spec.nz
            )));
        }
        Ok(())
    }

    /// Area integral by Fourier trapezoid x Lobatto quadrature.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let nx = self.spec.nx;
        let mut s = 0.0;
        for (j, wz) in self.wz.iter().enumerate() {
            let row: f64 = f[j * nx..(j + 1) * nx].iter().sum();
            s += wz * row;
        }
        s * self.wx()
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let nx = self.spec.nx;
        let mut s = 0.0;
        for (j, wz) in self.wz.iter().enumerate() {
            let row: f64 = a[j * nx..(j + 1) * nx].iter().zip(&b[j * nx..(j + 1) * nx]).map(|(x, y)| x * y).sum();
            s += wz * row;
        }
        s * self.wx()
    }

    pub fn inner_vec(&self, a: &VectorField, b: &VectorField) -> f64 {
        self.inner(&a.u.data, &b.u.data) + self.inner(&a.w.data, &b.w.data)
    }

    /// Line integral over Gamma (z = h).
    pub fn integrate_top(&self, f: &[f64]) -> f64 {
        let j = self.spec.nz - 1;
        let nx = self.spec.nx;
        f[j * nx..(j + 1) * nx].iter().sum::<f64>() * self.wx()
    }

    /// Line integral over S (z = 0).
    pub fn integrate_bottom(&self, f: &[f64]) -> f64 {
        f[..self.spec.nx].iter().sum::<f64>() * self.wx()
    }

    /// Integral over the whole boundary (the periodic sides do not count).
    pub fn integrate_boundary(&self, f: &[f64]) -> f64 {
        self.integrate_top(f) + self.integrate_bottom(f)
    }

    /// Forward DFT of each row: `X_k(z_j) = sum_i f(x_i, z_j) e^{-i k x_i}`.
    pub fn rows_forward(&self, f: &[f64]) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = f.iter().map(|&v| Complex::new(v, 0.0)).collect();
        for row in buf.chunks_mut(self.spec.nx) {
            self.fwd.process(row);
        }
        buf
    }

    /// Inverse of `rows_forward` returning the real part.
    pub fn rows_inverse(&self, mut spec: Vec<Complex<f64>>) -> Vec<f64> {
        let scale = 1.0 / self.spec.nx as f64;
        for row in spec.chunks_mut(self.spec.nx) {
            self.inv.process(row);
        }
        spec.iter().map(|c| c.re * scale).collect()
    }

    /// Signed wavenumber of FFT bin `k`; the Nyquist bin maps to zero.
    pub fn bin_wavenumber(&self, k: usize) -> f64 {
        let nx = self.spec.nx;
        if k < nx / 2 {
            self.wavenumber(k)
        } else if k == nx / 2 {
            0.0
        } else {
            -self.wavenumber(nx - k)
        }
    }

    fn x_derivative_order(&self, f: &[f64], order: u32) -> Vec<f64> {
        let nx = self.spec.nx;
        let mut s = self.rows_forward(f);
        for row in s.chunks_mut(nx) {
            for (k, c) in row.iter_mut().enumerate() {
                let ik = Complex::new(0.0, self.bin_wavenumber(k));
                let mut fac = Complex::new(1.0, 0.0);
                for _ in 0..order {
                    fac *= ik;
                }
                *c *= fac;
            }
        }
        self.rows_inverse(s)
    }

    pub fn dx(&self, f: &[f64]) -> Vec<f64> {
        self.x_derivative_order(f, 1)
    }

    pub fn dxx(&self, f: &[f64]) -> Vec<f64> {
        self.x_derivative_order(f, 2)
    }

    fn apply_columns(&self, m: &DMatrix<f64>, f: &[f64]) -> Vec<f64> {
        let nx = self.spec.nx;
        let nz = self.spec.nz;
        let mut out = vec![0.0; nx * nz];
        for j in 0..nz {
            let orow = &mut out[j * nx..(j + 1) * nx];
            for l in 0..nz {
                let c = m[(j, l)];
                if c != 0.0 {
                    let frow = &f[l * nx..(l + 1) * nx];
                    for i in 0..nx {
                        orow[i] += c * frow[i];
                    }
                }
            }
        }
        out
    }

    pub fn dz(&self, f: &[f64]) -> Vec<f64> {
        self.apply_columns(&self.dz, f)
    }

    pub fn dzz(&self, f: &[f64]) -> Vec<f64> {
        self.apply_columns(&self.dzz, f)
    }

    pub fn gradient(&self, f: &ScalarField) -> VectorField {
        VectorField {
            u: ScalarField { nx: f.nx, nz: f.nz, data: self.dx(&f.data) },
            w: ScalarField { nx: f.nx, nz: f.nz, data: self.dz(&f.data) },
            solenoidal: false,
        }
    }

    pub fn divergence(&self, v: &VectorField) -> ScalarField {
        let a = self.dx(&v.u.data);
        let b = self.dz(&v.w.data);
        ScalarField { nx: v.u.nx, nz: v.u.nz, data: a.iter().zip(&b).map(|(p, q)| p + q).collect() }
    }

    pub fn laplacian(&self, f: &ScalarField) -> ScalarField {
        let a = self.dxx(&f.data);
        let b = self.dzz(&f.data);
        ScalarField { nx: f.nx, nz: f.nz, data: a.iter().zip(&b).map(|(p, q)| p + q).collect() }
    }

    pub fn vector_laplacian(&self, v: &VectorField) -> VectorField {
        VectorField { u: self.laplacian(&v.u), w: self.laplacian(&v.w), solenoidal: false }
    }

    pub fn max_abs_divergence(&self, v: &VectorField) -> f64 {
        self.divergence(v).data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn l2(&self, f: &[f64]) -> f64 {
        self.inner(f, f).max(0.0).sqrt()
    }

    /// `(|v|^2 + |grad v|^2)^{1/2}`
    pub fn h1_norm(&self, f: &ScalarField) -> f64 {
        let g = self.gradient(f);
        (self.inner(&f.data, &f.data) + self.inner_vec(&g, &g)).sqrt()
    }

    /// H^2 norm including all second derivatives.
    pub fn h2_norm(&self, f: &ScalarField) -> f64 {
        let g = self.gradient(f);
        let fxx = self.dxx(&f.data);
        let fzz = self.dzz(&f.data);
        let fxz = self.dz(&g.u.data);
        let second = self.inner(&fxx, &fxx) + 2.0 * self.inner(&fxz, &fxz) + self.inner(&fzz, &fzz);
        (self.inner(&f.data, &f.data) + self.inner_vec(&g, &g) + second).sqrt()
    }
}

/// Supported Lebesgue exponents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lp {
    P2,
    P3,
    P4,
    P6,
    Inf,
}

impl Lp {
    pub fn from_exponent(p: f64) -> Result<Lp> {
        match p {
            x if x == 2.0 => Ok(Lp::P2),
            x if x == 3.0 => Ok(Lp::P3),
            x if x == 4.0 => Ok(Lp::P4),
            x if x == 6.0 => Ok(Lp::P6),
            x if x.is_infinite() && x > 0.0 => Ok(Lp::Inf),
            _ => Err(Error::Unsupported(format!("L^{p} norm"))),
        }
    }

    fn exponent(self) -> Option<i32> {
        match self {
            Lp::P2 => Some(2),
            Lp::P3 => Some(3),
            Lp::P4 => Some(4),
            Lp::P6 => Some(6),
            Lp::Inf => None,
        }
    }
}

/// Quadrature `L^p` norm of the pointwise magnitude; `Inf` is the grid max.
pub fn lp_norm<F: Pointwise>(domain: &Domain, f: &F, p: Lp) -> f64 {
    let n = f.len();
    match p.exponent() {
        None => (0..n).fold(0.0_f64, |m, i| m.max(f.magnitude_at(i))),
        Some(e) => {
            let vals: Vec<f64> = (0..n).map(|i| f.magnitude_at(i).powi(e)).collect();
            domain.integrate(&vals).max(0.0).powf(1.0 / e as f64)
        }
    }
}

/// `D(u) = (grad u + grad u^T) / 2`.
pub fn sym_gradient(domain: &Domain, u: &VectorField) -> TensorField {
    let (nx, nz) = (u.u.nx, u.u.nz);
    let ux = domain.dx(&u.u.data);
    let uz = domain.dz(&u.u.data);
    let wx = domain.dx(&u.w.data);
    let wz = domain.dz(&u.w.data);
    TensorField {
        xx: ScalarField { nx, nz, data: ux },
        xz: ScalarField { nx, nz, data: uz.iter().zip(&wx).map(|(a, b)| 0.5 * (a + b)).collect() },
        zz: ScalarField { nx, nz, data: wz },
    }
}

/// Random field `sum_{k<=kmax, m<=deg} (a cos + b sin)(k x) Ptilde_m(z)` with
/// coefficients decaying like `1/(1+k+m)^2`. With `mean_zero` the (0,0)
/// coefficient is dropped, which removes the mean exactly.
pub fn band_limited_scalar<R: Rng + ?Sized>(
    domain: &Domain,
    rng: &mut R,
    kmax: usize,
    deg: usize,
    mean_zero: bool,
) -> ScalarField {
    let nz = domain.nz();
    let h = domain.h();
    let tables: Vec<Vec<f64>> =
        domain.z().iter().map(|&z| legendre::orthonormal_table(2.0 * z / h - 1.0, deg).0).collect();
    let mut out = domain.scalar();
    for k in 0..=kmax {
        let kap = domain.wavenumber(k);
        for m in 0..=deg {
            if mean_zero && k == 0 && m == 0 {
                continue;
            }
            let decay = 1.0 / ((1 + k + m) as f64).powi(2);
            let a: f64 = rng.sample::<f64, _>(StandardNormal) * decay;
            let b: f64 = if k == 0 { 0.0 } else { rng.sample::<f64, _>(StandardNormal) * decay };
            for j in 0..nz {
                let pz = tables[j][m];
                for (i, &x) in domain.x().iter().enumerate() {
                    out.data[j * domain.nx() + i] += pz * (a * (kap * x).cos() + b * (kap * x).sin());
                }
            }
        }
    }
    out
}

/// Random solenoidal field from a stream function `z^2 (h - z) R(x, z)`;
/// it vanishes on S and has zero normal component on Gamma.
pub fn band_limited_solenoidal<R: Rng + ?Sized>(domain: &Domain, rng: &mut R, kmax: usize, deg: usize) -> VectorField {
    let r = band_limited_scalar(domain, rng, kmax, deg, false);
    let h = domain.h();
    let nx = domain.nx();
    let mut psi = r.clone();
    for (j, &z) in domain.z().iter().enumerate() {
        let s = z * z * (h - z);
        for v in &mut psi.data[j * nx..(j + 1) * nx] {
            *v *= s;
        }
    }
    let u = domain.dz(&psi.data);
    let w: Vec<f64> = domain.dx(&psi.data).iter().map(|v| -v).collect();
    VectorField {
        u: ScalarField { nx, nz: domain.nz(), data: u },
        w: ScalarField { nx, nz: domain.nz(), data: w },
        solenoidal: true,
    }
}

/// Outcome of the empirical interpolation-inequality survey.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub samples: usize,
    /// max |v|_6 / ||v||_1
    pub c_l6: f64,
    /// max |v|_inf / (||v||_1^{1/2} ||v||_2^{1/2})
    pub c_linf: f64,
    /// max |v|_3 / (|v|^{1/2} ||v||_1^{1/2})
    pub ratio_l3: f64,
    /// max |v|_4 / (|v|^{1/4} ||v||_1^{3/4})
    pub ratio_l4: f64,
    pub violations_l3: usize,
    pub violations_l4: usize,
}

/// Quotients of one field for the four interpolation inequalities.
pub fn interpolation_ratios(domain: &Domain, v: &ScalarField) -> [f64; 4] {
    let l2 = domain.l2(&v.data);
    let h1 = domain.h1_norm(v);
    let h2 = domain.h2_norm(v);
    let l3 = lp_norm(domain, v, Lp::P3);
    let l4 = lp_norm(domain, v, Lp::P4);
    let l6 = lp_norm(domain, v, Lp::P6);
    let linf = lp_norm(domain, v, Lp::Inf);
    let q = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    [
        q(l6, h1),
        q(linf, (h1 * h2).sqrt()),
        q(l3, (l2 * h1).sqrt()),
        q(l4, l2.powf(0.25) * h1.powf(0.75)),
    ]
}

pub fn check_interpolation_inequalities(domain: &Domain, samples: usize, seed: u64) -> InterpolationReport {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut rep = InterpolationReport {
        samples,
        c_l6: 0.0,
        c_linf: 0.0,
        ratio_l3: 0.0,
        ratio_l4: 0.0,
        violations_l3: 0,
        violations_l4: 0,
    };
    let kmax = domain.kmax_dealiased().min(6);
    let deg = domain.degree_cap().min(10);
    for _ in 0..samples {
        let v = band_limited_scalar(domain, &mut rng, kmax, deg, false);
        let r = interpolation_ratios(domain, &v);
        rep.c_l6 = rep.c_l6.max(r[0]);
        rep.c_linf = rep.c_linf.max(r[1]);
        rep.ratio_l3 = rep.ratio_l3.max(r[2]);
        rep.ratio_l4 = rep.ratio_l4.max(r[3]);
        if r[2] > 1.0 {
            rep.violations_l3 += 1;
        }
        if r[3] > 1.0 {
            rep.violations_l4 += 1;
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom() -> Domain {
        Domain::new(DomainSpec { lx: 2.0 * PI, h: 1.0, nx: 32, nz: 24 }).unwrap()
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(Domain::new(DomainSpec { lx: -1.0, h: 1.0, nx: 8, nz: 8 }).is_err());
        assert!(Domain::new(DomainSpec { lx: 1.0, h: 1.0, nx: 2, nz: 8 }).is_err());
        assert!(Domain::new(DomainSpec { lx: 1.0, h: 1.0, nx: 9, nz: 8 }).is_err());
    }

    #[test]
    fn x_derivative_spectral() {
        let d = dom();
        let f = d.sample(|x, z| (3.0 * x).sin() * z * z);
        let fx = d.dx(&f.data);
        let exact = d.sample(|x, z| 3.0 * (3.0 * x).cos() * z * z);
        for (a, b) in fx.iter().zip(&exact.data) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn divergence_of_gradient_is_laplacian() {
        let d = dom();
        let f = d.sample(|x, z| (2.0 * x).cos() * z.powi(4));
        let lap = d.laplacian(&f);
        let div = d.divergence(&d.gradient(&f));
        for (a, b) in lap.data.iter().zip(&div.data) {
            assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }
    }
}
