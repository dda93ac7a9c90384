//! Leray projection and the Helmholtz splitting of `-Laplacian u`.
//!
//! The projection is the quadrature-orthogonal projection onto grid fields
//! with zero collocation divergence at every node and zero normal velocity on
//! both walls. Per Fourier bin k != 0 such a field is parametrised by the
//! interior values of `w`, with `u = (i / kappa) Dz w`.

use crate::domain_grid::{Domain, ScalarField, VectorField};
use crate::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};
use rustfft::num_complex::Complex;
use std::collections::HashMap;

fn weight_matrix(domain: &Domain) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(domain.wz()))
}

fn is_mean_bin(domain: &Domain, k: usize) -> bool {
    k == 0 || k == domain.nx() / 2
}

fn column(spec: &[Complex<f64>], nx: usize, k: usize, nz: usize) -> (DVector<f64>, DVector<f64>) {
    let re = DVector::from_iterator(nz, (0..nz).map(|j| spec[j * nx + k].re));
    let im = DVector::from_iterator(nz, (0..nz).map(|j| spec[j * nx + k].im));
    (re, im)
}

fn store(spec: &mut [Complex<f64>], nx: usize, k: usize, re: &DVector<f64>, im: &DVector<f64>) {
    for j in 0..re.len() {
        spec[j * nx + k] = Complex::new(re[j], im[j]);
    }
}

/// `P v`, flagged solenoidal.
pub fn leray_project(domain: &Domain, v: &VectorField) -> Result<VectorField> {
    domain.check(&v.u)?;
    domain.check(&v.w)?;
    let (nx, nz) = (domain.nx(), domain.nz());
    let mut su = domain.rows_forward(&v.u.data);
    let mut sw = domain.rows_forward(&v.w.data);
    let d = domain.dz_matrix();
    let wm = weight_matrix(domain);
    let dwd = d.transpose() * &wm * d;
    let dtw = d.transpose() * &wm;
    let ni = nz - 2;
    let mut cache: HashMap<usize, Cholesky<f64, Dyn>> = HashMap::new();
    for k in 0..nx {
        if is_mean_bin(domain, k) {
            for j in 0..nz {
                sw[j * nx + k] = Complex::new(0.0, 0.0);
            }
            continue;
        }
        let kap = domain.bin_wavenumber(k);
        let key = k.min(nx - k);
        if !cache.contains_key(&key) {
            let full = &dwd / (kap * kap) + &wm;
            let m = full.view((1, 1), (ni, ni)).into_owned();
            let ch = Cholesky::new(m).ok_or_else(|| Error::Singular("projection system".into()))?;
            cache.insert(key, ch);
        }
        let ch = &cache[&key];
        let (ur, ui) = column(&su, nx, k, nz);
        let (wr, wi) = column(&sw, nx, k, nz);
        // r = (-i / kappa) D^T W u + W w
        let a_r = &dtw * &ur;
        let a_i = &dtw * &ui;
        let rr_full = &a_i / kap + &wm * &wr;
        let ri_full = -&a_r / kap + &wm * &wi;
        let xr = ch.solve(&rr_full.rows(1, ni).into_owned());
        let xi = ch.solve(&ri_full.rows(1, ni).into_owned());
        let mut er = DVector::zeros(nz);
        let mut ei = DVector::zeros(nz);
        er.rows_mut(1, ni).copy_from(&xr);
        ei.rows_mut(1, ni).copy_from(&xi);
        // u = (i / kappa) D w
        let dr = d * &er;
        let di = d * &ei;
        let nur = -&di / kap;
        let nui = &dr / kap;
        store(&mut sw, nx, k, &er, &ei);
        store(&mut su, nx, k, &nur, &nui);
    }
    let u = domain.rows_inverse(su);
    let w = domain.rows_inverse(sw);
    Ok(VectorField {
        u: ScalarField { nx, nz, data: u },
        w: ScalarField { nx, nz, data: w },
        solenoidal: true,
    })
}

/// Least-squares potential: `q` minimising `|grad q - g|` with zero mean.
pub fn gradient_potential(domain: &Domain, g: &VectorField) -> Result<ScalarField> {
    let (nx, nz) = (domain.nx(), domain.nz());
    let su = domain.rows_forward(&g.u.data);
    let sw = domain.rows_forward(&g.w.data);
    let d = domain.dz_matrix();
    let wm = weight_matrix(domain);
    let dwd = d.transpose() * &wm * d;
    let dtw = d.transpose() * &wm;
    let mut sq = vec![Complex::new(0.0, 0.0); nx * nz];
    let mut cache: HashMap<usize, LU<f64, Dyn, Dyn>> = HashMap::new();
    for k in 0..nx {
        let mean = is_mean_bin(domain, k);
        let kap = if mean { 0.0 } else { domain.bin_wavenumber(k) };
        let key = k.min(nx - k);
        let (ur, ui) = column(&su, nx, k, nz);
        let (wr, wi) = column(&sw, nx, k, nz);
        // (kappa^2 W + D^T W D) q = -i kappa W gu + D^T W gw
        let rr = &wm * &ui * kap + &dtw * &wr;
        let ri = -(&wm * &ur) * kap + &dtw * &wi;
        if !cache.contains_key(&key) {
            let mut a = DMatrix::zeros(nz + 1, nz + 1);
            a.view_mut((0, 0), (nz, nz)).copy_from(&(&wm * (kap * kap) + &dwd));
            if mean {
                for j in 0..nz {
                    a[(nz, j)] = domain.wz()[j];
                    a[(j, nz)] = domain.wz()[j];
                }
            } else {
                a[(nz, nz)] = 1.0;
            }
            cache.insert(key, a.lu());
        }
        let lu = &cache[&key];
        let mut br = DVector::zeros(nz + 1);
        let mut bi = DVector::zeros(nz + 1);
        br.rows_mut(0, nz).copy_from(&rr);
        bi.rows_mut(0, nz).copy_from(&ri);
        let xr = lu.solve(&br).ok_or_else(|| Error::Singular("pressure system".into()))?;
        let xi = lu.solve(&bi).ok_or_else(|| Error::Singular("pressure system".into()))?;
        store(&mut sq, nx, k, &xr.rows(0, nz).into_owned(), &xi.rows(0, nz).into_owned());
    }
    Ok(ScalarField { nx, nz, data: domain.rows_inverse(sq) })
}

/// `-Laplacian u = A u + grad qbar`.
#[derive(Clone, Debug)]
pub struct HelmholtzSplit {
    pub au: VectorField,
    pub grad_q: VectorField,
    pub q: ScalarField,
    /// `|-Lap u - Au - grad q| / |Lap u|`
    pub residual: f64,
}

pub fn helmholtz_split_laplacian(domain: &Domain, u: &VectorField) -> Result<HelmholtzSplit> {
    let lap = domain.vector_laplacian(u);
    let r = lap.scaled(-1.0);
    let au = leray_project(domain, &r)?;
    let g = r.sub(&au);
    let q = gradient_potential(domain, &g)?;
    let grad_q = domain.gradient(&q);
    let miss = g.sub(&grad_q);
    let scale = domain.inner_vec(&r, &r).sqrt();
    let residual = if scale > 0.0 { domain.inner_vec(&miss, &miss).sqrt() / scale } else { 0.0 };
    Ok(HelmholtzSplit { au, grad_q, q, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain_grid::DomainSpec;
    use std::f64::consts::PI;

    #[test]
    fn gradient_is_annihilated() {
        let d = Domain::new(DomainSpec { lx: 2.0 * PI, h: 1.0, nx: 16, nz: 16 }).unwrap();
        let v = d.sample_vector(|x, z| (-x.sin() * z, x.cos()));
        let p = leray_project(&d, &v).unwrap();
        let n = d.inner_vec(&p, &p).sqrt();
        assert!(n < 1e-10, "{n}");
    }
}
