//! Grid evaluations of the advective and viscous forms.

use super::viscosity::ViscosityModel;
use crate::domain_grid::{sym_gradient, Domain, ScalarField, VectorField};

/// `(u . grad v, w)` for vector fields.
pub fn trilinear_advection(domain: &Domain, u: &VectorField, v: &VectorField, w: &VectorField) -> f64 {
    trilinear_scalar(domain, u, &v.u, &w.u) + trilinear_scalar(domain, u, &v.w, &w.w)
}

/// `(u . grad v, w)` for scalars.
pub fn trilinear_scalar(domain: &Domain, u: &VectorField, v: &ScalarField, w: &ScalarField) -> f64 {
    let vx = domain.dx(&v.data);
    let vz = domain.dz(&v.data);
    let a: Vec<f64> = (0..vx.len()).map(|i| u.u.data[i] * vx[i] + u.w.data[i] * vz[i]).collect();
    domain.inner(&a, &w.data)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViscousForm {
    pub value: f64,
    /// Grid points where `nu(m)` left the declared `[nu0, nu1]`.
    pub out_of_bounds: usize,
}

/// `2 (nu(m) D(u), D(w))`
pub fn viscous_form(domain: &Domain, m: &ScalarField, u: &VectorField, w: &VectorField, model: &ViscosityModel) -> ViscousForm {
    let du = sym_gradient(domain, u);
    let dw = sym_gradient(domain, w);
    let (n0, n1) = (model.nu0(), model.nu1());
    let mut out_of_bounds = 0;
    let integrand: Vec<f64> = (0..m.data.len())
        .map(|i| {
            let nu = model.nu(m.data[i]);
            if nu < n0 * (1.0 - 1e-12) || nu > n1 * (1.0 + 1e-12) {
                out_of_bounds += 1;
            }
            let c = du.xx.data[i] * dw.xx.data[i] + 2.0 * du.xz.data[i] * dw.xz.data[i] + du.zz.data[i] * dw.zz.data[i];
            2.0 * nu * c
        })
        .collect();
    ViscousForm { value: domain.integrate(&integrand), out_of_bounds }
}
