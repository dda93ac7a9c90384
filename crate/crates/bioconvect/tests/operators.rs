use bioconvect::domain_grid::sym_gradient;
use bioconvect::operators::{
    build_concentration_basis, build_stokes_basis, check_smallness_u, estimate_korn, estimate_poincare,
    helmholtz_split_laplacian, leray_project, PoincareClass,
};
use bioconvect::{Domain, DomainSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn dom(h: f64) -> Domain {
    Domain::new(DomainSpec { lx: 2.0 * PI, h, nx: 32, nz: 32 }).unwrap()
}

#[test]
fn leray_annihilates_gradients() {
    let d = dom(1.0);
    // grad(cos x * z)
    let v = d.sample_vector(|x, z| (-x.sin() * z, x.cos()));
    let p = leray_project(&d, &v).unwrap();
    assert!(d.inner_vec(&p, &p).sqrt() < 1e-8);
}

#[test]
fn leray_fixes_basis_fields_and_is_orthogonal() {
    let d = dom(1.0);
    let b = build_stokes_basis(&d, 8).unwrap();
    let w = b.mode_field(&d, 3);
    let p = leray_project(&d, &w).unwrap();
    let e = p.sub(&w);
    assert!(d.inner_vec(&e, &e).sqrt() < 1e-10);

    let v = d.sample_vector(|x, z| (z * z * (2.0 * x).cos() + 0.3, x.sin() * z));
    let p = leray_project(&d, &v).unwrap();
    let q = v.sub(&p);
    let (nv, np, nq) = (d.inner_vec(&v, &v), d.inner_vec(&p, &p), d.inner_vec(&q, &q));
    assert!((nv - np - nq).abs() <= 1e-8 * nv);
}

#[test]
fn stokes_eigenpairs() {
    let d = dom(1.0);
    let b = build_stokes_basis(&d, 16).unwrap();
    let ev = b.eigenvalues();
    assert!(ev[0] > 0.0);
    assert!(ev.windows(2).all(|w| w[1] >= w[0] - 1e-10));
    // |grad u|^2 = 2 |D u|^2 = sum alpha c^2 for fields in the span
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let c: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u = b.reconstruct(&d, &c);
        let t = sym_gradient(&d, &u);
        let dd: Vec<f64> = (0..d.npts()).map(|i| t.xx.data[i].powi(2) + 2.0 * t.xz.data[i].powi(2) + t.zz.data[i].powi(2)).collect();
        let two_d = 2.0 * d.integrate(&dd);
        let spec: f64 = c.iter().zip(&ev).map(|(c, a)| a * c * c).sum();
        assert!((two_d - spec).abs() < 1e-8 * spec, "{two_d} {spec}");
    }
}

#[test]
fn stokes_operator_on_eigenfield() {
    let d = dom(1.0);
    let b = build_stokes_basis(&d, 4).unwrap();
    let w = b.mode_field(&d, 0);
    let s = helmholtz_split_laplacian(&d, &w).unwrap();
    let r = s.au.sub(&w.scaled(b.modes[0].eigenvalue));
    let scale = b.modes[0].eigenvalue;
    assert!(d.inner_vec(&r, &r).sqrt() < 1e-6 * scale);
    assert!(d.integrate(&s.q.data).abs() < 1e-10);
}

#[test]
fn concentration_basis_mean_zero() {
    let d = dom(1.0);
    let b = build_concentration_basis(&d, 1.0, 0.1, 16).unwrap();
    assert!(b.eigenvalues()[0] > 0.0);
    for j in 0..16 {
        let f = b.mode_field(&d, j);
        assert!(d.integrate(&f.data).abs() <= 1e-10 * d.area().sqrt());
    }
}

#[test]
fn poincare_constant() {
    let p1 = estimate_poincare(&dom(1.0), PoincareClass::MeanZeroScalar).unwrap().c_p;
    assert!((p1 - 1.0).abs() < 1e-8, "{p1}");
    let p2 = estimate_poincare(&dom(2.0), PoincareClass::MeanZeroScalar).unwrap().c_p;
    assert!(p2 >= p1 - 1e-12);
}

#[test]
fn korn_constant() {
    let k = estimate_korn(&dom(1.0)).unwrap();
    assert!(k >= 2f64.sqrt() - 1e-8, "{k}");
}

#[test]
fn smallness_in_u() {
    let v = check_smallness_u(1.0, 0.0, 3.0);
    assert!(v.pass && (v.margin - 1.0).abs() < 1e-15);
    let v = check_smallness_u(1.0, 0.5, 1.0);
    assert!(!v.pass && v.margin.abs() < 1e-15);
    let v = check_smallness_u(1.0, 0.1, 1.0);
    assert!(v.pass && (v.margin - 0.8).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn poincare_inequality_on_random_mean_zero(seed in 0u64..1000) {
        let d = dom(1.0);
        let b = build_concentration_basis(&d, 1.0, 0.0, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = b.reconstruct(&d, &c);
        let g = d.gradient(&f);
        let l2 = d.l2(&f.data);
        let grad = d.inner_vec(&g, &g).sqrt();
        prop_assert!(l2 <= grad * (1.0 + 1e-8));
    }
}
