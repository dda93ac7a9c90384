use bioconvect::domain_grid::{check_interpolation_inequalities, lp_norm, sym_gradient, Lp};
use bioconvect::{Domain, DomainSpec};
use proptest::prelude::*;
use std::f64::consts::PI;

fn dom(nx: usize, nz: usize) -> Domain {
    Domain::new(DomainSpec { lx: 2.0 * PI, h: 1.0, nx, nz }).unwrap()
}

#[test]
fn area_and_boundary_length() {
    let d = dom(64, 64);
    assert!((d.area() - 2.0 * PI).abs() < 1e-12);
    assert!((d.integrate(&vec![1.0; d.npts()]) - 2.0 * PI).abs() < 1e-12);
    assert!((d.integrate_top(&vec![1.0; d.npts()]) - 2.0 * PI).abs() < 1e-12);
}

#[test]
fn separable_integral() {
    let d = dom(64, 64);
    let f = d.sample(|x, z| x.sin().powi(2) * z);
    assert!((d.integrate(&f.data) - PI / 2.0).abs() < 1e-10);
}

#[test]
fn lp_norms() {
    let d = dom(64, 64);
    let one = d.sample(|_, _| 1.0);
    assert!((lp_norm(&d, &one, Lp::P2) - (2.0 * PI).sqrt()).abs() < 1e-12);
    let zero = d.scalar();
    for p in [Lp::P2, Lp::P3, Lp::P4, Lp::P6, Lp::Inf] {
        assert_eq!(lp_norm(&d, &zero, p), 0.0);
    }
    let s = d.sample(|x, _| x.sin());
    assert!((lp_norm(&d, &s, Lp::P4) - (3.0 * PI / 4.0).powf(0.25)).abs() < 1e-12);
    assert!(Lp::from_exponent(5.0).is_err());
}

#[test]
fn symmetric_gradient_of_shear_and_constant() {
    let d = dom(32, 32);
    let shear = d.sample_vector(|_, z| (z, 0.0));
    let t = sym_gradient(&d, &shear);
    for i in 0..d.npts() {
        assert!(t.xx.data[i].abs() < 1e-12 && t.zz.data[i].abs() < 1e-12);
        assert!((t.xz.data[i] - 0.5).abs() < 1e-10);
    }
    let c = d.sample_vector(|_, _| (1.5, -0.5));
    let t = sym_gradient(&d, &c);
    let m = t.xx.data.iter().chain(&t.xz.data).chain(&t.zz.data).fold(0.0_f64, |a, v| a.max(v.abs()));
    assert!(m < 1e-10);
}

#[test]
fn interpolation_inequalities_hold_on_samples() {
    let d = dom(32, 32);
    let r = check_interpolation_inequalities(&d, 100, 3);
    assert_eq!(r.violations_l4, 0);
    assert_eq!(r.violations_l3, 0);
    assert!(r.c_l6.is_finite() && r.c_linf.is_finite());
}

#[test]
fn rejects_bad_domains() {
    assert!(Domain::new(DomainSpec { lx: -1.0, ..DomainSpec::default() }).is_err());
    assert!(Domain::new(DomainSpec { nz: 1, ..DomainSpec::default() }).is_err());
}

proptest! {
    #[test]
    fn integration_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 1usize..5) {
        let d = dom(24, 16);
        let f = d.sample(|x, z| (k as f64 * x).cos() + z * z);
        let g = d.sample(|x, z| x.sin() * z);
        let h: Vec<f64> = f.data.iter().zip(&g.data).map(|(p, q)| a * p + b * q).collect();
        let lhs = d.integrate(&h);
        let rhs = a * d.integrate(&f.data) + b * d.integrate(&g.data);
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn inner_product_symmetric(k in 1usize..6, m in 0i32..6) {
        let d = dom(24, 16);
        let f = d.sample(|x, z| (k as f64 * x).sin() * z.powi(m));
        let g = d.sample(|x, z| x.cos() + z);
        prop_assert!((d.inner(&f.data, &g.data) - d.inner(&g.data, &f.data)).abs() < 1e-13);
    }
}
