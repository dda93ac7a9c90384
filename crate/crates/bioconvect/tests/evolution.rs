use bioconvect::evolution::config::{ForcingKind, InitKind, Variant};
use bioconvect::evolution::forms::{trilinear_advection, trilinear_scalar, viscous_form};
use bioconvect::evolution::{initial_projection, integrate, integrate_with, GalerkinSystem, SimConfig, ViscosityModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg(variant: Variant) -> SimConfig {
    let mut c = SimConfig::small(variant);
    c.model.viscosity = ViscosityModel::Tanh { nu_mid: 1.0, nu_amp: 0.1, scale: 1.0, center: 0.0 };
    c
}

#[test]
fn zero_data_is_an_equilibrium() {
    let mut c = cfg(Variant::Weak);
    c.model.u_swim = 0.0;
    let sys = GalerkinSystem::new(&c).unwrap();
    let traj = integrate(&sys, sys.initial_state().unwrap()).unwrap();
    for n in &traj.ledger.norms {
        assert!(n.u_l2 <= 1e-10 && n.conc_l2 <= 1e-10, "{n:?}");
    }
}

#[test]
fn strong_scheme_starts_with_zero_xi() {
    let mut c = cfg(Variant::Strong);
    c.initial.concentration = InitKind::Random;
    c.initial.concentration_amplitude = 0.1;
    let sys = GalerkinSystem::new(&c).unwrap();
    let s = sys.initial_state().unwrap();
    assert!(s.d.iter().all(|v| *v == 0.0));
    assert!(s.e0.iter().any(|v| *v != 0.0));
}

#[test]
fn projections() {
    let mut c = cfg(Variant::Weak);
    c.discretization.n_modes = 16;
    let sys = GalerkinSystem::new(&c).unwrap();
    let d = &sys.domain;
    let w3 = sys.basis.velocity.mode_field(d, 3);
    let s = initial_projection(d, &w3, &d.scalar(), &sys.basis, Variant::Weak);
    for (j, v) in s.c.iter().enumerate() {
        assert!((v - if j == 3 { 1.0 } else { 0.0 }).abs() < 1e-10);
    }
    let eta0 = d.sample(|x, z| (2.0 * x).cos() * z * z + x.sin());
    let p = sys.basis.concentration.project(d, &eta0);
    let pn = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(pn <= d.l2(&eta0.data) * (1.0 + 1e-12));
    // nested projections
    let u0 = d.sample_vector(|x, z| (z * (1.0 - z) * x.cos(), 0.0));
    let err = |n: usize| {
        let c = sys.basis.velocity.project(d, &u0);
        let r = sys.basis.velocity.reconstruct(d, &[&c[..n], &vec![0.0; 16 - n][..]].concat());
        let e = r.sub(&u0);
        d.inner_vec(&e, &e).sqrt()
    };
    assert!(err(16) <= err(8) + 1e-12);
}

#[test]
fn forms_on_simple_fields() {
    let sys = GalerkinSystem::new(&cfg(Variant::Weak)).unwrap();
    let d = &sys.domain;
    let shear = d.sample_vector(|_, z| (z, 0.0));
    let m = d.sample(|_, _| 0.3);
    let one = ViscosityModel::Constant { nu: 1.0 };
    let v = viscous_form(d, &m, &shear, &shear, &one).value;
    assert!((v - d.area()).abs() < 1e-10);
    let nu0 = ViscosityModel::Constant { nu: 2.5 };
    assert!((viscous_form(d, &m, &shear, &shear, &nu0).value - 2.5 * d.area()).abs() < 1e-10);
    let u = sys.basis.velocity.mode_field(d, 0);
    let c = d.sample(|_, _| 1.7);
    assert!(trilinear_scalar(d, &u, &c, &c).abs() < 1e-12);
    assert!(trilinear_advection(d, &d.vector(), &u, &u).abs() < 1e-15);
}

#[test]
fn viscous_form_bounded_below() {
    let sys = GalerkinSystem::new(&cfg(Variant::Weak)).unwrap();
    let d = &sys.domain;
    let u = sys.basis.velocity.reconstruct(d, &[0.3, -0.2, 0.5, 0.1, 0.0, 0.2, -0.1, 0.05]);
    let m = d.sample(|x, z| 3.0 * x.cos() * z);
    let vf = viscous_form(d, &m, &u, &u, &sys.viscosity);
    let vconst = viscous_form(d, &m, &u, &u, &ViscosityModel::Constant { nu: sys.nu0 });
    assert!(vf.value >= vconst.value * (1.0 - 1e-12));
    assert_eq!(vf.out_of_bounds, 0);
}

#[test]
fn temporal_self_convergence() {
    let mut c = cfg(Variant::Weak);
    c.model.u_swim = 0.05;
    c.forcing.kind = ForcingKind::Cellular;
    c.forcing.amplitude = 0.2;
    c.initial.velocity = InitKind::Cellular;
    c.initial.velocity_amplitude = 0.1;
    c.initial.concentration = InitKind::Mode;
    c.initial.concentration_amplitude = 0.1;
    let sys = GalerkinSystem::new(&c).unwrap();
    let s0 = sys.initial_state().unwrap();
    let end = |dt: f64| integrate_with(&sys, s0.clone(), dt, 0.4, 10_000).unwrap().last().clone();
    let r = end(0.0025);
    let err = |dt: f64| {
        let s = end(dt);
        s.c.iter().zip(&r.c).chain(s.d.iter().zip(&r.d)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    };
    let order = (err(0.02) / err(0.01)).log2();
    assert!((order - 2.0).abs() <= 0.3, "{order}");
}

#[test]
fn config_round_trip_and_validation() {
    let c = cfg(Variant::Strong);
    let t = c.to_toml_string().unwrap();
    assert_eq!(SimConfig::from_toml_str(&t).unwrap(), c);
    let j = serde_json::to_string(&c).unwrap();
    assert_eq!(SimConfig::from_json_str(&j).unwrap(), c);
    assert!(SimConfig::from_toml_str(&t.replace("theta = 1.0", "theta = -1.0")).is_err());
    assert!(SimConfig::from_toml_str(&t.replace("n_modes", "n_mode")).is_err());
    let mut b = c.clone();
    b.model.b1 = 0.5;
    assert!(b.validate().is_err());
}

#[test]
fn blowup_is_flagged() {
    let mut c = cfg(Variant::Weak);
    c.initial.velocity = InitKind::Random;
    c.initial.velocity_amplitude = 1.0;
    c.tolerances.blowup_threshold = 1e-3;
    let sys = GalerkinSystem::new(&c).unwrap();
    let traj = integrate(&sys, sys.initial_state().unwrap()).unwrap();
    assert!(traj.blowup.is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn advection_is_skew(seed in 0u64..10_000) {
        let sys = GalerkinSystem::new(&cfg(Variant::Weak)).unwrap();
        let d = &sys.domain;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cu: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cv: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u = sys.basis.velocity.reconstruct(d, &cu);
        let v = sys.basis.velocity.reconstruct(d, &cv);
        let w = sys.basis.velocity.reconstruct(d, &cu.iter().zip(&cv).map(|(a, b)| a - b).collect::<Vec<_>>());
        let s = trilinear_advection(d, &u, &v, &w) + trilinear_advection(d, &u, &w, &v);
        prop_assert!(s.abs() < 1e-10);
    }

    #[test]
    fn mass_is_conserved(seed in 0u64..1000, u_swim in 0.0f64..0.2) {
        let mut c = cfg(Variant::Weak);
        c.seed = seed;
        c.model.u_swim = u_swim;
        c.initial.concentration = InitKind::Random;
        c.initial.concentration_amplitude = 0.1;
        c.discretization.t_end = 0.1;
        let sys = GalerkinSystem::new(&c).unwrap();
        let traj = integrate(&sys, sys.initial_state().unwrap()).unwrap();
        for n in &traj.ledger.norms {
            prop_assert!((n.mass - 1.0).abs() < 1e-10);
        }
    }
}
