use bioconvect::estimates::monitor::{h1_bound, predict_window_from, zeta0_sq};
use bioconvect::estimates::polynomial::eval_p;
use bioconvect::estimates::smallness::{Condition, InitialNorms};
use bioconvect::estimates::{
    global_smallness_check, gronwall_envelope, lemma10_window, polynomial_p_roots, EnvelopeSpec, SampledConstants,
};
use bioconvect::evolution::{GalerkinSystem, SimConfig};
use bioconvect::experiments::ExperimentSpec;
use proptest::prelude::*;
use std::path::PathBuf;

fn shipped(name: &str) -> SimConfig {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentSpec::load(&p).unwrap().resolved_config()
}

/// RK4 for `y' = 1 + t y`, `y(0) = 1`, the equality case of
/// `y = a + int b y` with `a = 1 + t`, `b = t`.
fn rk4(t: &[f64]) -> Vec<f64> {
    let f = |t: f64, y: f64| 1.0 + t * y;
    let mut y = vec![1.0];
    for w in t.windows(2) {
        let (t0, h, y0) = (w[0], w[1] - w[0], *y.last().unwrap());
        let k1 = f(t0, y0);
        let k2 = f(t0 + h / 2.0, y0 + h * k1 / 2.0);
        let k3 = f(t0 + h / 2.0, y0 + h * k2 / 2.0);
        let k4 = f(t0 + h, y0 + h * k3);
        y.push(y0 + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0);
    }
    y
}

#[test]
fn gronwall_without_growth() {
    let t: Vec<f64> = (0..101).map(|i| i as f64 * 0.01).collect();
    let a = vec![2.0; 101];
    let zeta: Vec<f64> = t.iter().map(|s| 1.0 - 0.5 * s).collect();
    let zs = vec![0.5; 101];
    let r = gronwall_envelope(&t, &a, &vec![0.0; 101], &zeta, &zs).unwrap();
    assert!(r.pass && r.hypothesis_holds);
    // zeta + int zeta* = 1 exactly
    assert!(r.margins.iter().all(|m| (m - 1.0).abs() < 1e-12));
}

#[test]
fn gronwall_linear_data_against_ode() {
    let t: Vec<f64> = (0..401).map(|i| i as f64 * 0.005).collect();
    let y = rk4(&t);
    let a: Vec<f64> = t.iter().map(|s| 1.0 + s).collect();
    let b = t.clone();
    let zeta: Vec<f64> = y.iter().map(|v| 0.99 * v).collect();
    let r = gronwall_envelope(&t, &a, &b, &zeta, &vec![0.0; t.len()]).unwrap();
    assert!(r.hypothesis_holds && r.a_nondecreasing && r.b_nonnegative && r.pass);
    for (k, s) in t.iter().enumerate() {
        let bound = (1.0 + s) * (0.5 * s * s).exp();
        assert!(y[k] <= bound * (1.0 + 1e-9));
        assert!((r.margins[k] - (bound - zeta[k])).abs() < 1e-4 * bound);
    }
    // an over-large zeta breaks the conclusion
    let big: Vec<f64> = a.iter().map(|v| 3.0 * v).collect();
    assert!(!gronwall_envelope(&t, &a, &b, &big, &vec![0.0; t.len()]).unwrap().pass);
}

#[test]
fn window_rejects_bad_input() {
    let t = [0.0, 1.0];
    assert!(lemma10_window(0.1, &t, &[0.0, 0.0], &[0.0, 0.0], 0.0).is_err());
    assert!(lemma10_window(0.1, &t, &[-1.0, 0.0], &[0.0, 0.0], 1.0).is_err());
    assert!(lemma10_window(0.1, &[0.0], &[0.0], &[0.0], 1.0).is_err());
    let w = lemma10_window(0.0, &t, &[0.0, 0.0], &[0.0, 0.0], 1.0).unwrap();
    assert!(w.horizon_reached && w.t1 == 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn doubling_c_never_lengthens_window(c in 0.01f64..10.0, phi0 in 0.0f64..1.0, g in 0.0f64..2.0, h in 0.0f64..1.0) {
        let t: Vec<f64> = (0..401).map(|i| i as f64 * 0.05).collect();
        let hv = vec![h; t.len()];
        let gv = vec![g; t.len()];
        let a = lemma10_window(phi0, &t, &hv, &gv, c).unwrap();
        let b = lemma10_window(phi0, &t, &hv, &gv, 2.0 * c).unwrap();
        prop_assert!(b.t1 <= a.t1 + 1e-12);
    }

    #[test]
    fn cubic_roots_are_roots(d1 in 0.1f64..5.0, d3 in 0.1f64..5.0, d5 in 0.0f64..0.05) {
        let r = polynomial_p_roots(d1, d3, d5).unwrap();
        if let Some(roots) = r.roots {
            for z in roots {
                let scale = (2.0 * d1).max(0.5 * d3).max(d5) * (1.0 + z.abs().powi(3));
                prop_assert!(eval_p(d1, d3, d5, z).abs() <= 1e-10 * scale);
            }
            let z2 = r.z2.unwrap();
            prop_assert!(z2 >= 0.0 && roots.iter().any(|v| *v == z2));
        }
    }
}

#[test]
fn cubic_without_three_roots() {
    let r = polynomial_p_roots(2.0, 2.0, 10.0).unwrap();
    assert!(r.roots.is_none() && r.z2.is_none() && r.discriminant <= 0.0);
    assert!(polynomial_p_roots(0.0, 1.0, 1.0).is_err());
}

#[test]
fn strict_conditions() {
    assert!(!Condition::strict("eq", 1.0, 1.0).pass);
    assert!(Condition::strict("lt", 0.0, 1.0).ratio.is_infinite());
    let c = Condition::strict("lt", 0.5, 1.0);
    assert!(c.pass && (c.margin - 0.5).abs() < 1e-15 && (c.ratio - 2.0).abs() < 1e-15);
}

#[test]
fn small_data_check() {
    let mut c = shipped("global_smalldata.toml");
    c.discretization.n_modes = 12;
    c.domain.nx = 32;
    c.domain.nz = 32;
    let mut zero = c.clone();
    zero.initial.velocity_amplitude = 0.0;
    zero.initial.concentration_amplitude = 0.0;
    let sys = GalerkinSystem::new(&zero).unwrap();
    let sampled = SampledConstants::estimate(&sys, 50, 1);
    let r = global_smallness_check(&sys, &sampled, None).unwrap();
    assert!(r.pass, "{:?}", r.conditions.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    let mut big = c;
    big.initial.velocity_amplitude = 1.0;
    let sys = GalerkinSystem::new(&big).unwrap();
    assert!(!global_smallness_check(&sys, &sampled, None).unwrap().pass);
}

#[test]
fn energy_envelope_shape() {
    let e = EnvelopeSpec::from_constants(1.0, 1.0, 0.1, 1.0, 1.0, 1.0, 0.3, 0.2, 0.5, vec![], 0.1, 0.0);
    let g: Vec<f64> = (0..50).map(|i| e.g(i as f64 * 0.1)).collect();
    assert!(g.windows(2).all(|w| w[1] >= w[0]));
    assert!((g[0] - (0.3 + e.c0.value * 0.2)).abs() < 1e-14);
    let z = EnvelopeSpec::from_constants(1.0, 1.0, 0.1, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, vec![], 0.0, 0.0);
    assert!((0..20).all(|i| z.g(i as f64) == 0.0));
    let s = EnvelopeSpec::from_constants(1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, vec![[0.0, 2.0], [1.0, 0.0]], 0.0, 0.0);
    assert!((s.schedule_sq_integral(3.0) - 4.0).abs() < 1e-15);
}

#[test]
fn h1_vanishes_at_start() {
    for z in [0.0, 1.0, 3.0] {
        assert_eq!(h1_bound(2.0, 3.0, 0.0, z), 0.0);
        assert!(h1_bound(2.0, 3.0, 0.1, z) < h1_bound(2.0, 3.0, 0.2, z));
    }
}

#[test]
fn rougher_velocity_shortens_window() {
    let mut c = shipped("local_window.toml");
    c.discretization.n_modes = 8;
    c.domain.nx = 32;
    c.domain.nz = 32;
    let sys = GalerkinSystem::new(&c).unwrap();
    let s0 = sys.initial_state().unwrap();
    let sampled = SampledConstants::estimate(&sys, 50, 2);
    let init = InitialNorms::of_state(&sys, &s0);
    let u0 = s0.c.iter().map(|v| v * v).sum::<f64>();
    let z0 = zeta0_sq(&sys, &s0);
    let mut prev = f64::INFINITY;
    for f in [0.5, 1.0, 2.0, 4.0] {
        let mut n = init.clone();
        n.du0_sq *= f;
        let t = predict_window_from(&sys, &n, u0, z0, &sampled, 2.0).unwrap().t_star;
        assert!(t > 0.0 && t <= prev + 1e-12, "{t} {prev}");
        prev = t;
    }
}
