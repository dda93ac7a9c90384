use bioconvect::evolution::config::{ForcingKind, Variant};
use bioconvect::evolution::{GalerkinSystem, SimConfig};
use bioconvect::stationary::{solve_malpha, solve_stationary, stationary_residual, verify_malpha_bounds};
use bioconvect::{Domain, DomainSpec, Error};
use std::f64::consts::PI;

fn dom() -> Domain {
    Domain::new(DomainSpec { lx: 2.0 * PI, h: 1.0, nx: 32, nz: 32 }).unwrap()
}

#[test]
fn malpha_constant_without_swimming() {
    let d = dom();
    let m = solve_malpha(&d, 1.0, 0.0, 3.0).unwrap();
    let mean = 3.0 / d.area();
    assert!(m.field.data.iter().all(|v| (v - mean).abs() < 1e-12));
    let r = verify_malpha_bounds(&m);
    assert!(r.all_pass);
    assert!(r.checks.iter().filter(|c| c.name.starts_with("grad") || c.name.starts_with("lap")).all(|c| c.lhs.abs() < 1e-12));
}

#[test]
fn malpha_bounds_and_intermediate_inequality() {
    let d = dom();
    for u in [0.025, 0.05, 0.1] {
        let m = solve_malpha(&d, 1.0, u, 1.0).unwrap();
        let n = &m.diagnostics;
        assert!(n.lap_l2 <= u * n.grad_l2 * (1.0 + 1e-10));
        assert!((n.mass - 1.0).abs() < 1e-12);
        assert!(verify_malpha_bounds(&m).all_pass);
    }
    let bound: f64 = 0.1 * 2.0 * 1.0 / (1.0 * (2.0 * PI).sqrt());
    assert!((bound - 0.2 / (2.0 * PI).sqrt()).abs() < 1e-15);
}

fn strong(n: usize) -> SimConfig {
    let mut c = SimConfig::small(Variant::Strong);
    c.discretization.n_modes = n;
    c
}

#[test]
fn trivial_stationary_state() {
    let mut c = strong(8);
    c.model.u_swim = 0.0;
    c.model.alpha = 2.0;
    let sys = GalerkinSystem::new(&c).unwrap();
    let s = solve_stationary(&sys).unwrap();
    assert!(s.c.iter().all(|v| v.abs() < 1e-10));
    let mean = 2.0 / sys.domain.area();
    assert!(s.m_stat.data.iter().all(|v| (v - mean).abs() < 1e-10));
    assert!(stationary_residual(&sys, &s.c, &s.eta) < 1e-10);
}

#[test]
fn forced_iteration_contracts() {
    let mut c = strong(12);
    c.model.u_swim = 0.05;
    c.forcing.kind = ForcingKind::Cellular;
    c.forcing.amplitude = 0.5;
    let sys = GalerkinSystem::new(&c).unwrap();
    let s = solve_stationary(&sys).unwrap();
    assert!(s.converged && s.residual < 1e-8);
    assert!(s.c.iter().any(|v| v.abs() > 1e-6));
    let f = s.contraction_factors();
    assert!(!f.is_empty() && f.iter().all(|r| *r < 1.0), "{f:?}");
    assert!((s.mass - 1.0).abs() < 1e-10);
    let st = s.as_state();
    assert!(st.d.iter().all(|v| *v == 0.0));
}

#[test]
fn picard_rejects_unsuitable_systems() {
    let sys = GalerkinSystem::new(&SimConfig::small(Variant::Weak)).unwrap();
    assert!(matches!(solve_stationary(&sys), Err(Error::Config(_))));
    let mut c = strong(8);
    c.forcing.kind = ForcingKind::Shear;
    c.forcing.amplitude = 1.0;
    c.forcing.schedule = vec![[0.0, 1.0], [1.0, 0.0]];
    let sys = GalerkinSystem::new(&c).unwrap();
    assert!(matches!(solve_stationary(&sys), Err(Error::Config(_))));
}

#[test]
fn picard_reports_non_convergence() {
    let mut c = strong(8);
    c.forcing.kind = ForcingKind::Cellular;
    c.forcing.amplitude = 0.5;
    c.tolerances.picard_max_iter = 1;
    let sys = GalerkinSystem::new(&c).unwrap();
    assert!(matches!(solve_stationary(&sys), Err(Error::NoConvergence(_))));
}
