use super::fit::{fit_decay, DecayFit};
use super::plots::emit_plot_data;
use super::{worker_pool, Assertion, ExperimentReport, ExperimentSpec};
use crate::estimates::monitor::{predict_window_from, zeta0_sq};
use crate::estimates::smallness::{evaluate_conditions, InitialNorms, SmallnessReport};
use crate::estimates::{
    energy_envelope_monitor, global_smallness_check, monitor_strong_estimates, predict_window, uniqueness_envelope,
    EnvelopeReport, SampledConstants,
};
use crate::evolution::config::Variant;
use crate::evolution::integrate::automatic_dt;
use crate::evolution::{integrate_with, GalerkinState, GalerkinSystem, SimConfig, Trajectory};
use crate::io::{write_csv, write_json, write_run, write_state_fields};
use crate::operators::constants::Labeled;
use crate::stationary::solve_stationary;
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde_json::json;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

fn require(cfg: &SimConfig, v: Variant, what: &str) -> Result<()> {
    if cfg.model.variant != v {
        return Err(Error::Config(format!("{what} needs the {v:?} variant").to_lowercase()));
    }
    Ok(())
}

fn step_dt(sys: &GalerkinSystem, s0: &GalerkinState) -> f64 {
    sys.config.discretization.dt.unwrap_or_else(|| automatic_dt(sys, s0))
}

fn run(sys: &GalerkinSystem, s0: GalerkinState, dt: f64, t_end: f64) -> Result<Trajectory> {
    integrate_with(sys, s0, dt, t_end, sys.config.discretization.save_every)
}

fn sampled_map(s: &SampledConstants, out: &mut BTreeMap<String, Labeled>) {
    for (k, v) in [
        ("c_hat", &s.c_hat),
        ("e4", &s.e4),
        ("e5", &s.e5),
        ("e6", &s.e6),
        ("e6b", &s.e6b),
        ("q_adv", &s.q_adv),
        ("c_a", &s.c_a),
        ("kappa_a", &s.kappa_a),
    ] {
        out.insert(k.into(), v.clone());
    }
}

fn envelope_map(e: &EnvelopeReport, out: &mut BTreeMap<String, Labeled>) {
    let s = &e.spec;
    for (k, v) in [("C_nu0", &s.c_nu0), ("C_thetaU", &s.c_theta_u), ("C0", &s.c0), ("C1", &s.c1), ("C2", &s.c2), ("K", &s.k), ("C_tr", &s.c_trace), ("C_P", &s.c_p)] {
        out.insert(k.into(), v.clone());
    }
}

fn digest(s: &str) -> String {
    Sha256::digest(s.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn sub(spec: &ExperimentSpec, name: &str) -> Option<PathBuf> {
    spec.out.as_ref().map(|d| if name.is_empty() { d.clone() } else { d.join(name) })
}

fn finish_run(dir: &Path, sys: &GalerkinSystem, traj: &Trajectory) -> Result<()> {
    write_run(dir, sys, traj)?;
    emit_plot_data(dir)?;
    Ok(())
}

fn envelope_rows(e: &EnvelopeReport) -> Vec<Vec<f64>> {
    e.t.iter().zip(&e.lhs).zip(&e.g).map(|((t, l), g)| vec![*t, *l, *g]).collect()
}

/// Adds `delta` times a seeded unit direction to the velocity and the
/// concentration unknown (`xi`/`zeta` coefficients in the weak variant,
/// `eta0` in the strong one).
pub fn perturb_state(s: &GalerkinState, delta: f64, seed: u64) -> GalerkinState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = s.c.len();
    let dir: Vec<f64> = (0..2 * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nrm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut out = s.clone();
    let conc = match s.variant {
        Variant::Weak => &mut out.d,
        Variant::Strong => &mut out.e0,
    };
    for j in 0..n {
        out.c[j] += delta * dir[j] / nrm;
    }
    for j in 0..n {
        conc[j] += delta * dir[n + j] / nrm;
    }
    out
}

/// Grid `L2` differences of velocity and concentration between two runs on
/// the same save times, maximized over time.
fn max_differences(sa: &GalerkinSystem, a: &Trajectory, sb: &GalerkinSystem, b: &Trajectory) -> (f64, f64) {
    let d = &sa.domain;
    let mut du = 0.0_f64;
    let mut dz = 0.0_f64;
    for (x, y) in a.states.iter().zip(&b.states) {
        let v = sa.velocity(x).sub(&sb.velocity(y));
        du = du.max(d.inner_vec(&v, &v).max(0.0).sqrt());
        let ex = sa.eta_field(x);
        let ey = sb.eta_field(y);
        let e: Vec<f64> = ex.data.iter().zip(&ey.data).map(|(p, q)| p - q).collect();
        dz = dz.max(d.l2(&e));
    }
    (du, dz)
}

fn decreasing(name: &str, next: f64, prev: f64) -> Assertion {
    let pass = next < prev || prev.max(next) <= 1e-10;
    Assertion { name: name.into(), pass, value: next, threshold: prev }
}

/// Integrates the same weak data at each `n` of the sweep and compares
/// successive resolutions.
pub fn run_weak_convergence(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let base = spec.resolved_config();
    require(&base, Variant::Weak, "weak_convergence")?;
    let mut ns = spec.sweep.n_values.clone();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 2 {
        return Err(Error::Config("weak_convergence needs at least two n values".into()));
    }
    let pool = worker_pool()?;
    let systems: Vec<GalerkinSystem> = pool.install(|| {
        ns.par_iter()
            .map(|&n| {
                let mut c = base.clone();
                c.discretization.n_modes = n;
                GalerkinSystem::new(&c)
            })
            .collect::<Result<_>>()
    })?;
    let s0: Vec<GalerkinState> = systems.iter().map(|s| s.initial_state()).collect::<Result<_>>()?;
    let dt = match base.discretization.dt {
        Some(dt) => dt,
        None => systems.iter().zip(&s0).map(|(s, x)| automatic_dt(s, x)).fold(f64::INFINITY, f64::min),
    };
    let t_end = base.discretization.t_end;
    let trajs: Vec<Trajectory> =
        pool.install(|| systems.par_iter().zip(s0.par_iter()).map(|(s, x)| run(s, x.clone(), dt, t_end)).collect::<Result<_>>())?;
    let blowup = trajs.iter().any(|t| t.blowup.is_some());
    let envs: Vec<EnvelopeReport> = pool.install(|| {
        systems.par_iter().zip(trajs.par_iter()).map(|(s, t)| energy_envelope_monitor(s, t)).collect::<Result<_>>()
    })?;

    let mut asserts = vec![Assertion::flag("no blow-up at any n", !blowup)];
    let mut diffs = Vec::new();
    for i in 1..ns.len() {
        let (du, dz) = if blowup {
            (f64::INFINITY, f64::INFINITY)
        } else {
            max_differences(&systems[i], &trajs[i], &systems[i - 1], &trajs[i - 1])
        };
        diffs.push((ns[i - 1], ns[i], du, dz));
    }
    for w in diffs.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        asserts.push(decreasing(&format!("velocity difference {}->{} below {}->{}", b.0, b.1, a.0, a.1), b.2, a.2));
        asserts.push(decreasing(&format!("concentration difference {}->{} below {}->{}", b.0, b.1, a.0, a.1), b.3, a.3));
    }
    let alpha = base.model.alpha;
    let tol = base.tolerances.mass_tol;
    let mut drift = 0.0_f64;
    let mut mean = 0.0_f64;
    for t in &trajs {
        for n in t.ledger.norms.iter().filter(|n| n.mass.is_finite()) {
            drift = drift.max((n.mass - alpha).abs() / if alpha > 0.0 { alpha } else { 1.0 });
            mean = mean.max(n.conc_mean.abs());
        }
    }
    asserts.push(Assertion::at_most("relative mass drift", drift, tol));
    asserts.push(Assertion::at_most("max |int zeta|", mean, tol));
    for (n, e) in ns.iter().zip(&envs) {
        asserts.push(Assertion::at_least(&format!("energy envelope margin n={n}"), e.min_margin, 0.0).with_pass(e.pass));
    }

    let mut constants = BTreeMap::new();
    if let Some(e) = envs.last() {
        envelope_map(e, &mut constants);
    }
    let details = json!({
        "n_values": ns,
        "dt": dt,
        "differences": diffs.iter().map(|d| json!({"n": d.0, "n_next": d.1, "velocity": d.2, "concentration": d.3})).collect::<Vec<_>>(),
        "envelope_margins": envs.iter().map(|e| e.min_margin).collect::<Vec<_>>(),
        "envelope_reestimated": envs.iter().map(|e| e.reestimated).collect::<Vec<_>>(),
        "mass_drift": drift,
        "energy_residual_max": trajs.iter().map(|t| t.ledger.max_abs_residual()).collect::<Vec<_>>(),
    });
    if let Some(dir) = sub(spec, "") {
        for ((n, s), (t, e)) in ns.iter().zip(&systems).zip(trajs.iter().zip(&envs)) {
            let d = dir.join(format!("n{n}"));
            write_csv(&d.join("envelope.csv"), &["t", "monitored", "bound"], &envelope_rows(e))?;
            finish_run(&d, s, t)?;
        }
        let rows: Vec<Vec<f64>> = diffs.iter().map(|d| vec![d.0 as f64, d.1 as f64, d.2, d.3]).collect();
        write_csv(&dir.join("convergence.csv"), &["n", "n_next", "velocity_diff", "concentration_diff"], &rows)?;
    }
    Ok(ExperimentReport::new(spec, asserts, constants, details))
}

impl Assertion {
    pub(crate) fn with_pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}

/// Predicts `T*` from the data, integrates on `[0, min(T*, t_end)]` and checks
/// the strong-solution monitors.
pub fn run_local_window(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let cfg = spec.resolved_config();
    require(&cfg, Variant::Strong, "local_window")?;
    let sys = GalerkinSystem::new(&cfg)?;
    let s0 = sys.initial_state()?;
    let sampled = SampledConstants::estimate(&sys, spec.sweep.samples, cfg.seed);
    let horizon = spec.sweep.horizon.unwrap_or(cfg.discretization.t_end);
    let pred = predict_window(&sys, &s0, &sampled, horizon)?;
    let init = InitialNorms::of_state(&sys, &s0);
    let u0_sq: f64 = s0.c.iter().map(|v| v * v).sum();
    let half = InitialNorms { du0_sq: init.du0_sq / 4.0, u0_l4: init.u0_l4 / 2.0, ..init.clone() };
    let pred_half = predict_window_from(&sys, &half, u0_sq / 4.0, zeta0_sq(&sys, &s0), &sampled, horizon)?;

    let t_run = pred.t_star.min(cfg.discretization.t_end);
    let mut asserts = vec![
        Assertion::above("T* > 0", pred.t_star, 0.0),
        Assertion::at_most("max |xi(0)|", s0.d.iter().fold(0.0, |m, v| m.max(v.abs())), 0.0),
        Assertion::at_least("T* with |D u0| halved", pred_half.t_star, pred.t_star),
    ];
    let mut details = json!({"prediction": pred, "t_star_half_data": pred_half.t_star, "integrated_to": t_run});
    let mut constants = BTreeMap::new();
    sampled_map(&sampled, &mut constants);
    constants.insert("C".into(), pred.c_cubic.clone());
    constants.insert("C_eps".into(), pred.c_eps.clone());
    constants.insert("C_eta0".into(), pred.c_eta0.clone());
    if t_run > 0.0 {
        let traj = run(&sys, s0.clone(), step_dt(&sys, &s0), t_run)?;
        let mon = monitor_strong_estimates(&sys, &traj, &sampled, pred.t_star)?;
        let xi_max = mon.xi_l4_checks.iter().map(|c| c.value).fold(0.0, f64::max);
        asserts.push(Assertion::flag("no blow-up", traj.blowup.is_none()));
        asserts.push(Assertion::below("max |grad xi|_4 on [0, T*]", xi_max, 1.0));
        asserts.push(Assertion::flag("monitored norms finite", mon.all_finite));
        let h1_worst = mon.h1_checks.iter().map(|c| c.value - c.bound).fold(f64::NEG_INFINITY, f64::max);
        asserts.push(Assertion::at_most("max |grad xi|^2 - H1", h1_worst, 0.0).with_pass(mon.h1_checks.iter().all(|c| c.pass)));
        constants.insert("C_H".into(), mon.c_h.clone());
        details["monitor"] = json!({"dt_xi_sup": mon.dt_xi_sup, "xi_l4_max": xi_max, "h1_worst": h1_worst});
        if let Some(dir) = sub(spec, "") {
            write_json(&dir.join("window.json"), &details)?;
            finish_run(&dir, &sys, &traj)?;
        }
    }
    Ok(ExperimentReport::new(spec, asserts, constants, details))
}

/// Largest factor `s` for which the conditions still hold with the datum
/// scaled by `s`. Infinite when they hold for every tested factor.
pub fn flip_amplitude(report: &SmallnessReport, sampled: &SampledConstants) -> f64 {
    let holds = |s: f64| evaluate_conditions(report.inputs.clone(), report.initial.scaled(s), sampled, Some(report.beta)).pass;
    let (mut lo, mut hi) = if holds(1.0) {
        let mut hi = 2.0;
        while holds(hi) {
            hi *= 2.0;
            if hi > 1e12 {
                return f64::INFINITY;
            }
        }
        (hi / 2.0, hi)
    } else {
        if !holds(0.0) {
            return 0.0;
        }
        (0.0, 1.0)
    };
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Checks the small-data conditions, then integrates over the configured
/// horizon and tracks `Pi_n(t)` against `beta`.
pub fn run_global_smalldata(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let cfg = spec.resolved_config();
    require(&cfg, Variant::Strong, "global_smalldata")?;
    let sys = GalerkinSystem::new(&cfg)?;
    let s0 = sys.initial_state()?;
    let sampled = SampledConstants::estimate(&sys, spec.sweep.samples, cfg.seed);
    let check = global_smallness_check(&sys, &sampled, None)?;
    let flip = flip_amplitude(&check, &sampled);
    let traj = run(&sys, s0.clone(), step_dt(&sys, &s0), cfg.discretization.t_end)?;
    let pi_max = traj.ledger.norms.iter().map(|n| n.pi).fold(0.0, f64::max);
    let m1 = traj.ledger.norms.iter().map(|n| n.a1_eta.powi(2)).fold(0.0, f64::max);
    let mut m2 = 0.0_f64;
    for (w, n) in traj.states.windows(2).zip(traj.ledger.norms.iter().skip(1)) {
        let dt = w[1].t - w[0].t;
        let dd: f64 = w[1].d.iter().zip(&w[0].d).map(|(a, b)| (a - b).powi(2)).sum();
        m2 = m2.max(n.du_l2.powi(2) + dd / (dt * dt));
    }
    if let Some(n) = traj.ledger.norms.first() {
        m2 = m2.max(n.du_l2.powi(2));
    }
    let asserts = vec![
        Assertion::flag("small-data conditions hold", check.pass),
        Assertion::at_least("flip amplitude / configured amplitude", flip, spec.sweep.margin),
        Assertion::flag("no blow-up", traj.blowup.is_none()),
        Assertion::below("sup Pi_n(t)", pi_max, check.beta),
        Assertion::flag("suprema finite", m1.is_finite() && m2.is_finite()),
    ];
    let mut constants = BTreeMap::new();
    sampled_map(&sampled, &mut constants);
    for (k, v) in &check.constants.values {
        constants.insert(k.clone(), v.clone());
    }
    let details = json!({
        "beta": check.beta,
        "beta_max": check.beta_max,
        "z2": check.z2,
        "conditions": check.conditions,
        "min_ratio": check.min_ratio,
        "flip_amplitude": flip,
        "sup_pi": pi_max,
        "m1_candidate": m1,
        "m2_candidate": m2,
        "blowup": traj.blowup,
    });
    if let Some(dir) = sub(spec, "") {
        write_json(&dir.join("smallness.json"), &check)?;
        finish_run(&dir, &sys, &traj)?;
    }
    Ok(ExperimentReport::new(spec, asserts, constants, details))
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct DecayRun {
    pub fit: Option<DecayFit>,
    pub t: Vec<f64>,
    pub perturbation_sq: Vec<f64>,
    pub stationary_residual: f64,
    pub picard_iterations: usize,
    /// `|v|^2 + |eta|^2` nonincreasing on the fit window.
    pub nonincreasing: bool,
    pub blowup: Option<f64>,
}

fn decay_once(cfg: &SimConfig, discard: f64, out: Option<&Path>) -> Result<DecayRun> {
    let sys = GalerkinSystem::new(cfg)?;
    let stat = solve_stationary(&sys)?;
    let pert = sys.initial_state()?;
    let mut s0 = stat.as_state();
    for (a, b) in s0.c.iter_mut().zip(&pert.c) {
        *a += b;
    }
    for (a, b) in s0.e0.iter_mut().zip(&pert.e0) {
        *a += b;
    }
    let traj = run(&sys, s0.clone(), step_dt(&sys, &s0), cfg.discretization.t_end)?;
    let t = traj.times();
    let e: Vec<f64> = traj
        .states
        .iter()
        .map(|s| {
            let v: f64 = s.c.iter().zip(&stat.c).map(|(a, b)| (a - b).powi(2)).sum();
            let h: f64 = s.eta().iter().zip(&stat.eta).map(|(a, b)| (a - b).powi(2)).sum();
            v + h
        })
        .collect();
    let emax = e.iter().cloned().fold(0.0, f64::max);
    let fit = if emax > 1e-20 && traj.blowup.is_none() { Some(fit_decay(&t, &e, discard)?) } else { None };
    let ta = fit.as_ref().map_or(0.0, |f| f.window[0]);
    let nonincreasing =
        t.windows(2).zip(e.windows(2)).filter(|(s, _)| s[0] >= ta).all(|(_, v)| v[1] <= v[0] * (1.0 + 1e-9));
    if let Some(dir) = out {
        let rows: Vec<Vec<f64>> = t.iter().zip(&e).map(|(t, e)| vec![*t, *e]).collect();
        write_csv(&dir.join("perturbation.csv"), &["t", "perturbation_sq"], &rows)?;
        if let Some(f) = &fit {
            write_json(&dir.join("decay_fit.json"), f)?;
        }
        write_state_fields(&dir.join("stationary.csv"), &sys.domain, 0.0, &stat.u_stat, &stat.m_stat)?;
        write_json(&dir.join("picard.json"), &stat.trace)?;
        finish_run(dir, &sys, &traj)?;
    }
    Ok(DecayRun {
        fit,
        t,
        perturbation_sq: e,
        stationary_residual: stat.residual,
        picard_iterations: stat.trace.len(),
        nonincreasing,
        blowup: traj.blowup,
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Perturbs the stationary solution by the configured initial data and fits
/// the decay of `|v|^2 + |eta|^2`. With `sweep.robustness` the fit is
/// repeated with halved perturbation and with doubled `n`.
pub fn run_stability_decay(spec: &ExperimentSpec) -> Result<(DecayRun, ExperimentReport)> {
    let cfg = spec.resolved_config();
    require(&cfg, Variant::Strong, "stability_decay")?;
    if !cfg.forcing.is_time_constant() {
        return Err(Error::Config("stability_decay needs time-constant forcing".into()));
    }
    let discard = spec.sweep.fit_discard;
    let mut half = cfg.clone();
    half.initial.velocity_amplitude *= 0.5;
    half.initial.concentration_amplitude *= 0.5;
    let mut dbl = cfg.clone();
    dbl.discretization.n_modes *= 2;
    let jobs: Vec<(SimConfig, Option<PathBuf>)> = if spec.sweep.robustness {
        vec![(cfg.clone(), sub(spec, "")), (half, sub(spec, "half_amplitude")), (dbl, sub(spec, "double_n"))]
    } else {
        vec![(cfg.clone(), sub(spec, ""))]
    };
    let pool = worker_pool()?;
    let runs: Vec<DecayRun> =
        pool.install(|| jobs.par_iter().map(|(c, o)| decay_once(c, discard, o.as_deref())).collect::<Result<_>>())?;
    let main = &runs[0];
    let mut asserts = vec![Assertion::flag("no blow-up", runs.iter().all(|r| r.blowup.is_none()))];
    match &main.fit {
        None => {
            let emax = main.perturbation_sq.iter().cloned().fold(0.0, f64::max);
            asserts.push(Assertion::at_most("max perturbation norm (fit skipped)", emax.sqrt(), 1e-10));
        }
        Some(f) => {
            asserts.push(Assertion::above("lambda", f.lambda, 0.0));
            asserts.push(Assertion::at_least("R^2", f.r2, 0.99));
            asserts.push(Assertion::flag("perturbation nonincreasing after transient", main.nonincreasing));
            for (name, r) in [("lambda change, amplitude halved", runs.get(1)), ("lambda change, n doubled", runs.get(2))] {
                if let Some(r) = r {
                    let v = r.fit.as_ref().map_or(f64::INFINITY, |g| rel(g.lambda, f.lambda));
                    asserts.push(Assertion::at_most(name, v, 0.1));
                }
            }
        }
    }
    let details = json!({
        "fits": runs.iter().map(|r| &r.fit).collect::<Vec<_>>(),
        "stationary_residual": main.stationary_residual,
        "picard_iterations": main.picard_iterations,
    });
    let report = ExperimentReport::new(spec, asserts, BTreeMap::new(), details);
    if let Some(dir) = sub(spec, "") {
        write_json(&dir.join("report.json"), &report)?;
    }
    Ok((runs.into_iter().next().unwrap(), report))
}

fn velocity_gap(a: &Trajectory, b: &Trajectory) -> f64 {
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| x.c.iter().zip(&y.c).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// Twin runs from identical data, then from data perturbed by `delta`,
/// checked against the Gronwall envelope.
pub fn run_uniqueness_twin(spec: &ExperimentSpec, delta: f64) -> Result<ExperimentReport> {
    let cfg = spec.resolved_config();
    require(&cfg, Variant::Strong, "uniqueness_twin")?;
    let sys = GalerkinSystem::new(&cfg)?;
    let s0 = sys.initial_state()?;
    let dt = step_dt(&sys, &s0);
    let t_end = cfg.discretization.t_end;
    let sampled = SampledConstants::estimate(&sys, spec.sweep.samples, cfg.seed);
    let pred = predict_window(&sys, &s0, &sampled, spec.sweep.horizon.unwrap_or(t_end).max(t_end))?;

    let mut seeds = vec![(s0.clone(), 0.0), (s0.clone(), 0.0)];
    if delta > 0.0 {
        seeds.push((perturb_state(&s0, delta, cfg.seed), delta));
        if spec.sweep.robustness {
            seeds.push((perturb_state(&s0, 2.0 * delta, cfg.seed), 2.0 * delta));
        }
    }
    let pool = worker_pool()?;
    let trajs: Vec<Trajectory> =
        pool.install(|| seeds.par_iter().map(|(s, _)| run(&sys, s.clone(), dt, t_end)).collect::<Result<_>>())?;
    let (csv_a, csv_b) = (trajs[0].ledger.to_csv(), trajs[1].ledger.to_csv());
    let twin_gap = trajs[0]
        .states
        .iter()
        .zip(&trajs[1].states)
        .flat_map(|(x, y)| x.c.iter().zip(&y.c).chain(x.d.iter().zip(&y.d)).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max);
    let mut asserts = vec![
        Assertion::flag("twin diagnostics byte-identical", csv_a == csv_b),
        Assertion::at_most("twin max coefficient difference", twin_gap, 0.0),
        Assertion::at_most("t_end within T*", t_end, pred.t_star),
        Assertion::flag("no blow-up", trajs.iter().all(|t| t.blowup.is_none())),
    ];
    let mut constants = BTreeMap::new();
    sampled_map(&sampled, &mut constants);
    let mut details = json!({
        "delta": delta,
        "t_star": pred.t_star,
        "sha256_a": digest(&csv_a),
        "sha256_b": digest(&csv_b),
    });
    let env = if delta > 0.0 {
        let env = uniqueness_envelope(&sys, &trajs[0], &trajs[2], &sampled)?;
        asserts.push(Assertion::at_least("Gronwall envelope margin", env.min_margin, 0.0).with_pass(env.pass));
        details["lambda"] = json!(env.lambda);
        details["envelope_min_margin"] = json!(env.min_margin);
        if trajs.len() > 3 {
            let ratio = velocity_gap(&trajs[0], &trajs[3]) / velocity_gap(&trajs[0], &trajs[2]);
            asserts.push(Assertion::at_most("max|v| ratio under doubled delta", ratio, 2.2));
            details["doubling_ratio"] = json!(ratio);
        }
        Some(env)
    } else {
        None
    };
    if let Some(dir) = sub(spec, "") {
        finish_run(&dir.join("a"), &sys, &trajs[0])?;
        finish_run(&dir.join("b"), &sys, &trajs[1])?;
        if let Some(env) = &env {
            let p = dir.join("perturbed");
            let rows: Vec<Vec<f64>> =
                (0..env.t.len()).map(|i| vec![env.t[i], env.e[i], env.bound[i], env.n[i]]).collect();
            write_csv(&p.join("uniqueness.csv"), &["t", "e", "bound", "n"], &rows)?;
            finish_run(&p, &sys, &trajs[2])?;
        }
    }
    Ok(ExperimentReport::new(spec, asserts, constants, details))
}
