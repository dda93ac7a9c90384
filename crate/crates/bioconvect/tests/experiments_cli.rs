use bioconvect::evolution::config::{ForcingKind, InitKind, Variant};
use bioconvect::evolution::{GalerkinSystem, SimConfig, ViscosityModel};
use bioconvect::experiments::{
    emit_plot_data, run_experiment, run_global_smalldata, run_stability_decay, run_uniqueness_twin,
    run_weak_convergence, worker_pool, ExperimentKind, ExperimentSpec,
};
use bioconvect::io::read_csv;
use std::path::{Path, PathBuf};
use std::process::Command;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn coarse(mut c: SimConfig) -> SimConfig {
    c.domain.nx = 32;
    c.domain.nz = 32;
    c
}

fn shipped(name: &str) -> ExperimentSpec {
    let mut s = ExperimentSpec::load(&configs().join(name)).unwrap();
    s.base = coarse(s.base);
    s
}

fn trivial_strong() -> SimConfig {
    let mut c = coarse(SimConfig::small(Variant::Strong));
    c.model.u_swim = 0.0;
    c.model.viscosity = ViscosityModel::Constant { nu: 1.0 };
    c.discretization.t_end = 2.0;
    c.discretization.dt = Some(0.01);
    c
}

#[test]
fn spec_round_trip_and_kinds() {
    for name in ["weak_convergence", "local_window", "global_smalldata", "stability_decay", "uniqueness_twin"] {
        let s = ExperimentSpec::load(&configs().join(format!("{name}.toml"))).unwrap();
        assert_eq!(s.kind.name(), name);
        assert_eq!(ExperimentKind::parse(&name.replace('_', "-")).unwrap(), s.kind);
        let back = ExperimentSpec::from_toml_str(&s.to_toml_string().unwrap()).unwrap();
        assert_eq!(back.kind, s.kind);
        assert_eq!(back.base, s.base);
    }
    assert!(ExperimentKind::parse("nonsense").is_err());
    assert!(ExperimentSpec::from_toml_str("kind = \"local_window\"\nfoo = 1\n").is_err());
}

#[test]
fn decay_without_perturbation_skips_fit() {
    let mut c = trivial_strong();
    c.initial.velocity_amplitude = 0.0;
    c.initial.concentration_amplitude = 0.0;
    let mut s = ExperimentSpec::new(ExperimentKind::StabilityDecay, c);
    s.sweep.robustness = false;
    let (run, report) = run_stability_decay(&s).unwrap();
    assert!(run.fit.is_none());
    assert!(report.pass);
    assert!(report.assertion("max perturbation norm (fit skipped)").unwrap().value <= 1e-10);
}

#[test]
fn decay_rate_of_trivial_state() {
    let mut c = trivial_strong();
    c.initial.velocity = InitKind::Random;
    c.initial.velocity_amplitude = 1e-3;
    c.initial.concentration = InitKind::Random;
    c.initial.concentration_amplitude = 1e-3;
    let sys = GalerkinSystem::new(&c).unwrap();
    let a1 = sys.alpha_v.iter().cloned().fold(f64::INFINITY, f64::min);
    let b1 = sys.beta.iter().cloned().fold(f64::INFINITY, f64::min);
    let expect = 2.0 * (sys.nu0 * a1).min(c.model.theta * b1);
    let mut s = ExperimentSpec::new(ExperimentKind::StabilityDecay, c);
    s.sweep.robustness = false;
    let (run, report) = run_stability_decay(&s).unwrap();
    let lam = run.fit.unwrap().lambda;
    assert!(report.pass, "{:?}", report.failures());
    assert!(lam > expect / 4.0 && lam < expect * 4.0, "{lam} vs {expect}");
}

fn header(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap().lines().find(|l| !l.starts_with('#')).unwrap().to_string()
}

#[test]
fn plot_data_from_decay_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = shipped("stability_decay.toml");
    s.base.discretization.t_end = 1.0;
    s.base.discretization.n_modes = 8;
    s.sweep.robustness = false;
    s.out = Some(dir.path().to_path_buf());
    run_stability_decay(&s).unwrap();
    let files = emit_plot_data(dir.path()).unwrap();
    assert!(files.iter().any(|f| f.ends_with("decay_loglinear.csv")));
    assert_eq!(header(&dir.path().join("decay_loglinear.csv")), "t,log_perturbation_sq,fit_line");
    let first = std::fs::read(dir.path().join("norms_vs_t.csv")).unwrap();
    emit_plot_data(dir.path()).unwrap();
    assert_eq!(first, std::fs::read(dir.path().join("norms_vs_t.csv")).unwrap());
    assert!(emit_plot_data(&dir.path().join("missing")).is_err());
}

#[test]
fn weak_sweep_with_zero_data() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = coarse(SimConfig::small(Variant::Weak));
    c.model.u_swim = 0.0;
    c.discretization.t_end = 0.2;
    let mut s = ExperimentSpec::new(ExperimentKind::WeakConvergence, c);
    s.sweep.n_values = vec![4, 8];
    s.out = Some(dir.path().to_path_buf());
    let r = run_weak_convergence(&s).unwrap();
    assert!(r.pass, "{:?}", r.failures());
    for a in r.assertions.iter().filter(|a| a.name.contains("difference")) {
        assert!(a.value <= 1e-10, "{a:?}");
    }
    let n4 = dir.path().join("n4");
    let env = read_csv(&n4.join("envelope.csv")).unwrap();
    let diag = read_csv(&n4.join("diagnostics.csv")).unwrap();
    assert_eq!(env.1.len(), diag.1.len());
    emit_plot_data(&n4).unwrap();
    assert_eq!(header(&n4.join("envelope_vs_t.csv")), "t,monitored,bound");
}

#[test]
fn global_smalldata_zero_and_large_data() {
    let mut s = shipped("global_smalldata.toml");
    s.base.discretization.n_modes = 8;
    s.base.discretization.t_end = 2.0;
    s.sweep.samples = 50;
    s.base.initial.velocity_amplitude = 0.0;
    s.base.initial.concentration_amplitude = 0.0;
    let r = run_global_smalldata(&s).unwrap();
    assert!(r.assertion("small-data conditions hold").unwrap().pass);
    s.base.initial.velocity_amplitude = 1.0;
    let r = run_global_smalldata(&s).unwrap();
    assert!(!r.pass);
    assert!(!r.assertion("small-data conditions hold").unwrap().pass);
}

#[test]
fn twin_without_perturbation() {
    let mut s = shipped("uniqueness_twin.toml");
    s.base.discretization.n_modes = 8;
    s.base.discretization.t_end = 0.5;
    s.sweep.samples = 50;
    let r = run_uniqueness_twin(&s, 0.0).unwrap();
    assert!(r.assertion("twin diagnostics byte-identical").unwrap().pass);
    assert_eq!(r.assertion("twin max coefficient difference").unwrap().value, 0.0);
}

#[test]
fn run_experiment_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = shipped("local_window.toml");
    s.base.discretization.n_modes = 8;
    s.sweep.samples = 50;
    s.out = Some(dir.path().to_path_buf());
    let r = run_experiment(&s).unwrap();
    assert!(dir.path().join("report.json").exists());
    assert!(r.assertion("T* > 0").unwrap().pass);
}

#[test]
fn thread_count_from_environment() {
    std::env::set_var("BIOCONVECT_THREADS", "3");
    assert_eq!(worker_pool().unwrap().current_num_threads(), 3);
    std::env::set_var("BIOCONVECT_THREADS", "many");
    assert!(worker_pool().is_err());
    std::env::remove_var("BIOCONVECT_THREADS");
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_bioconvect")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = coarse(SimConfig::small(Variant::Weak));
    c.discretization.t_end = 0.1;
    c.forcing.kind = ForcingKind::Cellular;
    c.forcing.amplitude = 0.1;
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, c.to_toml_string().unwrap()).unwrap();
    let cfg = cfg.to_str().unwrap();
    let out = dir.path().join("run");

    let o = cli(&["evolve", "-c", cfg, "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("diagnostics.csv").exists() && out.join("monitors.csv").exists());

    let o = cli(&["emit-plots", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(cli(&["emit-plots", dir.path().join("nope").to_str().unwrap()]).status.code(), Some(1));

    let o = cli(&["eigs", "-c", cfg]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["gram_error_velocity"].as_f64().unwrap() < 1e-10);

    // weak data with forcing that never switches off cannot satisfy the small-data conditions
    assert_eq!(cli(&["check-smallness", "-c", cfg, "--samples", "20"]).status.code(), Some(2));
    assert_eq!(cli(&["evolve", "-c", "/nonexistent.toml", "-o", out.to_str().unwrap()]).status.code(), Some(1));
    let spec = configs().join("local_window.toml");
    assert_eq!(cli(&["experiment", "weak-convergence", "-s", spec.to_str().unwrap()]).status.code(), Some(1));
}
