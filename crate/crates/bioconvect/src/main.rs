use bioconvect::estimates::{
    energy_envelope_monitor, global_smallness_check, monitor_strong_estimates, predict_window, SampledConstants,
};
use bioconvect::evolution::config::Variant;
use bioconvect::evolution::{integrate, GalerkinSystem, SimConfig};
use bioconvect::experiments::{emit_plot_data, run_experiment, ExperimentKind, ExperimentSpec};
use bioconvect::io::{write_json, write_run, write_state_fields};
use bioconvect::operators::{constants::constants_report, stokes_bc_residual};
use bioconvect::stationary::{solve_malpha, solve_stationary, verify_malpha_bounds};
use bioconvect::Result;
use clap::{Parser, Subcommand};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bioconvect", version, about = "Galerkin solver and estimate monitors for a bioconvection model")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenvalues and basis diagnostics.
    Eigs {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Auxiliary concentration profile and its bounds.
    Malpha {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Stationary solution by Picard iteration.
    Stationary {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Time integration; writes diagnostics, monitors and plot data.
    Evolve {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Small-data conditions for the configured data.
    CheckSmallness {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Integrates and checks the envelope (weak) or window monitors (strong).
    Monitor {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Runs a canned experiment from a spec file.
    Experiment {
        kind: String,
        #[arg(short, long)]
        spec: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Regenerates plot CSVs for a finished run directory.
    EmitPlots { run_dir: PathBuf },
}

fn print<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn load(p: &PathBuf) -> Result<(SimConfig, GalerkinSystem)> {
    let c = SimConfig::load(p)?;
    let s = GalerkinSystem::new(&c)?;
    Ok((c, s))
}

fn exec(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Eigs { config } => {
            let (c, sys) = load(&config)?;
            let d = &sys.domain;
            let gv = sys.basis.velocity.gram(d);
            let gc = sys.basis.concentration.gram(d);
            let off = |g: &nalgebra::DMatrix<f64>| {
                (g - nalgebra::DMatrix::<f64>::identity(g.nrows(), g.ncols())).abs().max()
            };
            print(&json!({
                "velocity": sys.basis.velocity.eigenvalues(),
                "concentration": sys.basis.concentration.eigenvalues(),
                "gram_error_velocity": off(&gv),
                "gram_error_concentration": off(&gc),
                "stokes_bc_residual": stokes_bc_residual(d, &sys.basis.velocity),
                "robin_residual": sys.basis.concentration.robin_residual(d),
                "constants": constants_report(d, c.model.theta, c.model.u_swim)?,
            }))?;
            Ok(true)
        }
        Cmd::Malpha { config } => {
            let (c, sys) = load(&config)?;
            let m = solve_malpha(&sys.domain, c.model.theta, c.model.u_swim, c.model.alpha)?;
            let r = verify_malpha_bounds(&m);
            print(&json!({"norms": m.diagnostics, "bounds": r}))?;
            Ok(r.all_pass)
        }
        Cmd::Stationary { config, out } => {
            let (_, sys) = load(&config)?;
            let s = solve_stationary(&sys)?;
            let summary = json!({
                "residual": s.residual,
                "mass": s.mass,
                "iterations": s.trace.len(),
                "contraction": s.contraction_factors(),
                "trace": s.trace,
            });
            if let Some(dir) = out {
                write_state_fields(&dir.join("stationary.csv"), &sys.domain, 0.0, &s.u_stat, &s.m_stat)?;
                write_json(&dir.join("stationary.json"), &summary)?;
            }
            print(&summary)?;
            Ok(s.converged)
        }
        Cmd::Evolve { config, out } => {
            let (_, sys) = load(&config)?;
            let traj = integrate(&sys, sys.initial_state()?)?;
            write_run(&out, &sys, &traj)?;
            emit_plot_data(&out)?;
            print(&json!({
                "steps": traj.steps,
                "dt": traj.dt,
                "blowup": traj.blowup,
                "max_energy_residual": traj.ledger.max_abs_residual(),
                "out": out,
            }))?;
            Ok(traj.blowup.is_none())
        }
        Cmd::CheckSmallness { config, beta, samples } => {
            let (c, sys) = load(&config)?;
            let sampled = SampledConstants::estimate(&sys, samples, c.seed);
            let r = global_smallness_check(&sys, &sampled, beta)?;
            print(&json!({"report": r, "sampled": sampled}))?;
            Ok(r.pass)
        }
        Cmd::Monitor { config, out, samples } => {
            let (c, sys) = load(&config)?;
            let s0 = sys.initial_state()?;
            let traj = integrate(&sys, s0.clone())?;
            let pass = match c.model.variant {
                Variant::Weak => {
                    let e = energy_envelope_monitor(&sys, &traj)?;
                    print(&e)?;
                    e.pass
                }
                Variant::Strong => {
                    let sampled = SampledConstants::estimate(&sys, samples, c.seed);
                    let w = predict_window(&sys, &s0, &sampled, c.discretization.t_end)?;
                    let m = monitor_strong_estimates(&sys, &traj, &sampled, w.t_star)?;
                    print(&json!({"window": w, "monitors": m}))?;
                    m.pass
                }
            };
            if let Some(dir) = out {
                write_run(&dir, &sys, &traj)?;
                emit_plot_data(&dir)?;
            }
            Ok(pass && traj.blowup.is_none())
        }
        Cmd::Experiment { kind, spec, out, delta } => {
            let kind = ExperimentKind::parse(&kind)?;
            let mut s = ExperimentSpec::load(&spec)?;
            if s.kind != kind {
                return Err(bioconvect::Error::Config(format!(
                    "spec is for '{}', not '{}'",
                    s.kind.name(),
                    kind.name()
                )));
            }
            if out.is_some() {
                s.out = out;
            }
            if let Some(d) = delta {
                s.sweep.delta = d;
            }
            let r = run_experiment(&s)?;
            for a in &r.assertions {
                eprintln!("{} {} (value {:.6e}, threshold {:.6e})", if a.pass { "PASS" } else { "FAIL" }, a.name, a.value, a.threshold);
            }
            print(&r)?;
            Ok(r.pass)
        }
        Cmd::EmitPlots { run_dir } => {
            let files = emit_plot_data(&run_dir)?;
            print(&files)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match exec(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
