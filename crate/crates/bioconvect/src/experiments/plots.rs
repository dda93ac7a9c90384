use super::fit::DecayFit;
use crate::io::{read_csv, write_csv};
use crate::{Error, Result};
use std::path::{Path, PathBuf};

fn column(header: &[String], name: &str, path: &Path) -> Result<usize> {
    header.iter().position(|h| h == name).ok_or_else(|| Error::Missing(format!("column '{name}' in {}", path.display())))
}

fn select(path: &Path, cols: &[&str]) -> Result<Vec<Vec<f64>>> {
    let (h, rows) = read_csv(path)?;
    let idx: Vec<usize> = cols.iter().map(|c| column(&h, c, path)).collect::<Result<_>>()?;
    Ok(rows.iter().map(|r| idx.iter().map(|&i| r[i]).collect()).collect())
}

/// Writes one tidy CSV per panel into `run_dir` and returns the paths:
///
/// - `norms_vs_t.csv` from `diagnostics.csv` (required)
/// - `pi_vs_t.csv` from `monitors.csv`
/// - `decay_loglinear.csv` from `perturbation.csv` and `decay_fit.json`
/// - `envelope_vs_t.csv` from `envelope.csv` or `uniqueness.csv`
pub fn emit_plot_data(run_dir: &Path) -> Result<Vec<PathBuf>> {
    let diag = run_dir.join("diagnostics.csv");
    if !diag.exists() {
        return Err(Error::Missing(format!("{} not found", diag.display())));
    }
    let mut out = Vec::new();
    let cols = ["t", "u_l2", "du_l2", "conc_l2", "a1_xi", "mass"];
    let p = run_dir.join("norms_vs_t.csv");
    write_csv(&p, &cols, &select(&diag, &cols)?)?;
    out.push(p);

    let mon = run_dir.join("monitors.csv");
    if mon.exists() {
        let p = run_dir.join("pi_vs_t.csv");
        write_csv(&p, &["t", "pi"], &select(&mon, &["t", "pi"])?)?;
        out.push(p);
    }

    let pert = run_dir.join("perturbation.csv");
    let fitp = run_dir.join("decay_fit.json");
    if pert.exists() && fitp.exists() {
        let fit: DecayFit = serde_json::from_str(&std::fs::read_to_string(&fitp)?)?;
        let rows: Vec<Vec<f64>> = select(&pert, &["t", "perturbation_sq"])?
            .into_iter()
            .filter(|r| r[1] > 0.0)
            .map(|r| vec![r[0], r[1].ln(), fit.line(r[0])])
            .collect();
        let p = run_dir.join("decay_loglinear.csv");
        write_csv(&p, &["t", "log_perturbation_sq", "fit_line"], &rows)?;
        out.push(p);
    }

    let env = run_dir.join("envelope.csv");
    let uni = run_dir.join("uniqueness.csv");
    let src = if env.exists() {
        Some((env, ["t", "monitored", "bound"]))
    } else if uni.exists() {
        Some((uni, ["t", "e", "bound"]))
    } else {
        None
    };
    if let Some((path, cols)) = src {
        let p = run_dir.join("envelope_vs_t.csv");
        write_csv(&p, &["t", "monitored", "bound"], &select(&path, &cols)?)?;
        out.push(p);
    }
    Ok(out)
}
