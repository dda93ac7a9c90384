//! Output files: CSV tables, JSON reports and grid field snapshots.

use crate::domain_grid::{Domain, ScalarField, VectorField};
use crate::evolution::{GalerkinSystem, Trajectory};
use crate::{Error, Result};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(value)?;
    std::fs::write(path, s + "\n")?;
    Ok(())
}

pub fn write_text(path: &Path, s: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Writes a CSV with a header row. Values use `{:.12e}`.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        if r.len() != header.len() {
            return Err(Error::Shape(format!("row of length {} for {} columns", r.len(), header.len())));
        }
        let line: Vec<String> = r.iter().map(|v| format!("{v:.12e}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    write_text(path, &s)
}

/// Reads a numeric CSV written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let s = std::fs::read_to_string(path)?;
    let mut lines = s.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> =
        lines.next().ok_or_else(|| Error::Missing(format!("{} is empty", path.display())))?.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for l in lines.filter(|l| !l.trim().is_empty()) {
        let r: std::result::Result<Vec<f64>, _> = l.split(',').map(|v| v.trim().parse::<f64>()).collect();
        rows.push(r.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?);
    }
    Ok((header, rows))
}

#[derive(Serialize)]
struct FieldHeader<'a> {
    nx: usize,
    nz: usize,
    lx: f64,
    h: f64,
    t: f64,
    columns: &'a [&'a str],
}

/// Grid snapshot as CSV: a `#`-prefixed JSON header, then `x,z,<fields>`.
pub fn write_fields(path: &Path, domain: &Domain, t: f64, names: &[&str], fields: &[&[f64]]) -> Result<()> {
    if names.len() != fields.len() || fields.iter().any(|f| f.len() != domain.npts()) {
        return Err(Error::Shape("field snapshot columns must match the grid".into()));
    }
    let hdr = FieldHeader { nx: domain.nx(), nz: domain.nz(), lx: domain.lx(), h: domain.h(), t, columns: names };
    let mut s = format!("# {}\n", serde_json::to_string(&hdr)?);
    s.push_str("x,z");
    for n in names {
        s.push(',');
        s.push_str(n);
    }
    s.push('\n');
    let nx = domain.nx();
    for (j, &z) in domain.z().iter().enumerate() {
        for (i, &x) in domain.x().iter().enumerate() {
            let _ = write!(s, "{x:.12e},{z:.12e}");
            for f in fields {
                let _ = write!(s, ",{:.12e}", f[j * nx + i]);
            }
            s.push('\n');
        }
    }
    write_text(path, &s)
}

pub fn write_state_fields(path: &Path, domain: &Domain, t: f64, u: &VectorField, m: &ScalarField) -> Result<()> {
    write_fields(path, domain, t, &["u", "w", "m"], &[&u.u.data, &u.w.data, &m.data])
}

pub const MONITOR_HEADER: [&str; 12] = [
    "t", "grad_conc_l2", "grad_xi_l4", "grad_eta_l4", "au_l2", "pi", "eta_l2", "a1_eta", "skew", "dt_xi", "du_l4", "grad_u_inf",
];

/// Rows of `monitors.csv`. `skew` is `|(u.grad u, u)|` from direct quadrature.
pub fn monitor_rows(sys: &GalerkinSystem, traj: &Trajectory) -> Vec<Vec<f64>> {
    let d = &sys.domain;
    let mut rows = Vec::with_capacity(traj.states.len());
    for (k, (s, n)) in traj.states.iter().zip(&traj.ledger.norms).enumerate() {
        let skew = if s.is_finite() {
            let u = sys.velocity(s);
            crate::evolution::forms::trilinear_advection(d, &u, &u, &u).abs()
        } else {
            f64::NAN
        };
        let dt_xi = if k == 0 {
            0.0
        } else {
            let p = &traj.states[k - 1];
            let dt = s.t - p.t;
            if dt > 0.0 {
                s.d.iter().zip(&p.d).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / dt
            } else {
                0.0
            }
        };
        rows.push(vec![
            n.t,
            n.grad_conc_l2,
            n.grad_xi_l4,
            n.grad_eta_l4,
            n.au_l2,
            n.pi,
            n.eta_l2,
            n.a1_eta,
            skew,
            dt_xi,
            n.du_l4,
            n.grad_u_inf,
        ]);
    }
    rows
}

/// `diagnostics.csv`, `monitors.csv`, `trajectory.json` and the final fields.
pub fn write_run(dir: &Path, sys: &GalerkinSystem, traj: &Trajectory) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_text(&dir.join("diagnostics.csv"), &traj.ledger.to_csv())?;
    write_csv(&dir.join("monitors.csv"), &MONITOR_HEADER, &monitor_rows(sys, traj))?;
    write_text(&dir.join("config.toml"), &sys.config.to_toml_string()?)?;
    write_json(&dir.join("trajectory.json"), traj)?;
    let last = traj.last();
    if last.is_finite() {
        write_state_fields(&dir.join("fields_final.csv"), &sys.domain, last.t, &sys.velocity(last), &sys.concentration(last))?;
    }
    Ok(())
}
