//! Gronwall comparator and the local-window condition.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Cumulative trapezoid integral, starting at 0.
pub fn cumulative_trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    for k in 0..t.len() {
        if k > 0 {
            acc += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
        }
        out.push(acc);
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GronwallReport {
    pub hypothesis_holds: bool,
    pub hypothesis_max_violation: f64,
    pub a_nondecreasing: bool,
    pub b_nonnegative: bool,
    /// `a(t) exp(int b) - (zeta + int zeta*)` per sample.
    pub margins: Vec<f64>,
    pub max_violation: f64,
    pub pass: bool,
}

/// Checks the integral hypothesis `zeta + int zeta* <= a + int b zeta` and the
/// conclusion `zeta + int zeta* <= a exp(int b)` at every sample.
pub fn gronwall_envelope(t: &[f64], a: &[f64], b: &[f64], zeta: &[f64], zeta_star: &[f64]) -> Result<GronwallReport> {
    let n = t.len();
    if [a.len(), b.len(), zeta.len(), zeta_star.len()].iter().any(|&l| l != n) || n == 0 {
        return Err(Error::Shape("gronwall series must share the time grid".into()));
    }
    let tol = 1e-12;
    let iz = cumulative_trapezoid(t, zeta_star);
    let bz: Vec<f64> = b.iter().zip(zeta).map(|(x, y)| x * y).collect();
    let ibz = cumulative_trapezoid(t, &bz);
    let ib = cumulative_trapezoid(t, b);
    let mut hyp = 0.0_f64;
    let mut margins = Vec::with_capacity(n);
    for k in 0..n {
        let lhs = zeta[k] + iz[k];
        let scale = 1.0 + lhs.abs();
        hyp = hyp.max((lhs - a[k] - ibz[k]) / scale);
        margins.push(a[k] * ib[k].exp() - lhs);
    }
    let max_violation = margins.iter().map(|m| -m).fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let scale = 1.0 + a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(GronwallReport {
        hypothesis_holds: hyp <= tol,
        hypothesis_max_violation: hyp.max(0.0),
        a_nondecreasing: a.windows(2).all(|w| w[1] >= w[0]),
        b_nonnegative: b.iter().all(|&v| v >= 0.0),
        pass: max_violation <= tol * scale,
        margins,
        max_violation,
    })
}

/// `1/2 ln(3/2)`
pub fn window_threshold() -> f64 {
    0.5 * 1.5_f64.ln()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Lemma10Window {
    pub t1: f64,
    /// Left side of the window condition at `t1`.
    pub lhs: f64,
    pub horizon_reached: bool,
}

const GL3: [(f64, f64); 3] = [(-0.774_596_669_241_483_4, 5.0 / 9.0), (0.0, 8.0 / 9.0), (0.774_596_669_241_483_4, 5.0 / 9.0)];

/// Left side of the window condition with `g`, `h` linear between samples.
struct WindowIntegrand<'a> {
    phi0: f64,
    t: &'a [f64],
    h: &'a [f64],
    g: &'a [f64],
    c: f64,
    /// `int_0^{t_k} g`
    gi: Vec<f64>,
    /// left side at `t_k`
    fk: Vec<f64>,
}

impl<'a> WindowIntegrand<'a> {
    fn new(phi0: f64, t: &'a [f64], h: &'a [f64], g: &'a [f64], c: f64) -> Self {
        let gi = cumulative_trapezoid(t, g);
        let mut w = WindowIntegrand { phi0, t, h, g, c, gi, fk: vec![0.0] };
        for k in 1..t.len() {
            let v = w.fk[k - 1] + w.partial(k - 1, t[k]);
            w.fk.push(v);
        }
        w
    }

    /// Integral over `[t_k, s]` with `s` inside interval k.
    fn partial(&self, k: usize, s: f64) -> f64 {
        let (t0, t1) = (self.t[k], self.t[k + 1]);
        let len = t1 - t0;
        let lin = |y: &[f64], x: f64| y[k] + (y[k + 1] - y[k]) * (x - t0) / len;
        let span = s - t0;
        let mut acc = 0.0;
        for (xi, wi) in GL3 {
            let x = t0 + 0.5 * span * (xi + 1.0);
            let gint = self.gi[k] + 0.5 * (x - t0) * (self.g[k] + lin(self.g, x));
            let base = 2.0 * self.phi0 + 2.0 * gint;
            acc += wi * (self.c * base * base + lin(self.h, x));
        }
        0.5 * span * acc
    }

    fn eval(&self, k: usize, s: f64) -> f64 {
        self.fk[k] + self.partial(k, s)
    }
}

/// Largest `T1` on the sampled horizon with
/// `C int_0^T1 (2 phi0 + 2 int_0^s g)^2 ds + int_0^T1 h <= 1/2 ln(3/2)`.
pub fn lemma10_window(phi0: f64, t: &[f64], h: &[f64], g: &[f64], c: f64) -> Result<Lemma10Window> {
    let n = t.len();
    if n < 2 || h.len() != n || g.len() != n {
        return Err(Error::Shape("window series must share a grid of at least two points".into()));
    }
    if !(c > 0.0) || phi0 < 0.0 || h.iter().chain(g).any(|v| *v < 0.0) {
        return Err(Error::Config("lemma10_window needs C > 0, phi0 >= 0, h, g >= 0".into()));
    }
    let target = window_threshold();
    let w = WindowIntegrand::new(phi0, t, h, g, c);
    let Some(k) = (1..n).find(|&k| !(w.fk[k] <= target)) else {
        return Ok(Lemma10Window { t1: t[n - 1], lhs: w.fk[n - 1], horizon_reached: true });
    };
    let k = k - 1;
    let (mut lo, mut hi) = (t[k], t[k + 1]);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if w.eval(k, mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1e-300) {
            break;
        }
    }
    Ok(Lemma10Window { t1: lo, lhs: w.eval(k, lo), horizon_reached: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, t: f64) -> Vec<f64> {
        (0..n).map(|i| t * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn window_closed_forms() {
        let t = grid(101, 10.0);
        let z = vec![0.0; 101];
        let (c, phi0) = (0.7, 0.3);
        let w = lemma10_window(phi0, &t, &z, &z, c).unwrap();
        let exact = 1.5_f64.ln() / (8.0 * c * phi0 * phi0);
        assert!((w.t1 - exact).abs() < 1e-10);
        let h0 = 0.05;
        let h = vec![h0; 101];
        let w = lemma10_window(0.0, &t, &h, &z, c).unwrap();
        assert!((w.t1 - 1.5_f64.ln() / (2.0 * h0)).abs() < 1e-10);
    }

    #[test]
    fn gronwall_saturated_constant() {
        let t = grid(2001, 1.0);
        let (a0, b0) = (2.0, 0.8);
        let zeta: Vec<f64> = t.iter().map(|s| a0 * (b0 * s).exp()).collect();
        let r = gronwall_envelope(&t, &vec![a0; t.len()], &vec![b0; t.len()], &zeta, &vec![0.0; t.len()]).unwrap();
        assert!(r.margins.iter().all(|m| m.abs() < 1e-12));
    }
}
