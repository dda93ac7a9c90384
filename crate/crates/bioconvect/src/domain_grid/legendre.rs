//! Legendre polynomials, Gauss and Gauss-Lobatto rules, and the Lobatto
//! collocation derivative. Everything lives on the reference interval [-1, 1].

use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Values, first and second derivatives of `P_0..=P_nmax` at `x`.
pub fn legendre_table(x: f64, nmax: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; nmax + 1];
    let mut dp = vec![0.0; nmax + 1];
    let mut d2p = vec![0.0; nmax + 1];
    p[0] = 1.0;
    if nmax >= 1 {
        p[1] = x;
        dp[1] = 1.0;
    }
    for n in 1..nmax {
        let nf = n as f64;
        p[n + 1] = ((2.0 * nf + 1.0) * x * p[n] - nf * p[n - 1]) / (nf + 1.0);
        dp[n + 1] = dp[n - 1] + (2.0 * nf + 1.0) * p[n];
        d2p[n + 1] = d2p[n - 1] + (2.0 * nf + 1.0) * dp[n];
    }
    (p, dp, d2p)
}

/// Normalisation making `sqrt((2m+1)/2) P_m` orthonormal on [-1, 1].
pub fn norm_factor(m: usize) -> f64 {
    ((2.0 * m as f64 + 1.0) / 2.0).sqrt()
}

/// Orthonormal Legendre values and derivatives up to degree `nmax`.
pub fn orthonormal_table(x: f64, nmax: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (mut p, mut dp, mut d2p) = legendre_table(x, nmax);
    for m in 0..=nmax {
        let s = norm_factor(m);
        p[m] *= s;
        dp[m] *= s;
        d2p[m] *= s;
    }
    (p, dp, d2p)
}

/// `int_{-1}^{x} Ptilde_m` for the orthonormal family, m = 0..=nmax.
pub fn orthonormal_antiderivative(x: f64, nmax: usize) -> Vec<f64> {
    let (p, _, _) = legendre_table(x, nmax + 1);
    (0..=nmax)
        .map(|m| {
            let raw = if m == 0 {
                x + 1.0
            } else {
                (p[m + 1] - p[m - 1]) / (2.0 * m as f64 + 1.0)
            };
            raw * norm_factor(m)
        })
        .collect()
}

/// Gauss-Legendre nodes and weights, ascending, exact to degree 2n-1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut r = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp, _) = legendre_table(r, n);
            let dr = p[n] / dp[n];
            r -= dr;
            if dr.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp, _) = legendre_table(r, n);
        x[n - 1 - i] = r;
        w[n - 1 - i] = 2.0 / ((1.0 - r * r) * dp[n] * dp[n]);
    }
    (x, w)
}

/// Gauss-Lobatto-Legendre rule with `npts` points, ascending.
/// Exact for polynomials of degree `2 * npts - 3`.
pub fn gauss_lobatto(npts: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(npts >= 2);
    let n = npts - 1;
    let nf = n as f64;
    let mut x = vec![0.0; npts];
    x[0] = -1.0;
    x[n] = 1.0;
    for i in 1..n {
        // Chebyshev-Lobatto guess, refined by Newton on P_n'.
        let mut r = -(PI * i as f64 / nf).cos();
        for _ in 0..100 {
            let (_, dp, d2p) = legendre_table(r, n);
            let dr = dp[n] / d2p[n];
            r -= dr;
            if dr.abs() < 1e-16 {
                break;
            }
        }
        x[i] = r;
    }
    let w = x
        .iter()
        .map(|&r| {
            let (p, _, _) = legendre_table(r, n);
            2.0 / (nf * (nf + 1.0) * p[n] * p[n])
        })
        .collect();
    (x, w)
}

/// Collocation derivative on Lobatto nodes (reference interval).
pub fn lobatto_derivative(x: &[f64]) -> DMatrix<f64> {
    let npts = x.len();
    let n = npts - 1;
    let pn: Vec<f64> = x.iter().map(|&r| legendre_table(r, n).0[n]).collect();
    let mut d = DMatrix::zeros(npts, npts);
    for i in 0..npts {
        let mut rowsum = 0.0;
        for j in 0..npts {
            if i != j {
                let v = pn[i] / (pn[j] * (x[i] - x[j]));
                d[(i, j)] = v;
                rowsum += v;
            }
        }
        // Negative-sum diagonal keeps constants in the exact null space.
        d[(i, i)] = -rowsum;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_high_degree() {
        let (x, w) = gauss_legendre(12);
        // int x^22 over [-1,1] = 2/23
        let s: f64 = x.iter().zip(&w).map(|(a, b)| a.powi(22) * b).sum();
        assert!((s - 2.0 / 23.0).abs() < 1e-14);
    }

    #[test]
    fn lobatto_exact_to_2n_minus_3() {
        let (x, w) = gauss_lobatto(10);
        let s: f64 = x.iter().zip(&w).map(|(a, b)| a.powi(16) * b).sum();
        assert!((s - 2.0 / 17.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn derivative_matrix_on_polynomial() {
        let (x, _) = gauss_lobatto(16);
        let d = lobatto_derivative(&x);
        let f: Vec<f64> = x.iter().map(|r| r.powi(7) - 3.0 * r * r).collect();
        for i in 0..x.len() {
            let df: f64 = (0..x.len()).map(|j| d[(i, j)] * f[j]).sum();
            let exact = 7.0 * x[i].powi(6) - 6.0 * x[i];
            assert!((df - exact).abs() < 1e-11, "{df} vs {exact}");
        }
    }

    #[test]
    fn antiderivative_matches_quadrature() {
        let xs = 0.3;
        let anti = orthonormal_antiderivative(xs, 6);
        let (gx, gw) = gauss_legendre(20);
        for m in 0..=6 {
            // map [-1, xs] onto the Gauss interval
            let half = (xs + 1.0) / 2.0;
            let s: f64 = gx
                .iter()
                .zip(&gw)
                .map(|(g, wt)| {
                    let y = -1.0 + half * (g + 1.0);
                    orthonormal_table(y, 6).0[m] * wt * half
                })
                .sum();
            assert!((s - anti[m]).abs() < 1e-13);
        }
    }
}
