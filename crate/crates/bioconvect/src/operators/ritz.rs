//! Constrained Rayleigh-Ritz for symmetric pencils `S x = lambda M x`.

use crate::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

pub(crate) struct Ritz {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<f64>>,
    pub residual: f64,
    pub reduced_dim: usize,
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let a = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = a;
            m[(j, i)] = a;
        }
    }
}

/// Orthonormal basis of `{x : C x = 0}`, assuming the rows of `C` are
/// linearly independent.
pub(crate) fn null_space(c: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    if c.nrows() == 0 {
        return DMatrix::identity(dim, dim);
    }
    let mut cn = c.clone();
    for mut row in cn.row_iter_mut() {
        let nrm = row.norm();
        if nrm > 0.0 {
            row /= nrm;
        }
    }
    let mut g = cn.transpose() * &cn;
    symmetrize(&mut g);
    let eig = SymmetricEigen::new(g);
    let mut idx: Vec<usize> = (0..dim).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let keep = dim - c.nrows().min(dim);
    let mut n = DMatrix::zeros(dim, keep);
    for (col, &i) in idx.iter().take(keep).enumerate() {
        n.set_column(col, &eig.eigenvectors.column(i));
    }
    n
}

fn fix_sign(v: &mut DVector<f64>) {
    let big = v.amax();
    if let Some(x) = v.iter().find(|x| x.abs() > 1e-6 * big).copied() {
        if x < 0.0 {
            v.neg_mut();
        }
    }
}

pub(crate) fn constrained_ritz(stiff: &DMatrix<f64>, mass: &DMatrix<f64>, constraints: &DMatrix<f64>) -> Result<Ritz> {
    let dim = stiff.nrows();
    let n = null_space(constraints, dim);
    let mut sr = n.transpose() * stiff * &n;
    let mut mr = n.transpose() * mass * &n;
    symmetrize(&mut sr);
    symmetrize(&mut mr);
    let r = sr.nrows();
    let chol = Cholesky::new(mr.clone()).ok_or_else(|| Error::Singular("mass matrix not positive definite".into()))?;
    let linv = chol
        .l()
        .solve_lower_triangular(&DMatrix::identity(r, r))
        .ok_or_else(|| Error::Singular("triangular inverse".into()))?;
    let mut b = &linv * &sr * linv.transpose();
    symmetrize(&mut b);
    let eig = SymmetricEigen::new(b);
    let mut idx: Vec<usize> = (0..r).collect();
    idx.sort_by(|&a, &c| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[c]).then(a.cmp(&c)));
    let mut values = Vec::with_capacity(r);
    let mut vectors = Vec::with_capacity(r);
    let mut residual = 0.0_f64;
    for &i in &idx {
        let lam = eig.eigenvalues[i];
        let x = linv.transpose() * eig.eigenvectors.column(i);
        let res = (&sr * &x - lam * (&mr * &x)).amax() / (1.0 + lam.abs());
        residual = residual.max(res);
        let mut a = &n * x;
        fix_sign(&mut a);
        values.push(lam);
        vectors.push(a);
    }
    Ok(Ritz { values, vectors, residual, reduced_dim: r })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_annihilated() {
        let c = DMatrix::from_row_slice(2, 4, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0, -1.0, 2.0]);
        let n = null_space(&c, 4);
        assert_eq!(n.ncols(), 2);
        assert!((&c * &n).amax() < 1e-12);
        let g = n.transpose() * &n;
        assert!((g - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn diagonal_pencil() {
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let m = DMatrix::identity(3, 3) * 2.0;
        let r = constrained_ritz(&s, &m, &DMatrix::zeros(0, 3)).unwrap();
        assert!((r.values[0] - 0.5).abs() < 1e-14);
        assert!((r.values[2] - 1.5).abs() < 1e-14);
    }
}
