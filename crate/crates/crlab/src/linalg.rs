//! Thin helpers over `faer` dense factorizations.

use crate::error::{Error, Result};
use faer::linalg::solvers::Solve;
use faer::{Mat, MatMut, MatRef, Par, Side};

pub fn from_rows(rows: &[Vec<f64>]) -> Mat<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    Mat::from_fn(n, m, |i, j| rows[i][j])
}

pub fn col(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub fn to_vec(m: MatRef<'_, f64>) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

pub fn matvec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    to_vec((a * col(x)).as_ref())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Frobenius norm.
pub fn fro(a: &Mat<f64>) -> f64 {
    a.norm_l2()
}

pub fn symmetrize(a: &mut Mat<f64>) {
    for i in 0..a.nrows() {
        for j in 0..i {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Lower Cholesky factor `L` with `A = L L^T`.
pub fn cholesky(a: &Mat<f64>) -> Result<Mat<f64>> {
    let f = a.llt(Side::Lower).map_err(|e| Error::NotSpd(format!("{e:?}")))?;
    Ok(f.L().to_owned())
}

/// Overwrites `b` with `L^{-1} b`.
pub fn lower_solve_in_place(l: MatRef<'_, f64>, b: MatMut<'_, f64>) {
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l, b, Par::Seq);
}

/// Overwrites `b` with `L^{-T} b`.
pub fn lower_transpose_solve_in_place(l: MatRef<'_, f64>, b: MatMut<'_, f64>) {
    faer::linalg::triangular_solve::solve_upper_triangular_in_place(l.transpose(), b, Par::Seq);
}

/// Solves `A x = b` for SPD `A`.
pub fn spd_solve(a: &Mat<f64>, b: &Mat<f64>) -> Result<Mat<f64>> {
    let f = a.llt(Side::Lower).map_err(|e| Error::NotSpd(format!("{e:?}")))?;
    Ok(f.solve(b))
}

pub fn lu_solve(a: &Mat<f64>, b: &[f64]) -> Vec<f64> {
    to_vec(a.partial_piv_lu().solve(col(b)).as_ref())
}

/// Eigenvalues (ascending) and eigenvectors of a symmetric matrix.
pub fn sym_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let e = a.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = e.S().column_vector();
    Ok(((0..s.nrows()).map(|i| s[i]).collect(), e.U().to_owned()))
}

pub fn sym_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))
}

/// Minimum-norm least-squares solution of `A x = b`, discarding singular
/// values below `rtol * s_max`. Also returns the numerical rank.
pub fn min_norm_solve(a: &Mat<f64>, b: &[f64], rtol: f64) -> Result<(Vec<f64>, usize)> {
    let (m, n) = (a.nrows(), a.ncols());
    if m == 0 || n == 0 {
        return Ok((vec![0.0; n], 0));
    }
    let svd = a.thin_svd().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let u = svd.U();
    let v = svd.V();
    let smax = s[0];
    let mut x = vec![0.0; n];
    let mut rank = 0;
    for i in 0..s.nrows() {
        if s[i] <= rtol * smax || s[i] == 0.0 {
            continue;
        }
        rank += 1;
        let c: f64 = (0..m).map(|r| u[(r, i)] * b[r]).sum::<f64>() / s[i];
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += c * v[(j, i)];
        }
    }
    Ok((x, rank))
}
