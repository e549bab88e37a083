//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real_diag(values: &[f64]) -> CMat {
    let n = values.len();
    CMat::from_fn(n, n, |i, j| if i == j { c64(values[i], 0.0) } else { C64::new(0.0, 0.0) })
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMat {
    CMat::from_fn(rows, cols, |i, j| c64(data[i * cols + j], 0.0))
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Singular values in descending order; empty for degenerate shapes.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Vec::new();
    }
    if r == 1 && c == 1 {
        return vec![m[(0, 0)].norm()];
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Singular values together with a basis of right singular vectors, both
/// ordered by descending singular value. The basis is complete (`cols`
/// vectors); trailing vectors beyond `min(rows, cols)` span the forced kernel.
pub fn right_singular_system(m: &CMat) -> (Vec<f64>, CMat) {
    let (r, c) = m.shape();
    if c == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let padded = if r < c {
        let mut p = CMat::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut values = Vec::with_capacity(c);
    let mut basis = CMat::zeros(c, c);
    for (col, &idx) in order.iter().enumerate() {
        values.push(if col < r.min(c) { svd.singular_values[idx] } else { 0.0 });
        for i in 0..c {
            basis[(i, col)] = v_t[(idx, i)].conj();
        }
    }
    (values, basis)
}

/// Orthonormal basis of the kernel. With `dim = Some(k)` the `k` weakest right
/// singular directions are returned; otherwise the τ-threshold decides.
pub fn kernel_basis(m: &CMat, dim: Option<usize>) -> CMat {
    let c = m.ncols();
    if c == 0 {
        return CMat::zeros(0, 0);
    }
    let (s, v) = right_singular_system(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let k = dim.unwrap_or_else(|| s.iter().filter(|&&x| x <= tol::KERNEL_TAU * smax).count());
    v.columns(c - k, k).into_owned()
}

pub fn kernel_dim(m: &CMat) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().filter(|&&x| x > tol::KERNEL_TAU * smax).count();
    m.ncols() - rank
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= tol * max_abs(m).max(1.0)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let sym = (m + m.adjoint()) * c64(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

pub fn check_positive_definite(m: &CMat, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!("{what}: metric must be square")));
    }
    if !is_hermitian(m, tol::HERMITIAN_TOL) {
        return Err(Error::InvalidInput(format!("{what}: metric is not Hermitian")));
    }
    let (vals, _) = hermitian_eigen(m);
    if let Some(&lo) = vals.first() {
        if lo <= 0.0 {
            return Err(Error::NotPositive { min_eigenvalue: lo });
        }
    }
    Ok(())
}

/// `m^p` for a positive definite Hermitian `m` via its eigendecomposition.
pub fn hermitian_power(m: &CMat, p: f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let d = real_diag(&vals.iter().map(|v| v.powf(p)).collect::<Vec<_>>());
    &vecs * d * vecs.adjoint()
}

pub fn log_det_hpd(m: &CMat) -> f64 {
    hermitian_eigen(m).0.iter().map(|v| v.ln()).sum()
}

/// `log |det m|` for a square matrix, via singular values.
pub fn log_abs_det(m: &CMat) -> f64 {
    singular_values(m).iter().map(|s| s.ln()).sum()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn block_diag(blocks: &[CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(n, m);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}
