//! Dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Block-diagonal matrix.
pub fn block_diag(blocks: &[&CMatrix]) -> CMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let (mut r, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r, c0), b.shape()).copy_from(*b);
        r += b.nrows();
        c0 += b.ncols();
    }
    out
}

/// Matrix exponential (Padé approximant with scaling and squaring).
pub fn expm(m: &CMatrix) -> CMatrix {
    if m.nrows() == 0 {
        return m.clone();
    }
    m.exp()
}

pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    m.clone().try_inverse().ok_or(Error::Singular("matrix inverse"))
}

/// Numerical rank with a relative singular-value threshold.
pub fn rank(m: &CMatrix, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = SVD::new(m.clone(), false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Nullity with an absolute singular-value threshold.
pub fn nullity_abs(m: &CMatrix, abs_tol: f64) -> usize {
    let svd = SVD::new(m.clone(), false, false);
    m.ncols() - svd.singular_values.iter().filter(|&&s| s > abs_tol).count()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(m.nrows(), m.ncols());
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vecs)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    max_diff(m, &m.adjoint()) <= tol
}

pub fn asymmetry(m: &CMatrix) -> f64 {
    max_diff(m, &m.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_rotation() {
        let t = std::f64::consts::FRAC_PI_2;
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0), c(t), c(-t), c(0.0)]);
        let e = expm(&m);
        let want = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(-1.0), c(0.0)]);
        assert!(max_diff(&e, &want) < 1e-14);
    }

    #[test]
    fn eigen_sorted() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0), Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), c(0.0)]);
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let d = vecs.adjoint() * &m * &vecs;
        assert!((d[(0, 0)].re + 1.0).abs() < 1e-13);
    }

    #[test]
    fn rank_and_blocks() {
        let a = identity(2);
        let b = CMatrix::zeros(1, 1);
        let m = block_diag(&[&a, &b]);
        assert_eq!(m.shape(), (3, 3));
        assert_eq!(rank(&m, 1e-12), 2);
        assert_eq!(nullity_abs(&m, 1e-12), 1);
    }
}
