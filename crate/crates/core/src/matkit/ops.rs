//! Small dense-matrix helpers shared by the constructions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// The 2x2 symplectic unit `[[0, 1], [-1, 0]]`.
pub fn j2() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
}

/// `diag(diag_pairs(J), 0_zeros)`.
pub fn canonical_theta(pairs: usize, zeros: usize) -> DMatrix<f64> {
    let n = 2 * pairs + zeros;
    let mut t = DMatrix::zeros(n, n);
    for k in 0..pairs {
        t[(2 * k, 2 * k + 1)] = 1.0;
        t[(2 * k + 1, 2 * k)] = -1.0;
    }
    t
}

/// `diag_k(J)`, a `2k x 2k` matrix.
pub fn diag_j(k: usize) -> DMatrix<f64> {
    canonical_theta(k, 0)
}

pub fn frob(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

pub fn frob_c(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Stacks matrices vertically. All inputs must share a column count.
pub fn vstack(parts: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let cols = parts.first().map_or(0, |p| p.ncols());
    let rows = parts.iter().map(|p| p.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for p in parts {
        assert_eq!(p.ncols(), cols, "vstack column mismatch");
        out.view_mut((r, 0), (p.nrows(), cols)).copy_from(*p);
        r += p.nrows();
    }
    out
}

/// Stacks matrices horizontally. All inputs must share a row count.
pub fn hstack(parts: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = parts.first().map_or(0, |p| p.nrows());
    let cols = parts.iter().map(|p| p.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for p in parts {
        assert_eq!(p.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, c), (rows, p.ncols())).copy_from(*p);
        c += p.ncols();
    }
    out
}

/// Copies the block starting at `(r0, c0)` with the given size.
pub fn sub(m: &DMatrix<f64>, r0: usize, c0: usize, rows: usize, cols: usize) -> DMatrix<f64> {
    m.view((r0, c0), (rows, cols)).into_owned()
}

pub fn row(m: &DMatrix<f64>, i: usize) -> DVector<f64> {
    m.row(i).transpose()
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Skew part `(F - F^T) / 2i` of an Ito matrix, returned as a real matrix.
///
/// For Hermitian `F` this is exactly `Im(F)`.
pub fn ito_skew_part(f: &DMatrix<Complex64>) -> DMatrix<f64> {
    let diff = f - f.transpose();
    diff.map(|z| (z / Complex64::new(0.0, 2.0)).re)
}

/// `‖M + Mᵀ‖_max`.
pub fn skew_defect(m: &DMatrix<f64>) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    max_abs(&(m + m.transpose()))
}

/// `‖F - Fᴴ‖_max`.
pub fn hermitian_defect(f: &DMatrix<Complex64>) -> f64 {
    if f.nrows() != f.ncols() {
        return f64::INFINITY;
    }
    (f - f.adjoint())
        .iter()
        .fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Bilinear form `x Θ yᵀ` for row vectors stored as column vectors.
pub fn omega(x: &DVector<f64>, theta: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    (x.transpose() * theta * y)[(0, 0)]
}

/// Permutation matrix `P` with `P[perm[k], k] = 1`, so `P * X` places row `k`
/// of `X` at row `perm[k]`.
pub fn permutation_matrix(perm: &[usize]) -> DMatrix<f64> {
    let n = perm.len();
    let mut p = DMatrix::zeros(n, n);
    for (k, &target) in perm.iter().enumerate() {
        p[(target, k)] = 1.0;
    }
    p
}
