//! Congruence of a real skew-symmetric matrix to `diag(diag_nq(J), 0)`.

use nalgebra::{DMatrix, DVector};

use super::ops::{canonical_theta, skew_defect};
use super::symplectic::{unit_vectors, SymplecticBasis};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SkewCanonicalResult {
    /// Invertible `P` with `P Θ Pᵀ = diag(diag_nq(J), 0_nc)`.
    pub p: DMatrix<f64>,
    pub n_q: usize,
    pub n_c: usize,
}

impl SkewCanonicalResult {
    pub fn target(&self) -> DMatrix<f64> {
        canonical_theta(self.n_q, self.n_c)
    }
}

/// Finds `P` with `P Θ Pᵀ = diag(diag_nq(J), 0)`.
///
/// The range of `Θ` (rank `2 n_q`) gets a symplectic basis built by
/// symplectic Gram-Schmidt over projected unit vectors; the kernel gets an
/// orthonormal basis. Singular values below `tol * max(σ_max, 1)` count as
/// zero. Already-canonical inputs map to `P = I` exactly.
pub fn skew_canonical(theta: &DMatrix<f64>, tol: f64) -> Result<SkewCanonicalResult> {
    let n = theta.nrows();
    if theta.ncols() != n {
        return Err(Error::Shape {
            matrix: "Θ".into(),
            expected_rows: n,
            expected_cols: n,
            rows: n,
            cols: theta.ncols(),
        });
    }
    let defect = skew_defect(theta);
    if defect > tol {
        return Err(Error::NotSkew {
            matrix: "Θ".into(),
            residual: defect,
        });
    }
    if n == 0 {
        return Ok(SkewCanonicalResult {
            p: DMatrix::zeros(0, 0),
            n_q: 0,
            n_c: 0,
        });
    }
    if let Some(n_q) = (0..=n / 2).find(|&k| *theta == canonical_theta(k, n - 2 * k)) {
        return Ok(SkewCanonicalResult {
            p: DMatrix::identity(n, n),
            n_q,
            n_c: n - 2 * n_q,
        });
    }
    let theta = (theta - theta.transpose()) * 0.5;

    let svd = theta.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.max();
    let range_cols: Vec<usize> = (0..n)
        .filter(|&k| smax > 0.0 && svd.singular_values[k] > tol * smax.max(1.0))
        .collect();
    if !range_cols.len().is_multiple_of(2) {
        return Err(Error::Singular(format!(
            "numerical rank {} of a skew matrix is odd; tolerance {tol:e} splits a conjugate pair",
            range_cols.len()
        )));
    }
    let u_r = u.select_columns(&range_cols);
    let range_proj = &u_r * u_r.transpose();
    let n_q = range_cols.len() / 2;
    let n_c = n - 2 * n_q;

    let mut basis = SymplecticBasis::new(&theta);
    let candidates: Vec<DVector<f64>> = unit_vectors(n).iter().map(|e| &range_proj * e).collect();
    while basis.len() < n_q {
        basis.extend_from(&candidates, tol, "building a symplectic basis of range(Θ)")?;
    }
    let pairs = basis.rows_from(0, n);

    // orthonormal kernel basis, preferring unit vectors in index order
    let kernel_proj = DMatrix::<f64>::identity(n, n) - &range_proj;
    let mut kernel: Vec<DVector<f64>> = Vec::with_capacity(n_c);
    let units = unit_vectors(n);
    while kernel.len() < n_c {
        let residuals: Vec<DVector<f64>> = units
            .iter()
            .map(|e| {
                let mut x = &kernel_proj * e;
                for k in &kernel {
                    x -= k * k.dot(&x);
                }
                x
            })
            .collect();
        let best = residuals.iter().map(|x| x.norm()).fold(0.0_f64, f64::max);
        if best <= tol {
            return Err(Error::DegenerateBasis(
                "building an orthonormal basis of ker(Θ)".into(),
            ));
        }
        let pick = residuals
            .iter()
            .find(|x| x.norm() >= 0.5 * best)
            .expect("maximum passes");
        kernel.push(pick / pick.norm());
    }

    let mut p = DMatrix::zeros(n, n);
    p.view_mut((0, 0), (2 * n_q, n)).copy_from(&pairs);
    for (k, v) in kernel.iter().enumerate() {
        p.set_row(2 * n_q + k, &v.transpose());
    }

    let residual = (&p * &theta * p.transpose() - canonical_theta(n_q, n_c)).norm();
    let scale = 1.0 + theta.norm() * p.norm_squared();
    if residual > tol.max(1e-12) * scale * 10.0 {
        return Err(Error::Precondition {
            what: "P Θ Pᵀ = diag(J, 0) after construction".into(),
            residual,
        });
    }
    Ok(SkewCanonicalResult { p, n_q, n_c })
}
