//! `M = P Z K V` factorization of an isotropic read-out matrix.

use nalgebra::{DMatrix, DVector};

use super::ops::{permutation_matrix, vstack};
use super::solve::{minnorm_right_solve, pseudo_inverse};
use super::symplectic::{unit_vectors, SymplecticBasis};
use crate::{Error, Result};

/// Factors of `M = P Z K V`.
///
/// `K` selects quadratures `1, 3, 5, ...` (zero-based `0, 2, 4, ...`) of `V y`,
/// so `G = K V` is a symplectic network followed by homodyne measurement of
/// `r` commuting quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct PzkvDecomposition {
    pub p_perm: DMatrix<f64>,
    pub z: DMatrix<f64>,
    pub k_sel: DMatrix<f64>,
    pub v_sympl: DMatrix<f64>,
    pub r: usize,
    /// Row indices of `M` chosen as the basis, in pivot order.
    pub basis_rows: Vec<usize>,
}

impl PzkvDecomposition {
    pub fn g(&self) -> DMatrix<f64> {
        &self.k_sel * &self.v_sympl
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.p_perm * &self.z * &self.k_sel * &self.v_sympl
    }

    /// `P Z`, whose first rows give `B'_c` and the rest `D'_c`.
    pub fn pz(&self) -> DMatrix<f64> {
        &self.p_perm * &self.z
    }
}

/// Selection matrix with a single 1 at column `2j` of row `j`.
pub(crate) fn selection(r: usize, width: usize) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(r, width);
    for j in 0..r {
        k[(j, 2 * j)] = 1.0;
    }
    k
}

/// Greedy pivoted Gram-Schmidt over the rows of `m`; returns the chosen row
/// indices in pivot order.
fn pivot_rows(m: &DMatrix<f64>, tol: f64) -> Vec<usize> {
    let scale =
        m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())) * (m.ncols().max(1) as f64).sqrt();
    let mut residual: Vec<DVector<f64>> = (0..m.nrows()).map(|i| m.row(i).transpose()).collect();
    let mut chosen = Vec::new();
    loop {
        let best = (0..residual.len())
            .filter(|i| !chosen.contains(i))
            .map(|i| (i, residual[i].norm()))
            .fold(None, |acc: Option<(usize, f64)>, (i, n)| match acc {
                Some((_, bn)) if bn >= n => acc,
                _ => Some((i, n)),
            });
        match best {
            Some((i, n)) if n > tol * scale && scale > 0.0 => {
                let e = &residual[i] / n;
                for r in residual.iter_mut() {
                    let c = e.dot(r);
                    *r -= &e * c;
                }
                chosen.push(i);
            }
            _ => break,
        }
    }
    chosen
}

/// Factors an isotropic `M` (`M Θ' Mᵀ = 0`) as `P Z K V`.
///
/// The `r` pivot rows of `M` become rows `0, 2, ..., 2r-2` of `V`. Their
/// conjugate rows come from the pseudo-inverse of `R Θ'` followed by
/// symplectic Gram-Schmidt, and the remaining `m' - r` pairs are seeded from
/// unit vectors.
pub fn pzkv_decompose(
    m_mat: &DMatrix<f64>,
    theta_prime: &DMatrix<f64>,
    tol: f64,
) -> Result<PzkvDecomposition> {
    let (rows, width) = m_mat.shape();
    if theta_prime.shape() != (width, width) || width % 2 != 0 {
        return Err(Error::Shape {
            matrix: "Θ'".into(),
            expected_rows: width,
            expected_cols: width,
            rows: theta_prime.nrows(),
            cols: theta_prime.ncols(),
        });
    }
    let half = width / 2;
    let iso = (m_mat * theta_prime * m_mat.transpose()).norm();
    if iso > tol * (1.0 + m_mat.norm_squared()) {
        return Err(Error::Precondition {
            what: "M Θ' Mᵀ = 0".into(),
            residual: iso,
        });
    }

    let chosen = pivot_rows(m_mat, tol);
    let r = chosen.len();
    if r > half {
        return Err(Error::Precondition {
            what: format!("rank {r} of an isotropic matrix exceeds {half}"),
            residual: iso,
        });
    }
    let rest: Vec<usize> = (0..rows).filter(|i| !chosen.contains(i)).collect();
    let order: Vec<usize> = chosen.iter().chain(rest.iter()).copied().collect();
    let p_perm = permutation_matrix(&order);

    let basis = m_mat.select_rows(&chosen);
    let rest_rows = m_mat.select_rows(&rest);
    let x = if r == 0 {
        DMatrix::zeros(rest.len(), 0)
    } else {
        minnorm_right_solve(&basis, &rest_rows, tol)?
    };
    let z = vstack(&[&DMatrix::identity(r, r), &x]);

    let mut sb = SymplecticBasis::new(theta_prime);
    if r > 0 {
        let (duals, rank) = pseudo_inverse(&(&basis * theta_prime), tol);
        if rank < r {
            return Err(Error::Singular(
                "pivot rows of M are not independent under Θ'".into(),
            ));
        }
        for j in 0..r {
            let q = basis.row(j).transpose();
            let p = sb.deflate(&duals.column(j).into_owned());
            sb.push(q, p);
        }
    }
    let candidates = unit_vectors(width);
    while sb.len() < half {
        sb.extend_from(
            &candidates,
            tol,
            "extending the measured quadratures to a symplectic basis",
        )?;
    }
    let v_sympl = sb.rows_from(0, width);

    Ok(PzkvDecomposition {
        p_perm,
        z,
        k_sel: selection(r, width),
        v_sympl,
        r,
        basis_rows: chosen,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkit::ops::diag_j;

    fn symplectic_defect(v: &DMatrix<f64>, theta: &DMatrix<f64>) -> f64 {
        (v * theta * v.transpose() - theta).norm()
    }

    #[test]
    fn canonical_row() {
        let m = DMatrix::from_row_slice(1, 4, &[1.0, 0.0, 0.0, 0.0]);
        let d = pzkv_decompose(&m, &diag_j(2), 1e-9).unwrap();
        assert_eq!(d.r, 1);
        assert_eq!(d.p_perm, DMatrix::identity(1, 1));
        assert_eq!(d.z, DMatrix::identity(1, 1));
        assert_eq!(d.k_sel, m);
        assert!((&d.v_sympl - DMatrix::<f64>::identity(4, 4)).norm() < 1e-15);
        assert!((d.g() - m).norm() < 1e-15);
    }

    #[test]
    fn proportional_rows() {
        let m = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 2.0, 0.0]);
        let d = pzkv_decompose(&m, &diag_j(2), 1e-9).unwrap();
        assert_eq!(d.r, 1);
        assert!((d.reconstruct() - &m).norm() < 1e-10);
        assert!(symplectic_defect(&d.v_sympl, &diag_j(2)) < 1e-12);
        assert_eq!(d.z.shape(), (2, 1));
    }

    #[test]
    fn basis_rows_land_on_odd_quadratures() {
        let m = DMatrix::from_row_slice(
            2,
            6,
            &[1.0, 2.0, 0.0, 0.0, 1.0, 2.0, 0.0, 0.0, 3.0, -1.0, 0.0, 0.0],
        );
        let d = pzkv_decompose(&m, &diag_j(3), 1e-9).unwrap();
        assert_eq!(d.r, 2);
        for (j, &src) in d.basis_rows.iter().enumerate() {
            assert_eq!(d.v_sympl.row(2 * j), m.row(src));
        }
        assert!((d.reconstruct() - &m).norm() < 1e-12);
        assert!(symplectic_defect(&d.v_sympl, &diag_j(3)) < 1e-12);
        assert!((d.g() * diag_j(3) * d.g().transpose()).norm() < 1e-12);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let m = DMatrix::zeros(3, 4);
        let d = pzkv_decompose(&m, &diag_j(2), 1e-9).unwrap();
        assert_eq!(d.r, 0);
        assert_eq!(d.g().shape(), (0, 4));
        assert_eq!(d.z.shape(), (3, 0));
        assert_eq!(d.reconstruct(), m);
    }

    #[test]
    fn non_isotropic_input_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            pzkv_decompose(&m, &diag_j(1), 1e-9),
            Err(Error::Precondition { .. })
        ));
    }
}
