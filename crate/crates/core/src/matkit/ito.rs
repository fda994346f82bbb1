//! Real factorization `F_v = W F_w Wᵀ` of a nonnegative Hermitian Ito matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::ops::{frob_c, hermitian_defect, to_complex};
use crate::sysmodel::canonical_ito;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ItoFactorization {
    /// Real `m x 2m` matrix with `W F_w Wᵀ = F_v`.
    pub w: DMatrix<f64>,
    /// Largest imaginary part discarded when truncating `U_v Q U_w†` to real.
    pub max_imag: f64,
}

impl ItoFactorization {
    pub fn residual(&self, f_v: &DMatrix<Complex64>) -> f64 {
        let wc = to_complex(&self.w);
        frob_c(&(&wc * canonical_ito(self.w.nrows()) * wc.transpose() - f_v))
    }
}

/// Factorizes `F_v = W F_w Wᵀ` with `F_w = I_2m + i diag_m(J)` and real `W`.
///
/// With `F_v = U_v Λ_v U_v†` and `F_w = U_w Λ_w U_w†`
/// (`Λ_w = diag_m(diag(0, 2))`, `U_w = diag_m((1/√2)[[i, i], [-1, 1]])`),
/// `Q` carries `√(λ_j / 2)` in column `2j` and `-U_v† U_v^# q_2j` in column
/// `2j - 1`, which makes `W = U_v Q U_w†` real.
///
/// Eigenvalues are sorted in decreasing order and each eigenvector's phase is
/// fixed so that its first dominant entry is real and positive. Eigenvalues
/// in `[-tol·(1+‖F_v‖), 0)` are clamped to zero.
pub fn ito_factorize(f_v: &DMatrix<Complex64>, tol: f64) -> Result<ItoFactorization> {
    let m = f_v.nrows();
    if f_v.ncols() != m {
        return Err(Error::Shape {
            matrix: "F_v".into(),
            expected_rows: m,
            expected_cols: m,
            rows: m,
            cols: f_v.ncols(),
        });
    }
    let scale = 1.0 + frob_c(f_v);
    let defect = hermitian_defect(f_v);
    if defect > tol * scale {
        return Err(Error::NotHermitian {
            matrix: "F_v".into(),
            residual: defect,
        });
    }
    if m == 0 {
        return Ok(ItoFactorization {
            w: DMatrix::zeros(0, 0),
            max_imag: 0.0,
        });
    }
    let herm = (f_v + f_v.adjoint()).map(|z| z * 0.5);
    let eig = SymmetricEigen::new(herm);

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let mut u_v = DMatrix::<Complex64>::zeros(m, m);
    let mut lambda = vec![0.0; m];
    for (k, &src) in order.iter().enumerate() {
        let l = eig.eigenvalues[src];
        if l < -tol * scale {
            return Err(Error::NotPositive {
                matrix: "F_v".into(),
                min_eigenvalue: l,
            });
        }
        lambda[k] = l.max(0.0);
        let col = eig.eigenvectors.column(src);
        let peak = col.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
        let lead = col
            .iter()
            .find(|z| z.norm() >= 0.5 * peak)
            .copied()
            .unwrap_or(Complex64::new(1.0, 0.0));
        let phase = lead.conj() / lead.norm();
        u_v.set_column(k, &(col * phase));
    }

    let conj_map = -u_v.adjoint() * u_v.map(|z| z.conj());
    let mut q = DMatrix::<Complex64>::zeros(m, 2 * m);
    for j in 0..m {
        let mut q_even = nalgebra::DVector::<Complex64>::zeros(m);
        q_even[j] = Complex64::new((lambda[j] / 2.0).sqrt(), 0.0);
        let q_odd = &conj_map * &q_even;
        q.set_column(2 * j, &q_odd);
        q.set_column(2 * j + 1, &q_even);
    }

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let mut u_w = DMatrix::<Complex64>::zeros(2 * m, 2 * m);
    for j in 0..m {
        u_w[(2 * j, 2 * j)] = i * h;
        u_w[(2 * j, 2 * j + 1)] = i * h;
        u_w[(2 * j + 1, 2 * j)] = -one * h;
        u_w[(2 * j + 1, 2 * j + 1)] = one * h;
    }

    let w_c = &u_v * q * u_w.adjoint();
    let max_imag = w_c.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()));
    if max_imag > tol * scale.sqrt() {
        return Err(Error::Precondition {
            what: "W = U_v Q U_w† is real".into(),
            residual: max_imag,
        });
    }
    Ok(ItoFactorization {
        w: w_c.map(|z| z.re),
        max_imag,
    })
}
