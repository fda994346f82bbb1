use nalgebra::DMatrix;

use crate::{Error, Result};

/// Numerical rank: the number of singular values above `tol * σ_max`.
pub fn rank_tol(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Moore-Penrose pseudo-inverse with relative cutoff `tol * σ_max`, and the
/// rank it detected.
pub fn pseudo_inverse(m: &DMatrix<f64>, tol: f64) -> (DMatrix<f64>, usize) {
    let (rows, cols) = m.shape();
    if m.is_empty() {
        return (DMatrix::zeros(cols, rows), 0);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.max();
    let mut out = DMatrix::zeros(cols, rows);
    let mut rank = 0;
    if smax == 0.0 {
        return (out, 0);
    }
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tol * smax {
            rank += 1;
            out += v_t.row(k).transpose() * u.column(k).transpose() / s;
        }
    }
    (out, rank)
}

/// Minimum-Frobenius-norm solution `x` of `x · a = b`.
///
/// Fails with [`Error::Inconsistent`] when `b` is not in the row space of `a`
/// within `tol * (1 + ‖b‖)`.
pub fn minnorm_right_solve(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    if a.ncols() != b.ncols() {
        return Err(Error::Shape {
            matrix: "right-hand side".into(),
            expected_rows: b.nrows(),
            expected_cols: a.ncols(),
            rows: b.nrows(),
            cols: b.ncols(),
        });
    }
    let (pinv, _) = pseudo_inverse(a, tol);
    let x = b * pinv;
    let residual = (&x * a - b).norm();
    if residual > tol * (1.0 + b.norm()) {
        return Err(Error::Inconsistent {
            what: "x·a = b".into(),
            residual,
        });
    }
    Ok(x)
}

/// Minimum-Frobenius-norm solution `x` of `a · x = b`.
pub fn minnorm_left_solve(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    minnorm_right_solve(&a.transpose(), &b.transpose(), tol)
        .map(|x| x.transpose())
        .map_err(|e| match e {
            Error::Inconsistent { residual, .. } => Error::Inconsistent {
                what: "a·x = b".into(),
                residual,
            },
            other => other,
        })
}
