//! Symplectic Gram-Schmidt and the completion of `D_q` to a symplectic matrix.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::ops::{diag_j, omega, vstack};
use crate::{Error, Result};

/// Completion rows `N` such that `[D_q; N]` is symplectic.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticCompletion {
    pub n_mat: DMatrix<f64>,
}

impl SymplecticCompletion {
    /// The full symplectic matrix `[D_q; N]`.
    pub fn stacked(&self, d_q: &DMatrix<f64>) -> DMatrix<f64> {
        vstack(&[d_q, &self.n_mat])
    }
}

/// A growing set of pairs `(q_k, p_k)` with `ω(q_i, p_j) = δ_ij` and all other
/// pairings zero, where `ω(x, y) = x Θ yᵀ`.
pub(crate) struct SymplecticBasis<'a> {
    theta: &'a DMatrix<f64>,
    pairs: Vec<(DVector<f64>, DVector<f64>)>,
}

impl<'a> SymplecticBasis<'a> {
    pub fn new(theta: &'a DMatrix<f64>) -> Self {
        Self {
            theta,
            pairs: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn push(&mut self, q: DVector<f64>, p: DVector<f64>) {
        self.pairs.push((q, p));
    }

    /// Removes the components of `x` that pair nontrivially with the basis.
    pub fn deflate(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = x.clone();
        for (q, p) in &self.pairs {
            let wp = omega(x, self.theta, p);
            let wq = omega(x, self.theta, q);
            out -= q * wp - p * wq;
        }
        out
    }

    /// Adds one pair built from the first well-conditioned candidate, in
    /// index order, after deflation against the current basis.
    ///
    /// The conjugate row is the deflated image of `v Θ`, which pairs with `v`
    /// through `‖vΘ‖² > 0`; both rows are rescaled to equal length.
    pub fn extend_from(
        &mut self,
        candidates: &[DVector<f64>],
        floor: f64,
        context: &str,
    ) -> Result<()> {
        let deflated: Vec<DVector<f64>> = candidates.iter().map(|c| self.deflate(c)).collect();
        let best = deflated.iter().map(|d| d.norm()).fold(0.0_f64, f64::max);
        if best <= floor {
            return Err(Error::DegenerateBasis(context.to_string()));
        }
        let pick = deflated
            .iter()
            .find(|d| d.norm() >= 0.5 * best)
            .expect("the maximum passes its own threshold");
        let v = pick / pick.norm();
        let conj = self.deflate(&(self.theta.transpose() * &v));
        let s = omega(&v, self.theta, &conj);
        if s.abs() <= floor * floor {
            return Err(Error::DegenerateBasis(context.to_string()));
        }
        let alpha = (conj.norm() / s.abs()).sqrt();
        let q = &v * alpha;
        let p = &conj / (s * alpha);
        self.pairs.push((q, p));
        Ok(())
    }

    /// Rows `[q_1; p_1; q_2; p_2; ...]` of the pairs from index `from` onward.
    pub fn rows_from(&self, from: usize, width: usize) -> DMatrix<f64> {
        let tail = &self.pairs[from.min(self.pairs.len())..];
        let mut out = DMatrix::zeros(2 * tail.len(), width);
        for (k, (q, p)) in tail.iter().enumerate() {
            out.set_row(2 * k, &q.transpose());
            out.set_row(2 * k + 1, &p.transpose());
        }
        out
    }
}

pub(crate) fn unit_vectors(n: usize) -> Vec<DVector<f64>> {
    (0..n)
        .map(|i| {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            e
        })
        .collect()
}

/// Completes `d_q` (with `d_q Θ_w d_qᵀ = diag(J)`) to a symplectic matrix.
///
/// New pairs are seeded from standard basis vectors in index order, so the
/// completion of `[I 0]` is `[0 I]`. Rows are ordered `v_1, w_1, v_2, w_2, ...`
/// with `ω(v_k, w_k) = 1`.
pub fn symplectic_complete(
    d_q: &DMatrix<f64>,
    theta_w: &DMatrix<f64>,
    tol: f64,
) -> Result<SymplecticCompletion> {
    let width = theta_w.nrows();
    if theta_w.ncols() != width || !width.is_multiple_of(2) {
        return Err(Error::Invalid(format!(
            "Θ_w must be square of even size, got {:?}",
            theta_w.shape()
        )));
    }
    if d_q.ncols() != width || !d_q.nrows().is_multiple_of(2) || d_q.nrows() > width {
        return Err(Error::Shape {
            matrix: "D_q".into(),
            expected_rows: d_q.nrows() + d_q.nrows() % 2,
            expected_cols: width,
            rows: d_q.nrows(),
            cols: d_q.ncols(),
        });
    }
    let k = d_q.nrows() / 2;
    let residual = (d_q * theta_w * d_q.transpose() - diag_j(k)).norm();
    if residual > tol * (1.0 + d_q.norm_squared()) {
        return Err(Error::Precondition {
            what: "D_q Θ_w D_qᵀ = diag(J)".into(),
            residual,
        });
    }

    let mut basis = SymplecticBasis::new(theta_w);
    for i in 0..k {
        basis.push(d_q.row(2 * i).transpose(), d_q.row(2 * i + 1).transpose());
    }
    let candidates = unit_vectors(width);
    while basis.len() < width / 2 {
        basis.extend_from(&candidates, tol, "completing D_q to a symplectic matrix")?;
    }
    Ok(SymplecticCompletion {
        n_mat: basis.rows_from(k, width),
    })
}

/// Random symplectic matrix `exp(Θ S)` for symmetric `S` with entries in
/// `[-scale, scale]`, where `Θ = diag_m(J)`.
pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, m: usize, scale: f64) -> DMatrix<f64> {
    let w = 2 * m;
    if w == 0 {
        return DMatrix::zeros(0, 0);
    }
    let raw = DMatrix::from_fn(w, w, |_, _| rng.gen_range(-scale..=scale));
    let s = (&raw + raw.transpose()) * 0.5;
    (diag_j(m) * s).exp()
}
