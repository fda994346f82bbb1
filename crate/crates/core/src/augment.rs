//! Augmentation of a mixed system with conjugate variables for its classical
//! states, and the reduced fully quantum system built from it.
//!
//! The augmented state is `x̃ = (x, η)` where each classical state `x_c,j`
//! gets a conjugate `η_j` with `[x_c,j, η_k] = 2iδ_jk`:
//!
//! ```text
//! dx = A x dt + B dw
//! dη = A′ x dt + A″ η dt + B′ dw
//! ```

use nalgebra::DMatrix;

use crate::matkit::minnorm_right_solve;
use crate::matkit::ops::{canonical_theta, diag_j, hstack, sub, vstack};
use crate::sysmodel::{QuantumOnlySystem, StandardSystem};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSystem {
    pub n_q: usize,
    pub n_c: usize,
    pub m: usize,
    /// `((A, 0), (A′, A″))`.
    pub a_tilde: DMatrix<f64>,
    /// `(B ; B′)`.
    pub b_tilde: DMatrix<f64>,
    /// `(C_q | 0)`.
    pub c_tilde: DMatrix<f64>,
    /// `D_q`.
    pub d_tilde: DMatrix<f64>,
    /// `((Θ_n, [0;I]), ([0 -I], 0))`.
    pub theta_tilde: DMatrix<f64>,
}

/// Commutation matrix of the augmented state.
pub fn augmented_theta(n_q: usize, n_c: usize) -> DMatrix<f64> {
    let n = 2 * n_q + n_c;
    let mut t = DMatrix::zeros(n + n_c, n + n_c);
    t.view_mut((0, 0), (n, n))
        .copy_from(&canonical_theta(n_q, n_c));
    for j in 0..n_c {
        t[(2 * n_q + j, n + j)] = 1.0;
        t[(n + j, 2 * n_q + j)] = -1.0;
    }
    t
}

/// `[0 I]`: selects the classical rows of an `n`-vector.
fn classical_selector(n_q: usize, n_c: usize) -> DMatrix<f64> {
    let n = 2 * n_q + n_c;
    let mut s = DMatrix::zeros(n_c, n);
    for j in 0..n_c {
        s[(j, 2 * n_q + j)] = 1.0;
    }
    s
}

impl AugmentedSystem {
    fn n(&self) -> usize {
        2 * self.n_q + self.n_c
    }

    pub fn a_prime(&self) -> DMatrix<f64> {
        sub(&self.a_tilde, self.n(), 0, self.n_c, self.n())
    }

    pub fn a_double_prime(&self) -> DMatrix<f64> {
        sub(&self.a_tilde, self.n(), self.n(), self.n_c, self.n_c)
    }

    pub fn b_prime(&self) -> DMatrix<f64> {
        sub(&self.b_tilde, self.n(), 0, self.n_c, 2 * self.m)
    }

    /// Residuals of the three relations defining `B′`, the skew part of `A′`
    /// and `A″`, in that order.
    pub fn relation_residuals(&self, sys: &StandardSystem) -> [(&'static str, f64); 3] {
        let theta_w = diag_j(self.m);
        let theta_n = canonical_theta(self.n_q, self.n_c);
        let sel = classical_selector(self.n_q, self.n_c);
        let (ap, app, bp) = (self.a_prime(), self.a_double_prime(), self.b_prime());
        let output = &bp * &theta_w * sys.d_q().transpose() - &sel * sys.c_q().transpose();
        let skew = &sel * ap.transpose() - &ap * sel.transpose() - &bp * &theta_w * bp.transpose();
        let drift = (&ap * &theta_n - &sel * sys.a.transpose()
            + &bp * &theta_w * sys.b.transpose())
            * sel.transpose()
            - &app;
        [
            ("b_prime_output", output.norm()),
            ("a_prime_skew", skew.norm()),
            ("a_double_prime", drift.norm()),
        ]
    }

    /// `ÃΘ̃ + Θ̃Ãᵀ + B̃Θ_wB̃ᵀ`.
    pub fn state_defect(&self) -> DMatrix<f64> {
        let theta_w = diag_j(self.m);
        &self.a_tilde * &self.theta_tilde
            + &self.theta_tilde * self.a_tilde.transpose()
            + &self.b_tilde * &theta_w * self.b_tilde.transpose()
    }

    /// `B̃Θ_wD̃ᵀ + Θ̃C̃ᵀ`.
    pub fn nondemolition_defect(&self) -> DMatrix<f64> {
        let theta_w = diag_j(self.m);
        &self.b_tilde * &theta_w * self.d_tilde.transpose()
            + &self.theta_tilde * self.c_tilde.transpose()
    }
}

/// Builds the augmented system.
///
/// `B′` is the minimum-norm solution of `B′Θ_wD_qᵀ = C_qcᵀ`. `A′` has classical
/// columns `-½B′Θ_wB′ᵀ` and quantum columns `-(A_qcᵀ - B′Θ_wB_qᵀ)Θ_nq`, which
/// is the choice that makes the augmented pair satisfy the state condition.
/// `A″ = (A′Θ_n - [0 I]Aᵀ + B′Θ_wBᵀ)[0;I]`.
pub fn augment(sys: &StandardSystem, tol: f64) -> Result<AugmentedSystem> {
    let dims = sys.dims;
    let (n_q, n_c, m) = (dims.n_q, dims.n_c, dims.m);
    let n = dims.n();
    let st = sys.structure();
    let theta_w = &st.theta_w;
    let theta_q = diag_j(n_q);
    let sel = classical_selector(n_q, n_c);

    let d_q = sys.d_q();
    let b_prime = minnorm_right_solve(&(theta_w * d_q.transpose()), &sys.c_qc().transpose(), tol)
        .map_err(|e| match e {
        Error::Inconsistent { residual, .. } => Error::Inconsistent {
            what: "B′ Θ_w D_qᵀ = C_qcᵀ".into(),
            residual,
        },
        other => other,
    })?;
    let a_prime_q =
        -(sys.a_qc().transpose() - &b_prime * theta_w * sys.b_q().transpose()) * &theta_q;
    let a_prime_c = &b_prime * theta_w * b_prime.transpose() * -0.5;
    let a_prime = hstack(&[&a_prime_q, &a_prime_c]);
    let a_dprime = (&a_prime * &st.theta_n - &sel * sys.a.transpose()
        + &b_prime * theta_w * sys.b.transpose())
        * sel.transpose();

    let mut a_tilde = DMatrix::zeros(n + n_c, n + n_c);
    a_tilde.view_mut((0, 0), (n, n)).copy_from(&sys.a);
    a_tilde.view_mut((n, 0), (n_c, n)).copy_from(&a_prime);
    a_tilde.view_mut((n, n), (n_c, n_c)).copy_from(&a_dprime);
    let c_q = sys.c_q();
    let aug = AugmentedSystem {
        n_q,
        n_c,
        m,
        a_tilde,
        b_tilde: vstack(&[&sys.b, &b_prime]),
        c_tilde: hstack(&[&c_q, &DMatrix::zeros(c_q.nrows(), n_c)]),
        d_tilde: d_q,
        theta_tilde: augmented_theta(n_q, n_c),
    };

    let scale = 1.0 + sys.a.norm() + sys.b.norm().powi(2) + sys.c.norm() + b_prime.norm().powi(2);
    for (name, residual) in aug.relation_residuals(sys) {
        if residual > tol * scale {
            return Err(Error::Inconsistent {
                what: format!("augmentation relation {name}"),
                residual,
            });
        }
    }
    Ok(aug)
}

/// The fully quantum system driven by the same fields as the augmented one,
/// with output matrix `C̄ = Θ_wB̃ᵀΘ̃` and `D = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem {
    pub n_q: usize,
    pub n_c: usize,
    pub m: usize,
    pub a_tilde: DMatrix<f64>,
    pub b_tilde: DMatrix<f64>,
    pub c_bar: DMatrix<f64>,
}

pub fn reduce(aug: &AugmentedSystem, theta_w: &DMatrix<f64>) -> ReducedSystem {
    ReducedSystem {
        n_q: aug.n_q,
        n_c: aug.n_c,
        m: aug.m,
        a_tilde: aug.a_tilde.clone(),
        b_tilde: aug.b_tilde.clone(),
        c_bar: theta_w * aug.b_tilde.transpose() * &aug.theta_tilde,
    }
}

impl ReducedSystem {
    /// Permutation `P` (with `x̂ = P x̃`) reordering the augmented state as
    /// `(x_q, x_c1, η_1, x_c2, η_2, ...)`, under which `PΘ̃Pᵀ = diag(J, ..., J)`.
    pub fn relabeling(&self) -> DMatrix<f64> {
        let nq2 = 2 * self.n_q;
        let n = nq2 + self.n_c;
        let mut p = DMatrix::zeros(n + self.n_c, n + self.n_c);
        for i in 0..nq2 {
            p[(i, i)] = 1.0;
        }
        for j in 0..self.n_c {
            p[(nq2 + 2 * j, nq2 + j)] = 1.0;
            p[(nq2 + 2 * j + 1, n + j)] = 1.0;
        }
        p
    }

    /// The reduced system in canonical variable order, ready for the fully
    /// quantum realizability check.
    pub fn to_quantum(&self) -> QuantumOnlySystem {
        let p = self.relabeling();
        QuantumOnlySystem {
            n_q: self.n_q + self.n_c,
            m: self.m,
            a: &p * &self.a_tilde * p.transpose(),
            b: &p * &self.b_tilde,
            c: &self.c_bar * p.transpose(),
            d: DMatrix::identity(2 * self.m, 2 * self.m),
        }
    }
}
