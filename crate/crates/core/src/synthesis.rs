//! Synthesis of a realizable mixed system as a feedback interconnection of a
//! fully quantum subsystem `G1`, a classical subsystem `G2` and a static
//! measurement network `G`.
//!
//! `G1` is driven by the fields `w` and the classical state `u = x_c`:
//!
//! ```text
//! dx_q  = A_qq x_q dt + E u dt + B_q dw′
//! dy_q  = C_qq x_q dt + D_q dw′
//! dy′_q = C′_qq x_q dt + D′_q dw′
//! ```
//!
//! where `w′` is `w` displaced by the modulators `C′_c u`. The classical part
//! measures `du_c = G dy′_q` and evolves as
//!
//! ```text
//! dx_c = A′_cc x_c dt + B′_c du_c
//! dy_c = C′_cc x_c dt + D′_c du_c
//! ```

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matkit::ops::{diag_j, hstack, sub, vstack};
use crate::matkit::selection;
use crate::matkit::{
    minnorm_left_solve, minnorm_right_solve, pzkv_decompose, random_symplectic, symplectic_complete,
};
use crate::realizability::check_standard;
use crate::sysmodel::{Dimensions, StandardSystem};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSubsystem {
    pub a_qq: DMatrix<f64>,
    pub b_q: DMatrix<f64>,
    pub e_mat: DMatrix<f64>,
    pub c_qq: DMatrix<f64>,
    pub d_q: DMatrix<f64>,
    pub c_qq_prime: DMatrix<f64>,
    pub d_q_prime: DMatrix<f64>,
    /// `-Θ_nq E`, the coupling of `u` into the quantum Hamiltonian.
    pub k_q: DMatrix<f64>,
}

impl QuantumSubsystem {
    /// `(D_q ; D′_q)`.
    pub fn stacked_d(&self) -> DMatrix<f64> {
        vstack(&[&self.d_q, &self.d_q_prime])
    }

    /// `(C_qq ; C′_qq)`.
    pub fn stacked_c(&self) -> DMatrix<f64> {
        vstack(&[&self.c_qq, &self.c_qq_prime])
    }

    /// Frobenius norm of `A_qqΘ + ΘA_qqᵀ + B_qΘ_wB_qᵀ`.
    pub fn state_residual(&self) -> f64 {
        let t = diag_j(self.a_qq.nrows() / 2);
        let tw = diag_j(self.b_q.ncols() / 2);
        (&self.a_qq * &t + &t * self.a_qq.transpose() + &self.b_q * &tw * self.b_q.transpose())
            .norm()
    }

    /// Frobenius norm of `B_qΘ_w(D_q;D′_q)ᵀ + Θ(C_qq;C′_qq)ᵀ`.
    pub fn nondemolition_residual(&self) -> f64 {
        let t = diag_j(self.a_qq.nrows() / 2);
        let tw = diag_j(self.b_q.ncols() / 2);
        (&self.b_q * &tw * self.stacked_d().transpose() + &t * self.stacked_c().transpose()).norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSubsystem {
    pub a_cc_prime: DMatrix<f64>,
    pub b_c_prime: DMatrix<f64>,
    pub c_cc_prime: DMatrix<f64>,
    pub d_c_prime: DMatrix<f64>,
    /// Modulator rows for the first `n_w1` field channels.
    pub c_c_prime_1: DMatrix<f64>,
    /// Modulator rows for the remaining channels.
    pub c_c_prime_2: DMatrix<f64>,
}

impl ClassicalSubsystem {
    /// The full modulation matrix `C′_c`.
    pub fn c_c_prime(&self) -> DMatrix<f64> {
        vstack(&[&self.c_c_prime_1, &self.c_c_prime_2])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub g1: QuantumSubsystem,
    pub g2: ClassicalSubsystem,
    /// `G = K V`, `r × (2m - 2n_yq)`.
    pub g_mat: DMatrix<f64>,
    pub k_sel: DMatrix<f64>,
    pub v_sympl: DMatrix<f64>,
    pub p_perm: DMatrix<f64>,
    pub z: DMatrix<f64>,
    pub r: usize,
    pub dims: Dimensions,
}

impl Realization {
    /// Frobenius norm of `G diag(J) Gᵀ`; zero when the measured signals commute.
    pub fn classicality_residual(&self) -> f64 {
        let theta = diag_j(self.g_mat.ncols() / 2);
        (&self.g_mat * theta * self.g_mat.transpose()).norm()
    }

    /// `B′_c G D′_q` (reconstructs `B_c`).
    pub fn b_c_bar(&self) -> DMatrix<f64> {
        &self.g2.b_c_prime * &self.g_mat * &self.g1.d_q_prime
    }

    /// `D′_c G D′_q` (reconstructs `D_c`).
    pub fn d_c_bar(&self) -> DMatrix<f64> {
        &self.g2.d_c_prime * &self.g_mat * &self.g1.d_q_prime
    }
}

/// Splits a realizable standard-form system into `G1`, `G2` and `G`.
///
/// `C′_c` is the minimum-norm solution of `D_q C′_c = C_qc`; `D′_q` is the
/// symplectic completion of `D_q`; `(B_c ; D_c) = M D′_q` is solved for `M` with
/// minimum norm and factored as `M = P Z K V`.
pub fn synthesize(sys: &StandardSystem, tol: f64) -> Result<Realization> {
    let report = check_standard(sys, tol);
    if !report.passed() {
        return Err(Error::NotRealizable(Box::new(report)));
    }
    let dims = sys.dims;
    let (n_q, n_c, m, n_yq) = (dims.n_q, dims.n_c, dims.m, dims.n_yq);
    let theta_w = diag_j(m);
    let theta_q = diag_j(n_q);

    let (a_qq, a_qc, a_cc) = (sys.a_qq(), sys.a_qc(), sys.a_cc());
    let (b_q, b_c) = (sys.b_q(), sys.b_c());
    let (c_qq, c_qc, c_cc) = (sys.c_qq(), sys.c_qc(), sys.c_cc());
    let (d_q, d_c) = (sys.d_q(), sys.d_c());

    let c_c_prime = minnorm_left_solve(&d_q, &c_qc, tol)?;
    let e_mat = &a_qc - &b_q * &c_c_prime;
    let d_q_prime = symplectic_complete(&d_q, &theta_w, tol)?.n_mat;
    let c_qq_prime = &d_q_prime * &theta_w * b_q.transpose() * &theta_q;

    let m_mat = minnorm_right_solve(&d_q_prime, &vstack(&[&b_c, &d_c]), tol)?;
    let dec = pzkv_decompose(&m_mat, &diag_j(m - n_yq), tol)?;
    let g_mat = dec.g();
    let pz = dec.pz();
    let b_c_prime = sub(&pz, 0, 0, n_c, dec.r);
    let d_c_prime = sub(&pz, n_c, 0, dims.n_yc, dec.r);

    let feed = &g_mat * &d_q_prime * &c_c_prime;
    let a_cc_prime = &a_cc - &b_c_prime * &feed;
    let c_cc_prime = &c_cc - &d_c_prime * &feed;
    let k_q = -(&theta_q * &e_mat);

    let split = 2 * dims.n_w1;
    Ok(Realization {
        g1: QuantumSubsystem {
            a_qq,
            b_q,
            e_mat,
            c_qq,
            d_q,
            c_qq_prime,
            d_q_prime,
            k_q,
        },
        g2: ClassicalSubsystem {
            a_cc_prime,
            b_c_prime,
            c_cc_prime,
            d_c_prime,
            c_c_prime_1: sub(&c_c_prime, 0, 0, split, n_c),
            c_c_prime_2: sub(&c_c_prime, split, 0, 2 * m - split, n_c),
        },
        g_mat,
        k_sel: dec.k_sel,
        v_sympl: dec.v_sympl,
        p_perm: dec.p_perm,
        z: dec.z,
        r: dec.r,
        dims,
    })
}

/// Reassembles the closed-loop standard-form system from a realization.
pub fn close_loop(r: &Realization) -> StandardSystem {
    let (g1, g2) = (&r.g1, &r.g2);
    let c_c_prime = g2.c_c_prime();
    let gdq = &r.g_mat * &g1.d_q_prime;
    let a = vstack(&[
        &hstack(&[&g1.a_qq, &(&g1.b_q * &c_c_prime + &g1.e_mat)]),
        &hstack(&[
            &(&g2.b_c_prime * &r.g_mat * &g1.c_qq_prime),
            &(&g2.a_cc_prime + &g2.b_c_prime * &gdq * &c_c_prime),
        ]),
    ]);
    let b = vstack(&[&g1.b_q, &(&g2.b_c_prime * &gdq)]);
    let c = vstack(&[
        &hstack(&[&g1.c_qq, &(&g1.d_q * &c_c_prime)]),
        &hstack(&[
            &(&g2.d_c_prime * &r.g_mat * &g1.c_qq_prime),
            &(&g2.c_cc_prime + &g2.d_c_prime * &gdq * &c_c_prime),
        ]),
    ]);
    let d = vstack(&[&g1.d_q, &(&g2.d_c_prime * &gdq)]);
    StandardSystem::new(r.dims, a, b, c, d)
}

/// Blockwise Frobenius errors `‖X_rebuilt - X‖` for `X = A, B, C, D`.
pub fn reconstruction_errors(r: &Realization, sys: &StandardSystem) -> [(&'static str, f64); 4] {
    let s = close_loop(r);
    [
        ("a", (&s.a - &sys.a).norm()),
        ("b", (&s.b - &sys.b).norm()),
        ("c", (&s.c - &sys.c).norm()),
        ("d", (&s.d - &sys.d).norm()),
    ]
}

/// Largest blockwise reconstruction error divided by `1 + ‖X‖`.
pub fn relative_reconstruction_error(r: &Realization, sys: &StandardSystem) -> f64 {
    let norms = [sys.a.norm(), sys.b.norm(), sys.c.norm(), sys.d.norm()];
    reconstruction_errors(r, sys)
        .iter()
        .zip(norms)
        .map(|((_, e), n)| e / (1.0 + n))
        .fold(0.0, f64::max)
}

fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..=1.0))
}

/// A random realizable system, built by choosing `G1`, `G2` and `G` directly
/// and closing the loop. Deterministic in `seed`.
///
/// The quantum drift is `(S + ½B_qΘ_wB_qᵀ)Θ` with `S` positive semidefinite,
/// and the classical drift is shifted by `-2I`, which keeps most draws stable.
pub fn generate_realizable(dims: Dimensions, seed: u64) -> Result<StandardSystem> {
    if let Some(v) = dims.check().into_iter().next() {
        return Err(Error::Invalid(v.to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n_q, n_c, m, n_yq, n_yc) = (dims.n_q, dims.n_c, dims.m, dims.n_yq, dims.n_yc);
    let theta_w = diag_j(m);
    let theta_q = diag_j(n_q);

    let b_q = uniform(&mut rng, 2 * n_q, 2 * m);
    let raw = uniform(&mut rng, 2 * n_q, 2 * n_q);
    let sym = &raw * raw.transpose() * 0.5;
    let a_qq = (sym + &b_q * &theta_w * b_q.transpose() * 0.5) * &theta_q;

    let v = random_symplectic(&mut rng, m, 0.5);
    let d_q = sub(&v, 0, 0, 2 * n_yq, 2 * m);
    let d_q_prime = sub(&v, 2 * n_yq, 0, 2 * (m - n_yq), 2 * m);
    let c_qq = (&theta_q * &b_q * &theta_w * d_q.transpose()).transpose();
    let c_qq_prime = &d_q_prime * &theta_w * b_q.transpose() * &theta_q;

    let e_mat = uniform(&mut rng, 2 * n_q, n_c);
    let c_c_prime = uniform(&mut rng, 2 * m, n_c);
    let a_cc_prime = uniform(&mut rng, n_c, n_c) - DMatrix::identity(n_c, n_c) * 2.0;
    let c_cc_prime = uniform(&mut rng, n_yc, n_c);

    let half = m - n_yq;
    let r = rng.gen_range(0..=half.min(n_c + n_yc));
    let k_sel = selection(r, 2 * half);
    let v_sympl = random_symplectic(&mut rng, half, 0.5);
    let g_mat = &k_sel * &v_sympl;
    let b_c_prime = uniform(&mut rng, n_c, r);
    let d_c_prime = uniform(&mut rng, n_yc, r);

    let split = 2 * dims.n_w1;
    let realization = Realization {
        g1: QuantumSubsystem {
            a_qq,
            b_q,
            k_q: -(&theta_q * &e_mat),
            e_mat,
            c_qq,
            d_q,
            c_qq_prime,
            d_q_prime,
        },
        g2: ClassicalSubsystem {
            a_cc_prime,
            b_c_prime,
            c_cc_prime,
            d_c_prime,
            c_c_prime_1: sub(&c_c_prime, 0, 0, split, n_c),
            c_c_prime_2: sub(&c_c_prime, split, 0, 2 * m - split, n_c),
        },
        g_mat,
        k_sel,
        v_sympl,
        p_perm: DMatrix::identity(n_c + n_yc, n_c + n_yc),
        z: DMatrix::zeros(n_c + n_yc, r),
        r,
        dims,
    };
    Ok(close_loop(&realization))
}
