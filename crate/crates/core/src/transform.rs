//! General-form to standard-form conversion and transfer-function checks.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::matkit::ops::{canonical_theta, to_complex};
use crate::matkit::{ito_factorize, skew_canonical};
use crate::sysmodel::{Dimensions, GeneralSystem, StandardSystem, Violation};
use crate::{Error, Result};

/// Sample points used by default for transfer-function comparisons.
pub const DEFAULT_SAMPLE_POINTS: [(f64, f64); 5] = [
    (1.0, 0.0),
    (2.0, 1.0),
    (-1.0, 3.0),
    (0.5, -0.5),
    (10.0, 0.0),
];

/// Real shift applied to a sample point that hits an eigenvalue.
const RESAMPLE_SHIFT: f64 = 0.37;

pub fn default_samples() -> Vec<Complex64> {
    DEFAULT_SAMPLE_POINTS
        .iter()
        .map(|&(re, im)| Complex64::new(re, im))
        .collect()
}

/// The transformation matrices relating a general system to its standard form:
/// `A = P_n 𝐀 P_n⁻¹`, `B = P_n 𝐁 W`, `C = P_y 𝐂 P_n⁻¹`, `D = P_y 𝐃 W`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformWitness {
    pub p_n: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub p_y: DMatrix<f64>,
    pub standard: StandardSystem,
}

impl TransformWitness {
    /// Residuals of the six defining identities, by name.
    pub fn identity_residuals(&self, g: &GeneralSystem) -> Vec<(&'static str, f64)> {
        let s = &self.standard;
        let st = s.structure();
        vec![
            ("a", (&s.a * &self.p_n - &self.p_n * &g.a).norm()),
            ("b", (&s.b - &self.p_n * &g.b * &self.w).norm()),
            ("c", (&s.c * &self.p_n - &self.p_y * &g.c).norm()),
            ("d", (&s.d - &self.p_y * &g.d * &self.w).norm()),
            (
                "theta_n",
                (&self.p_n * &g.theta * self.p_n.transpose() - &st.theta_n).norm(),
            ),
            (
                "theta_y",
                (&self.p_y * g.theta_y() * self.p_y.transpose() - &st.theta_y_target).norm(),
            ),
        ]
    }

    pub fn max_identity_residual(&self, g: &GeneralSystem) -> f64 {
        self.identity_residuals(g)
            .into_iter()
            .map(|(_, r)| r)
            .fold(0.0, f64::max)
    }
}

fn violation_to_error(v: Violation) -> Error {
    match v {
        Violation::NotSkew { matrix, residual } => Error::NotSkew {
            matrix: matrix.into(),
            residual,
        },
        Violation::NotHermitian { matrix, residual } => Error::NotHermitian {
            matrix: matrix.into(),
            residual,
        },
        Violation::NotPositive {
            matrix,
            min_eigenvalue,
        } => Error::NotPositive {
            matrix: matrix.into(),
            min_eigenvalue,
        },
        Violation::Shape {
            matrix,
            expected,
            found,
        } => Error::Shape {
            matrix: matrix.into(),
            expected_rows: expected.0,
            expected_cols: expected.1,
            rows: found.0,
            cols: found.1,
        },
        other => Error::Invalid(other.to_string()),
    }
}

/// Transforms a general-form system into standard form.
///
/// `P_n` and `P_y` bring `Θ` and `Θ_y` to `diag(J.., 0)` by congruence
/// (classical rows last) and `W` factors `F_v = W F_w Wᵀ`. The standard form
/// has `n_q = rank(Θ)/2`, `n_yq = rank(Θ_y)/2` and `m` equal to the number of
/// general input signals (so `2m` field quadratures).
pub fn to_standard(g: &GeneralSystem, tol: f64) -> Result<TransformWitness> {
    if let Some(v) = g.validate_with_tol(tol).into_iter().next() {
        return Err(violation_to_error(v));
    }
    let state = skew_canonical(&g.theta, tol)?;
    let ito = ito_factorize(&g.f_v, tol)?;
    let output = skew_canonical(&g.theta_y(), tol)?;

    let p_n_inv = state
        .p
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("state congruence P_n".into()))?;
    let dims = Dimensions::new(state.n_q, state.n_c, g.m(), output.n_q, output.n_c);
    let standard = StandardSystem::new(
        dims,
        &state.p * &g.a * &p_n_inv,
        &state.p * &g.b * &ito.w,
        &output.p * &g.c * &p_n_inv,
        &output.p * &g.d * &ito.w,
    );
    debug_assert_eq!(canonical_theta(state.n_q, state.n_c).nrows(), g.n());
    Ok(TransformWitness {
        p_n: state.p,
        w: ito.w,
        p_y: output.p,
        standard,
    })
}

/// `C (sI - A)⁻¹ B + D`.
pub fn transfer_eval(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
    s: Complex64,
) -> Result<DMatrix<Complex64>> {
    let n = a.nrows();
    let resolvent = DMatrix::<Complex64>::identity(n, n) * s - to_complex(a);
    let bc = to_complex(b);
    let x = if n == 0 {
        DMatrix::zeros(0, b.ncols())
    } else {
        let lu = resolvent.full_piv_lu();
        let u = lu.u();
        let diag: Vec<f64> = (0..n).map(|i| u[(i, i)].norm()).collect();
        let big = diag.iter().fold(0.0_f64, |acc, &v| acc.max(v));
        let small = diag.iter().fold(f64::INFINITY, |acc, &v| acc.min(v));
        if big == 0.0 || small <= 1e-13 * big {
            return Err(Error::Singular(format!("sI - A at s = {s}")));
        }
        lu.solve(&bc)
            .ok_or_else(|| Error::Singular(format!("sI - A at s = {s}")))?
    };
    Ok(to_complex(c) * x + to_complex(d))
}

/// Largest `‖Ξ_S(s) - P_y Ξ_G(s) W‖_F` over the sample points. A point at an
/// eigenvalue of `𝐀` is shifted by +0.37 until it is regular.
pub fn transfer_equiv_check(
    g: &GeneralSystem,
    tw: &TransformWitness,
    samples: &[Complex64],
) -> Result<f64> {
    let s = &tw.standard;
    let p_y = to_complex(&tw.p_y);
    let w = to_complex(&tw.w);
    let mut worst = 0.0_f64;
    for &z0 in samples {
        let mut z = z0;
        let mut attempts = 0;
        let (xi_g, xi_s) = loop {
            let eval = transfer_eval(&g.a, &g.b, &g.c, &g.d, z)
                .and_then(|xg| transfer_eval(&s.a, &s.b, &s.c, &s.d, z).map(|xs| (xg, xs)));
            match eval {
                Ok(pair) => break pair,
                Err(Error::Singular(_)) if attempts < 16 => {
                    z += RESAMPLE_SHIFT;
                    attempts += 1;
                }
                Err(e) => return Err(e),
            }
        };
        worst = worst.max(crate::matkit::ops::frob_c(&(xi_s - &p_y * xi_g * &w)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkit::ops::j2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn diagonal_resolvent() {
        let i2 = DMatrix::identity(2, 2);
        let x = transfer_eval(
            &DMatrix::zeros(2, 2),
            &i2,
            &i2,
            &DMatrix::zeros(2, 2),
            c(2.0),
        )
        .unwrap();
        assert!(crate::matkit::ops::frob_c(&(x - to_complex(&(i2 * 0.5)))) < 1e-15);
    }

    #[test]
    fn damped_cavity_at_one() {
        let i2 = DMatrix::<f64>::identity(2, 2);
        let x = transfer_eval(&(&i2 * -0.5), &i2, &(-&i2), &i2, c(1.0)).unwrap();
        assert!(crate::matkit::ops::frob_c(&(x - to_complex(&(i2 / 3.0)))) < 1e-15);
    }

    #[test]
    fn eigenvalue_sample_is_singular() {
        let i2 = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(
            transfer_eval(&i2, &i2, &i2, &i2, c(1.0)),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn doubled_commutator_scales_inputs() {
        // Θ = 2J: P_n = I/√2, A unchanged by the scalar congruence, B scaled by 1/√2
        let a = DMatrix::from_row_slice(2, 2, &[-0.5, 0.2, -0.1, -0.5]);
        let g = GeneralSystem {
            a: a.clone(),
            b: DMatrix::identity(2, 2),
            c: DMatrix::identity(2, 2),
            d: DMatrix::identity(2, 2),
            theta: j2() * 2.0,
            f_v: crate::sysmodel::canonical_ito(1),
            f_y: crate::sysmodel::canonical_ito(1),
        };
        let tw = to_standard(&g, 1e-9).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((&tw.p_n - DMatrix::<f64>::identity(2, 2) * h).norm() < 1e-14);
        assert!((&tw.standard.a - &a).norm() < 1e-14);
        assert!((&tw.standard.b - &g.b * &tw.w * h).norm() < 1e-14);
        assert!(tw.max_identity_residual(&g) < 1e-12);
        assert!(transfer_equiv_check(&g, &tw, &default_samples()).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_indefinite_input_ito() {
        let mut g = GeneralSystem {
            a: DMatrix::zeros(2, 2),
            b: DMatrix::zeros(2, 2),
            c: DMatrix::zeros(2, 2),
            d: DMatrix::zeros(2, 2),
            theta: j2(),
            f_v: crate::sysmodel::canonical_ito(1),
            f_y: crate::sysmodel::canonical_ito(1),
        };
        g.f_v[(1, 1)] = c(-1.0);
        assert!(matches!(
            to_standard(&g, 1e-9),
            Err(Error::NotPositive { .. })
        ));
    }
}
