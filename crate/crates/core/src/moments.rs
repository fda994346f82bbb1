//! First and second moments of the linear stochastic dynamics
//! `dx = Ax dt + B dw`, integrated with fixed-step RK4:
//!
//! ```text
//! dΣ/dt = AΣ + ΣAᵀ + B F_w Bᵀ,   dμ/dt = Aμ
//! ```
//!
//! `Σ = E[x xᵀ]` is complex Hermitian; its skew part `(Σ - Σᵀ)/2i` carries the
//! commutators of the state, which stay at `Θ_n` exactly when the state
//! realizability condition holds.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::matkit::ops::{hermitian_defect, ito_skew_part, to_complex};
use crate::sysmodel::StandardSystem;
use crate::{Error, Result};

/// Tolerance on the initial second moment's Hermiticity and skew part.
pub const SIGMA0_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTrajectory {
    pub times: Vec<f64>,
    pub means: Vec<DVector<f64>>,
    pub second_moments: Vec<DMatrix<Complex64>>,
}

impl MomentTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `‖Σ - Σᴴ‖_F` over the stored steps.
    pub fn max_hermitian_defect(&self) -> f64 {
        self.second_moments
            .iter()
            .map(hermitian_defect)
            .fold(0.0, f64::max)
    }
}

/// `I + iΘ_n`.
pub fn default_sigma0(theta_n: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = theta_n.nrows();
    to_complex(&DMatrix::identity(n, n)) + theta_n.map(|v| Complex64::new(0.0, v))
}

/// Simulates with vacuum field inputs `F_w = I + iΘ_w`.
pub fn simulate(
    sys: &StandardSystem,
    sigma0: &DMatrix<Complex64>,
    mean0: &DVector<f64>,
    t_final: f64,
    dt: f64,
) -> Result<MomentTrajectory> {
    simulate_with_ito(sys, &sys.structure().f_w, sigma0, mean0, t_final, dt)
}

/// Simulates with an arbitrary input Ito matrix `f_w`.
///
/// The number of steps is `round(t_final / dt)` (at least one when
/// `t_final > 0`), with the step shortened or lengthened slightly to land on
/// `t_final` exactly. Every step is stored.
pub fn simulate_with_ito(
    sys: &StandardSystem,
    f_w: &DMatrix<Complex64>,
    sigma0: &DMatrix<Complex64>,
    mean0: &DVector<f64>,
    t_final: f64,
    dt: f64,
) -> Result<MomentTrajectory> {
    let n = sys.a.nrows();
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::Invalid(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if !t_final.is_finite() || t_final < 0.0 {
        return Err(Error::Invalid(format!(
            "final time must be non-negative, got {t_final}"
        )));
    }
    if sigma0.shape() != (n, n) {
        return Err(Error::Shape {
            matrix: "sigma0".into(),
            expected_rows: n,
            expected_cols: n,
            rows: sigma0.nrows(),
            cols: sigma0.ncols(),
        });
    }
    if mean0.len() != n {
        return Err(Error::Shape {
            matrix: "mean0".into(),
            expected_rows: n,
            expected_cols: 1,
            rows: mean0.len(),
            cols: 1,
        });
    }
    let herm = hermitian_defect(sigma0);
    if herm > SIGMA0_TOL {
        return Err(Error::NotHermitian {
            matrix: "sigma0".into(),
            residual: herm,
        });
    }
    let skew = (ito_skew_part(sigma0) - sys.structure().theta_n).norm();
    if skew > SIGMA0_TOL {
        return Err(Error::Precondition {
            what: "skew part of sigma0 equals Θ_n".into(),
            residual: skew,
        });
    }

    let a = to_complex(&sys.a);
    let a_t = a.transpose();
    let b = to_complex(&sys.b);
    let q = &b * f_w * b.transpose();
    let lyap = |s: &DMatrix<Complex64>| &a * s + s * &a_t + &q;
    let lin = |x: &DVector<f64>| &sys.a * x;

    let steps = if t_final == 0.0 {
        0
    } else {
        ((t_final / dt).round() as usize).max(1)
    };
    let h = if steps == 0 {
        0.0
    } else {
        t_final / steps as f64
    };
    let mut traj = MomentTrajectory {
        times: Vec::with_capacity(steps + 1),
        means: Vec::with_capacity(steps + 1),
        second_moments: Vec::with_capacity(steps + 1),
    };
    let mut sigma = hermitize(sigma0);
    let mut mu = mean0.clone();
    traj.times.push(0.0);
    traj.means.push(mu.clone());
    traj.second_moments.push(sigma.clone());
    for k in 1..=steps {
        let k1 = lyap(&sigma);
        let k2 = lyap(&(&sigma + &k1 * Complex64::from(h / 2.0)));
        let k3 = lyap(&(&sigma + &k2 * Complex64::from(h / 2.0)));
        let k4 = lyap(&(&sigma + &k3 * Complex64::from(h)));
        sigma += (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4)
            * Complex64::from(h / 6.0);
        sigma = hermitize(&sigma);

        let m1 = lin(&mu);
        let m2 = lin(&(&mu + &m1 * (h / 2.0)));
        let m3 = lin(&(&mu + &m2 * (h / 2.0)));
        let m4 = lin(&(&mu + &m3 * h));
        mu += (m1 + m2 * 2.0 + m3 * 2.0 + m4) * (h / 6.0);

        if sigma.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
            || mu.iter().any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite { step: k });
        }
        traj.times.push(k as f64 * h);
        traj.means.push(mu.clone());
        traj.second_moments.push(sigma.clone());
    }
    Ok(traj)
}

fn hermitize(s: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (s + s.adjoint()) * Complex64::from(0.5)
}

/// `max_t ‖(Σ(t) - Σ(t)ᵀ)/2i - Θ_n‖_F`.
pub fn skew_drift(traj: &MomentTrajectory, theta_n: &DMatrix<f64>) -> f64 {
    traj.second_moments
        .iter()
        .map(|s| (ito_skew_part(s) - theta_n).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkit::ops::{frob_c, j2};
    use crate::realizability::check_standard;
    use crate::reference::{damped_cavity, mixed_feedback};
    use crate::sysmodel::Dimensions;

    fn zeros(n: usize) -> DVector<f64> {
        DVector::zeros(n)
    }

    #[test]
    fn zero_drift_is_constant() {
        let z = DMatrix::zeros(2, 2);
        let sys = StandardSystem::new(
            Dimensions::new(1, 0, 1, 0, 0),
            z.clone(),
            z,
            DMatrix::zeros(0, 2),
            DMatrix::zeros(0, 2),
        );
        let s0 = default_sigma0(&j2())
            + to_complex(&DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]));
        let traj = simulate(&sys, &s0, &zeros(2), 1.0, 0.1).unwrap();
        assert_eq!(traj.len(), 11);
        for s in &traj.second_moments {
            assert_eq!(s, &s0);
        }
    }

    #[test]
    fn damped_cavity_relaxes_to_vacuum() {
        let sys = damped_cavity();
        let vac = default_sigma0(&j2());
        let s0 = &vac + to_complex(&DMatrix::identity(2, 2));
        let traj = simulate(&sys, &s0, &DVector::from_vec(vec![1.0, -1.0]), 10.0, 1e-3).unwrap();
        // Σ(t) = e^{-t}(Σ0 - Σ∞) + Σ∞, μ(t) = e^{-t/2} μ0
        for (t, s) in traj.times.iter().zip(&traj.second_moments).step_by(1000) {
            let exact = &vac + to_complex(&DMatrix::identity(2, 2)) * Complex64::from((-t).exp());
            assert!(frob_c(&(s - exact)) < 1e-10, "t = {t}");
        }
        assert!(frob_c(&(traj.second_moments.last().unwrap() - &vac)) <= 1e-4);
        let mu = traj.means.last().unwrap();
        assert!((mu[0] - (-5.0_f64).exp()).abs() < 1e-10);
        assert!(skew_drift(&traj, &j2()) < 1e-12);
    }

    #[test]
    fn mixed_feedback_preserves_commutators() {
        let sys = mixed_feedback();
        let theta = sys.structure().theta_n;
        let traj = simulate(&sys, &default_sigma0(&theta), &zeros(3), 5.0, 1e-3).unwrap();
        assert!(skew_drift(&traj, &theta) <= 1e-6);
        assert!(traj.max_hermitian_defect() <= 1e-9);
    }

    #[test]
    fn undamped_cavity_violates_commutators() {
        let mut sys = damped_cavity();
        sys.a.fill(0.0);
        let traj = simulate(&sys, &default_sigma0(&j2()), &zeros(2), 1.0, 1e-3).unwrap();
        // d/dt of the skew part is BΘ_wBᵀ = J, so the drift is ‖J‖t
        let drift = skew_drift(&traj, &j2());
        assert!((drift - 2.0_f64.sqrt()).abs() < 1e-9);
        assert!(drift >= 0.5);
    }

    #[test]
    fn small_time_growth_matches_state_residual() {
        let mut sys = mixed_feedback();
        sys.a[(0, 1)] += 0.3;
        let report = check_standard(&sys, 1e-8);
        let rho = report.get("state").unwrap().residual;
        let theta = sys.structure().theta_n;
        let t = 0.01;
        let traj = simulate(&sys, &default_sigma0(&theta), &zeros(3), t, 1e-4).unwrap();
        let rate = skew_drift(&traj, &theta) / t;
        assert!(
            rate >= 0.5 * rho && rate <= 2.0 * rho,
            "rate {rate} residual {rho}"
        );
    }

    #[test]
    fn constant_commutator_trajectory_has_no_drift() {
        let theta = j2();
        let s = theta.map(|v| Complex64::new(0.0, v));
        let traj = MomentTrajectory {
            times: vec![0.0, 1.0],
            means: vec![zeros(2); 2],
            second_moments: vec![s.clone(), s],
        };
        assert_eq!(skew_drift(&traj, &theta), 0.0);
    }

    #[test]
    fn rejects_wrong_commutators() {
        let sys = damped_cavity();
        let s0 = to_complex(&DMatrix::identity(2, 2));
        assert!(matches!(
            simulate(&sys, &s0, &zeros(2), 1.0, 0.1),
            Err(Error::Precondition { .. })
        ));
        assert!(matches!(
            simulate(&sys, &default_sigma0(&j2()), &zeros(2), 1.0, 0.0),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn blow_up_reports_step() {
        let mut sys = damped_cavity();
        sys.a = DMatrix::identity(2, 2) * 400.0;
        let r = simulate(&sys, &default_sigma0(&j2()), &zeros(2), 100.0, 0.1);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }
}
