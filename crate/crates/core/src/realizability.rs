//! Physical realizability conditions with per-condition residuals.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::matkit::ops::{diag_j, hstack, vstack};
use crate::sysmodel::{GeneralSystem, QuantumOnlySystem, StandardSystem};

/// Default relative pass threshold: a condition passes when its residual is at
/// most `tol * (1 + largest operand norm)`.
pub const DEFAULT_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResidual {
    pub name: String,
    /// Frobenius norm of the condition's left-hand side minus right-hand side.
    pub residual: f64,
    pub threshold: f64,
}

impl ConditionResidual {
    pub fn passed(&self) -> bool {
        self.residual <= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizabilityReport {
    pub verdict: Verdict,
    pub conditions: Vec<ConditionResidual>,
    /// Condition with the largest residual-to-threshold ratio.
    pub worst: Option<String>,
}

impl RealizabilityReport {
    fn from_conditions(conditions: Vec<ConditionResidual>) -> Self {
        let verdict = if conditions.iter().all(ConditionResidual::passed) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        let ratio = |c: &ConditionResidual| {
            if c.threshold > 0.0 {
                c.residual / c.threshold
            } else if c.residual > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        };
        let worst = conditions
            .iter()
            .fold(None::<&ConditionResidual>, |acc, c| match acc {
                Some(best) if ratio(best) >= ratio(c) => Some(best),
                _ => Some(c),
            })
            .map(|c| c.name.clone());
        Self {
            verdict,
            conditions,
            worst,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn get(&self, name: &str) -> Option<&ConditionResidual> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.conditions
            .iter()
            .filter(|c| !c.passed())
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Residual of `Σ terms = 0` against threshold `tol·(1 + max ‖term‖)`.
fn condition(name: &str, terms: &[DMatrix<f64>], tol: f64) -> ConditionResidual {
    let mut sum = terms[0].clone();
    for t in &terms[1..] {
        sum += t;
    }
    let scale = terms.iter().map(|t| t.norm()).fold(0.0_f64, f64::max);
    ConditionResidual {
        name: name.to_string(),
        residual: sum.norm(),
        threshold: tol * (1.0 + scale),
    }
}

/// Conditions for a fully quantum oscillator:
/// `AΘ + ΘAᵀ + BΘ_wBᵀ = 0`, `BDᵀ = ΘCᵀΘ_z`, and `D ∈ {I, [I 0]}` (exact).
pub fn check_quantum(sys: &QuantumOnlySystem, tol: f64) -> RealizabilityReport {
    let theta = diag_j(sys.n_q);
    let theta_w = diag_j(sys.m);
    let theta_z = diag_j(sys.n_z());
    let (a, b, c, d) = (&sys.a, &sys.b, &sys.c, &sys.d);
    let state = condition(
        "state",
        &[
            a * &theta,
            &theta * a.transpose(),
            b * &theta_w * b.transpose(),
        ],
        tol,
    );
    let nondemolition = condition(
        "nondemolition",
        &[b * d.transpose(), -(&theta * c.transpose() * &theta_z)],
        tol,
    );
    let d_form = ConditionResidual {
        name: "d_form".into(),
        residual: sys.d_form_distance(),
        threshold: 0.0,
    };
    RealizabilityReport::from_conditions(vec![state, nondemolition, d_form])
}

/// The three standard-form conditions:
/// `AΘ_n + Θ_nAᵀ + BΘ_wBᵀ = 0`, `BΘ_wDᵀ = -Θ_nCᵀ`, `DΘ_wDᵀ = diag(Θ_yq, 0)`.
pub fn check_standard(sys: &StandardSystem, tol: f64) -> RealizabilityReport {
    let s = sys.structure();
    let (a, b, c, d) = (&sys.a, &sys.b, &sys.c, &sys.d);
    let state = condition(
        "state",
        &[
            a * &s.theta_n,
            &s.theta_n * a.transpose(),
            b * &s.theta_w * b.transpose(),
        ],
        tol,
    );
    let nondemolition = condition(
        "nondemolition",
        &[b * &s.theta_w * d.transpose(), &s.theta_n * c.transpose()],
        tol,
    );
    let output = condition(
        "output_ito",
        &[d * &s.theta_w * d.transpose(), -s.theta_y_target],
        tol,
    );
    RealizabilityReport::from_conditions(vec![state, nondemolition, output])
}

/// The ten block-partitioned constraints equivalent to [`check_standard`].
pub fn check_standard_partitioned(sys: &StandardSystem, tol: f64) -> RealizabilityReport {
    let s = sys.structure();
    let tq = diag_j(sys.dims.n_q);
    let tw = &s.theta_w;
    let tyq = diag_j(sys.dims.n_yq);
    let (a_qq, a_cq) = (sys.a_qq(), sys.a_cq());
    let (b_q, b_c) = (sys.b_q(), sys.b_c());
    let (c_qq, c_cq) = (sys.c_qq(), sys.c_cq());
    let (d_q, d_c) = (sys.d_q(), sys.d_c());

    let conditions = vec![
        condition(
            "a_qq_state",
            &[
                &a_qq * &tq,
                &tq * a_qq.transpose(),
                &b_q * tw * b_q.transpose(),
            ],
            tol,
        ),
        condition(
            "a_cq_state",
            &[&a_cq * &tq, &b_c * tw * b_q.transpose()],
            tol,
        ),
        condition("b_c_isotropic", &[&b_c * tw * b_c.transpose()], tol),
        condition("b_c_d_q", &[&b_c * tw * d_q.transpose()], tol),
        condition(
            "b_q_d_q",
            &[&b_q * tw * d_q.transpose(), &tq * c_qq.transpose()],
            tol,
        ),
        condition("b_c_d_c", &[&b_c * tw * d_c.transpose()], tol),
        condition(
            "b_q_d_c",
            &[&b_q * tw * d_c.transpose(), &tq * c_cq.transpose()],
            tol,
        ),
        condition("d_q_ito", &[&d_q * tw * d_q.transpose(), -tyq], tol),
        condition("d_q_d_c", &[&d_q * tw * d_c.transpose()], tol),
        condition("d_c_ito", &[&d_c * tw * d_c.transpose()], tol),
    ];
    RealizabilityReport::from_conditions(conditions)
}

/// General-form conditions with `Θ_v = (F_v - F_vᵀ)/2i`, `Θ_y = (F_y - F_yᵀ)/2i`.
pub fn check_general(sys: &GeneralSystem, tol: f64) -> RealizabilityReport {
    let theta_v = sys.theta_v();
    let theta_y = sys.theta_y();
    let t = &sys.theta;
    let (a, b, c, d) = (&sys.a, &sys.b, &sys.c, &sys.d);
    let conditions = vec![
        condition(
            "state",
            &[a * t, t * a.transpose(), b * &theta_v * b.transpose()],
            tol,
        ),
        condition(
            "nondemolition",
            &[b * &theta_v * d.transpose(), t * c.transpose()],
            tol,
        ),
        condition("output_ito", &[d * &theta_v * d.transpose(), -theta_y], tol),
    ];
    RealizabilityReport::from_conditions(conditions)
}

/// `Θ_n Cᵀ + B Θ_w Dᵀ`, the drift of the state-output commutator.
pub fn nondemolition_defect(sys: &StandardSystem) -> DMatrix<f64> {
    let s = sys.structure();
    &s.theta_n * sys.c.transpose() + &sys.b * &s.theta_w * sys.d.transpose()
}

/// `‖BΘ_wDᵀ + Θ_nCᵀ‖_F`; zero iff state and outputs satisfy non-demolition.
pub fn nondemolition_residual(sys: &StandardSystem) -> f64 {
    nondemolition_defect(sys).norm()
}

/// `∫₀ᵗ exp(Aτ) dτ`, read off the top-right block of `exp([[A, I], [0, 0]] t)`.
pub fn integrated_exponential(a: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let n = a.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let top = hstack(&[&(a * t), &(DMatrix::identity(n, n) * t)]);
    let block = vstack(&[&top, &DMatrix::zeros(n, 2 * n)]);
    block.exp().view((0, n), (n, n)).into_owned()
}

/// The commutator `[x(t), y(t)ᵀ] / 2i` for `g(0) = 0`, at each requested time:
/// `∫₀ᵗ exp(A(t-τ)) dτ · (Θ_nCᵀ + BΘ_wDᵀ)`.
pub fn commutator_trajectory(sys: &StandardSystem, times: &[f64]) -> Vec<DMatrix<f64>> {
    let k = nondemolition_defect(sys);
    times
        .iter()
        .map(|&t| integrated_exponential(&sys.a, t) * &k)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::Dimensions;

    fn cavity(a_diag: f64) -> QuantumOnlySystem {
        QuantumOnlySystem {
            n_q: 1,
            m: 1,
            a: DMatrix::identity(2, 2) * a_diag,
            b: DMatrix::identity(2, 2),
            c: -DMatrix::<f64>::identity(2, 2),
            d: DMatrix::identity(2, 2),
        }
    }

    #[test]
    fn damped_cavity_is_realizable() {
        let r = check_quantum(&cavity(-0.5), 1e-8);
        assert!(r.passed());
        assert!(r.conditions.iter().all(|c| c.residual <= 1e-12));
    }

    #[test]
    fn undamped_cavity_breaks_state_condition() {
        let r = check_quantum(&cavity(0.0), 1e-8);
        assert!(!r.passed());
        assert!((r.get("state").unwrap().residual - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.worst.as_deref(), Some("state"));
        assert_eq!(r.failing(), vec!["state"]);
    }

    #[test]
    fn d_form_is_checked_exactly() {
        let mut sys = cavity(-0.5);
        sys.d[(0, 0)] = 1.0 + 1e-13;
        let r = check_quantum(&sys, 1e-8);
        assert!(!r.get("d_form").unwrap().passed());
    }

    #[test]
    fn fully_classical_zero_system_passes() {
        let dims = Dimensions::new(0, 2, 1, 0, 1);
        let sys = StandardSystem::new(
            dims,
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]),
            DMatrix::zeros(2, 2),
            DMatrix::from_row_slice(1, 2, &[5.0, 6.0]),
            DMatrix::zeros(1, 2),
        );
        assert!(check_standard(&sys, 1e-8).passed());
        assert!(check_standard_partitioned(&sys, 1e-8).passed());
        assert_eq!(nondemolition_residual(&sys), 0.0);
    }

    #[test]
    fn all_classical_general_system_passes() {
        let g = GeneralSystem {
            a: DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 0.5, 3.0]),
            b: DMatrix::from_row_slice(2, 1, &[1.0, 1.0]),
            c: DMatrix::from_row_slice(1, 2, &[7.0, 0.0]),
            d: DMatrix::from_row_slice(1, 1, &[2.0]),
            theta: DMatrix::zeros(2, 2),
            f_v: crate::matkit::ops::to_complex(&DMatrix::identity(1, 1)),
            f_y: crate::matkit::ops::to_complex(&(DMatrix::identity(1, 1) * 4.0)),
        };
        assert!(check_general(&g, 1e-8).passed());
    }

    #[test]
    fn commutator_vanishes_at_time_zero() {
        let dims = Dimensions::new(1, 0, 1, 1, 0);
        let sys = StandardSystem::new(
            dims,
            DMatrix::from_row_slice(2, 2, &[0.3, 1.0, -2.0, 0.1]),
            DMatrix::identity(2, 2),
            DMatrix::from_element(2, 2, 1.0),
            DMatrix::identity(2, 2),
        );
        let g = commutator_trajectory(&sys, &[0.0]);
        assert_eq!(g[0].norm(), 0.0);
    }

    #[test]
    fn integrated_exponential_of_zero_is_time() {
        let i = integrated_exponential(&DMatrix::zeros(2, 2), 1.5);
        assert!((i - DMatrix::<f64>::identity(2, 2) * 1.5).norm() < 1e-14);
    }
}
