//! Data model for standard-form, general-form and fully quantum systems.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::matkit::ops::{
    canonical_theta, diag_j, hermitian_defect, ito_skew_part, skew_defect, sub, to_complex,
};

/// Absolute tolerance on user-supplied structure matrices (skewness, Hermiticity).
pub const STRUCTURE_TOL: f64 = 1e-10;

/// Dimension record of a standard-form system.
///
/// The state has `n = 2 n_q + n_c` entries, the input field `2 m` quadratures
/// and the output `n_y = 2 n_yq + n_yc` entries. `n_w1` splits the `m` input
/// channels into the two modulator banks `w1` (first `n_w1` channels) and `w2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimensions {
    pub n_q: usize,
    pub n_c: usize,
    pub m: usize,
    pub n_yq: usize,
    pub n_yc: usize,
    #[serde(default)]
    pub n_w1: usize,
}

impl Dimensions {
    pub fn new(n_q: usize, n_c: usize, m: usize, n_yq: usize, n_yc: usize) -> Self {
        Self {
            n_q,
            n_c,
            m,
            n_yq,
            n_yc,
            n_w1: 0,
        }
    }

    pub fn with_w_split(mut self, n_w1: usize) -> Self {
        self.n_w1 = n_w1;
        self
    }

    pub fn n(&self) -> usize {
        2 * self.n_q + self.n_c
    }

    pub fn n_y(&self) -> usize {
        2 * self.n_yq + self.n_yc
    }

    pub fn input_width(&self) -> usize {
        2 * self.m
    }

    pub fn n_w2(&self) -> usize {
        self.m.saturating_sub(self.n_w1)
    }

    /// Violations of the dimension invariants themselves.
    pub fn check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.n_yq > self.m {
            out.push(Violation::Dimension(format!(
                "n_yq = {} exceeds the number of input channels m = {}",
                self.n_yq, self.m
            )));
        }
        if self.n_w1 > self.m {
            out.push(Violation::Dimension(format!(
                "n_w1 = {} exceeds m = {}",
                self.n_w1, self.m
            )));
        }
        out
    }
}

/// Canonical commutation and Ito matrices of a standard-form system.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureMatrices {
    pub theta_n: DMatrix<f64>,
    pub theta_w: DMatrix<f64>,
    pub f_w: DMatrix<Complex64>,
    pub theta_y_target: DMatrix<f64>,
}

/// Builds `Θ_n = diag(diag_nq(J), 0)`, `Θ_w = diag_m(J)`, `F_w = I + iΘ_w`
/// and the output target `diag(diag_nyq(J), 0)`.
pub fn make_structure(dims: &Dimensions) -> StructureMatrices {
    let theta_w = diag_j(dims.m);
    let f_w = canonical_ito(dims.m);
    StructureMatrices {
        theta_n: canonical_theta(dims.n_q, dims.n_c),
        theta_w,
        f_w,
        theta_y_target: canonical_theta(dims.n_yq, dims.n_yc),
    }
}

/// `F_w = I_2m + i diag_m(J)`, the Ito matrix of `m` vacuum field channels.
pub fn canonical_ito(m: usize) -> DMatrix<Complex64> {
    let w = 2 * m;
    to_complex(&DMatrix::identity(w, w)) + diag_j(m).map(|v| Complex64::new(0.0, v))
}

/// A structural problem found by validation. Violations are reported as data.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Dimension(String),
    Shape {
        matrix: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    NotSkew {
        matrix: &'static str,
        residual: f64,
    },
    NotHermitian {
        matrix: &'static str,
        residual: f64,
    },
    NotPositive {
        matrix: &'static str,
        min_eigenvalue: f64,
    },
    DForm {
        residual: f64,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Dimension(msg) => write!(f, "dimension: {msg}"),
            Violation::Shape {
                matrix,
                expected,
                found,
            } => write!(
                f,
                "shape: {matrix} is {}x{}, expected {}x{}",
                found.0, found.1, expected.0, expected.1
            ),
            Violation::NotSkew { matrix, residual } => {
                write!(
                    f,
                    "skew: {matrix} is not skew-symmetric (residual {residual:e})"
                )
            }
            Violation::NotHermitian { matrix, residual } => {
                write!(
                    f,
                    "hermitian: {matrix} is not Hermitian (residual {residual:e})"
                )
            }
            Violation::NotPositive {
                matrix,
                min_eigenvalue,
            } => write!(
                f,
                "nonnegativity: {matrix} has eigenvalue {min_eigenvalue:e} < 0"
            ),
            Violation::DForm { residual } => {
                write!(
                    f,
                    "d-form: D is neither I nor [I 0] (distance {residual:e})"
                )
            }
        }
    }
}

fn check_shape(
    out: &mut Vec<Violation>,
    matrix: &'static str,
    m: &DMatrix<f64>,
    expected: (usize, usize),
) {
    if m.shape() != expected {
        out.push(Violation::Shape {
            matrix,
            expected,
            found: m.shape(),
        });
    }
}

fn check_shape_c(
    out: &mut Vec<Violation>,
    matrix: &'static str,
    m: &DMatrix<Complex64>,
    expected: (usize, usize),
) {
    if m.shape() != expected {
        out.push(Violation::Shape {
            matrix,
            expected,
            found: m.shape(),
        });
    }
}

/// Smallest eigenvalue of a Hermitian matrix (0 for the empty matrix).
pub fn min_hermitian_eigenvalue(f: &DMatrix<Complex64>) -> f64 {
    if f.nrows() == 0 {
        return 0.0;
    }
    let sym = (f + f.adjoint()).map(|z| z * 0.5);
    nalgebra::SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, &v| acc.min(v))
}

fn check_ito(out: &mut Vec<Violation>, name: &'static str, f: &DMatrix<Complex64>, tol: f64) {
    let h = hermitian_defect(f);
    if h > tol {
        out.push(Violation::NotHermitian {
            matrix: name,
            residual: h,
        });
        return;
    }
    let scale = 1.0 + f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let min_eig = min_hermitian_eigenvalue(f);
    if min_eig < -tol * scale {
        out.push(Violation::NotPositive {
            matrix: name,
            min_eigenvalue: min_eig,
        });
    }
}

/// Standard-form system `dx = Ax dt + B dw`, `dy = Cx dt + D dw`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardSystem {
    pub dims: Dimensions,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl StandardSystem {
    pub fn new(
        dims: Dimensions,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
    ) -> Self {
        Self { dims, a, b, c, d }
    }

    /// Builds the system and rejects it if validation reports anything.
    pub fn try_new(
        dims: Dimensions,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
    ) -> crate::Result<Self> {
        let sys = Self::new(dims, a, b, c, d);
        match sys.validate().into_iter().next() {
            None => Ok(sys),
            Some(v) => Err(crate::Error::Invalid(v.to_string())),
        }
    }

    pub fn structure(&self) -> StructureMatrices {
        make_structure(&self.dims)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let d = &self.dims;
        let mut out = d.check();
        check_shape(&mut out, "A", &self.a, (d.n(), d.n()));
        check_shape(&mut out, "B", &self.b, (d.n(), d.input_width()));
        check_shape(&mut out, "C", &self.c, (d.n_y(), d.n()));
        check_shape(&mut out, "D", &self.d, (d.n_y(), d.input_width()));
        out
    }

    fn nq2(&self) -> usize {
        2 * self.dims.n_q
    }

    fn nyq2(&self) -> usize {
        2 * self.dims.n_yq
    }

    pub fn a_qq(&self) -> DMatrix<f64> {
        sub(&self.a, 0, 0, self.nq2(), self.nq2())
    }
    pub fn a_qc(&self) -> DMatrix<f64> {
        sub(&self.a, 0, self.nq2(), self.nq2(), self.dims.n_c)
    }
    pub fn a_cq(&self) -> DMatrix<f64> {
        sub(&self.a, self.nq2(), 0, self.dims.n_c, self.nq2())
    }
    pub fn a_cc(&self) -> DMatrix<f64> {
        sub(
            &self.a,
            self.nq2(),
            self.nq2(),
            self.dims.n_c,
            self.dims.n_c,
        )
    }
    pub fn b_q(&self) -> DMatrix<f64> {
        sub(&self.b, 0, 0, self.nq2(), self.b.ncols())
    }
    pub fn b_c(&self) -> DMatrix<f64> {
        sub(&self.b, self.nq2(), 0, self.dims.n_c, self.b.ncols())
    }
    /// Quantum output rows `C_q = [C_qq C_qc]`.
    pub fn c_q(&self) -> DMatrix<f64> {
        sub(&self.c, 0, 0, self.nyq2(), self.c.ncols())
    }
    pub fn c_qq(&self) -> DMatrix<f64> {
        sub(&self.c, 0, 0, self.nyq2(), self.nq2())
    }
    pub fn c_qc(&self) -> DMatrix<f64> {
        sub(&self.c, 0, self.nq2(), self.nyq2(), self.dims.n_c)
    }
    pub fn c_cq(&self) -> DMatrix<f64> {
        sub(&self.c, self.nyq2(), 0, self.dims.n_yc, self.nq2())
    }
    pub fn c_cc(&self) -> DMatrix<f64> {
        sub(
            &self.c,
            self.nyq2(),
            self.nq2(),
            self.dims.n_yc,
            self.dims.n_c,
        )
    }
    pub fn d_q(&self) -> DMatrix<f64> {
        sub(&self.d, 0, 0, self.nyq2(), self.d.ncols())
    }
    pub fn d_c(&self) -> DMatrix<f64> {
        sub(&self.d, self.nyq2(), 0, self.dims.n_yc, self.d.ncols())
    }
}

/// General-form system with arbitrary commutation matrix `Θ` and Ito
/// matrices `F_v` (input) and `F_y` (output).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub theta: DMatrix<f64>,
    pub f_v: DMatrix<Complex64>,
    pub f_y: DMatrix<Complex64>,
}

impl GeneralSystem {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Number of (real) input signals.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn n_y(&self) -> usize {
        self.c.nrows()
    }

    /// `Θ_v = (F_v - F_vᵀ) / 2i`.
    pub fn theta_v(&self) -> DMatrix<f64> {
        ito_skew_part(&self.f_v)
    }

    /// `Θ_y = (F_y - F_yᵀ) / 2i`.
    pub fn theta_y(&self) -> DMatrix<f64> {
        ito_skew_part(&self.f_y)
    }

    /// Embeds a standard-form system as a general one: `Θ = Θ_n`,
    /// `F_v = F_w` and `F_y = I + i diag(Θ_yq, 0)`.
    pub fn from_standard(sys: &StandardSystem) -> Self {
        let s = sys.structure();
        let ny = sys.dims.n_y();
        Self {
            a: sys.a.clone(),
            b: sys.b.clone(),
            c: sys.c.clone(),
            d: sys.d.clone(),
            theta: s.theta_n,
            f_v: s.f_w,
            f_y: to_complex(&DMatrix::identity(ny, ny))
                + s.theta_y_target.map(|v| Complex64::new(0.0, v)),
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        self.validate_with_tol(STRUCTURE_TOL)
    }

    pub fn validate_with_tol(&self, tol: f64) -> Vec<Violation> {
        let (n, m, ny) = (self.n(), self.m(), self.n_y());
        let mut out = Vec::new();
        check_shape(&mut out, "A", &self.a, (n, n));
        check_shape(&mut out, "B", &self.b, (n, m));
        check_shape(&mut out, "C", &self.c, (ny, n));
        check_shape(&mut out, "D", &self.d, (ny, m));
        check_shape(&mut out, "Theta", &self.theta, (n, n));
        check_shape_c(&mut out, "F_v", &self.f_v, (m, m));
        check_shape_c(&mut out, "F_y", &self.f_y, (ny, ny));
        if !out.is_empty() {
            return out;
        }
        let skew = skew_defect(&self.theta);
        if skew > tol {
            out.push(Violation::NotSkew {
                matrix: "Theta",
                residual: skew,
            });
        }
        check_ito(&mut out, "F_v", &self.f_v, tol);
        check_ito(&mut out, "F_y", &self.f_y, tol);
        out
    }
}

/// Fully quantum open oscillator `dξ = Aξ dt + B dw`, `dz = Cξ dt + D dw`
/// with canonical `Θ = diag_nq(J)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumOnlySystem {
    pub n_q: usize,
    pub m: usize,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl QuantumOnlySystem {
    /// Number of output channel pairs `n_z` (`C` has `2 n_z` rows).
    pub fn n_z(&self) -> usize {
        self.c.nrows() / 2
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let (n, w) = (2 * self.n_q, 2 * self.m);
        let rows = self.c.nrows();
        if !rows.is_multiple_of(2) {
            out.push(Violation::Dimension(format!(
                "C has an odd number of rows ({rows})"
            )));
        }
        if rows > w {
            out.push(Violation::Dimension(format!(
                "output width {rows} exceeds input width {w}"
            )));
        }
        check_shape(&mut out, "A", &self.a, (n, n));
        check_shape(&mut out, "B", &self.b, (n, w));
        check_shape(&mut out, "C", &self.c, (rows, n));
        check_shape(&mut out, "D", &self.d, (rows, w));
        if out.is_empty() {
            let dist = self.d_form_distance();
            if dist != 0.0 {
                out.push(Violation::DForm { residual: dist });
            }
        }
        out
    }

    /// Frobenius distance from `D` to `[I_{2n_z} 0]` (which is `I` when
    /// `n_z = m`). Zero iff `D` has one of the admissible forms.
    pub fn d_form_distance(&self) -> f64 {
        let (r, c) = self.d.shape();
        if r > c {
            return f64::INFINITY;
        }
        (&self.d - DMatrix::<f64>::identity(r, c)).norm()
    }
}
