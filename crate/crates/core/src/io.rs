//! JSON file formats for systems, reports, realizations and trajectories.
//!
//! Matrices are row-major nested arrays. Complex entries are written as
//! `[re, im]` and may be read either as pairs or as plain numbers. Floats are
//! written in shortest round-trip decimal form.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::matkit::ops::diag_j;
use crate::moments::MomentTrajectory;
use crate::realizability::RealizabilityReport;
use crate::synthesis::{ClassicalSubsystem, QuantumSubsystem, Realization};
use crate::sysmodel::{Dimensions, GeneralSystem, QuantumOnlySystem, StandardSystem};
use crate::transform::TransformWitness;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexEntry {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexEntry> for Complex64 {
    fn from(e: ComplexEntry) -> Self {
        match e {
            ComplexEntry::Real(re) => Complex64::new(re, 0.0),
            ComplexEntry::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

pub type ComplexRows = Vec<Vec<ComplexEntry>>;

pub fn rows_of(m: &DMatrix<f64>) -> Rows {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

pub fn complex_rows_of(m: &DMatrix<Complex64>) -> ComplexRows {
    (0..m.nrows())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|z| ComplexEntry::Pair([z.re, z.im]))
                .collect()
        })
        .collect()
}

/// Builds a matrix from nested rows, checking it against `expected`. An empty
/// outer array is read as a matrix with zero rows and the expected column count.
pub fn matrix_from_rows(
    name: &str,
    rows: &[Vec<f64>],
    expected: (usize, usize),
) -> Result<DMatrix<f64>> {
    let shape_err = |r: usize, c: usize| Error::Shape {
        matrix: name.to_string(),
        expected_rows: expected.0,
        expected_cols: expected.1,
        rows: r,
        cols: c,
    };
    let cols = rows.first().map_or(expected.1, Vec::len);
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(Error::Parse(format!(
            "matrix {name}: row {i} has {} entries, row 0 has {cols}",
            row.len()
        )));
    }
    if (rows.len(), cols) != expected {
        return Err(shape_err(rows.len(), cols));
    }
    Ok(DMatrix::from_fn(expected.0, expected.1, |i, j| rows[i][j]))
}

pub fn complex_matrix_from_rows(
    name: &str,
    rows: &[Vec<ComplexEntry>],
    expected: (usize, usize),
) -> Result<DMatrix<Complex64>> {
    let re: Rows = rows
        .iter()
        .map(|r| r.iter().map(|&e| Complex64::from(e).re).collect())
        .collect();
    let im: Rows = rows
        .iter()
        .map(|r| r.iter().map(|&e| Complex64::from(e).im).collect())
        .collect();
    let re = matrix_from_rows(name, &re, expected)?;
    let im = matrix_from_rows(name, &im, expected)?;
    Ok(re.zip_map(&im, Complex64::new))
}

/// On-disk system description, discriminated by `form`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum SystemFile {
    Standard {
        dims: Dimensions,
        a: Rows,
        b: Rows,
        c: Rows,
        d: Rows,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    General {
        a: Rows,
        b: Rows,
        c: Rows,
        d: Rows,
        theta: Rows,
        f_v: ComplexRows,
        f_y: ComplexRows,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    Quantum {
        n_q: usize,
        m: usize,
        a: Rows,
        b: Rows,
        c: Rows,
        d: Rows,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    /// Quantum output rows `D_q` of a feedthrough matrix, for completion.
    Dq {
        d_q: Rows,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
}

/// A parsed system of any form.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemInput {
    Standard(StandardSystem),
    General(GeneralSystem),
    Quantum(QuantumOnlySystem),
    Dq {
        d_q: DMatrix<f64>,
        theta_w: DMatrix<f64>,
    },
}

impl SystemInput {
    pub fn form(&self) -> &'static str {
        match self {
            SystemInput::Standard(_) => "standard",
            SystemInput::General(_) => "general",
            SystemInput::Quantum(_) => "quantum",
            SystemInput::Dq { .. } => "dq",
        }
    }
}

impl SystemFile {
    pub fn tol(&self) -> Option<f64> {
        match self {
            SystemFile::Standard { tol, .. }
            | SystemFile::General { tol, .. }
            | SystemFile::Quantum { tol, .. }
            | SystemFile::Dq { tol, .. } => *tol,
        }
    }

    pub fn from_standard(sys: &StandardSystem) -> Self {
        SystemFile::Standard {
            dims: sys.dims,
            a: rows_of(&sys.a),
            b: rows_of(&sys.b),
            c: rows_of(&sys.c),
            d: rows_of(&sys.d),
            tol: None,
        }
    }

    pub fn from_general(sys: &GeneralSystem) -> Self {
        SystemFile::General {
            a: rows_of(&sys.a),
            b: rows_of(&sys.b),
            c: rows_of(&sys.c),
            d: rows_of(&sys.d),
            theta: rows_of(&sys.theta),
            f_v: complex_rows_of(&sys.f_v),
            f_y: complex_rows_of(&sys.f_y),
            tol: None,
        }
    }

    /// Converts to validated matrices. Shape errors name the matrix and the
    /// shape implied by the dimension record (or by `Θ`, `F_v`, `F_y`).
    pub fn into_system(self) -> Result<SystemInput> {
        match self {
            SystemFile::Standard {
                dims, a, b, c, d, ..
            } => {
                if let Some(v) = dims.check().into_iter().next() {
                    return Err(Error::Invalid(v.to_string()));
                }
                let (n, w, ny) = (dims.n(), dims.input_width(), dims.n_y());
                Ok(SystemInput::Standard(StandardSystem::new(
                    dims,
                    matrix_from_rows("A", &a, (n, n))?,
                    matrix_from_rows("B", &b, (n, w))?,
                    matrix_from_rows("C", &c, (ny, n))?,
                    matrix_from_rows("D", &d, (ny, w))?,
                )))
            }
            SystemFile::General {
                a,
                b,
                c,
                d,
                theta,
                f_v,
                f_y,
                ..
            } => {
                let (n, nv, ny) = (theta.len(), f_v.len(), f_y.len());
                Ok(SystemInput::General(GeneralSystem {
                    a: matrix_from_rows("A", &a, (n, n))?,
                    b: matrix_from_rows("B", &b, (n, nv))?,
                    c: matrix_from_rows("C", &c, (ny, n))?,
                    d: matrix_from_rows("D", &d, (ny, nv))?,
                    theta: matrix_from_rows("theta", &theta, (n, n))?,
                    f_v: complex_matrix_from_rows("f_v", &f_v, (nv, nv))?,
                    f_y: complex_matrix_from_rows("f_y", &f_y, (ny, ny))?,
                }))
            }
            SystemFile::Quantum {
                n_q, m, a, b, c, d, ..
            } => {
                let (n, w, nz) = (2 * n_q, 2 * m, c.len());
                Ok(SystemInput::Quantum(QuantumOnlySystem {
                    n_q,
                    m,
                    a: matrix_from_rows("A", &a, (n, n))?,
                    b: matrix_from_rows("B", &b, (n, w))?,
                    c: matrix_from_rows("C", &c, (nz, n))?,
                    d: matrix_from_rows("D", &d, (nz, w))?,
                }))
            }
            SystemFile::Dq { d_q, m, .. } => Ok(SystemInput::Dq {
                d_q: matrix_from_rows("d_q", &d_q, (d_q.len(), 2 * m))?,
                theta_w: diag_j(m),
            }),
        }
    }
}

pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

/// Parses a system document; returns the system and the tolerance it requests.
pub fn parse_system(text: &str) -> Result<(SystemInput, Option<f64>)> {
    let file: SystemFile = parse_json(text, "system file")?;
    let tol = file.tol();
    Ok((file.into_system()?, tol))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn read_system(path: &Path) -> Result<(SystemInput, Option<f64>)> {
    parse_system(&read_text(path)?).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedResidual {
    pub name: String,
    pub residual: f64,
}

pub fn named(list: &[(&str, f64)]) -> Vec<NamedResidual> {
    list.iter()
        .map(|&(name, residual)| NamedResidual {
            name: name.into(),
            residual,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReportFile {
    pub schema_version: u32,
    pub form: String,
    pub tol: f64,
    pub report: RealizabilityReport,
    /// Block-partitioned constraints, for standard-form input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partitioned: Option<RealizabilityReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformReportFile {
    pub schema_version: u32,
    pub tol: f64,
    pub p_n: Rows,
    pub w: Rows,
    pub p_y: Rows,
    pub standard: SystemFile,
    pub identity_residuals: Vec<NamedResidual>,
    pub transfer_max_deviation: f64,
}

impl TransformReportFile {
    pub fn new(tw: &TransformWitness, identity: &[(&str, f64)], deviation: f64, tol: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tol,
            p_n: rows_of(&tw.p_n),
            w: rows_of(&tw.w),
            p_y: rows_of(&tw.p_y),
            standard: SystemFile::from_standard(&tw.standard),
            identity_residuals: named(identity),
            transfer_max_deviation: deviation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumSubsystemFile {
    pub a_qq: Rows,
    pub b_q: Rows,
    pub e_mat: Rows,
    pub c_qq: Rows,
    pub d_q: Rows,
    pub c_qq_prime: Rows,
    pub d_q_prime: Rows,
    pub k_q: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSubsystemFile {
    pub a_cc_prime: Rows,
    pub b_c_prime: Rows,
    pub c_cc_prime: Rows,
    pub d_c_prime: Rows,
    pub c_c_prime_1: Rows,
    pub c_c_prime_2: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationFile {
    pub schema_version: u32,
    pub dims: Dimensions,
    pub r: usize,
    pub g1: QuantumSubsystemFile,
    pub g2: ClassicalSubsystemFile,
    pub g_mat: Rows,
    pub k_sel: Rows,
    pub v_sympl: Rows,
    pub p_perm: Rows,
    pub z: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reconstruction_errors: Vec<NamedResidual>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_reconstruction_error: Option<f64>,
}

impl RealizationFile {
    pub fn new(r: &Realization) -> Self {
        let (g1, g2) = (&r.g1, &r.g2);
        Self {
            schema_version: SCHEMA_VERSION,
            dims: r.dims,
            r: r.r,
            g1: QuantumSubsystemFile {
                a_qq: rows_of(&g1.a_qq),
                b_q: rows_of(&g1.b_q),
                e_mat: rows_of(&g1.e_mat),
                c_qq: rows_of(&g1.c_qq),
                d_q: rows_of(&g1.d_q),
                c_qq_prime: rows_of(&g1.c_qq_prime),
                d_q_prime: rows_of(&g1.d_q_prime),
                k_q: rows_of(&g1.k_q),
            },
            g2: ClassicalSubsystemFile {
                a_cc_prime: rows_of(&g2.a_cc_prime),
                b_c_prime: rows_of(&g2.b_c_prime),
                c_cc_prime: rows_of(&g2.c_cc_prime),
                d_c_prime: rows_of(&g2.d_c_prime),
                c_c_prime_1: rows_of(&g2.c_c_prime_1),
                c_c_prime_2: rows_of(&g2.c_c_prime_2),
            },
            g_mat: rows_of(&r.g_mat),
            k_sel: rows_of(&r.k_sel),
            v_sympl: rows_of(&r.v_sympl),
            p_perm: rows_of(&r.p_perm),
            z: rows_of(&r.z),
            tol: None,
            reconstruction_errors: Vec::new(),
            relative_reconstruction_error: None,
        }
    }

    pub fn into_realization(self) -> Result<Realization> {
        let d = self.dims;
        if let Some(v) = d.check().into_iter().next() {
            return Err(Error::Invalid(v.to_string()));
        }
        let (nq2, nc, w, nyq2, nyc, r) = (2 * d.n_q, d.n_c, 2 * d.m, 2 * d.n_yq, d.n_yc, self.r);
        let h2 = w - nyq2;
        let split = 2 * d.n_w1;
        let g1 = self.g1;
        let g2 = self.g2;
        Ok(Realization {
            g1: QuantumSubsystem {
                a_qq: matrix_from_rows("g1.a_qq", &g1.a_qq, (nq2, nq2))?,
                b_q: matrix_from_rows("g1.b_q", &g1.b_q, (nq2, w))?,
                e_mat: matrix_from_rows("g1.e_mat", &g1.e_mat, (nq2, nc))?,
                c_qq: matrix_from_rows("g1.c_qq", &g1.c_qq, (nyq2, nq2))?,
                d_q: matrix_from_rows("g1.d_q", &g1.d_q, (nyq2, w))?,
                c_qq_prime: matrix_from_rows("g1.c_qq_prime", &g1.c_qq_prime, (h2, nq2))?,
                d_q_prime: matrix_from_rows("g1.d_q_prime", &g1.d_q_prime, (h2, w))?,
                k_q: matrix_from_rows("g1.k_q", &g1.k_q, (nq2, nc))?,
            },
            g2: ClassicalSubsystem {
                a_cc_prime: matrix_from_rows("g2.a_cc_prime", &g2.a_cc_prime, (nc, nc))?,
                b_c_prime: matrix_from_rows("g2.b_c_prime", &g2.b_c_prime, (nc, r))?,
                c_cc_prime: matrix_from_rows("g2.c_cc_prime", &g2.c_cc_prime, (nyc, nc))?,
                d_c_prime: matrix_from_rows("g2.d_c_prime", &g2.d_c_prime, (nyc, r))?,
                c_c_prime_1: matrix_from_rows("g2.c_c_prime_1", &g2.c_c_prime_1, (split, nc))?,
                c_c_prime_2: matrix_from_rows("g2.c_c_prime_2", &g2.c_c_prime_2, (w - split, nc))?,
            },
            g_mat: matrix_from_rows("g_mat", &self.g_mat, (r, h2))?,
            k_sel: matrix_from_rows("k_sel", &self.k_sel, (r, h2))?,
            v_sympl: matrix_from_rows("v_sympl", &self.v_sympl, (h2, h2))?,
            p_perm: matrix_from_rows("p_perm", &self.p_perm, (nc + nyc, nc + nyc))?,
            z: matrix_from_rows("z", &self.z, (nc + nyc, r))?,
            r,
            dims: d,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub schema_version: u32,
    pub t_final: f64,
    pub dt: f64,
    pub skew_drift: f64,
    pub max_hermitian_defect: f64,
    pub times: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub second_moments: Vec<ComplexRows>,
}

impl TrajectoryFile {
    pub fn new(traj: &MomentTrajectory, t_final: f64, dt: f64, skew_drift: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            t_final,
            dt,
            skew_drift,
            max_hermitian_defect: traj.max_hermitian_defect(),
            times: traj.times.clone(),
            means: traj
                .means
                .iter()
                .map(|m| m.iter().copied().collect())
                .collect(),
            second_moments: traj.second_moments.iter().map(complex_rows_of).collect(),
        }
    }

    pub fn into_trajectory(self) -> Result<MomentTrajectory> {
        let n = self.means.first().map_or(0, Vec::len);
        let second_moments = self
            .second_moments
            .iter()
            .enumerate()
            .map(|(k, s)| complex_matrix_from_rows(&format!("second_moments[{k}]"), s, (n, n)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MomentTrajectory {
            times: self.times,
            means: self.means.into_iter().map(DVector::from_vec).collect(),
            second_moments,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionFile {
    pub schema_version: u32,
    pub d_q_prime: Rows,
    pub stacked: Rows,
    pub symplectic_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationFile {
    pub schema_version: u32,
    pub tol: f64,
    pub a_tilde: Rows,
    pub b_tilde: Rows,
    pub c_tilde: Rows,
    pub d_tilde: Rows,
    pub theta_tilde: Rows,
    pub c_bar: Rows,
    pub relation_residuals: Vec<NamedResidual>,
    pub reduced_check: RealizabilityReport,
}
