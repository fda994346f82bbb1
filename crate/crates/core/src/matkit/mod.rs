//! Decompositions and solvers used by the realizability and synthesis code.

mod ito;
pub mod ops;
mod pzkv;
mod skew;
mod solve;
mod symplectic;

pub use ito::{ito_factorize, ItoFactorization};
pub(crate) use pzkv::selection;
pub use pzkv::{pzkv_decompose, PzkvDecomposition};
pub use skew::{skew_canonical, SkewCanonicalResult};
pub use solve::{minnorm_left_solve, minnorm_right_solve, pseudo_inverse, rank_tol};
pub use symplectic::{random_symplectic, symplectic_complete, SymplecticCompletion};

/// Default tolerance for "equals zero" checks, scaled by the operand norms.
pub const DEFAULT_TOL: f64 = 1e-9;
