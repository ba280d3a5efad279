//! Dense complex linear algebra used by every other module.

mod antilinear;
mod decomp;
mod matrix;
pub mod random;

pub use antilinear::{polar_antilinear, positive_sqrt, AntilinearOp};
pub use decomp::{
    cholesky_upper, hermitian_eig, least_squares, min_eigenvalue, null_space, orthonormalize,
    project_psd, pseudo_inverse, svd, HermitianEig, Svd,
};
pub use matrix::{axpy, conj_vec, dot, norm, vec_scale, vec_sub, CMatrix, C64, ONE, ZERO};

/// Default tolerance for unit-scale residual checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative singular value cutoff for rank decisions.
pub const RANK_TOL: f64 = 1e-9;
