//! Numerical tolerances shared by validation and tests.

/// Hermiticity: `max|O - O^dagger| <= HERMITIAN * (1 + max|O|)`.
pub const HERMITIAN: f64 = 1e-10;

/// Allowed distance of a density-matrix trace from 1.
pub const TRACE: f64 = 1e-10;

/// Smallest eigenvalue accepted for a density matrix is `-MIN_EIGENVALUE`.
pub const MIN_EIGENVALUE: f64 = 1e-10;

/// Allowed distance of a pure-state norm from 1.
pub const PURE_NORM: f64 = 1e-12;

/// Largest imaginary part tolerated in `Tr(rho O)`, relative to `1 + max|O|`.
pub const EXPECTATION_IMAG: f64 = 1e-10;

/// Eigen-decomposition reconstruction and orthonormality bound.
pub const EIGEN_RECONSTRUCTION: f64 = 1e-9;

/// Default feasibility slack for `a_k - tol <= Tr(rho O_k) <= b_k + tol`.
pub const FEASIBILITY: f64 = 1e-9;

/// Multiplier magnitude beyond which dual ascent is declared unbounded.
pub const DIVERGENCE: f64 = 1e8;
