//! Numerical laboratory for fractional powers of elliptic operators on an
//! interval: spectral and resolvent-quadrature realizations of `(A_B)^a`,
//! the restricted and regional fractional Laplacians, and regularity
//! measurements built on top of them.

pub mod cache;
pub mod contour;
pub mod error;
pub mod grid;
pub mod jacobi;
pub mod nonlocal;
pub mod regularity;
pub mod rhs;
pub mod selftest;
pub mod special;
pub mod spectral;
pub mod symbolic;
pub mod tridiag;

pub use error::{FracError, Result};
pub use grid::{
    apply_operator, assemble_elliptic, build_uniform_grid, BcKind, Coefficient, DiscreteOperator, EllipticSpec,
    Grid, Layout,
};
pub use spectral::{
    apply_power, apply_power_complex, apply_real_power, decompose, forward_coefficients, neumann_augment,
    solve_power, Augmentation, PowerProblem, SpectralDecomposition,
};
