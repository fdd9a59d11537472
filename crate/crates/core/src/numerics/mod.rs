//! Dense linear-algebra kernels for small matrices.

mod dense;
pub mod eigen;
pub mod polar;
pub mod solve;

pub use dense::{Matrix, Vector};
pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use polar::{polar_factor, singular_values};
pub use solve::{condition_estimate, symmetric_solve, LdltFactor};
