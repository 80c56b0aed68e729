//! Generalized-exponent Lebesgue norms for weighted sequences and sampled
//! functions, direct numeric verification of the classical inequalities with
//! their sharp constants, and a search for Grothendieck factorization weights.

pub mod error;
pub mod exponent;
pub mod function_space;
pub mod gt_weighting;
pub mod inequalities;
pub mod io;
pub mod linalg;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod sequence_space;
pub mod suite;

pub use error::{Error, Result};
pub use exponent::{conjugate_exponent, theta_eval, validate_theta, ExponentValue, ThetaExponent};
pub use report::InequalityReport;
