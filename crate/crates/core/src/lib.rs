//! Finite-scale computations around the density of polynomials in `L²(M)`.
//!
//! The crate covers two settings. In the first, `M` is a measure on the real
//! line whose values are positive semidefinite `N×N` matrices and the
//! polynomials are vector valued. In the second, `σ` is a nonnegative scalar
//! measure on the strip `ℝ × [−π, π)` and the polynomials are finite sums of
//! `x^m e^{inφ}`. For finitely atomic measures every object involved (moment
//! sequences, block Hankel and Gram matrices, the Hilbert space generated by
//! the moments, multiplication operators, resolvents, joint spectral
//! decompositions) is a finite matrix, and the crate computes all of them
//! and cross-checks the identities that relate them.
//!
//! Module map:
//!
//! - [`kernel`]: dense complex linear algebra and tolerances
//! - [`measures`]: atomic matrix, strip and joint measures
//! - [`polynomials`]: vector and power-trigonometric polynomials
//! - [`l2space`]: inner products, Gram matrices, the coordinate model of
//!   `L²(M)` and the density test
//! - [`moments`]: moment sequences, block Hankel matrices, strip moment forms
//! - [`gns`]: Hilbert space and shift operators built from moment data
//! - [`spectral`]: commuting Hermitian/unitary families, joint spectral
//!   measures and the unitary model onto `L²(M)`
//! - [`resolvents`]: resolvent transport and the canonicality checks
//! - [`cli`]: the `polydensity` command-line front end

pub mod cli;
pub mod error;
pub mod gns;
pub mod json;
pub mod kernel;
pub mod l2space;
pub mod measures;
pub mod moments;
pub mod polynomials;
pub mod random;
pub mod resolvents;
pub mod spectral;

pub use error::{Error, Result};
pub use kernel::{CMatrix, CVector, Tolerances};
