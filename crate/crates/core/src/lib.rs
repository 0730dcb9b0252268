//! Counts critical points of master functions (products of powers of
//! polynomials) and cross-checks the counts against Euler characteristics
//! of hypersurface-arrangement complements, computed independently by
//! combinatorial and characteristic-class methods.
//!
//! The crate is organized around that cross-verification:
//!
//! * [`arrangement`]: intersection posets of affine hyperplane
//!   arrangements, Möbius functions, and the Euler characteristic of the
//!   complement, all in exact rational arithmetic.
//! * [`master`]: evaluation of `d log φ` and its Jacobian for
//!   `φ = ∏ f_I^{λ_I}`.
//! * [`solve`]: total-degree homotopy continuation for the cleared
//!   critical-point equations, a multistart Newton oracle, and local
//!   topological degrees of isolated zeros.
//! * [`chern`]: top Chern numbers of logarithmic 1-form bundles on
//!   projective space and Euler characteristics of normal crossing
//!   complements via inclusion-exclusion, in exact integer arithmetic.
//! * [`morse`]: real Hessians of `|φ|²` at critical points, their
//!   spectra, and Morse indices.

pub mod arrangement;
pub mod chern;
pub mod linalg;
pub mod master;
pub mod morse;
pub mod poly;
pub mod rational;
pub mod solve;

pub use num_complex::Complex64;
