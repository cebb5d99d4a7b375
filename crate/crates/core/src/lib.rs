//! Numerical toolkit for Lieb-type trace functions, operator means and
//! symmetric (anti-)norms of positive definite matrices, with a randomized
//! engine for checking joint concavity and convexity claims.

pub mod error;
pub mod matrix;
pub mod scalar;
pub mod conjugate;
pub mod means;
pub mod norms;
pub mod lieb;
pub mod verifier;

pub use error::{Error, Result};
