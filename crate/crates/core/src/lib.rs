//! Spectral-regularization kernel regression laboratory.
//!
//! The crate is organised around the objects of the minimax theory for
//! kernel regularization under general eigenvalue decay:
//!
//! - [`spectrum`]: eigenvalue profiles, the counting function `F`, `G`, its
//!   generalized inverse and the effective dimension.
//! - [`filters`]: spectral regularization families and their certified constants.
//! - [`mercer`]: synthetic problems with an exactly prescribed covariance spectrum.
//! - [`estimator`]: the spectral-filter estimator on Gram matrices or features.
//! - [`rates`]: the parameter rule, theoretical rates and the Monte-Carlo harness.
//! - [`lowerbound`]: sign packings, alternative families and Fano certificates.
//! - [`cli`]: config-driven experiment front end.

pub mod cli;
pub mod error;
pub mod estimator;
pub mod filters;
pub mod lowerbound;
pub mod mercer;
pub mod rates;
pub mod spectrum;

pub use error::{Error, Result};
