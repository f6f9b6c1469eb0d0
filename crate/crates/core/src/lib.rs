//! Closed-form kernel ridge regression estimators for nonparametric causal
//! functions.
//!
//! The crate estimates dose response curves, distribution-shifted and
//! conditional response curves, effects on the treated, and their incremental
//! (derivative) versions. Each estimator combines a kernel ridge regression of
//! the outcome with a (conditional) mean embedding of the covariates, so every
//! estimate reduces to a handful of Gram matrices and Cholesky solves.
//!
//! Beyond means, [`distributions`] embeds whole counterfactual outcome
//! distributions and draws deterministic samples from them by kernel herding,
//! and [`graphical`] covers mediator-based (front-door) identification.
//! [`simulate`] carries the two synthetic designs used to benchmark the
//! estimators.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod causal;
mod design;
pub mod distributions;
pub mod error;
pub mod graphical;
pub mod kernels;
pub mod ridge;
pub mod simulate;

mod data;

pub use causal::{CausalRequest, CurveEstimate, Estimand, EvalGrid, Penalties};
pub use data::Dataset;
pub use distributions::{EmbeddingEstimate, HerdedSample};
pub use error::{Error, Result};
pub use kernels::{BlockKernels, KernelConfig, KernelFamily};
pub use ridge::{Criterion, PenaltyGrid, PenaltyPolicy, RidgeSolution};

/// Dense matrix type used throughout; rows index observations.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense column vector.
pub type Vector = nalgebra::DVector<f64>;
