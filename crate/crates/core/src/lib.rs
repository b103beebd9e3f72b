//! Bias-robust Bayesian optimization with kernelized dueling bandits.
//!
//! Observations of an unknown objective are corrupted by an additive,
//! action-independent bias. Randomized one-point and two-point reductions turn
//! them into unbiased dueling feedback `f(x1) - f(x2) + noise`, which is fitted
//! with dueling kernel regression and acted on by information-directed
//! sampling. Baselines, synthetic environments and an experiment harness are
//! included.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common `f64` and `f32` instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod baselines;
pub mod environments;
pub mod error;
pub mod harness;
pub mod ids;
pub mod kernel;
pub mod linalg;
pub mod model;
pub mod posterior;
pub mod reductions;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use ids::{ids_select, ActionSet, IdsDecision};
pub use kernel::{KernelFamily, KernelSpec};
pub use model::{CachedPosterior, DuelingModel, KernelDuelingModel, LinearDuelingModel};
pub use posterior::{ConfidenceParams, DuelingPosterior, GpPosterior, KernelRegression};
pub use scalar::Scalar;

pub type Posterior = DuelingPosterior<f64>;
pub type Posterior32 = DuelingPosterior<f32>;
pub type Kernel = KernelSpec<f64>;
pub type Kernel32 = KernelSpec<f32>;
pub type Actions = ActionSet<f64>;
pub type Actions32 = ActionSet<f32>;
pub type KernelModel = KernelDuelingModel<f64>;
pub type KernelModel32 = KernelDuelingModel<f32>;
pub type LinearModel = LinearDuelingModel<f64>;
pub type LinearModel32 = LinearDuelingModel<f32>;
pub type Decision = IdsDecision<f64>;
