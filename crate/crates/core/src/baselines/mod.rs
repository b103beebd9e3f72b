//! Comparison policies: LinUCB and GP-UCB on raw observations, and the
//! doubly-robust family (SemiTS, BOSE) for semi-parametric linear bandits.

mod bose;
mod dr;
mod gpucb;
mod linucb;
mod semits;

pub use bose::{bose_beta, bose_select, min_max_design, min_max_objective, BOSE_EG_ITERATIONS, BOSE_EG_STEP};
pub use dr::DrState;
pub use gpucb::GpUcb;
pub use linucb::{linucb_select, RidgeState};
pub use semits::{semits_oversampling, semits_select, SEMITS_SAMPLES};
