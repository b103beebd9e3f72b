//! Semi-parametric Thompson sampling (an approximation of the original
//! algorithm built from Gaussian perturbations of the doubly-robust estimate).
//!
//! Each round draws `theta~ = theta_dr + v Gamma^{-1/2} eta` with
//! `v = sqrt(2 log(t / delta))` and plays the argmax of `<x, theta~>`. The
//! per-action optimality probabilities used to center the next doubly-robust
//! update are the empirical frequencies over [`SEMITS_SAMPLES`] such draws,
//! the first of which is the one played.

use rand::Rng;

use crate::baselines::dr::DrState;
use crate::error::{check_dims, Error, Result};
use crate::ids::ActionSet;
use crate::rng::standard_normal;
use crate::scalar::{argmax_lowest, dot, Scalar};

pub const SEMITS_SAMPLES: usize = 1000;

/// `sqrt(2 log(t / delta))`.
pub fn semits_oversampling<T: Scalar>(t: usize, delta: T) -> T {
    let two = T::one() + T::one();
    (two * (T::lit(t as f64) / delta).ln()).max(T::zero()).sqrt()
}

/// Returns the played action and the estimated sampling distribution.
pub fn semits_select<T, R>(
    state: &DrState<T>,
    actions: &ActionSet<T>,
    t: usize,
    delta: T,
    rng: &mut R,
) -> Result<(usize, Vec<T>)>
where
    T: Scalar,
    R: Rng + ?Sized,
{
    if t == 0 {
        return Err(Error::InvalidArgument("SemiTS rounds are counted from 1".into()));
    }
    check_dims(state.dim(), actions.dim())?;
    let v = semits_oversampling(t, delta);
    let factor = state.gamma_factor();
    let mut counts = vec![0usize; actions.len()];
    let mut played = 0;
    let mut eta = vec![T::zero(); state.dim()];
    for draw in 0..SEMITS_SAMPLES {
        for e in eta.iter_mut() {
            *e = T::lit(standard_normal(rng));
        }
        // L^{-T} eta has covariance Gamma^{-1} when Gamma = L L^T.
        let perturbation = factor.backward(&eta);
        let theta: Vec<T> = state.theta_dr().iter().zip(&perturbation).map(|(&m, &p)| m + v * p).collect();
        let best = argmax_lowest(actions.iter().map(|x| dot(x, &theta))).unwrap_or(0);
        counts[best] += 1;
        if draw == 0 {
            played = best;
        }
    }
    let total = T::lit(SEMITS_SAMPLES as f64);
    Ok((played, counts.into_iter().map(|c| T::lit(c as f64) / total).collect()))
}
