//! BOSE-style elimination with a doubly-robust estimate.
//!
//! This is a reconstruction: actions are eliminated when some other action
//! beats them by more than twice the doubly-robust confidence width, and the
//! survivors are sampled from a design that minimizes the largest
//! `Gamma^{-1}`-norm of a centered survivor, found by exponentiated-gradient
//! iterations.

use log::warn;
use rand::Rng;

use crate::baselines::dr::DrState;
use crate::error::{check_dims, Error, Result};
use crate::ids::ActionSet;
use crate::linalg::Matrix;
use crate::scalar::{dot, Scalar};

pub const BOSE_EG_ITERATIONS: usize = 200;
pub const BOSE_EG_STEP: f64 = 0.1;

/// `sqrt(d log(1 + t/d) + 2 log(t/delta)) + sqrt(lambda)`.
pub fn bose_beta<T: Scalar>(dim: usize, t: usize, delta: T, lambda: T) -> T {
    let two = T::one() + T::one();
    let d = T::lit(dim as f64);
    let t = T::lit(t as f64);
    (d * (t / d).ln_1p() + two * (t / delta).ln()).max(T::zero()).sqrt() + lambda.sqrt()
}

fn centered_norms<T: Scalar>(points: &[&[T]], gamma_inv: &Matrix<T>, mu: &[T]) -> (Vec<T>, Vec<Vec<T>>) {
    let dim = gamma_inv.dim();
    let mut mean = vec![T::zero(); dim];
    for (x, &p) in points.iter().zip(mu) {
        for (m, &xi) in mean.iter_mut().zip(x.iter()) {
            *m += p * xi;
        }
    }
    let centered: Vec<Vec<T>> = points.iter().map(|x| x.iter().zip(&mean).map(|(&xi, &m)| xi - m).collect()).collect();
    (centered.iter().map(|c| gamma_inv.quad_form(c)).collect(), centered)
}

/// `max_x (x - xbar)^T Gamma^{-1} (x - xbar)` with `xbar = E_mu[x]`.
pub fn min_max_objective<T: Scalar>(points: &[&[T]], gamma_inv: &Matrix<T>, mu: &[T]) -> T {
    let (norms, _) = centered_norms(points, gamma_inv, mu);
    norms.into_iter().fold(T::zero(), T::max)
}

/// Exponentiated-gradient approximation of
/// `argmin_mu max_x (x - xbar_mu)^T Gamma^{-1} (x - xbar_mu)`. Gradients are
/// rescaled by their range and the best iterate is returned.
pub fn min_max_design<T: Scalar>(points: &[&[T]], gamma_inv: &Matrix<T>) -> Vec<T> {
    let k = points.len();
    let uniform = T::one() / T::lit(k as f64);
    let mut mu = vec![uniform; k];
    if k <= 1 {
        return mu;
    }
    let mut best = mu.clone();
    let mut best_value = min_max_objective(points, gamma_inv, &mu);
    let step = T::lit(BOSE_EG_STEP);
    let two = T::one() + T::one();
    for _ in 0..BOSE_EG_ITERATIONS {
        let (norms, centered) = centered_norms(points, gamma_inv, &mu);
        let worst = (0..k).fold(0, |b, i| if norms[i] > norms[b] { i } else { b });
        // d/dmu_j of the active term is -2 (x* - xbar)^T Gamma^{-1} x_j
        let direction = gamma_inv.mul_vec(&centered[worst]);
        let grad: Vec<T> = points.iter().map(|x| -two * dot(&direction, x)).collect();
        let lo = grad.iter().copied().fold(T::infinity(), T::min);
        let hi = grad.iter().copied().fold(T::neg_infinity(), T::max);
        let range = hi - lo;
        if !(range > T::zero()) {
            break;
        }
        let mut total = T::zero();
        for (m, &g) in mu.iter_mut().zip(&grad) {
            *m *= (-step * (g - lo) / range).exp();
            total += *m;
        }
        for m in mu.iter_mut() {
            *m /= total;
        }
        let value = min_max_objective(points, gamma_inv, &mu);
        if value < best_value {
            best_value = value;
            best.clone_from(&mu);
        }
    }
    best
}

/// Returns the played action and the sampling distribution over all actions
/// (zero on eliminated ones).
pub fn bose_select<T, R>(
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
        return Err(Error::InvalidArgument("BOSE rounds are counted from 1".into()));
    }
    check_dims(state.dim(), actions.dim())?;
    let gamma_inv = state.gamma_inverse();
    let beta = bose_beta(state.dim(), t, delta, state.lambda());
    let two = T::one() + T::one();
    let scores: Vec<T> = actions.iter().map(|x| dot(x, state.theta_dr())).collect();
    let mut survivors: Vec<usize> = (0..actions.len())
        .filter(|&i| {
            !(0..actions.len()).any(|j| {
                let diff: Vec<T> = actions[j].iter().zip(&actions[i]).map(|(&a, &b)| a - b).collect();
                let width = gamma_inv.quad_form(&diff).max(T::zero()).sqrt();
                scores[j] - scores[i] > two * beta * width
            })
        })
        .collect();
    if survivors.is_empty() {
        warn!("BOSE eliminated every action; falling back to the full set");
        survivors = (0..actions.len()).collect();
    }
    let points: Vec<&[T]> = survivors.iter().map(|&i| &actions[i]).collect();
    let design = min_max_design(&points, &gamma_inv);
    let mut probs = vec![T::zero(); actions.len()];
    for (&i, &p) in survivors.iter().zip(&design) {
        probs[i] = p;
    }
    let u = T::lit(rng.random::<f64>());
    let mut acc = T::zero();
    let mut played = *survivors.last().expect("non-empty survivors");
    for (&i, &p) in survivors.iter().zip(&design) {
        acc += p;
        if u < acc {
            played = i;
            break;
        }
    }
    Ok((played, probs))
}
