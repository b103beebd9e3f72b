//! Approximate information-directed sampling for dueling feedback.
//!
//! Each round plays either the greedy pair `(x_hat, x_hat)` or an
//! informative pair `(x_hat, z)`, where `x_hat` maximizes the posterior mean.
//! The candidate `z` and the mixing probability `p` minimize
//!
//! ```text
//! ((1 - p) delta_t + p gap(z))^2 / (p I_t(x_hat, z))
//! ```
//!
//! whose minimizer in `p` has the closed form [`optimal_p`]. The whole
//! selection costs `O(|X|)` posterior queries.

use std::ops::Index;

use rand::Rng;

use crate::error::{check_dims, Error, Result};
use crate::kernel::{KernelFamily, KernelSpec};
use crate::model::DuelingModel;
use crate::scalar::{argmax_lowest, Scalar};

/// Candidates with information gain at or below this are skipped.
pub const MIN_INFO_GAIN: f64 = 1e-12;

/// Finite, ordered set of input points.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionSet<T> {
    points: Vec<Vec<T>>,
}

impl<T: Scalar> ActionSet<T> {
    pub fn new(points: Vec<Vec<T>>) -> Result<Self> {
        let first = points.first().ok_or_else(|| Error::InvalidArgument("action set must be non-empty".into()))?;
        let d = first.len();
        if d == 0 {
            return Err(Error::InvalidArgument("actions must have at least one coordinate".into()));
        }
        for p in &points {
            check_dims(d, p.len())?;
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.points.iter().map(Vec::as_slice)
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    /// Linear kernels need every action inside the unit ball so that `k(x, x) <= 1`.
    pub fn check_kernel(&self, kernel: &KernelSpec<T>) -> Result<()> {
        if kernel.family() == KernelFamily::Linear {
            if let Some(i) = self.points.iter().position(|p| !kernel.is_admissible(p)) {
                return Err(Error::InvalidArgument(format!(
                    "action {i} has norm above one, not admissible for the linear kernel"
                )));
            }
        }
        Ok(())
    }
}

impl<T> Index<usize> for ActionSet<T> {
    type Output = [T];

    fn index(&self, i: usize) -> &[T] {
        &self.points[i]
    }
}

/// Gap estimates for every action.
#[derive(Clone, Debug, PartialEq)]
pub struct GapState<T> {
    pub x_star_hat: usize,
    /// Largest plausible regret of playing `x_star_hat`.
    pub delta_t: T,
    pub gaps: Vec<T>,
}

/// Outcome of one IDS round.
#[derive(Clone, Debug, PartialEq)]
pub struct IdsDecision<T> {
    pub x_star_hat: usize,
    /// Selected informative candidate (equals `x_star_hat` when greedy).
    pub z: usize,
    pub p: T,
    pub pair_played: (usize, usize),
    /// Whether the Bernoulli draw selected the informative pair.
    pub informative: bool,
    pub delta_t: T,
    pub gap_z: T,
    pub info_z: T,
    /// Minimized trade-off value; `None` for a greedy decision.
    pub objective: Option<T>,
}

impl<T: Scalar> IdsDecision<T> {
    /// Information ratio of the mixed decision; `None` when nothing informative
    /// can be sampled (`p = 0`).
    pub fn information_ratio(&self) -> Option<T> {
        if self.p > T::zero() && self.info_z > T::zero() {
            information_ratio(self.delta_t, self.gap_z, self.p, self.info_z).ok()
        } else {
            None
        }
    }
}

/// Index of the largest posterior mean, lowest index on ties.
pub fn estimate_argmax<T: Scalar, M: DuelingModel<T> + ?Sized>(model: &M) -> usize {
    argmax_lowest(model.means()).unwrap_or(0)
}

fn delta_from_means<T: Scalar, M: DuelingModel<T> + ?Sized>(model: &M, means: &[T], x_hat: usize, beta: T) -> T {
    let root = beta.max(T::zero()).sqrt();
    means.iter().enumerate().map(|(z, &m)| m - means[x_hat] + root * model.psi(x_hat, z).sqrt()).fold(T::zero(), T::max)
}

/// `delta_t = max_z f_hat(z) - f_hat(x_hat) + beta^{1/2} psi_t(x_hat, z)^{1/2}`.
pub fn compute_delta_t<T: Scalar, M: DuelingModel<T> + ?Sized>(model: &M, beta: T) -> T {
    let means = model.means();
    let x_hat = argmax_lowest(means.iter().copied()).unwrap_or(0);
    delta_from_means(model, &means, x_hat, beta)
}

/// Gap estimates `delta_t + f_hat(x_hat) - f_hat(x)` for all actions.
pub fn gap_estimates<T: Scalar, M: DuelingModel<T> + ?Sized>(model: &M, beta: T) -> GapState<T> {
    let means = model.means();
    let x_star_hat = argmax_lowest(means.iter().copied()).unwrap_or(0);
    let delta_t = delta_from_means(model, &means, x_star_hat, beta);
    let best = means[x_star_hat];
    let gaps = means.iter().map(|&m| delta_t + best - m).collect();
    GapState { x_star_hat, delta_t, gaps }
}

/// Minimizer over `p in [0, 1]` of `((1-p) delta + p gap)^2 / p`.
pub fn optimal_p<T: Scalar>(delta_t: T, gap_z: T) -> Result<T> {
    if !(delta_t >= T::zero()) || !(gap_z >= delta_t) {
        return Err(Error::InvariantViolation(format!("gap estimate {gap_z} must dominate delta_t {delta_t} >= 0")));
    }
    if delta_t == T::zero() {
        return Ok(T::zero());
    }
    let excess = gap_z - delta_t;
    if excess <= delta_t {
        return Ok(T::one());
    }
    Ok((delta_t / excess).min(T::one()))
}

/// Trade-off objective for a single candidate at mixing probability `p`.
pub fn tradeoff<T: Scalar>(delta_t: T, gap_z: T, p: T, info_z: T) -> T {
    let num = (T::one() - p) * delta_t + p * gap_z;
    num * num / (p * info_z)
}

/// Information ratio of `(1-p) e(x_hat, x_hat) + p e(x_hat, z)`, counting the
/// gap estimates of both actions in each pair.
pub fn information_ratio<T: Scalar>(delta_t: T, gap_z: T, p: T, info_z: T) -> Result<T> {
    if !(p > T::zero() && p <= T::one()) || !(info_z > T::zero()) {
        return Err(Error::UndefinedRatio { p: p.to_f64_lossy(), info: info_z.to_f64_lossy() });
    }
    let two = T::one() + T::one();
    let expected_gap = (T::one() - p) * two * delta_t + p * (gap_z + delta_t);
    Ok(expected_gap * expected_gap / (p * info_z))
}

/// One round of approximate IDS: choose `(z, p)`, then draw the pair.
pub fn ids_select<T, M, R>(model: &M, beta: T, rng: &mut R) -> IdsDecision<T>
where
    T: Scalar,
    M: DuelingModel<T> + ?Sized,
    R: Rng + ?Sized,
{
    let state = gap_estimates(model, beta);
    let x_hat = state.x_star_hat;
    let greedy = IdsDecision {
        x_star_hat: x_hat,
        z: x_hat,
        p: T::zero(),
        pair_played: (x_hat, x_hat),
        informative: false,
        delta_t: state.delta_t,
        gap_z: state.delta_t,
        info_z: T::zero(),
        objective: None,
    };
    if !(state.delta_t > T::zero()) {
        return greedy;
    }

    let floor = T::lit(MIN_INFO_GAIN);
    let mut best: Option<(usize, T, T, T)> = None;
    for z in 0..model.actions().len() {
        if z == x_hat {
            continue;
        }
        let info = model.info_gain(x_hat, z);
        if !(info > floor) {
            continue;
        }
        let gap = state.gaps[z].max(state.delta_t);
        let p = optimal_p(state.delta_t, gap).expect("gap estimates dominate delta_t");
        let value = tradeoff(state.delta_t, gap, p, info);
        if best.is_none_or(|(_, v, _, _)| value < v) {
            best = Some((z, value, p, info));
        }
    }

    let Some((z, value, p, info)) = best else {
        return greedy;
    };
    let informative = rng.random::<f64>() < p.to_f64_lossy();
    IdsDecision {
        x_star_hat: x_hat,
        z,
        p,
        pair_played: if informative { (x_hat, z) } else { (x_hat, x_hat) },
        informative,
        delta_t: state.delta_t,
        gap_z: state.gaps[z].max(state.delta_t),
        info_z: info,
        objective: Some(value),
    }
}
