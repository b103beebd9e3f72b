//! Dueling feedback from confounded scalar observations.
//!
//! * Two-point: evaluate both points in random order and return `y1 - y2`.
//!   Noise scale `sqrt(D_max^2 + 2 sigma^2)`.
//! * One-point: evaluate one of the two points picked by a fair coin `i` and
//!   return `(-1)^i 2 y`. Noise scale `2 sqrt(C_max^2 + sigma^2)`.
//!
//! Both are unbiased for `f(x1) - f(x2)` as long as the bias of each slot is
//! fixed before the coin is drawn.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::environments::ConfoundedEnv;
use crate::error::{Error, Result};
use crate::rng::coin;

/// Anything that answers confounded point queries and knows the true gaps.
pub trait ConfoundedFeedback {
    /// One confounded evaluation; consumes one environment step.
    fn evaluate(&mut self, action: usize) -> Result<f64>;

    /// True suboptimality gap of an action, for regret accounting only.
    fn gap(&self, action: usize) -> f64;
}

impl ConfoundedFeedback for ConfoundedEnv {
    fn evaluate(&mut self, action: usize) -> Result<f64> {
        self.step(action)
    }

    fn gap(&self, action: usize) -> f64 {
        self.true_gap(action)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReductionKind {
    /// Requires `|b_t| <= c_max`.
    OnePoint { c_max: f64 },
    /// Requires `|b_t - b_{t-1}| <= d_max`.
    TwoPoint { d_max: f64 },
}

impl ReductionKind {
    pub fn validate(&self) -> Result<()> {
        let bound = match *self {
            ReductionKind::OnePoint { c_max } => c_max,
            ReductionKind::TwoPoint { d_max } => d_max,
        };
        if bound.is_finite() && bound >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("bias bound must be finite and non-negative, got {bound}")))
        }
    }

    pub fn steps_per_duel(&self) -> usize {
        match self {
            ReductionKind::OnePoint { .. } => 1,
            ReductionKind::TwoPoint { .. } => 2,
        }
    }
}

/// Result of one reduced duel.
#[derive(Clone, Debug, PartialEq)]
pub struct DuelOutcome {
    pub d: f64,
    pub env_steps_consumed: usize,
    /// `(action, true gap)` for each evaluation, in evaluation order.
    pub evaluated_points: Vec<(usize, f64)>,
}

impl DuelOutcome {
    pub fn regret(&self) -> f64 {
        self.evaluated_points.iter().map(|(_, g)| g).sum()
    }
}

/// Sub-Gaussian scale `rho` of the reduced dueling noise.
pub fn effective_rho(kind: ReductionKind, sigma: f64) -> f64 {
    match kind {
        ReductionKind::OnePoint { c_max } => 2.0 * (c_max * c_max + sigma * sigma).sqrt(),
        ReductionKind::TwoPoint { d_max } => (d_max * d_max + 2.0 * sigma * sigma).sqrt(),
    }
}

pub fn two_point_duel<E, R>(env: &mut E, x1: usize, x2: usize, rng: &mut R) -> Result<DuelOutcome>
where
    E: ConfoundedFeedback + ?Sized,
    R: Rng + ?Sized,
{
    let second_first = coin(rng);
    let order = if second_first { [x2, x1] } else { [x1, x2] };
    let first_y = env.evaluate(order[0])?;
    let second_y = env.evaluate(order[1])?;
    let (y1, y2) = if second_first { (second_y, first_y) } else { (first_y, second_y) };
    Ok(DuelOutcome {
        d: y1 - y2,
        env_steps_consumed: 2,
        evaluated_points: order.iter().map(|&a| (a, env.gap(a))).collect(),
    })
}

pub fn one_point_duel<E, R>(env: &mut E, x1: usize, x2: usize, rng: &mut R) -> Result<DuelOutcome>
where
    E: ConfoundedFeedback + ?Sized,
    R: Rng + ?Sized,
{
    let flip = coin(rng);
    let action = if flip { x2 } else { x1 };
    let y = env.evaluate(action)?;
    Ok(DuelOutcome {
        d: if flip { -2.0 * y } else { 2.0 * y },
        env_steps_consumed: 1,
        evaluated_points: vec![(action, env.gap(action))],
    })
}

/// Dispatch on the reduction kind.
pub fn duel<E, R>(kind: ReductionKind, env: &mut E, x1: usize, x2: usize, rng: &mut R) -> Result<DuelOutcome>
where
    E: ConfoundedFeedback + ?Sized,
    R: Rng + ?Sized,
{
    match kind {
        ReductionKind::OnePoint { .. } => one_point_duel(env, x1, x2, rng),
        ReductionKind::TwoPoint { .. } => two_point_duel(env, x1, x2, rng),
    }
}

/// Fixed objective values with a per-slot bias sequence that repeats every
/// `biases.len()` evaluations. Used to probe the reductions with exactly
/// known biases.
#[derive(Clone, Debug)]
pub struct ScriptedFeedback<R> {
    pub values: Vec<f64>,
    pub biases: Vec<f64>,
    pub sigma: f64,
    pub noise: R,
    steps: usize,
}

impl<R: Rng> ScriptedFeedback<R> {
    pub fn new(values: Vec<f64>, biases: Vec<f64>, sigma: f64, noise: R) -> Self {
        assert!(!biases.is_empty(), "bias script must be non-empty");
        Self { values, biases, sigma, noise, steps: 0 }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

impl<R: Rng> ConfoundedFeedback for ScriptedFeedback<R> {
    fn evaluate(&mut self, action: usize) -> Result<f64> {
        let b = self.biases[self.steps % self.biases.len()];
        self.steps += 1;
        let eps = self.sigma * crate::rng::standard_normal(&mut self.noise);
        Ok(self.values[action] + b + eps)
    }

    fn gap(&self, action: usize) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max) - self.values[action]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use approx::assert_relative_eq;

    fn scripted(values: Vec<f64>, biases: Vec<f64>, sigma: f64) -> ScriptedFeedback<crate::rng::StreamRng> {
        ScriptedFeedback::new(values, biases, sigma, stream(5, Purpose::Noise))
    }

    #[test]
    fn two_point_noiseless() {
        let mut rng = stream(0, Purpose::Reduction);
        let mut env = scripted(vec![2.0, 0.5], vec![0.0], 0.0);
        for _ in 0..20 {
            let out = two_point_duel(&mut env, 0, 1, &mut rng).unwrap();
            assert_eq!(out.d, 1.5);
            assert_eq!(out.env_steps_consumed, 2);
            assert_relative_eq!(out.regret(), 1.5);
        }
        // a common bias within the round cancels
        let mut env = scripted(vec![2.0, 0.5], vec![3.7, 3.7], 0.0);
        for _ in 0..20 {
            assert_relative_eq!(two_point_duel(&mut env, 0, 1, &mut rng).unwrap().d, 1.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn one_point_enumerates_coins() {
        let mut rng = stream(1, Purpose::Reduction);
        let mut env = scripted(vec![1.0, 0.0], vec![0.5], 0.0);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..64 {
            let out = one_point_duel(&mut env, 0, 1, &mut rng).unwrap();
            assert_eq!(out.env_steps_consumed, 1);
            seen.insert((out.d * 1000.0) as i64);
        }
        // i = 0 gives 2 * 1.5 = 3, i = 1 gives -2 * 0.5 = -1
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![-1000, 3000]);
        assert_relative_eq!((3.0 + -1.0) / 2.0, 1.0);
    }

    #[test]
    fn one_point_same_action() {
        let mut rng = stream(2, Purpose::Reduction);
        let mut env = scripted(vec![0.8], vec![0.0], 0.0);
        let ds: Vec<f64> = (0..2000).map(|_| one_point_duel(&mut env, 0, 0, &mut rng).unwrap().d).collect();
        assert!(ds.iter().all(|&d| d.abs() == 1.6));
        let mean = ds.iter().sum::<f64>() / ds.len() as f64;
        assert!(mean.abs() < 5.0 * 1.6 / (ds.len() as f64).sqrt());
    }

    #[test]
    fn rho_examples() {
        assert_eq!(effective_rho(ReductionKind::OnePoint { c_max: 0.0 }, 1.0), 2.0);
        assert_relative_eq!(effective_rho(ReductionKind::TwoPoint { d_max: 0.0 }, 1.0), 2f64.sqrt());
        assert_eq!(effective_rho(ReductionKind::OnePoint { c_max: 3.0 }, 4.0), 10.0);
        assert!(ReductionKind::OnePoint { c_max: f64::INFINITY }.validate().is_err());
        assert!(ReductionKind::TwoPoint { d_max: -1.0 }.validate().is_err());
    }

    /// Empirical MGF against `exp(s^2 rho^2 / 2)` with 20% slack.
    fn mgf_ok(samples: &[f64], rho: f64) -> bool {
        [-1.0, -0.5, -0.25, 0.25, 0.5, 1.0].iter().all(|&k| {
            let s = k / rho;
            let emp = samples.iter().map(|u| (s * u).exp()).sum::<f64>() / samples.len() as f64;
            emp <= 1.2 * (s * s * rho * rho / 2.0).exp()
        })
    }

    #[test]
    fn two_point_sub_gaussian() {
        let (d_max, sigma) = (0.8, 0.5);
        let mut rng = stream(3, Purpose::Reduction);
        let mut env = scripted(vec![0.3, -0.2], vec![1.0, 1.0 + d_max], sigma);
        let mean = 0.5;
        let us: Vec<f64> = (0..100_000).map(|_| two_point_duel(&mut env, 0, 1, &mut rng).unwrap().d - mean).collect();
        let rho = effective_rho(ReductionKind::TwoPoint { d_max }, sigma);
        assert!(mgf_ok(&us, rho));
    }

    #[test]
    fn one_point_sub_gaussian() {
        let (c_max, sigma) = (0.7, 0.4);
        let mut rng = stream(4, Purpose::Reduction);
        let mut env = scripted(vec![0.3, -0.2], vec![c_max, -c_max], sigma);
        let us: Vec<f64> = (0..100_000).map(|_| one_point_duel(&mut env, 0, 1, &mut rng).unwrap().d - 0.5).collect();
        let rho = effective_rho(ReductionKind::OnePoint { c_max }, sigma);
        assert!(mgf_ok(&us, rho));
    }

    #[test]
    fn horizon_errors_propagate() {
        let mut env = crate::environments::ConfoundedEnv::new(
            crate::environments::Objective::Linear { theta: vec![1.0] },
            crate::ids::ActionSet::new(vec![vec![1.0], vec![-1.0]]).unwrap(),
            0.0,
            crate::environments::BiasSchedule::None,
            1,
            stream(0, Purpose::Noise),
        )
        .unwrap();
        let mut rng = stream(0, Purpose::Reduction);
        assert!(matches!(two_point_duel(&mut env, 0, 1, &mut rng), Err(Error::HorizonExceeded { .. })));
    }
}
