//! Confounded objective environments.
//!
//! An environment returns `y_t = f(x_t) + b_t + eps_t`, where the bias `b_t`
//! comes from a [`BiasSchedule`] that sees the step counter and strictly
//! past observations, never the action being evaluated.

use std::collections::VecDeque;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::ids::ActionSet;
use crate::rng::{standard_normal, StreamRng};

/// Objective function over a finite action set.
#[derive(Clone, Debug, PartialEq)]
pub enum Objective {
    Linear {
        theta: Vec<f64>,
    },
    /// Negated, clipped six-hump camelback on `[-2,2] x [-1,1]`.
    Camelback,
}

impl Objective {
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        match self {
            Objective::Linear { theta } => {
                check_dims(theta.len(), x.len())?;
                Ok(theta.iter().zip(x).map(|(a, b)| a * b).sum())
            }
            Objective::Camelback => {
                check_dims(2, x.len())?;
                camelback(x[0], x[1])
            }
        }
    }
}

/// `-min(x1^2 (4 - 2.1 x1^2 + x1^4 / 3) + x1 x2 + x2^2 (4 x2^2 - 4), 2.5)`.
pub fn camelback(x1: f64, x2: f64) -> Result<f64> {
    const EPS: f64 = 1e-12;
    if !(x1.abs() <= 2.0 + EPS && x2.abs() <= 1.0 + EPS) {
        return Err(Error::OutOfDomain { x1, x2 });
    }
    let x1s = x1 * x1;
    let inner = x1s * (4.0 - 2.1 * x1s + x1s * x1s / 3.0) + x1 * x2 + x2 * x2 * (4.0 * x2 * x2 - 4.0);
    Ok(-inner.min(2.5))
}

/// `per_dim x per_dim` grid over the camelback domain, endpoints included,
/// ordered with the first coordinate varying slowest.
pub fn camelback_grid(per_dim: usize) -> Result<ActionSet<f64>> {
    if per_dim < 2 {
        return Err(Error::InvalidArgument("camelback grid needs at least 2 points per dimension".into()));
    }
    let axis = |lo: f64, hi: f64| -> Vec<f64> {
        (0..per_dim).map(|i| lo + (hi - lo) * i as f64 / (per_dim - 1) as f64).collect()
    };
    let (xs, ys) = (axis(-2.0, 2.0), axis(-1.0, 1.0));
    ActionSet::new(xs.iter().flat_map(|&a| ys.iter().map(move |&b| vec![a, b])).collect())
}

/// Uniform draw from the unit sphere in `d` dimensions (normalized Gaussian).
pub fn sample_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| standard_normal(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn sample_sphere_actions<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Result<ActionSet<f64>> {
    if d == 0 || k == 0 {
        return Err(Error::InvalidArgument("sphere actions need d >= 1 and k >= 1".into()));
    }
    ActionSet::new((0..k).map(|_| sample_unit_vector(d, rng)).collect())
}

fn default_rate() -> f64 {
    0.1
}
fn default_window() -> usize {
    10
}
fn default_band() -> f64 {
    0.1
}

/// Adversarial bias schedules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BiasSchedule {
    None,
    /// `b_t = -y_{t-1}`, where the repeated observation is taken without its
    /// own bias (`y_{t-1} - b_{t-1} = f(x_{t-1}) + eps_{t-1}`) so that the bias
    /// stays bounded.
    NegativeRepeat,
    /// `b_t = -rate * t`.
    Drift {
        #[serde(default = "default_rate")]
        rate: f64,
    },
    /// `b_t = -rate * t + y_{t-1}`, with `y_{t-1}` read as for [`BiasSchedule::NegativeRepeat`].
    CompensatedDrift {
        #[serde(default = "default_rate")]
        rate: f64,
    },
    /// Offset that re-centers the output whenever the moving average over a
    /// full window of observations leaves `[-band, band]`.
    Calibration {
        #[serde(default = "default_window")]
        window: usize,
        #[serde(default = "default_band")]
        band: f64,
    },
    /// `b_t = sin(0.2 t) - 0.1 t`.
    PeriodicDrift,
}

/// Incremental bias state; call [`BiasTracker::bias`] before each step and
/// [`BiasTracker::record`] after it.
#[derive(Clone, Debug)]
pub struct BiasTracker {
    schedule: BiasSchedule,
    /// Previous observation with its bias removed, `y_{t-1} - b_{t-1}`.
    last_clean: f64,
    steps: usize,
    offset: f64,
    window: VecDeque<f64>,
}

impl BiasTracker {
    pub fn new(schedule: BiasSchedule) -> Result<Self> {
        if let BiasSchedule::Calibration { window, band } = schedule {
            if window == 0 || !(band >= 0.0) {
                return Err(Error::InvalidArgument("calibration needs window >= 1 and band >= 0".into()));
            }
        }
        Ok(Self { schedule, last_clean: 0.0, steps: 0, offset: 0.0, window: VecDeque::new() })
    }

    pub fn schedule(&self) -> &BiasSchedule {
        &self.schedule
    }

    /// Bias at 1-based step `t`, given everything recorded so far.
    pub fn bias(&self, t: usize) -> f64 {
        let t = t as f64;
        match self.schedule {
            BiasSchedule::None => 0.0,
            BiasSchedule::NegativeRepeat => -self.last_clean,
            BiasSchedule::Drift { rate } => -rate * t,
            BiasSchedule::CompensatedDrift { rate } => -rate * t + self.last_clean,
            BiasSchedule::Calibration { .. } => self.offset,
            BiasSchedule::PeriodicDrift => (0.2 * t).sin() - 0.1 * t,
        }
    }

    pub fn record(&mut self, y: f64) {
        self.steps += 1;
        self.last_clean = y - self.bias(self.steps);
        if let BiasSchedule::Calibration { window, band } = self.schedule {
            self.window.push_back(y);
            if self.window.len() > window {
                self.window.pop_front();
            }
            if self.window.len() == window {
                let avg = self.window.iter().sum::<f64>() / window as f64;
                if avg.abs() > band {
                    self.offset -= avg;
                    self.window.clear();
                }
            }
        }
    }
}

/// Bias at step `t` given the observations `y_1 .. y_{t-1}` (replays the schedule).
pub fn bias_value(schedule: &BiasSchedule, t: usize, y_history: &[f64]) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidArgument("steps are 1-based".into()));
    }
    let mut tracker = BiasTracker::new(schedule.clone())?;
    for &y in y_history.iter().take(t - 1) {
        tracker.record(y);
    }
    Ok(tracker.bias(t))
}

/// Gap of `x` against the best point of the action set.
pub fn true_gap(objective: &Objective, actions: &ActionSet<f64>, x: &[f64]) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for a in actions.iter() {
        best = best.max(objective.value(a)?);
    }
    Ok(best - objective.value(x)?)
}

/// Record of one environment step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub action: usize,
    pub value: f64,
    pub bias: f64,
    pub noise: f64,
    pub y: f64,
}

/// Objective + noise + bias over a finite action set, with a step budget.
#[derive(Clone, Debug)]
pub struct ConfoundedEnv {
    objective: Objective,
    actions: ActionSet<f64>,
    values: Vec<f64>,
    best: f64,
    sigma: f64,
    tracker: BiasTracker,
    horizon: usize,
    log: Vec<StepRecord>,
    noise: StreamRng,
}

impl ConfoundedEnv {
    pub fn new(
        objective: Objective,
        actions: ActionSet<f64>,
        sigma: f64,
        schedule: BiasSchedule,
        horizon: usize,
        noise: StreamRng,
    ) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("noise std must be non-negative, got {sigma}")));
        }
        let values = actions.iter().map(|x| objective.value(x)).collect::<Result<Vec<_>>>()?;
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            objective,
            actions,
            values,
            best,
            sigma,
            tracker: BiasTracker::new(schedule)?,
            horizon,
            log: Vec::with_capacity(horizon),
            noise,
        })
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn actions(&self) -> &ActionSet<f64> {
        &self.actions
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn step_count(&self) -> usize {
        self.log.len()
    }

    pub fn remaining(&self) -> usize {
        self.horizon - self.log.len()
    }

    pub fn value(&self, action: usize) -> f64 {
        self.values[action]
    }

    /// Index of the best action (lowest index on ties).
    pub fn best_action(&self) -> usize {
        self.values.iter().position(|&v| v == self.best).unwrap_or(0)
    }

    /// `f(x*) - f(x_action)` over the action set.
    pub fn true_gap(&self, action: usize) -> f64 {
        self.best - self.values[action]
    }

    pub fn log(&self) -> &[StepRecord] {
        &self.log
    }

    pub fn y_history(&self) -> impl Iterator<Item = f64> + '_ {
        self.log.iter().map(|r| r.y)
    }

    pub fn b_history(&self) -> impl Iterator<Item = f64> + '_ {
        self.log.iter().map(|r| r.bias)
    }

    /// Evaluate an action: one environment step.
    pub fn step(&mut self, action: usize) -> Result<f64> {
        if self.log.len() >= self.horizon {
            return Err(Error::HorizonExceeded { horizon: self.horizon });
        }
        let value =
            *self.values.get(action).ok_or_else(|| Error::InvalidArgument(format!("action {action} out of range")))?;
        let t = self.log.len() + 1;
        let bias = self.tracker.bias(t);
        let noise = self.sigma * standard_normal(&mut self.noise);
        let y = value + bias + noise;
        self.tracker.record(y);
        self.log.push(StepRecord { t, action, value, bias, noise, y });
        Ok(y)
    }

    /// Debug log: one CSV record `t,x,f_x,b_t,eps_t,y_t` per step, with the
    /// coordinates of `x` separated by spaces.
    pub fn write_debug_log<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "x", "f_x", "b_t", "eps_t", "y_t"])?;
        for r in &self.log {
            let x = self.actions[r.action].iter().map(|c| format!("{c:?}")).collect::<Vec<_>>().join(" ");
            w.write_record([
                r.t.to_string(),
                x,
                format!("{:?}", r.value),
                format!("{:?}", r.bias),
                format!("{:?}", r.noise),
                format!("{:?}", r.y),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_debug_log_file(&self, path: &Path) -> Result<()> {
        self.write_debug_log(std::fs::File::create(path)?)
    }
}
