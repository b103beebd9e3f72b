//! Posteriors bound to a finite action set.
//!
//! The policies only ever query the posterior at the points of a fixed
//! action set, so [`CachedPosterior`] keeps `L^{-1} k_t(x)` for every action
//! and extends each of them by one entry per observation. A round then costs
//! `O(|X| t)` instead of `O(|X| t^2)`.
//!
//! [`LinearDuelingModel`] is the primal form of the linear-kernel posterior,
//! with `d x d` state instead of `t x t`.

use crate::error::{Error, Result};
use crate::ids::ActionSet;
use crate::kernel::KernelSpec;
use crate::linalg::Matrix;
use crate::posterior::{beta_from_log_det, ConfidenceParams, DuelPair, Functional, KernelRegression, PointEval};
use crate::scalar::{dot, Scalar};

/// Dueling posterior queried by action index.
pub trait DuelingModel<T: Scalar> {
    fn actions(&self) -> &ActionSet<T>;

    fn lambda(&self) -> T;

    fn num_observations(&self) -> usize;

    /// Least-squares estimate `f_hat_t` at action `i`.
    fn mean(&self, i: usize) -> T;

    /// `psi_t(x_i, x_j)`.
    fn psi(&self, i: usize, j: usize) -> T;

    /// `log det(I + lambda^{-1} K_t)`.
    fn log_det(&self) -> T;

    /// Record dueling feedback `d` on the pair `(x_i, x_j)`.
    fn observe(&mut self, i: usize, j: usize, d: T) -> Result<()>;

    fn means(&self) -> Vec<T> {
        (0..self.actions().len()).map(|i| self.mean(i)).collect()
    }

    /// `I_t(x_i, x_j) = log(1 + psi_t / lambda)`.
    fn info_gain(&self, i: usize, j: usize) -> T {
        (self.psi(i, j) / self.lambda()).ln_1p()
    }

    fn beta(&self, conf: &ConfidenceParams<T>) -> T {
        beta_from_log_det(self.log_det(), self.lambda(), conf.rho, conf.norm_bound, conf.delta)
    }
}

/// Kernel posterior with per-action whitened features.
#[derive(Clone, Debug)]
pub struct CachedPosterior<T, O> {
    regression: KernelRegression<T, O>,
    actions: ActionSet<T>,
    prior_diag: Vec<T>,
    /// `L^{-1} k_t(x_a)` for each action `a`.
    whitened: Vec<Vec<T>>,
    means: Vec<T>,
    generation: u64,
}

/// Kernel dueling posterior over an action set.
pub type KernelDuelingModel<T> = CachedPosterior<T, DuelPair<T>>;

/// GP posterior on direct observations over an action set.
pub type CachedGp<T> = CachedPosterior<T, PointEval<T>>;

impl<T: Scalar, O: Functional<T>> CachedPosterior<T, O> {
    pub fn new(kernel: KernelSpec<T>, lambda: T, actions: ActionSet<T>) -> Result<Self> {
        actions.check_kernel(&kernel)?;
        let regression = KernelRegression::new(kernel, lambda)?;
        let prior_diag = actions.iter().map(|x| kernel.eval_unchecked(x, x)).collect();
        let n = actions.len();
        Ok(Self {
            regression,
            actions,
            prior_diag,
            whitened: vec![Vec::new(); n],
            means: vec![T::zero(); n],
            generation: 0,
        })
    }

    pub fn regression(&self) -> &KernelRegression<T, O> {
        &self.regression
    }

    pub fn action_set(&self) -> &ActionSet<T> {
        &self.actions
    }

    pub fn cached_mean(&self, i: usize) -> T {
        self.means[i]
    }

    /// `k_t(x_i, x_j)`.
    pub fn covariance(&self, i: usize, j: usize) -> T {
        let kernel = self.regression.kernel();
        kernel.eval_unchecked(&self.actions[i], &self.actions[j]) - dot(&self.whitened[i], &self.whitened[j])
    }

    /// `k_t(x_i, x_i)`, clamped at zero.
    pub fn variance(&self, i: usize) -> T {
        let w = &self.whitened[i];
        (self.prior_diag[i] - dot(w, w)).max(T::zero())
    }

    /// Whitened-difference form of `psi_t(x_i, x_j)`; exactly zero for `i == j`.
    pub fn psi_between(&self, i: usize, j: usize) -> T {
        if i == j {
            return T::zero();
        }
        let kernel = self.regression.kernel();
        let prior = self.prior_diag[i] + self.prior_diag[j]
            - (T::one() + T::one()) * kernel.eval_unchecked(&self.actions[i], &self.actions[j]);
        let shrink: T = self.whitened[i].iter().zip(&self.whitened[j]).map(|(&a, &b)| (a - b) * (a - b)).sum();
        (prior - shrink).max(T::zero())
    }

    /// Append an observation and extend every cached action by one entry.
    pub fn append(&mut self, obs: O, y: T) -> Result<()> {
        self.regression.append(obs, y)?;
        if self.regression.generation() != self.generation {
            self.refresh();
            return Ok(());
        }
        let factor = self.regression.factor();
        let last_y = *self.regression.whitened_responses().last().expect("just appended");
        let obs = self.regression.observations().last().expect("just appended");
        let kernel = self.regression.kernel();
        for (a, x) in self.actions.iter().enumerate() {
            let entry = factor.forward_last(&self.whitened[a], obs.section(kernel, x));
            self.whitened[a].push(entry);
            self.means[a] += entry * last_y;
        }
        Ok(())
    }

    /// Recompute every cached quantity from the current factor.
    fn refresh(&mut self) {
        let reg = &self.regression;
        for (a, x) in self.actions.iter().enumerate() {
            self.whitened[a] = reg.whitened_features(x);
            self.means[a] = dot(&self.whitened[a], reg.whitened_responses());
        }
        self.generation = reg.generation();
    }
}

impl<T: Scalar> DuelingModel<T> for KernelDuelingModel<T> {
    fn actions(&self) -> &ActionSet<T> {
        &self.actions
    }

    fn lambda(&self) -> T {
        self.regression.lambda()
    }

    fn num_observations(&self) -> usize {
        self.regression.len()
    }

    fn mean(&self, i: usize) -> T {
        self.means[i]
    }

    fn psi(&self, i: usize, j: usize) -> T {
        self.psi_between(i, j)
    }

    fn log_det(&self) -> T {
        self.regression.log_det()
    }

    fn observe(&mut self, i: usize, j: usize, d: T) -> Result<()> {
        let pair = DuelPair { first: self.actions[i].to_vec(), second: self.actions[j].to_vec() };
        self.append(pair, d)
    }
}

/// Linear-kernel dueling posterior in primal form:
/// `V = lambda I + sum phi phi^T`, `theta = V^{-1} sum phi d`, `phi = x1 - x2`.
#[derive(Clone, Debug)]
pub struct LinearDuelingModel<T> {
    actions: ActionSet<T>,
    lambda: T,
    design: Matrix<T>,
    design_inv: Matrix<T>,
    moment: Vec<T>,
    theta: Vec<T>,
    log_det: T,
    count: usize,
}

/// The inverse is refreshed from `V` this often to stop rank-one drift.
const INVERSE_REFRESH: usize = 128;

impl<T: Scalar> LinearDuelingModel<T> {
    pub fn new(lambda: T, actions: ActionSet<T>) -> Result<Self> {
        if !(lambda > T::zero()) {
            return Err(Error::InvalidArgument(format!("regularizer must be positive, got {lambda}")));
        }
        actions.check_kernel(&KernelSpec::linear())?;
        let d = actions.dim();
        Ok(Self {
            actions,
            lambda,
            design: Matrix::scaled_identity(d, lambda),
            design_inv: Matrix::scaled_identity(d, T::one() / lambda),
            moment: vec![T::zero(); d],
            theta: vec![T::zero(); d],
            log_det: T::zero(),
            count: 0,
        })
    }

    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    fn difference(&self, i: usize, j: usize) -> Vec<T> {
        self.actions[i].iter().zip(&self.actions[j]).map(|(&a, &b)| a - b).collect()
    }
}

impl<T: Scalar> DuelingModel<T> for LinearDuelingModel<T> {
    fn actions(&self) -> &ActionSet<T> {
        &self.actions
    }

    fn lambda(&self) -> T {
        self.lambda
    }

    fn num_observations(&self) -> usize {
        self.count
    }

    fn mean(&self, i: usize) -> T {
        dot(&self.actions[i], &self.theta)
    }

    fn psi(&self, i: usize, j: usize) -> T {
        if i == j {
            return T::zero();
        }
        let phi = self.difference(i, j);
        (self.lambda * self.design_inv.quad_form(&phi)).max(T::zero())
    }

    fn log_det(&self) -> T {
        self.log_det
    }

    fn observe(&mut self, i: usize, j: usize, d: T) -> Result<()> {
        if !d.is_finite() {
            return Err(Error::InvalidArgument(format!("observation must be finite, got {d}")));
        }
        let phi = self.difference(i, j);
        self.design.add_outer(&phi, T::one());
        let q = self.design_inv.sherman_morrison_update(&phi);
        self.log_det += q.ln_1p();
        self.count += 1;
        if self.count.is_multiple_of(INVERSE_REFRESH) {
            self.design_inv = self
                .design
                .inverse_spd()
                .map_err(|e| Error::Factorization { row: e.row, pivot: e.pivot.to_f64_lossy() })?;
        }
        for (m, &p) in self.moment.iter_mut().zip(&phi) {
            *m += p * d;
        }
        self.theta = self.design_inv.mul_vec(&self.moment);
        Ok(())
    }
}
