use crate::error::Result;
use crate::ids::ActionSet;
use crate::kernel::KernelSpec;
use crate::model::CachedGp;
use crate::posterior::PointEval;
use crate::scalar::{argmax_lowest, Scalar};

/// GP-UCB on raw (confounded) observations with a fixed confidence coefficient.
#[derive(Clone, Debug)]
pub struct GpUcb<T> {
    gp: CachedGp<T>,
    beta: T,
}

impl<T: Scalar> GpUcb<T> {
    pub fn new(kernel: KernelSpec<T>, lambda: T, beta: T, actions: ActionSet<T>) -> Result<Self> {
        Ok(Self { gp: CachedGp::new(kernel, lambda, actions)?, beta })
    }

    pub fn posterior(&self) -> &CachedGp<T> {
        &self.gp
    }

    pub fn mean(&self, i: usize) -> T {
        self.gp.cached_mean(i)
    }

    pub fn std_dev(&self, i: usize) -> T {
        self.gp.variance(i).sqrt()
    }

    /// `argmax mu_t(x) + beta^{1/2} sigma_t(x)`.
    pub fn select(&self) -> usize {
        let root = self.beta.sqrt();
        let n = self.gp.action_set().len();
        argmax_lowest((0..n).map(|i| self.mean(i) + root * self.std_dev(i))).unwrap_or(0)
    }

    pub fn update(&mut self, action: usize, y: T) -> Result<()> {
        let x = self.gp.action_set()[action].to_vec();
        self.gp.append(PointEval(x), y)
    }
}
