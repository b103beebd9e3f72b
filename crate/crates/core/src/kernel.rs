//! Kernel functions for the RKHS surrogate.

use crate::error::{check_dims, Error, Result};
use crate::scalar::{dot, squared_distance, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelFamily {
    /// `k(x, y) = <x, y>`; admissible on inputs of norm at most one.
    Linear,
    /// `k(x, y) = exp(-|x - y|^2 / (2 l^2))`.
    Rbf,
}

/// Kernel family plus its hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec<T> {
    family: KernelFamily,
    lengthscale: T,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn linear() -> Self {
        Self { family: KernelFamily::Linear, lengthscale: T::one() }
    }

    pub fn rbf(lengthscale: T) -> Result<Self> {
        if !(lengthscale > T::zero()) || !lengthscale.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "RBF lengthscale must be positive and finite, got {lengthscale}"
            )));
        }
        Ok(Self { family: KernelFamily::Rbf, lengthscale })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    /// Lengthscale; meaningful only for [`KernelFamily::Rbf`].
    pub fn lengthscale(&self) -> T {
        self.lengthscale
    }

    /// Evaluate `k(x, y)`.
    pub fn eval(&self, x: &[T], y: &[T]) -> Result<T> {
        check_dims(x.len(), y.len())?;
        Ok(self.eval_unchecked(x, y))
    }

    /// Evaluate `k(x, y)` assuming equal dimensions.
    #[inline]
    pub fn eval_unchecked(&self, x: &[T], y: &[T]) -> T {
        debug_assert_eq!(x.len(), y.len());
        match self.family {
            KernelFamily::Linear => dot(x, y),
            KernelFamily::Rbf => {
                let two = T::one() + T::one();
                (-squared_distance(x, y) / (two * self.lengthscale * self.lengthscale)).exp()
            }
        }
    }

    /// Whether `k(x, x) <= 1` holds at `x` (up to rounding).
    pub fn is_admissible(&self, x: &[T]) -> bool {
        match self.family {
            KernelFamily::Linear => dot(x, x) <= T::one() + T::lit(1e-9),
            KernelFamily::Rbf => true,
        }
    }
}

/// Gram entry between the dueling features of pairs `a = (a1, a2)` and
/// `b = (b1, b2)`: `k(a1,b1) - k(a1,b2) - k(a2,b1) + k(a2,b2)`.
pub fn duel_gram_entry<T: Scalar>(spec: &KernelSpec<T>, a1: &[T], a2: &[T], b1: &[T], b2: &[T]) -> Result<T> {
    let d = a1.len();
    for v in [a2, b1, b2] {
        check_dims(d, v.len())?;
    }
    Ok(duel_gram_unchecked(spec, a1, a2, b1, b2))
}

#[inline]
pub(crate) fn duel_gram_unchecked<T: Scalar>(spec: &KernelSpec<T>, a1: &[T], a2: &[T], b1: &[T], b2: &[T]) -> T {
    // grouped so that a repeated point in either pair gives exactly zero
    (spec.eval_unchecked(a1, b1) - spec.eval_unchecked(a2, b1))
        - (spec.eval_unchecked(a1, b2) - spec.eval_unchecked(a2, b2))
}
