use crate::error::{check_dims, Error, Result};
use crate::ids::ActionSet;
use crate::linalg::Matrix;
use crate::scalar::{argmax_lowest, dot, Scalar};

const INVERSE_REFRESH: usize = 128;

/// Regularized least squares on direct observations.
#[derive(Clone, Debug)]
pub struct RidgeState<T> {
    lambda: T,
    design: Matrix<T>,
    design_inv: Matrix<T>,
    b_vec: Vec<T>,
    theta_hat: Vec<T>,
    /// `log det(V / lambda)`
    log_det: T,
    count: usize,
}

impl<T: Scalar> RidgeState<T> {
    pub fn new(dim: usize, lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) || dim == 0 {
            return Err(Error::InvalidArgument("ridge state needs dim >= 1 and lambda > 0".into()));
        }
        Ok(Self {
            lambda,
            design: Matrix::scaled_identity(dim, lambda),
            design_inv: Matrix::scaled_identity(dim, T::one() / lambda),
            b_vec: vec![T::zero(); dim],
            theta_hat: vec![T::zero(); dim],
            log_det: T::zero(),
            count: 0,
        })
    }

    pub fn theta_hat(&self) -> &[T] {
        &self.theta_hat
    }

    pub fn design(&self) -> &Matrix<T> {
        &self.design
    }

    pub fn b_vec(&self) -> &[T] {
        &self.b_vec
    }

    pub fn log_det(&self) -> T {
        self.log_det
    }

    pub fn update(&mut self, x: &[T], y: T) -> Result<()> {
        check_dims(self.b_vec.len(), x.len())?;
        self.design.add_outer(x, T::one());
        let q = self.design_inv.sherman_morrison_update(x);
        self.log_det += q.ln_1p();
        self.count += 1;
        if self.count.is_multiple_of(INVERSE_REFRESH) {
            self.design_inv = self
                .design
                .inverse_spd()
                .map_err(|e| Error::Factorization { row: e.row, pivot: e.pivot.to_f64_lossy() })?;
        }
        for (b, &xi) in self.b_vec.iter_mut().zip(x) {
            *b += xi * y;
        }
        self.theta_hat = self.design_inv.mul_vec(&self.b_vec);
        Ok(())
    }

    /// `sqrt(log det V_t + 2 log(1/delta)) + sqrt(lambda)`, with `V_t` normalized by `lambda`.
    pub fn beta_sqrt(&self, delta: T) -> T {
        let two = T::one() + T::one();
        (self.log_det + two * (T::one() / delta).ln()).sqrt() + self.lambda.sqrt()
    }

    /// `||x||_{V^{-1}}`.
    pub fn width(&self, x: &[T]) -> T {
        self.design_inv.quad_form(x).max(T::zero()).sqrt()
    }
}

/// Optimistic action: `argmax <x, theta> + beta^{1/2} ||x||_{V^{-1}}`.
pub fn linucb_select<T: Scalar>(state: &RidgeState<T>, actions: &ActionSet<T>, delta: T) -> usize {
    let root = state.beta_sqrt(delta);
    argmax_lowest(actions.iter().map(|x| dot(x, &state.theta_hat) + root * state.width(x))).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn basis() -> ActionSet<f64> {
        ActionSet::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn first_round_ties_to_zero() {
        let s = RidgeState::new(2, 1.0).unwrap();
        assert_eq!(linucb_select(&s, &basis(), 0.05), 0);
        assert_relative_eq!(s.beta_sqrt((-1.0f64).exp()), 2f64.sqrt() + 1.0, epsilon = 1e-12);
    }

    #[test]
    fn learns_the_better_arm() {
        let mut s = RidgeState::new(2, 1.0).unwrap();
        let a = basis();
        for _ in 0..200 {
            s.update(&a[0], 1.0).unwrap();
            s.update(&a[1], 0.0).unwrap();
        }
        assert_eq!(linucb_select(&s, &a, 0.05), 0);
        assert_relative_eq!(s.theta_hat()[0], 200.0 / 201.0, epsilon = 1e-10);
        // theta_hat = V^{-1} b
        let direct = s.design().inverse_spd().unwrap().mul_vec(s.b_vec());
        for (u, v) in direct.iter().zip(s.theta_hat()) {
            assert_relative_eq!(u, v, epsilon = 1e-10);
        }
        assert_relative_eq!(s.log_det(), s.design().cholesky().unwrap().log_det(), epsilon = 1e-10);
    }

    #[test]
    fn rejects_bad_dims() {
        let mut s = RidgeState::new(2, 1.0).unwrap();
        assert!(s.update(&[1.0], 0.0).is_err());
        assert!(RidgeState::<f64>::new(0, 1.0).is_err());
    }
}
