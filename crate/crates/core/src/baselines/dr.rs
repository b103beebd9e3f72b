use crate::error::{check_dims, Error, Result};
use crate::ids::ActionSet;
use crate::linalg::{CholeskyFactor, Matrix};
use crate::scalar::{dot, Scalar};

/// Doubly-robust least squares with centered features:
///
/// ```text
/// Gamma = lambda I + sum (x_s - xbar_s)(x_s - xbar_s)^T
/// theta = Gamma^{-1} sum (x_s - xbar_s) y_s,    xbar_s = E_{mu_s}[x]
/// ```
///
/// Centering by the mean of the sampling distribution cancels any additive
/// bias that is fixed before the action is drawn.
#[derive(Clone, Debug)]
pub struct DrState<T> {
    lambda: T,
    gamma: Matrix<T>,
    moment: Vec<T>,
    theta_dr: Vec<T>,
    factor: CholeskyFactor<T>,
}

impl<T: Scalar> DrState<T> {
    pub fn new(dim: usize, lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) || dim == 0 {
            return Err(Error::InvalidArgument("DR state needs dim >= 1 and lambda > 0".into()));
        }
        let gamma = Matrix::scaled_identity(dim, lambda);
        let factor = gamma.cholesky().expect("scaled identity is positive definite");
        Ok(Self { lambda, gamma, moment: vec![T::zero(); dim], theta_dr: vec![T::zero(); dim], factor })
    }

    pub fn dim(&self) -> usize {
        self.moment.len()
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn gamma(&self) -> &Matrix<T> {
        &self.gamma
    }

    /// Cholesky factor of `Gamma`.
    pub fn gamma_factor(&self) -> &CholeskyFactor<T> {
        &self.factor
    }

    pub fn moment(&self) -> &[T] {
        &self.moment
    }

    pub fn theta_dr(&self) -> &[T] {
        &self.theta_dr
    }

    pub fn gamma_inverse(&self) -> Matrix<T> {
        self.gamma.inverse_spd().expect("Gamma stays positive definite")
    }

    /// Estimate of `<x1 - x2, theta>`.
    pub fn estimate_difference(&self, x1: &[T], x2: &[T]) -> T {
        dot(x1, &self.theta_dr) - dot(x2, &self.theta_dr)
    }

    /// Incorporate `y` observed at `x_played ~ mu`, where `mu_support` lists
    /// `(point, probability)`.
    pub fn dr_update(&mut self, mu_support: &[(Vec<T>, T)], x_played: &[T], y: T) -> Result<()> {
        let d = self.dim();
        check_dims(d, x_played.len())?;
        let tol = T::lit(1e-9);
        let mut total = T::zero();
        let mut played_mass = T::zero();
        let mut mean = vec![T::zero(); d];
        for (x, p) in mu_support {
            check_dims(d, x.len())?;
            if !(*p >= T::zero()) {
                return Err(Error::InvalidArgument(format!("negative or NaN probability {p}")));
            }
            total += *p;
            for (m, &xi) in mean.iter_mut().zip(x) {
                *m += *p * xi;
            }
            if x.as_slice() == x_played {
                played_mass += *p;
            }
        }
        if (total - T::one()).abs() > tol {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}, not 1")));
        }
        if !(played_mass > T::zero()) {
            return Err(Error::InvalidArgument("played action has no mass under the sampling distribution".into()));
        }
        let centered: Vec<T> = x_played.iter().zip(&mean).map(|(&x, &m)| x - m).collect();
        self.gamma.add_outer(&centered, T::one());
        for (m, &c) in self.moment.iter_mut().zip(&centered) {
            *m += c * y;
        }
        self.factor =
            self.gamma.cholesky().map_err(|e| Error::Factorization { row: e.row, pivot: e.pivot.to_f64_lossy() })?;
        self.theta_dr = self.factor.solve(&self.moment);
        Ok(())
    }

    /// [`DrState::dr_update`] with the distribution given as probabilities over an action set.
    pub fn update_from_actions(&mut self, actions: &ActionSet<T>, probs: &[T], played: usize, y: T) -> Result<()> {
        check_dims(actions.len(), probs.len())?;
        let support: Vec<(Vec<T>, T)> =
            actions.iter().zip(probs).filter(|(_, &p)| p > T::zero()).map(|(x, &p)| (x.to_vec(), p)).collect();
        self.dr_update(&support, &actions[played], y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::sample_unit_vector;
    use crate::kernel::KernelSpec;
    use crate::posterior::DuelingPosterior;
    use crate::rng::{coin, standard_normal, stream, Purpose};
    use approx::assert_relative_eq;

    #[test]
    fn uniform_pair_centers_to_half_difference() {
        let mut s = DrState::new(2, 1.0).unwrap();
        let (a, b) = (vec![1.0, 0.0], vec![0.0, 1.0]);
        let support = vec![(a.clone(), 0.5), (b.clone(), 0.5)];
        s.dr_update(&support, &a, 2.0).unwrap();
        // centered feature (0.5, -0.5)
        assert_relative_eq!(s.gamma().get(0, 0), 1.25);
        assert_relative_eq!(s.gamma().get(0, 1), -0.25);
        assert_eq!(s.moment(), &[1.0, -1.0]);
    }

    #[test]
    fn singleton_support_is_noop() {
        let mut s = DrState::new(3, 2.0).unwrap();
        let x = vec![0.2, 0.3, 0.4];
        s.dr_update(&[(x.clone(), 1.0)], &x, 5.0).unwrap();
        assert_eq!(s.gamma(), &Matrix::scaled_identity(3, 2.0));
        assert!(s.theta_dr().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn malformed_distribution() {
        let mut s = DrState::new(1, 1.0).unwrap();
        let (a, b) = (vec![1.0], vec![-1.0]);
        assert!(s.dr_update(&[(a.clone(), 0.7), (b.clone(), 0.7)], &a, 0.0).is_err());
        assert!(s.dr_update(&[(a.clone(), 1.5), (b.clone(), -0.5)], &a, 0.0).is_err());
        assert!(s.dr_update(&[(a.clone(), 1.0)], &b, 0.0).is_err());
        assert!(s.dr_update(&[(a.clone(), 1.0)], &[1.0, 2.0], 0.0).is_err());
    }

    #[test]
    fn matches_dueling_least_squares() {
        // One draw per round from Uniform{x1, x2}; dueling data d = (-1)^i 2y,
        // with the dueling regularizer 4 lambda.
        let mut rng = stream(21, Purpose::Instance);
        for _ in 0..10 {
            let theta = sample_unit_vector(4, &mut rng);
            let mut dr = DrState::new(4, 1.0).unwrap();
            let mut duel = DuelingPosterior::new(KernelSpec::linear(), 4.0).unwrap();
            let pairs: Vec<(Vec<f64>, Vec<f64>)> =
                (0..5).map(|_| (sample_unit_vector(4, &mut rng), sample_unit_vector(4, &mut rng))).collect();
            for t in 0..60 {
                let (x1, x2) = &pairs[t % pairs.len()];
                let flip = coin(&mut rng);
                let x = if flip { x2 } else { x1 };
                let y = dot(x, &theta) + 3.0 * standard_normal(&mut rng) - 2.0;
                dr.dr_update(&[(x1.clone(), 0.5), (x2.clone(), 0.5)], x, y).unwrap();
                duel.append_observation(x1, x2, if flip { -2.0 * y } else { 2.0 * y }).unwrap();
            }
            for (x1, x2) in &pairs {
                let a = dr.estimate_difference(x1, x2);
                let b = duel.posterior_mean(x1).unwrap() - duel.posterior_mean(x2).unwrap();
                assert_relative_eq!(a, b, epsilon = 1e-8);
            }
        }
    }
}
