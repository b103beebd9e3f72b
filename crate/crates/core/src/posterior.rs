//! Incremental kernel least squares over linear functionals of `f`.
//!
//! Observations are functionals `L f` of the unknown function: a point
//! evaluation `f(x)` for ordinary GP regression, or a difference
//! `f(x1) - f(x2)` for dueling feedback. Both share the same estimator
//!
//! ```text
//! f_hat(x)   = k_t(x)^T (K_t + lambda I)^{-1} y
//! k_t(x, z)  = k(x, z) - k_t(x)^T (K_t + lambda I)^{-1} k_t(z)
//! ```
//!
//! where `[K_t]_ij = L_i L_j k` and `[k_t(x)]_i = L_i k(., x)`. The factor of
//! `K_t + lambda I` grows by one bordered row per observation.

use crate::error::{check_dims, Error, Result};
use crate::kernel::{duel_gram_unchecked, KernelSpec};
use crate::linalg::CholeskyFactor;
use crate::scalar::{dot, Scalar};

/// Diagonal jitter added once the bordered update loses positivity.
pub const FALLBACK_JITTER: f64 = 1e-10;

/// A bounded linear functional of the unknown function.
pub trait Functional<T: Scalar> {
    fn dim(&self) -> usize;

    /// `L k(., x)`.
    fn section(&self, kernel: &KernelSpec<T>, x: &[T]) -> T;

    /// `L M k` for two functionals: one Gram matrix entry.
    fn gram(&self, other: &Self, kernel: &KernelSpec<T>) -> T;
}

/// Dueling observation of `f(first) - f(second)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DuelPair<T> {
    pub first: Vec<T>,
    pub second: Vec<T>,
}

impl<T: Scalar> Functional<T> for DuelPair<T> {
    fn dim(&self) -> usize {
        self.first.len()
    }

    fn section(&self, kernel: &KernelSpec<T>, x: &[T]) -> T {
        kernel.eval_unchecked(x, &self.first) - kernel.eval_unchecked(x, &self.second)
    }

    fn gram(&self, other: &Self, kernel: &KernelSpec<T>) -> T {
        duel_gram_unchecked(kernel, &self.first, &self.second, &other.first, &other.second)
    }
}

/// Direct observation of `f(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointEval<T>(pub Vec<T>);

impl<T: Scalar> Functional<T> for PointEval<T> {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn section(&self, kernel: &KernelSpec<T>, x: &[T]) -> T {
        kernel.eval_unchecked(x, &self.0)
    }

    fn gram(&self, other: &Self, kernel: &KernelSpec<T>) -> T {
        kernel.eval_unchecked(&self.0, &other.0)
    }
}

/// Kernel least-squares state with an incrementally maintained factor.
#[derive(Clone, Debug)]
pub struct KernelRegression<T, O> {
    kernel: KernelSpec<T>,
    lambda: T,
    dim: Option<usize>,
    observations: Vec<O>,
    responses: Vec<T>,
    factor: CholeskyFactor<T>,
    /// `L^{-1} y`
    whitened: Vec<T>,
    /// `(K_t + lambda I)^{-1} y`
    alpha: Vec<T>,
    jitter: T,
    generation: u64,
}

/// Posterior over dueling (difference) feedback.
pub type DuelingPosterior<T> = KernelRegression<T, DuelPair<T>>;

/// Ordinary GP posterior over direct observations.
pub type GpPosterior<T> = KernelRegression<T, PointEval<T>>;

/// Read-only view of the collected dueling data.
#[derive(Clone, Copy, Debug)]
pub struct DuelingDataset<'a, T> {
    pub pairs: &'a [DuelPair<T>],
    pub responses: &'a [T],
}

impl<T: Scalar, O: Functional<T>> KernelRegression<T, O> {
    pub fn new(kernel: KernelSpec<T>, lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("regularizer must be positive, got {lambda}")));
        }
        Ok(Self {
            kernel,
            lambda,
            dim: None,
            observations: Vec::new(),
            responses: Vec::new(),
            factor: CholeskyFactor::new(),
            whitened: Vec::new(),
            alpha: Vec::new(),
            jitter: T::zero(),
            generation: 0,
        })
    }

    pub fn kernel(&self) -> &KernelSpec<T> {
        &self.kernel
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[O] {
        &self.observations
    }

    pub fn responses(&self) -> &[T] {
        &self.responses
    }

    pub fn factor(&self) -> &CholeskyFactor<T> {
        &self.factor
    }

    /// `L^{-1} y` for the current factor.
    pub fn whitened_responses(&self) -> &[T] {
        &self.whitened
    }

    /// Cached `(K_t + lambda I)^{-1} y`.
    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    /// Bumped whenever the factor is rebuilt instead of extended, which
    /// invalidates anything cached against earlier rows.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Diagonal jitter currently in the factor (zero unless a rebuild happened).
    pub fn jitter(&self) -> T {
        self.jitter
    }

    /// Add one observation `y = L f + noise`.
    pub fn append(&mut self, obs: O, y: T) -> Result<()> {
        if !y.is_finite() {
            return Err(Error::InvalidArgument(format!("observation must be finite, got {y}")));
        }
        match self.dim {
            Some(d) => check_dims(d, obs.dim())?,
            None => self.dim = Some(obs.dim()),
        }
        let cross: Vec<T> = self.observations.iter().map(|o| obs.gram(o, &self.kernel)).collect();
        let diag = obs.gram(&obs, &self.kernel) + self.lambda + self.jitter;
        self.observations.push(obs);
        self.responses.push(y);

        if self.factor.extend(&cross, diag).is_ok() {
            let next = self.factor.forward_last(&self.whitened, y);
            self.whitened.push(next);
        } else {
            self.rebuild()?;
        }
        self.alpha = self.factor.backward(&self.whitened);
        Ok(())
    }

    fn rebuild(&mut self) -> Result<()> {
        let jitter = T::lit(FALLBACK_JITTER);
        let n = self.observations.len();
        let mut gram = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = self.observations[i].gram(&self.observations[j], &self.kernel);
                gram[i * n + j] = v;
                gram[j * n + i] = v;
            }
            gram[i * n + i] += self.lambda + jitter;
        }
        match CholeskyFactor::from_dense(&gram, n) {
            Ok(factor) => {
                log::warn!("kernel factor rebuilt with jitter {FALLBACK_JITTER:e} at size {n}");
                self.factor = factor;
                self.jitter = jitter;
                self.whitened = self.factor.forward(&self.responses);
                self.generation += 1;
                Ok(())
            }
            Err(e) => {
                self.observations.pop();
                self.responses.pop();
                Err(Error::Factorization { row: e.row, pivot: e.pivot.to_f64_lossy() })
            }
        }
    }

    /// `k_t(x)`: every stored functional applied to `k(., x)`.
    pub fn features(&self, x: &[T]) -> Vec<T> {
        self.observations.iter().map(|o| o.section(&self.kernel, x)).collect()
    }

    /// `L^{-1} k_t(x)`.
    pub fn whitened_features(&self, x: &[T]) -> Vec<T> {
        self.factor.forward(&self.features(x))
    }

    fn check_query(&self, x: &[T]) -> Result<()> {
        match self.dim {
            Some(d) => check_dims(d, x.len()),
            None => Ok(()),
        }
    }

    /// Posterior mean (least-squares estimate) at `x`; zero without data.
    pub fn mean(&self, x: &[T]) -> Result<T> {
        self.check_query(x)?;
        Ok(dot(&self.features(x), &self.alpha))
    }

    /// Posterior covariance `k_t(x, z)`.
    pub fn covariance(&self, x: &[T], z: &[T]) -> Result<T> {
        self.check_query(x)?;
        let prior = self.kernel.eval(x, z)?;
        Ok(prior - dot(&self.whitened_features(x), &self.whitened_features(z)))
    }

    /// `k_t(x, x)`, clamped at zero.
    pub fn variance(&self, x: &[T]) -> Result<T> {
        self.check_query(x)?;
        let w = self.whitened_features(x);
        Ok((self.kernel.eval_unchecked(x, x) - dot(&w, &w)).max(T::zero()))
    }

    /// `psi_t(x, z) = k_t(x,x) + k_t(z,z) - 2 k_t(x,z)`, the posterior
    /// variance of `f(x) - f(z)`. Evaluated as a whitened difference so that
    /// `psi_t(x, x) == 0` exactly.
    pub fn psi(&self, x: &[T], z: &[T]) -> Result<T> {
        self.check_query(x)?;
        self.kernel.eval(x, z)?;
        let diff = DuelPair { first: x.to_vec(), second: z.to_vec() };
        let prior = diff.gram(&diff, &self.kernel);
        let w: Vec<T> =
            self.observations.iter().map(|o| o.section(&self.kernel, x) - o.section(&self.kernel, z)).collect();
        let w = self.factor.forward(&w);
        Ok((prior - dot(&w, &w)).max(T::zero()))
    }

    /// `log det(I + lambda^{-1} K_t)`.
    pub fn log_det(&self) -> T {
        self.factor.log_det() - T::from_usize(self.len()).unwrap() * self.lambda.ln()
    }
}

/// Inputs to the confidence coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfidenceParams<T> {
    /// Sub-Gaussian scale of the dueling noise.
    pub rho: T,
    /// RKHS norm bound `B`.
    pub norm_bound: T,
    pub delta: T,
}

impl<T: Scalar> ConfidenceParams<T> {
    pub fn new(rho: T, norm_bound: T, delta: T) -> Result<Self> {
        if !(rho > T::zero()) || !(norm_bound > T::zero()) || !(delta > T::zero() && delta < T::one()) {
            return Err(Error::InvalidArgument(format!(
                "confidence parameters need rho > 0, B > 0, 0 < delta < 1 (got {rho}, {norm_bound}, {delta})"
            )));
        }
        Ok(Self { rho, norm_bound, delta })
    }
}

/// `beta^{1/2} = rho * sqrt(logdet + 2 log(1/delta)) + sqrt(lambda) * B`, squared.
///
/// Takes raw parts so the noise-free limits (`rho = 0`, `delta -> 1`) stay
/// expressible; [`ConfidenceParams`] validates the usual case.
pub fn beta_from_log_det<T: Scalar>(log_det: T, lambda: T, rho: T, norm_bound: T, delta: T) -> T {
    let two = T::one() + T::one();
    let inner = (log_det + two * (T::one() / delta).ln()).max(T::zero());
    let root = rho * inner.sqrt() + lambda.sqrt() * norm_bound;
    root * root
}

impl<T: Scalar> DuelingPosterior<T> {
    pub fn dataset(&self) -> DuelingDataset<'_, T> {
        DuelingDataset { pairs: &self.observations, responses: &self.responses }
    }

    pub fn append_observation(&mut self, x1: &[T], x2: &[T], d: T) -> Result<()> {
        check_dims(x1.len(), x2.len())?;
        self.append(DuelPair { first: x1.to_vec(), second: x2.to_vec() }, d)
    }

    pub fn posterior_mean(&self, x: &[T]) -> Result<T> {
        self.mean(x)
    }

    pub fn posterior_psi(&self, x: &[T], z: &[T]) -> Result<T> {
        self.psi(x, z)
    }

    /// Confidence coefficient `beta_{t, delta}` for the current data.
    pub fn beta(&self, conf: &ConfidenceParams<T>) -> T {
        beta_from_log_det(self.log_det(), self.lambda, conf.rho, conf.norm_bound, conf.delta)
    }

    /// `log(1 + psi_t(x1, x2) / lambda)`: the log-det increment from observing the pair.
    pub fn info_gain(&self, x1: &[T], x2: &[T]) -> Result<T> {
        Ok((self.psi(x1, x2)? / self.lambda).ln_1p())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e1() -> Vec<f64> {
        vec![1.0, 0.0]
    }
    fn e2() -> Vec<f64> {
        vec![0.0, 1.0]
    }

    type MeanFn = Box<dyn Fn(&[f64]) -> f64>;
    type PsiFn = Box<dyn Fn(&[f64], &[f64]) -> f64>;

    /// Dense oracle: builds the Gram matrix and solves with nalgebra.
    struct Dense {
        mean: MeanFn,
        psi: PsiFn,
        log_det: f64,
    }

    fn dense_oracle(kernel: KernelSpec<f64>, lambda: f64, pairs: &[(Vec<f64>, Vec<f64>)], d: &[f64]) -> Dense {
        let n = pairs.len();
        let k = move |a: &[f64], b: &[f64]| kernel.eval(a, b).unwrap();
        let gram = DMatrix::from_fn(n, n, |i, j| {
            k(&pairs[i].0, &pairs[j].0) - k(&pairs[i].0, &pairs[j].1) - k(&pairs[i].1, &pairs[j].0)
                + k(&pairs[i].1, &pairs[j].1)
        });
        let reg = &gram + DMatrix::identity(n, n) * lambda;
        let inv = reg.clone().try_inverse().unwrap();
        let log_det = (DMatrix::identity(n, n) + &gram / lambda).determinant().ln();
        let alpha = &inv * DVector::from_column_slice(d);
        let pairs_m = pairs.to_vec();
        let pairs_p = pairs.to_vec();
        let inv_p = inv.clone();
        let feat = move |ps: &[(Vec<f64>, Vec<f64>)], x: &[f64]| {
            DVector::from_iterator(ps.len(), ps.iter().map(|(a, b)| k(x, a) - k(x, b)))
        };
        Dense {
            mean: Box::new(move |x| feat(&pairs_m, x).dot(&alpha)),
            psi: Box::new(move |x, z| {
                let cov = |a: &[f64], b: &[f64]| k(a, b) - feat(&pairs_p, a).dot(&(&inv_p * feat(&pairs_p, b)));
                cov(x, x) + cov(z, z) - 2.0 * cov(x, z)
            }),
            log_det,
        }
    }

    fn random_point(rng: &mut impl Rng, d: usize) -> Vec<f64> {
        (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn empty_posterior() {
        let p = DuelingPosterior::new(KernelSpec::linear(), 1.0).unwrap();
        assert_eq!(p.posterior_mean(&e1()).unwrap(), 0.0);
        assert_eq!(p.posterior_psi(&e1(), &e2()).unwrap(), 2.0);
        assert_eq!(p.posterior_psi(&e1(), &e1()).unwrap(), 0.0);
        assert_eq!(p.log_det(), 0.0);
    }

    #[test]
    fn one_observation_worked_example() {
        let mut p = DuelingPosterior::new(KernelSpec::linear(), 1.0).unwrap();
        p.append_observation(&e1(), &e2(), 1.0).unwrap();
        assert_relative_eq!(p.posterior_mean(&e1()).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(p.posterior_mean(&e2()).unwrap(), -1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(p.dataset().pairs.len(), p.dataset().responses.len());
    }

    #[test]
    fn beta_examples() {
        let p = DuelingPosterior::new(KernelSpec::<f64>::linear(), 1.0).unwrap();
        let conf = ConfidenceParams::new(1.0, 1.0, (-1.0f64).exp()).unwrap();
        assert_relative_eq!(p.beta(&conf), (2f64.sqrt() + 1.0).powi(2), epsilon = 1e-12);
        assert_relative_eq!(p.beta(&conf), 5.8284, epsilon = 1e-4);
        // noise-free limit
        assert_relative_eq!(beta_from_log_det(3.0, 2.0, 0.0, 1.5, 1.0), 2.0 * 1.5 * 1.5, epsilon = 1e-12);
        assert!(ConfidenceParams::new(0.0, 1.0, 0.5).is_err());
        assert!(ConfidenceParams::new(1.0, 1.0, 1.0).is_err());
        assert!(ConfidenceParams::new(1.0, -1.0, 0.5).is_err());
    }

    #[test]
    fn info_gain_examples() {
        let mut p = DuelingPosterior::new(KernelSpec::rbf(0.5).unwrap(), 1.0).unwrap();
        assert_eq!(p.info_gain(&[0.1, 0.2], &[0.1, 0.2]).unwrap(), 0.0);
        // prior psi of orthogonal unit vectors under the linear kernel is 2
        let lin = DuelingPosterior::new(KernelSpec::linear(), 2.0).unwrap();
        assert_relative_eq!(lin.info_gain(&e1(), &e2()).unwrap(), 2.0f64.ln(), epsilon = 1e-15);
        // psi = e - 1 at lambda = 1 gives exactly one nat
        let x = [0.0];
        let z = [(-2.0 * (1.0 - (std::f64::consts::E - 1.0) / 2.0).ln()).sqrt() * 0.5];
        let one_d = DuelingPosterior::new(KernelSpec::rbf(0.5).unwrap(), 1.0).unwrap();
        assert_relative_eq!(one_d.psi(&x, &z).unwrap(), std::f64::consts::E - 1.0, epsilon = 1e-12);
        assert_relative_eq!(one_d.info_gain(&x, &z).unwrap(), 1.0, epsilon = 1e-12);
        p.append_observation(&[0.0, 0.0], &[0.5, 0.5], 0.3).unwrap();
        assert!(p.info_gain(&[0.0, 0.0], &[0.5, 0.5]).unwrap() > 0.0);
    }

    #[test]
    fn matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kernel in [KernelSpec::linear(), KernelSpec::rbf(0.4).unwrap()] {
            for lambda in [0.5, 1.0, 3.0] {
                let mut p = DuelingPosterior::new(kernel, lambda).unwrap();
                let mut pairs = Vec::new();
                let mut ds = Vec::new();
                for _ in 0..25 {
                    let (a, b) = (random_point(&mut rng, 3), random_point(&mut rng, 3));
                    let d = rng.random_range(-2.0..2.0);
                    p.append_observation(&a, &b, d).unwrap();
                    pairs.push((a, b));
                    ds.push(d);
                }
                let oracle = dense_oracle(kernel, lambda, &pairs, &ds);
                assert_relative_eq!(p.log_det(), oracle.log_det, max_relative = 1e-8);
                for _ in 0..20 {
                    let (x, z) = (random_point(&mut rng, 3), random_point(&mut rng, 3));
                    assert_relative_eq!(
                        p.posterior_mean(&x).unwrap(),
                        (oracle.mean)(&x),
                        max_relative = 1e-8,
                        epsilon = 1e-10
                    );
                    assert_relative_eq!(
                        p.posterior_psi(&x, &z).unwrap(),
                        (oracle.psi)(&x, &z),
                        max_relative = 1e-8,
                        epsilon = 1e-10
                    );
                }
            }
        }
    }

    #[test]
    fn factor_matches_regularized_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let kernel = KernelSpec::rbf(0.3).unwrap();
        let mut p = DuelingPosterior::new(kernel, 1.0).unwrap();
        for _ in 0..30 {
            let (a, b) = (random_point(&mut rng, 2), random_point(&mut rng, 2));
            p.append_observation(&a, &b, rng.random()).unwrap();
        }
        let n = p.len();
        let rebuilt = p.factor().reconstruct();
        for i in 0..n {
            for j in 0..n {
                let pi = &p.observations()[i];
                let pj = &p.observations()[j];
                let mut want = duel_gram_entry(&kernel, &pi.first, &pi.second, &pj.first, &pj.second).unwrap();
                if i == j {
                    want += 1.0;
                }
                assert_relative_eq!(rebuilt[i * n + j], want, max_relative = 1e-8, epsilon = 1e-12);
            }
        }
    }

    use crate::kernel::duel_gram_entry;

    #[test]
    fn identical_pair_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let kernel = KernelSpec::rbf(0.5).unwrap();
        let mut p = DuelingPosterior::new(kernel, 1.0).unwrap();
        for _ in 0..5 {
            let (a, b) = (random_point(&mut rng, 2), random_point(&mut rng, 2));
            p.append_observation(&a, &b, rng.random()).unwrap();
        }
        let probes: Vec<Vec<f64>> = (0..10).map(|_| random_point(&mut rng, 2)).collect();
        let before: Vec<(f64, f64)> = probes
            .windows(2)
            .map(|w| (p.posterior_mean(&w[0]).unwrap(), p.posterior_psi(&w[0], &w[1]).unwrap()))
            .collect();
        let same = random_point(&mut rng, 2);
        p.append_observation(&same, &same, 0.7).unwrap();
        for (w, (m, s)) in probes.windows(2).zip(before) {
            assert_relative_eq!(p.posterior_mean(&w[0]).unwrap(), m, epsilon = 1e-12);
            assert_relative_eq!(p.posterior_psi(&w[0], &w[1]).unwrap(), s, epsilon = 1e-12);
        }
    }

    #[test]
    fn order_invariance() {
        let kernel = KernelSpec::rbf(0.7).unwrap();
        let obs = [([0.1, 0.2], [0.5, -0.3], 0.4), ([-0.6, 0.9], [0.2, 0.2], -1.1)];
        let mut forward = DuelingPosterior::new(kernel, 1.0).unwrap();
        let mut reverse = DuelingPosterior::new(kernel, 1.0).unwrap();
        for (a, b, d) in &obs {
            forward.append_observation(a, b, *d).unwrap();
        }
        for (a, b, d) in obs.iter().rev() {
            reverse.append_observation(a, b, *d).unwrap();
        }
        for x in [[0.0, 0.0], [0.3, -0.8], [1.0, 1.0]] {
            assert_relative_eq!(
                forward.posterior_mean(&x).unwrap(),
                reverse.posterior_mean(&x).unwrap(),
                epsilon = 1e-12
            );
            assert_relative_eq!(
                forward.posterior_psi(&x, &[0.2, 0.1]).unwrap(),
                reverse.posterior_psi(&x, &[0.2, 0.1]).unwrap(),
                epsilon = 1e-12
            );
        }
        assert_relative_eq!(forward.log_det(), reverse.log_det(), epsilon = 1e-12);
    }

    #[test]
    fn degenerate_data_triggers_jitter_rebuild_or_error() {
        // lambda tiny and repeated identical pairs: the bordered pivot hits zero
        let kernel = KernelSpec::linear();
        let mut p = DuelingPosterior::new(kernel, 1e-300).unwrap();
        p.append_observation(&[1.0], &[0.0], 1.0).unwrap();
        let r = p.append_observation(&[1.0], &[0.0], 1.0);
        match r {
            Ok(()) => {
                assert_eq!(p.generation(), 1);
                assert!(p.jitter() > 0.0);
            }
            Err(Error::Factorization { .. }) => assert_eq!(p.len(), 1),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        let mut p = DuelingPosterior::new(KernelSpec::<f64>::linear(), 1.0).unwrap();
        assert!(p.append_observation(&[1.0], &[0.0], f64::NAN).is_err());
        p.append_observation(&[1.0], &[0.0], 1.0).unwrap();
        assert!(p.append_observation(&[1.0, 0.0], &[0.0, 1.0], 1.0).is_err());
        assert!(p.posterior_mean(&[1.0, 2.0]).is_err());
        assert!(DuelingPosterior::<f64>::new(KernelSpec::linear(), 0.0).is_err());
    }

    #[test]
    fn gp_posterior_variance_shrinks() {
        let kernel = KernelSpec::rbf(0.2).unwrap();
        let mut gp = GpPosterior::new(kernel, 1.0).unwrap();
        assert_eq!(gp.variance(&[0.0]).unwrap(), 1.0);
        gp.append(PointEval(vec![0.0]), 1.0).unwrap();
        let v = gp.variance(&[0.0]).unwrap();
        assert_relative_eq!(v, 0.5, epsilon = 1e-12);
        assert_relative_eq!(gp.mean(&[0.0]).unwrap(), 0.5, epsilon = 1e-12);
        assert!(gp.variance(&[0.1]).unwrap() <= 1.0);
    }

    #[test]
    fn works_in_f32() {
        let mut p = DuelingPosterior::<f32>::new(KernelSpec::linear(), 1.0).unwrap();
        p.append_observation(&[1.0, 0.0], &[0.0, 1.0], 1.0).unwrap();
        assert!((p.posterior_mean(&[1.0, 0.0]).unwrap() - 1.0 / 3.0).abs() < 1e-6);
    }
}
