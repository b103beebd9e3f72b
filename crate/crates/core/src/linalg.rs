//! Dense linear algebra on small matrices and a growable Cholesky factor.
//!
//! Everything here is row-major and generic over [`Scalar`]. The matrices
//! involved are either `d x d` with `d` the input dimension or the `t x t`
//! regularized Gram matrix of a kernel posterior, so plain loops suffice.

use crate::scalar::{dot, Scalar};

/// Lower-triangular factor `L` of a symmetric positive definite matrix,
/// stored packed by rows so it can grow one row at a time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CholeskyFactor<T> {
    packed: Vec<T>,
    n: usize,
}

/// A proposed row failed the positivity check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NotPositive<T> {
    pub row: usize,
    pub pivot: T,
}

impl<T: Scalar> CholeskyFactor<T> {
    pub fn new() -> Self {
        Self { packed: Vec::new(), n: 0 }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Row `i` of `L`, entries `0..=i`.
    pub fn row(&self, i: usize) -> &[T] {
        let start = i * (i + 1) / 2;
        &self.packed[start..start + i + 1]
    }

    pub fn diag(&self, i: usize) -> T {
        self.row(i)[i]
    }

    /// Factor a dense `n x n` row-major matrix from scratch.
    pub fn from_dense(a: &[T], n: usize) -> Result<Self, NotPositive<T>> {
        assert_eq!(a.len(), n * n, "matrix must be n x n");
        let mut factor = Self::new();
        for i in 0..n {
            factor.extend(&a[i * n..i * n + i], a[i * n + i])?;
        }
        Ok(factor)
    }

    /// Bordered extension: given the new column `cross` (entries against the
    /// existing rows) and the new diagonal entry, append one row to `L`.
    ///
    /// Leaves the factor untouched on failure.
    pub fn extend(&mut self, cross: &[T], diag: T) -> Result<(), NotPositive<T>> {
        assert_eq!(cross.len(), self.n, "cross column length must equal factor size");
        let mut row = self.forward(cross);
        let pivot = diag - dot(&row, &row);
        if !(pivot > T::zero()) || !pivot.is_finite() {
            return Err(NotPositive { row: self.n, pivot });
        }
        row.push(pivot.sqrt());
        self.packed.extend_from_slice(&row);
        self.n += 1;
        Ok(())
    }

    /// Solve `L x = b`.
    pub fn forward(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        let mut x = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let row = self.row(i);
            let s = b[i] - dot(&row[..i], &x);
            x.push(s / row[i]);
        }
        x
    }

    /// Solve `L^T x = y`.
    pub fn backward(&self, y: &[T]) -> Vec<T> {
        assert_eq!(y.len(), self.n);
        let mut x = y.to_vec();
        for i in (0..self.n).rev() {
            x[i] /= self.diag(i);
            let xi = x[i];
            for (j, &l) in self.row(i)[..i].iter().enumerate() {
                x[j] -= l * xi;
            }
        }
        x
    }

    /// Solve `(L L^T) x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        self.backward(&self.forward(b))
    }

    /// Entry `n-1` of `L^{-1} v` for an extended vector `v`, given the first
    /// `n-1` entries of `L^{-1} v` already computed before the last row was added.
    pub fn forward_last(&self, whitened_prefix: &[T], last: T) -> T {
        let i = self.n - 1;
        let row = self.row(i);
        (last - dot(&row[..i], whitened_prefix)) / row[i]
    }

    /// `log det(L L^T)`.
    pub fn log_det(&self) -> T {
        let two = T::one() + T::one();
        (0..self.n).map(|i| self.diag(i).ln()).sum::<T>() * two
    }

    /// Dense `L L^T`, mainly for verification.
    pub fn reconstruct(&self) -> Vec<T> {
        let n = self.n;
        let mut out = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = dot(&self.row(i)[..=j], &self.row(j)[..=j]);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        out
    }
}

/// Square dense matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn scaled_identity(n: usize, s: T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = s;
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    /// `self += scale * v v^T`.
    pub fn add_outer(&mut self, v: &[T], scale: T) {
        let n = self.n;
        for (row, &vi) in self.data.chunks_exact_mut(n).zip(v) {
            let si = scale * vi;
            for (a, &vj) in row.iter_mut().zip(v) {
                *a += si * vj;
            }
        }
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.n).map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], v)).collect()
    }

    /// `v^T self v`.
    pub fn quad_form(&self, v: &[T]) -> T {
        dot(v, &self.mul_vec(v))
    }

    pub fn cholesky(&self) -> Result<CholeskyFactor<T>, NotPositive<T>> {
        CholeskyFactor::from_dense(&self.data, self.n)
    }

    /// Inverse of a symmetric positive definite matrix.
    pub fn inverse_spd(&self) -> Result<Self, NotPositive<T>> {
        let chol = self.cholesky()?;
        let n = self.n;
        let mut inv = Self::zeros(n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            let col = chol.solve(&e);
            for (i, c) in col.into_iter().enumerate() {
                inv.data[i * n + j] = c;
            }
        }
        inv.symmetrize();
        Ok(inv)
    }

    /// Sherman-Morrison downdate of an inverse after `A += v v^T`:
    /// `A^{-1} <- A^{-1} - (A^{-1} v)(A^{-1} v)^T / (1 + v^T A^{-1} v)`.
    /// Returns `v^T A^{-1} v` evaluated before the update.
    pub fn sherman_morrison_update(&mut self, v: &[T]) -> T {
        let u = self.mul_vec(v);
        let q = dot(v, &u);
        let denom = T::one() + q;
        self.add_outer(&u, -T::one() / denom);
        self.symmetrize();
        q
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        let half = T::lit(0.5);
        for i in 0..n {
            for j in (i + 1)..n {
                let m = (self.data[i * n + j] + self.data[j * n + i]) * half;
                self.data[i * n + j] = m;
                self.data[j * n + i] = m;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spd(n: usize) -> Vec<f64> {
        // A = B B^T + I with a fixed B
        let b: Vec<f64> = (0..n * n).map(|k| ((k * 7 + 3) % 11) as f64 / 5.0 - 1.0).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| b[i * n + k] * b[j * n + k]).sum::<f64>();
            }
            a[i * n + i] += 1.0;
        }
        a
    }

    #[test]
    fn factor_reconstructs_and_solves() {
        let n = 6;
        let a = spd(n);
        let l = CholeskyFactor::from_dense(&a, n).unwrap();
        for (x, y) in l.reconstruct().iter().zip(&a) {
            assert_relative_eq!(x, y, epsilon = 1e-12);
        }
        let b: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
        let x = l.solve(&b);
        let m = Matrix::from_rows(n, a);
        for (u, v) in m.mul_vec(&x).iter().zip(&b) {
            assert_relative_eq!(u, v, epsilon = 1e-10);
        }
    }

    #[test]
    fn extension_rejects_indefinite_row() {
        let mut l = CholeskyFactor::<f64>::new();
        l.extend(&[], 1.0).unwrap();
        let err = l.extend(&[1.0], 1.0).unwrap_err();
        assert_eq!(err.row, 1);
        assert_eq!(l.len(), 1);
    }

    #[test]
    fn forward_last_matches_full_forward() {
        let n = 5;
        let a = spd(n);
        let l = CholeskyFactor::from_dense(&a, n).unwrap();
        let v: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let full = l.forward(&v);
        let mut prefix = CholeskyFactor::from_dense(
            &(0..(n - 1) * (n - 1)).map(|k| a[(k / (n - 1)) * n + k % (n - 1)]).collect::<Vec<_>>(),
            n - 1,
        )
        .unwrap()
        .forward(&v[..n - 1]);
        assert_relative_eq!(l.forward_last(&prefix, v[n - 1]), full[n - 1], epsilon = 1e-12);
        prefix.push(full[n - 1]);
        assert_eq!(prefix.len(), n);
    }

    #[test]
    fn sherman_morrison_tracks_inverse() {
        let n = 4;
        let mut a = Matrix::scaled_identity(n, 1.0);
        let mut inv = Matrix::scaled_identity(n, 1.0);
        for s in 0..10 {
            let v: Vec<f64> = (0..n).map(|i| ((s * n + i) as f64 * 0.37).cos()).collect();
            a.add_outer(&v, 1.0);
            inv.sherman_morrison_update(&v);
        }
        let direct = a.inverse_spd().unwrap();
        for (x, y) in inv.as_slice().iter().zip(direct.as_slice()) {
            assert_relative_eq!(x, y, epsilon = 1e-10);
        }
        assert_relative_eq!(a.cholesky().unwrap().log_det(), -direct.cholesky().unwrap().log_det(), epsilon = 1e-10);
    }
}
