//! Symmetric band matrices and their Cholesky factorization.

use crate::error::{Error, Result};

/// Symmetric matrix stored as its lower band.
///
/// Entry `(i, j)` with `i - bw <= j <= i` lives at `data[i * (bw + 1) + (i - j)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricBandedMatrix {
    dim: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl SymmetricBandedMatrix {
    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        SymmetricBandedMatrix {
            dim,
            bandwidth,
            data: vec![0.0; dim * (bandwidth + 1)],
        }
    }

    /// Band of a dense symmetric matrix; the bandwidth is the widest
    /// nonzero off-diagonal found in the lower triangle.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let dim = rows.len();
        let bandwidth = (0..dim)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .filter(|&(i, j)| rows[i][j] != 0.0)
            .map(|(i, j)| i - j)
            .max()
            .unwrap_or(0);
        let mut m = Self::zeros(dim, bandwidth);
        for i in 0..dim {
            for j in i.saturating_sub(bandwidth)..=i {
                m.set(i, j, rows[i][j]);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        (i - j <= self.bandwidth).then(|| i * (self.bandwidth + 1) + (i - j))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Sets `(i, j)` and, implicitly, `(j, i)`.
    ///
    /// Panics if the pair lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.slot(i, j).expect("entry outside band");
        self.data[k] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let k = self.slot(i, j).expect("entry outside band");
        self.data[k] += value;
    }

    /// Multiplies each entry by `s`.
    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                let lo = i.saturating_sub(self.bandwidth);
                let hi = (i + self.bandwidth).min(self.dim - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// `b − Ax` with every row sum evaluated in compensated (twice working
    /// precision) arithmetic, so the result is accurate even when the
    /// entries of `Ax` and `b` nearly cancel.
    pub fn residual_compensated(&self, b: &[f64], x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        assert_eq!(b.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                let lo = i.saturating_sub(self.bandwidth);
                let hi = (i + self.bandwidth).min(self.dim - 1);
                let mut acc = CompensatedSum::new(b[i]);
                for j in lo..=hi {
                    acc.add_product(-self.get(i, j), x[j]);
                }
                acc.value()
            })
            .collect()
    }

    /// Quadratic form `xᵀ A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Principal submatrix on `keep` (ascending indices). The result stays
    /// banded with no larger bandwidth.
    pub fn principal_submatrix(&self, keep: &[usize]) -> Self {
        debug_assert!(keep.windows(2).all(|w| w[0] < w[1]));
        let n = keep.len();
        let mut sub = Self::zeros(n, self.bandwidth.min(n.saturating_sub(1)));
        for (a, &i) in keep.iter().enumerate() {
            for b in a.saturating_sub(sub.bandwidth)..=a {
                let j = keep[b];
                if i - j <= self.bandwidth {
                    sub.set(a, b, self.get(i, j));
                }
            }
        }
        sub
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn cholesky(&self) -> Result<BandedCholesky> {
        let bw = self.bandwidth;
        let mut l = self.clone();
        for i in 0..self.dim {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let kmin = lo.max(j.saturating_sub(bw));
                let mut s = l.get(i, j);
                for k in kmin..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                    }
                    l.set(i, i, s.sqrt());
                } else {
                    l.set(i, j, s / l.get(j, j));
                }
            }
        }
        Ok(BandedCholesky { factor: l })
    }
}

/// Running sum with error-free transformations (TwoSum / TwoProduct).
#[derive(Debug, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    err: f64,
}

impl CompensatedSum {
    pub(crate) fn new(start: f64) -> Self {
        CompensatedSum {
            sum: start,
            err: 0.0,
        }
    }

    #[inline]
    pub(crate) fn add(&mut self, v: f64) {
        let s = self.sum + v;
        let bb = s - self.sum;
        self.err += (self.sum - (s - bb)) + (v - bb);
        self.sum = s;
    }

    #[inline]
    pub(crate) fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        self.err += a.mul_add(b, -p);
        self.add(p);
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.err
    }
}

/// Lower-triangular band factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    factor: SymmetricBandedMatrix,
}

impl BandedCholesky {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let l = &self.factor;
        let n = l.dim;
        let bw = l.bandwidth;
        assert_eq!(rhs.len(), n);
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= l.get(i, k) * y[k];
            }
            y[i] = s / l.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..=(i + bw).min(n.saturating_sub(1)) {
                s -= l.get(k, i) * y[k];
            }
            y[i] = s / l.get(i, i);
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> SymmetricBandedMatrix {
        let mut m = SymmetricBandedMatrix::zeros(n, 1);
        for i in 0..n {
            m.set(i, i, 2.0);
            if i > 0 {
                m.set(i, i - 1, -1.0);
            }
        }
        m
    }

    #[test]
    fn solves_tridiagonal() {
        let m = tridiag(6);
        let x: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
        let b = m.mul_vec(&x);
        let y = m.cholesky().unwrap().solve(&b);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn symmetric_access() {
        let mut m = SymmetricBandedMatrix::zeros(4, 2);
        m.set(3, 1, 5.0);
        assert_eq!(m.get(1, 3), 5.0);
        assert_eq!(m.get(0, 3), 0.0);
    }

    #[test]
    fn indefinite_rejected() {
        let mut m = tridiag(3);
        m.set(1, 1, -1.0);
        assert!(matches!(
            m.cholesky(),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn submatrix_keeps_entries() {
        let m = tridiag(5);
        let s = m.principal_submatrix(&[0, 1, 3, 4]);
        assert_eq!(s.dim(), 4);
        assert_eq!(s.get(1, 0), -1.0);
        assert_eq!(s.get(2, 1), 0.0);
        assert_eq!(s.get(3, 2), -1.0);
    }

    #[test]
    fn compensated_residual_recovers_cancellation() {
        let mut m = SymmetricBandedMatrix::zeros(2, 1);
        m.set(0, 0, 1e16);
        m.set(1, 1, 1.0);
        m.set(1, 0, 1.0);
        // row 0: b - (1e16 * 1 + 1 * 1) with b = 1e16 → -1 exactly
        let r = m.residual_compensated(&[1e16, 0.0], &[1.0, 1.0]);
        assert_eq!(r[0], -1.0);
        assert_eq!(r[1], -2.0);
    }

    #[test]
    fn dense_round_trip() {
        let m = tridiag(4);
        let back = SymmetricBandedMatrix::from_dense(&m.to_dense());
        assert_eq!(back, m);
    }
}
