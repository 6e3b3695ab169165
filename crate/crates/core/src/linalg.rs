//! Small dense matrices and vectors over a generic scalar.
//!
//! Reflection groups in this crate are tiny (at most a few hundred d×d
//! matrices with d ≤ 4), so a plain row-major `Vec` carrier is enough.

use crate::scalar::Scalar;

/// Row-major d×d matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    pub dim: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![T::zero(); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = T::one();
        }
        Mat { dim, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim));
        Mat {
            dim,
            data: rows.into_iter().flatten().collect(),
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.dim + j]
    }

    pub fn mul(&self, other: &Mat<T>) -> Mat<T> {
        let d = self.dim;
        assert_eq!(d, other.dim);
        let mut data = vec![T::zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.at(i, k).clone();
                if a.is_negligible() {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] += a.clone() * other.at(k, j).clone();
                }
            }
        }
        Mat { dim: d, data }
    }

    pub fn transpose(&self) -> Mat<T> {
        let d = self.dim;
        let mut data = vec![T::zero(); d * d];
        for i in 0..d {
            for j in 0..d {
                data[j * d + i] = self.at(i, j).clone();
            }
        }
        Mat { dim: d, data }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let d = self.dim;
        assert_eq!(x.len(), d);
        (0..d)
            .map(|i| {
                let mut s = T::zero();
                for j in 0..d {
                    s += self.at(i, j).clone() * x[j].clone();
                }
                s
            })
            .collect()
    }

    /// Reflection matrix through the hyperplane orthogonal to `v`:
    /// I − 2 v vᵀ / |v|².
    pub fn reflection(v: &[T]) -> Mat<T> {
        let d = v.len();
        let mut norm_sq = T::zero();
        for vi in v {
            norm_sq += vi.clone() * vi.clone();
        }
        assert!(!norm_sq.is_negligible(), "zero root vector");
        let mut m: Mat<T> = Mat::identity(d);
        for i in 0..d {
            for j in 0..d {
                let corr = T::from_i64(2) * v[i].clone() * v[j].clone() / norm_sq.clone();
                let cur = m.at(i, j).clone();
                m.data[i * d + j] = cur - corr;
            }
        }
        m
    }

    /// Max-entry distance to another matrix, in f64.
    pub fn max_entry_distance(&self, other: &Mat<T>) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.to_f64() - b.to_f64()).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        self.mul(&self.transpose())
            .max_entry_distance(&Mat::identity(self.dim))
            <= tol
    }

    pub fn to_f64(&self) -> Mat<f64> {
        Mat {
            dim: self.dim,
            data: self.data.iter().map(|x| x.to_f64()).collect(),
        }
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s += x.clone() * y.clone();
    }
    s
}

pub fn dot_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq_f64(a: &[f64]) -> f64 {
    dot_f64(a, a)
}

pub fn dist_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
