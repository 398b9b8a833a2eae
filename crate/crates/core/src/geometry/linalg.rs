//! Small dense linear algebra over reals and truncated series.

use crate::error::{Error, Result};
use crate::jetcore::TruncatedSeries;

/// Ring operations shared by plain numbers and truncated series of a common
/// shape.
pub trait Scalar: Clone {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, f: f64) -> Self;
    fn constant_like(&self, c: f64) -> Self;
    fn recip(&self) -> Result<Self>;
    /// Magnitude of the value at the expansion point.
    fn magnitude(&self) -> f64;
}

impl Scalar for f64 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, f: f64) -> Self {
        self * f
    }
    fn constant_like(&self, c: f64) -> Self {
        c
    }
    fn recip(&self) -> Result<Self> {
        if *self == 0.0 {
            return Err(Error::Evaluation("division by zero".into()));
        }
        Ok(1.0 / self)
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for TruncatedSeries {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, f: f64) -> Self {
        TruncatedSeries::scale(self, f)
    }
    fn constant_like(&self, c: f64) -> Self {
        TruncatedSeries::scale(self, 0.0).add_scalar(c)
    }
    fn recip(&self) -> Result<Self> {
        TruncatedSeries::recip(self)
    }
    fn magnitude(&self) -> f64 {
        self.value().abs()
    }
}

/// Determinant by cofactor expansion; `like` fixes the shape of the result
/// for the empty matrix.
pub fn det<T: Scalar>(m: &[Vec<T>], like: &T) -> T {
    match m.len() {
        0 => like.constant_like(1.0),
        1 => m[0][0].clone(),
        2 => m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0])),
        n => {
            let mut acc = like.constant_like(0.0);
            for col in 0..n {
                let minor: Vec<Vec<T>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != col)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = m[0][col].mul(&det(&minor, like));
                acc = if col % 2 == 0 {
                    acc.add(&term)
                } else {
                    acc.sub(&term)
                };
            }
            acc
        }
    }
}

/// Sub-matrix with the given rows and columns.
pub fn submatrix<T: Clone>(m: &[Vec<T>], rows: &[usize], cols: &[usize]) -> Vec<Vec<T>> {
    rows.iter()
        .map(|&r| cols.iter().map(|&c| m[r][c].clone()).collect())
        .collect()
}

/// Inverse by Gauss-Jordan elimination with partial pivoting on the value at
/// the expansion point. Fails when a pivot magnitude drops below `tol`.
pub fn inverse<T: Scalar>(m: &[Vec<T>], tol: f64) -> Result<Vec<Vec<T>>> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument(
            "inverse needs a non-empty square matrix".into(),
        ));
    }
    let mut a: Vec<Vec<T>> = m.to_vec();
    let like = &m[0][0];
    let mut inv: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| like.constant_like(if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].magnitude().total_cmp(&a[j][col].magnitude()))
            .expect("non-empty range");
        if a[pivot][col].magnitude() <= tol {
            return Err(Error::InvalidArgument("matrix is singular".into()));
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let r = a[col][col].recip()?;
        for j in 0..n {
            a[col][j] = a[col][j].mul(&r);
            inv[col][j] = inv[col][j].mul(&r);
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[i][col].clone();
            for j in 0..n {
                a[i][j] = a[i][j].sub(&f.mul(&a[col][j]));
                inv[i][j] = inv[i][j].sub(&f.mul(&inv[col][j]));
            }
        }
    }
    Ok(inv)
}

pub fn mat_vec<T: Scalar>(m: &[Vec<T>], v: &[T]) -> Vec<T> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .skip(1)
                .fold(row[0].mul(&v[0]), |acc, (a, b)| acc.add(&a.mul(b)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn determinant_and_inverse() {
        let m = vec![
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 4.0],
        ];
        assert!((det(&m, &0.0) - 18.0).abs() < 1e-14);
        let inv = inverse(&m, 1e-14).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| m[i][k] * inv[k][j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        assert!(inverse(&[vec![1.0, 2.0], vec![2.0, 4.0]], 1e-12).is_err());
    }

    #[test]
    fn series_inverse_is_exact_to_order() {
        let x = TruncatedSeries::variable(1, 3, 0, 0.5).unwrap();
        let one = x.constant_like(1.0);
        let m = vec![vec![one.clone(), x.clone()], vec![x.clone(), one.clone()]];
        let inv = inverse(&m, 1e-12).unwrap();
        let prod = &(&m[0][0] * &inv[0][0]) + &(&m[0][1] * &inv[1][0]);
        assert!((&prod - &one).max_abs() < 1e-13);
    }
}
