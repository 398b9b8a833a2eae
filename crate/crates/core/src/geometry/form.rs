use std::collections::BTreeMap;

use super::linalg::{det, submatrix};
use crate::error::{invalid, Result};
use crate::jetcore::TruncatedSeries;

/// Increasing `p`-tuples of axes in `0..n`, in lexicographic order.
pub fn basis_tuples(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for a in start..n {
            cur.push(a);
            rec(a + 1, n, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if p <= n {
        rec(0, n, p, &mut Vec::new(), &mut out);
    }
    out
}

/// `dx(omit ...)`: all axes of `0..n` except the omitted ones, increasing.
pub fn omit(n: usize, omitted: &[usize]) -> Vec<usize> {
    (0..n).filter(|a| !omitted.contains(a)).collect()
}

fn check_tuple(n: usize, p: usize, t: &[usize]) -> Result<()> {
    if t.len() != p {
        return invalid(format!("basis tuple {t:?} does not have degree {p}"));
    }
    if t.windows(2).any(|w| w[0] >= w[1]) || t.iter().any(|&a| a >= n) {
        return invalid(format!("basis tuple {t:?} is not increasing within 0..{n}"));
    }
    Ok(())
}

/// Alternating `p`-form at a point in `n` dimensions, expanded in the basis
/// `dx^{i1} ^ ... ^ dx^{ip}` with increasing indices.
#[derive(Debug, Clone, PartialEq)]
pub struct FormValue {
    dim: usize,
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, f64>,
}

impl FormValue {
    pub fn zero(dim: usize, degree: usize) -> Result<Self> {
        if degree > dim {
            return invalid(format!("degree {degree} exceeds dimension {dim}"));
        }
        Ok(FormValue {
            dim,
            degree,
            coeffs: BTreeMap::new(),
        })
    }

    /// `dx^1 ^ ... ^ dx^n`
    pub fn volume(dim: usize) -> Self {
        let mut f = FormValue {
            dim,
            degree: dim,
            coeffs: BTreeMap::new(),
        };
        f.coeffs.insert((0..dim).collect(), 1.0);
        f
    }

    pub fn basis(dim: usize, tuple: &[usize]) -> Result<Self> {
        let mut f = Self::zero(dim, tuple.len())?;
        f.add(tuple, 1.0)?;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, tuple: &[usize]) -> f64 {
        self.coeffs.get(tuple).copied().unwrap_or(0.0)
    }

    pub fn add(&mut self, tuple: &[usize], value: f64) -> Result<()> {
        check_tuple(self.dim, self.degree, tuple)?;
        *self.coeffs.entry(tuple.to_vec()).or_insert(0.0) += value;
        Ok(())
    }

    /// Nonzero entries in basis order.
    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, f64)> {
        self.coeffs.iter().map(|(k, v)| (k, *v))
    }

    pub fn scale(&self, f: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.values_mut().for_each(|v| *v *= f);
        out
    }

    pub fn try_add(&self, other: &FormValue) -> Result<Self> {
        if self.dim != other.dim || self.degree != other.degree {
            return invalid("forms of different dimension or degree");
        }
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            *out.coeffs.entry(k.clone()).or_insert(0.0) += v;
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &FormValue) -> Result<f64> {
        if self.dim != other.dim || self.degree != other.degree {
            return invalid("forms of different dimension or degree");
        }
        Ok(basis_tuples(self.dim, self.degree)
            .iter()
            .fold(0.0, |m, t| m.max((self.get(t) - other.get(t)).abs())))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Interior product `v _| self`.
    pub fn interior(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.dim {
            return invalid("vector dimension does not match the form");
        }
        if self.degree == 0 {
            return invalid("interior product of a 0-form");
        }
        let mut out = Self::zero(self.dim, self.degree - 1)?;
        for (t, c) in &self.coeffs {
            for (k, &a) in t.iter().enumerate() {
                if v[a] == 0.0 {
                    continue;
                }
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let mut rest = t.clone();
                rest.remove(k);
                *out.coeffs.entry(rest).or_insert(0.0) += sign * v[a] * c;
            }
        }
        Ok(out)
    }

    /// Interior product with the coordinate vector `d/dx^axis`.
    pub fn interior_axis(&self, axis: usize) -> Result<Self> {
        if axis >= self.dim {
            return invalid(format!("axis {axis} out of range"));
        }
        let mut v = vec![0.0; self.dim];
        v[axis] = 1.0;
        self.interior(&v)
    }

    /// Pullback along a linear map with matrix `jac` (`dim` rows, `m` columns).
    pub fn pullback(&self, jac: &[Vec<f64>]) -> Result<Self> {
        let m = check_jacobian(self.dim, jac)?;
        let mut out = Self::zero(m, self.degree)?;
        for target in basis_tuples(m, self.degree) {
            let v: f64 = self
                .coeffs
                .iter()
                .map(|(src, c)| c * det(&submatrix(jac, src, &target), &0.0))
                .sum();
            if v != 0.0 {
                out.coeffs.insert(target, v);
            }
        }
        Ok(out)
    }
}

fn check_jacobian<T>(dim: usize, jac: &[Vec<T>]) -> Result<usize> {
    if jac.len() != dim {
        return invalid(format!("jacobian has {} rows, expected {dim}", jac.len()));
    }
    let m = jac.first().map_or(0, |r| r.len());
    if jac.iter().any(|r| r.len() != m) {
        return invalid("ragged jacobian");
    }
    Ok(m)
}

/// Form whose coefficients are truncated series about a common point.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesForm {
    dim: usize,
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, TruncatedSeries>,
    like: TruncatedSeries,
}

impl SeriesForm {
    /// Zero form whose coefficients share the shape of `like`.
    pub fn zero(dim: usize, degree: usize, like: &TruncatedSeries) -> Result<Self> {
        if degree > dim {
            return invalid(format!("degree {degree} exceeds dimension {dim}"));
        }
        Ok(SeriesForm {
            dim,
            degree,
            coeffs: BTreeMap::new(),
            like: like.scale(0.0),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.like.order()
    }

    pub fn get(&self, tuple: &[usize]) -> TruncatedSeries {
        self.coeffs
            .get(tuple)
            .cloned()
            .unwrap_or_else(|| self.like.clone())
    }

    pub fn add(&mut self, tuple: &[usize], value: &TruncatedSeries) -> Result<()> {
        check_tuple(self.dim, self.degree, tuple)?;
        let slot = self
            .coeffs
            .entry(tuple.to_vec())
            .or_insert_with(|| self.like.clone());
        *slot = slot.try_add(value)?;
        Ok(())
    }

    /// Coefficients at the expansion point.
    pub fn value(&self) -> FormValue {
        let mut out = FormValue::zero(self.dim, self.degree).expect("valid degree");
        for (t, c) in &self.coeffs {
            out.coeffs.insert(t.clone(), c.value());
        }
        out
    }

    /// Exterior derivative; the coefficient order drops by one. The series
    /// variables are taken to be the form's own coordinates.
    pub fn exterior_derivative(&self) -> Result<Self> {
        if self.like.dim() != self.dim {
            return invalid("series variables must be the form coordinates");
        }
        if self.degree == self.dim {
            return invalid("exterior derivative of a top-degree form");
        }
        let like = TruncatedSeries::zeros(self.dim, self.order().saturating_sub(1))?;
        let mut out = SeriesForm::zero(self.dim, self.degree + 1, &like)?;
        for (t, c) in &self.coeffs {
            for j in 0..self.dim {
                if t.contains(&j) {
                    continue;
                }
                let before = t.iter().filter(|&&a| a < j).count();
                let sign = if before % 2 == 0 { 1.0 } else { -1.0 };
                let mut tuple = t.clone();
                tuple.insert(before, j);
                out.add(&tuple, &c.differentiate(j)?.scale(sign))?;
            }
        }
        Ok(out)
    }

    /// Pullback along a map whose jacobian `jac` (`dim` rows) is given as
    /// series in the new variables. The coefficients must already be composed
    /// with the map.
    pub fn pullback(&self, jac: &[Vec<TruncatedSeries>]) -> Result<Self> {
        let m = check_jacobian(self.dim, jac)?;
        let like = jac
            .first()
            .and_then(|r| r.first())
            .cloned()
            .unwrap_or_else(|| self.like.clone());
        let mut out = SeriesForm::zero(m, self.degree, &like)?;
        for target in basis_tuples(m, self.degree) {
            let mut acc = like.scale(0.0);
            for (src, c) in &self.coeffs {
                let minor = det(&submatrix(jac, src, &target), &like);
                acc = acc.try_add(&c.try_mul(&minor)?)?;
            }
            out.coeffs.insert(target, acc);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_of_volume() {
        // d/dx^j _| vol = (-1)^j dx(omit j), zero-based
        for n in 1..=4 {
            let vol = FormValue::volume(n);
            for j in 0..n {
                let f = vol.interior_axis(j).unwrap();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(f.get(&omit(n, &[j])), sign);
                assert_eq!(f.entries().count(), 1);
            }
        }
    }

    #[test]
    fn tuples() {
        assert_eq!(basis_tuples(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(basis_tuples(2, 0), vec![Vec::<usize>::new()]);
        assert!(basis_tuples(2, 3).is_empty());
    }

    #[test]
    fn pullback_of_volume_is_determinant() {
        let jac = vec![vec![2.0, 1.0], vec![0.5, 3.0]];
        let p = FormValue::volume(2).pullback(&jac).unwrap();
        assert_eq!(p.get(&[0, 1]), 5.5);
    }

    #[test]
    fn exterior_derivative_of_exact_form_vanishes() {
        // f = x y^2, df, then d(df) = 0
        let x = TruncatedSeries::variable(2, 3, 0, 0.4).unwrap();
        let y = TruncatedSeries::variable(2, 3, 1, -0.2).unwrap();
        let f = &x * &(&y * &y);
        let mut zero_form = SeriesForm::zero(2, 0, &f).unwrap();
        zero_form.add(&[], &f).unwrap();
        let df = zero_form.exterior_derivative().unwrap();
        assert!((df.get(&[1]).value() - 2.0 * 0.4 * -0.2).abs() < 1e-15);
        let ddf = df.exterior_derivative().unwrap();
        assert!(ddf.get(&[0, 1]).max_abs() < 1e-15);
        assert!(ddf.exterior_derivative().is_err());
    }

    #[test]
    fn rejects_bad_tuples() {
        let mut f = FormValue::zero(3, 2).unwrap();
        assert!(f.add(&[1, 0], 1.0).is_err());
        assert!(f.add(&[0, 3], 1.0).is_err());
        assert!(f.add(&[0], 1.0).is_err());
    }
}
