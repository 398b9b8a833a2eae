use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;

use super::multiindex::MultiIndex;
use crate::error::{invalid, Error, Result};

/// Highest truncation order supported by the dense layouts.
pub const MAX_ORDER: usize = 24;

/// Dense enumeration of the multi-indices of total degree `<= order` in
/// `dim` variables, graded by degree. Because of the grading, the layout of a
/// lower order is a prefix of a higher one.
#[derive(Debug)]
pub(crate) struct Layout {
    dim: usize,
    order: usize,
    exps: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
    products: Vec<(u32, u32, u32)>,
    // per axis: (source, target in the order-1 layout, exponent factor)
    derivs: Vec<Vec<(u32, u32, f64)>>,
}

type LayoutCache = Mutex<HashMap<(usize, usize), Arc<Layout>>>;

static LAYOUTS: Lazy<LayoutCache> = Lazy::new(|| Mutex::new(HashMap::new()));

fn graded_exponents(dim: usize, order: usize) -> Vec<Vec<u8>> {
    fn fill(dim: usize, left: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if prefix.len() + 1 == dim {
            prefix.push(left as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e as u8);
            fill(dim, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if dim == 0 {
        out.push(Vec::new());
        return out;
    }
    for deg in 0..=order {
        fill(dim, deg, &mut Vec::with_capacity(dim), &mut out);
    }
    out
}

impl Layout {
    fn build(dim: usize, order: usize) -> Layout {
        let exps = graded_exponents(dim, order);
        let lookup: HashMap<Vec<u8>, usize> = exps
            .iter()
            .enumerate()
            .map(|(k, e)| (e.clone(), k))
            .collect();
        let degree = |e: &Vec<u8>| e.iter().map(|&v| v as usize).sum::<usize>();
        let mut products = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            let da = degree(a);
            for (j, b) in exps.iter().enumerate() {
                if da + degree(b) > order {
                    continue;
                }
                let s: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                products.push((i as u32, j as u32, lookup[&s] as u32));
            }
        }
        let mut derivs = vec![Vec::new(); dim];
        for (axis, table) in derivs.iter_mut().enumerate() {
            for (k, e) in exps.iter().enumerate() {
                if e[axis] == 0 {
                    continue;
                }
                let mut t = e.clone();
                t[axis] -= 1;
                table.push((k as u32, lookup[&t] as u32, e[axis] as f64));
            }
        }
        Layout {
            dim,
            order,
            exps,
            lookup,
            products,
            derivs,
        }
    }

    fn len(&self) -> usize {
        self.exps.len()
    }
}

pub(crate) fn layout(dim: usize, order: usize) -> Arc<Layout> {
    let mut cache = LAYOUTS.lock().unwrap_or_else(|p| p.into_inner());
    cache
        .entry((dim, order))
        .or_insert_with(|| Arc::new(Layout::build(dim, order)))
        .clone()
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return invalid(format!(
            "truncation order {order} exceeds the maximum {MAX_ORDER}"
        ));
    }
    Ok(())
}

/// Truncated multivariate Taylor polynomial `sum_{|I| <= K} c_I dx^I` about an
/// implicit expansion point.
#[derive(Clone)]
pub struct TruncatedSeries {
    layout: Arc<Layout>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruncatedSeries")
            .field("dim", &self.dim())
            .field("order", &self.order())
            .field("coeffs", &self.terms())
            .finish()
    }
}

impl PartialEq for TruncatedSeries {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.order() == other.order() && self.coeffs == other.coeffs
    }
}

impl TruncatedSeries {
    pub fn zeros(dim: usize, order: usize) -> Result<Self> {
        check_order(order)?;
        let layout = layout(dim, order);
        let coeffs = vec![0.0; layout.len()];
        Ok(TruncatedSeries { layout, coeffs })
    }

    pub fn constant(dim: usize, order: usize, value: f64) -> Result<Self> {
        let mut s = Self::zeros(dim, order)?;
        s.coeffs[0] = value;
        Ok(s)
    }

    /// The coordinate function `x_axis` expanded about a point where it takes
    /// the value `at`.
    pub fn variable(dim: usize, order: usize, axis: usize, at: f64) -> Result<Self> {
        if axis >= dim {
            return invalid(format!("axis {axis} out of range for dimension {dim}"));
        }
        let mut s = Self::constant(dim, order, at)?;
        if order >= 1 {
            let k = s.layout.lookup[&unit_exp(dim, axis)];
            s.coeffs[k] = 1.0;
        }
        Ok(s)
    }

    /// All coordinate functions expanded about `point`.
    pub fn variables(point: &[f64], order: usize) -> Result<Vec<Self>> {
        (0..point.len())
            .map(|a| Self::variable(point.len(), order, a, point[a]))
            .collect()
    }

    /// Builds a series from sparse `(multi-index, coefficient)` pairs. Missing
    /// indices are zero; repeated indices accumulate.
    pub fn from_terms(dim: usize, order: usize, terms: &[(MultiIndex, f64)]) -> Result<Self> {
        let mut s = Self::zeros(dim, order)?;
        for (idx, c) in terms {
            let k = s.position(idx)?;
            s.coeffs[k] += c;
        }
        Ok(s)
    }

    fn position(&self, idx: &MultiIndex) -> Result<usize> {
        if idx.dim() != self.dim() {
            return invalid(format!(
                "multi-index {idx} has dimension {} but the series has {}",
                idx.dim(),
                self.dim()
            ));
        }
        if idx.order() > self.order() {
            return invalid(format!(
                "multi-index {idx} exceeds truncation order {}",
                self.order()
            ));
        }
        let e: Vec<u8> = idx.exponents().iter().map(|&v| v as u8).collect();
        Ok(self.layout.lookup[&e])
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    /// Value at the expansion point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, idx: &MultiIndex) -> Result<f64> {
        Ok(self.coeffs[self.position(idx)?])
    }

    pub fn set_coeff(&mut self, idx: &MultiIndex, value: f64) -> Result<()> {
        let k = self.position(idx)?;
        self.coeffs[k] = value;
        Ok(())
    }

    /// Partial derivative `d^|I| f / dx^I` at the expansion point, `I! c_I`.
    pub fn derivative(&self, idx: &MultiIndex) -> Result<f64> {
        Ok(idx.factorial() * self.coeff(idx)?)
    }

    /// Nonzero coefficients as sparse pairs in graded order.
    pub fn terms(&self) -> Vec<(MultiIndex, f64)> {
        self.layout
            .exps
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| **c != 0.0)
            .map(|(e, c)| (MultiIndex::new(e.iter().map(|&v| v as u32).collect()), *c))
            .collect()
    }

    pub(crate) fn raw(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() || self.order() != other.order() {
            return invalid(format!(
                "series shapes differ: (n={}, K={}) vs (n={}, K={})",
                self.dim(),
                self.order(),
                other.dim(),
                other.order()
            ));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut coeffs = vec![0.0; self.coeffs.len()];
        let (a, b) = (&self.coeffs, &other.coeffs);
        for &(i, j, k) in &self.layout.products {
            coeffs[k as usize] += a[i as usize] * b[j as usize];
        }
        Ok(TruncatedSeries {
            layout: self.layout.clone(),
            coeffs,
        })
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.try_mul(&other.recip()?)
    }

    pub fn scale(&self, factor: f64) -> Self {
        TruncatedSeries {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add_scalar(&self, value: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += value;
        out
    }

    /// `self += factor * other`, in place.
    pub fn axpy(&mut self, factor: f64, other: &Self) -> Result<()> {
        self.same_shape(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += factor * b;
        }
        Ok(())
    }

    /// Applies a univariate function given by its Taylor coefficients
    /// `t_k = f^(k)(a0) / k!` at `a0 = self.value()`.
    pub fn compose_univariate(&self, taylor: &[f64]) -> Self {
        let order = self.order();
        let mut shifted = self.clone();
        shifted.coeffs[0] = 0.0;
        let top = order.min(taylor.len().saturating_sub(1));
        let mut acc = self.scale(0.0);
        acc.coeffs[0] = taylor.get(top).copied().unwrap_or(0.0);
        for k in (0..top).rev() {
            acc = acc.try_mul(&shifted).expect("same layout");
            acc.coeffs[0] += taylor[k];
        }
        acc
    }

    pub fn recip(&self) -> Result<Self> {
        let a = self.value();
        if a == 0.0 || !a.is_finite() {
            return Err(Error::Evaluation(format!(
                "reciprocal of a series with value {a}"
            )));
        }
        let t: Vec<f64> = (0..=self.order())
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / a.powi(k as i32 + 1))
            .collect();
        Ok(self.compose_univariate(&t))
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        let mut t = Vec::with_capacity(self.order() + 1);
        let mut f = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                f /= k as f64;
            }
            t.push(e * f);
        }
        self.compose_univariate(&t)
    }

    pub fn ln(&self) -> Result<Self> {
        let a = self.value();
        if a <= 0.0 || !a.is_finite() {
            return Err(Error::Evaluation(format!("log of non-positive value {a}")));
        }
        let mut t = vec![a.ln()];
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            t.push(sign / (k as f64 * a.powi(k as i32)));
        }
        Ok(self.compose_univariate(&t))
    }

    fn trig_like(&self, d: [f64; 4]) -> Self {
        let mut t = Vec::with_capacity(self.order() + 1);
        let mut f = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                f /= k as f64;
            }
            t.push(d[k % 4] * f);
        }
        self.compose_univariate(&t)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.trig_like([s, c, -s, -c])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.trig_like([c, -s, -c, s])
    }

    pub fn sinh(&self) -> Self {
        let a = self.value();
        let (s, c) = (a.sinh(), a.cosh());
        self.trig_like([s, c, s, c])
    }

    pub fn cosh(&self) -> Self {
        let a = self.value();
        let (s, c) = (a.sinh(), a.cosh());
        self.trig_like([c, s, c, s])
    }

    /// Real power with a positive base value.
    pub fn powf(&self, p: f64) -> Result<Self> {
        let a = self.value();
        if a <= 0.0 || !a.is_finite() {
            return Err(Error::Evaluation(format!(
                "real power {p} of non-positive value {a}"
            )));
        }
        let mut t = Vec::with_capacity(self.order() + 1);
        let mut c = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                c *= (p - (k - 1) as f64) / k as f64;
            }
            t.push(c * a.powf(p - k as f64));
        }
        Ok(self.compose_univariate(&t))
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.value() == 0.0 && self.order() == 0 {
            return Ok(self.clone());
        }
        self.powf(0.5)
            .map_err(|_| Error::Evaluation(format!("sqrt of non-positive value {}", self.value())))
    }

    /// Integer power by repeated squaring; negative exponents go through the
    /// reciprocal.
    pub fn powi(&self, p: i32) -> Result<Self> {
        let base = if p < 0 { self.recip()? } else { self.clone() };
        let mut e = p.unsigned_abs();
        let mut acc = self.scale(0.0).add_scalar(1.0);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.try_mul(&sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.try_mul(&sq)?;
            }
        }
        Ok(acc)
    }

    /// `d/dx_axis`; the result has order `K - 1`.
    pub fn differentiate(&self, axis: usize) -> Result<Self> {
        if axis >= self.dim() {
            return invalid(format!(
                "axis {axis} out of range for dimension {}",
                self.dim()
            ));
        }
        if self.order() == 0 {
            return invalid("cannot differentiate an order-0 series");
        }
        let mut out = Self::zeros(self.dim(), self.order() - 1)?;
        for &(src, dst, f) in &self.layout.derivs[axis] {
            if (dst as usize) < out.coeffs.len() {
                out.coeffs[dst as usize] += f * self.coeffs[src as usize];
            }
        }
        Ok(out)
    }

    /// Drops all terms above `order`.
    pub fn truncate(&self, order: usize) -> Result<Self> {
        if order > self.order() {
            return invalid(format!(
                "cannot truncate order {} series to higher order {order}",
                self.order()
            ));
        }
        let layout = layout(self.dim(), order);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Ok(TruncatedSeries { layout, coeffs })
    }

    /// Substitutes `x = inner` into a series expanded about `center`. Every
    /// inner series must take the value `center[i]` at its own expansion point,
    /// so the result is exact to the inner truncation order.
    pub fn compose(&self, center: &[f64], inner: &[TruncatedSeries]) -> Result<Self> {
        if inner.len() != self.dim() || center.len() != self.dim() {
            return invalid(format!(
                "composition needs {} inner series, got {}",
                self.dim(),
                inner.len()
            ));
        }
        let Some(first) = inner.first() else {
            return invalid("composition of a series in zero variables needs an output shape");
        };
        let (m, k) = (first.dim(), first.order());
        if k > self.order() {
            return invalid(format!(
                "inner order {k} exceeds the outer truncation order {}",
                self.order()
            ));
        }
        let mut deltas = Vec::with_capacity(inner.len());
        for (s, c) in inner.iter().zip(center) {
            first.same_shape(s)?;
            let gap = (s.value() - c).abs();
            if gap > 1e-12 * (1.0 + c.abs()) {
                return invalid(format!(
                    "inner series value {} does not match the expansion centre {c}",
                    s.value()
                ));
            }
            let mut d = s.clone();
            d.coeffs[0] = 0.0;
            deltas.push(d);
        }
        // powers[i][p] = delta_i^p
        let one = Self::constant(m, k, 1.0)?;
        let mut powers = Vec::with_capacity(deltas.len());
        for d in &deltas {
            let mut row = vec![one.clone()];
            for p in 1..=k {
                let next = row[p - 1].try_mul(d)?;
                row.push(next);
            }
            powers.push(row);
        }
        let mut out = Self::zeros(m, k)?;
        let n_terms = layout(self.dim(), k).len();
        for (e, c) in self.layout.exps[..n_terms].iter().zip(&self.coeffs) {
            if *c == 0.0 {
                continue;
            }
            let mut term: Option<Self> = None;
            for (i, &p) in e.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                let f = &powers[i][p as usize];
                term = Some(match term {
                    None => f.clone(),
                    Some(t) => t.try_mul(f)?,
                });
            }
            match term {
                None => out.coeffs[0] += c,
                Some(t) => out.axpy(*c, &t)?,
            }
        }
        Ok(out)
    }

    /// Evaluates the truncated polynomial at displacement `h` from the
    /// expansion point.
    pub fn eval_displacement(&self, h: &[f64]) -> Result<f64> {
        if h.len() != self.dim() {
            return invalid("displacement dimension mismatch");
        }
        Ok(self
            .layout
            .exps
            .iter()
            .zip(&self.coeffs)
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(h)
                    .map(|(&p, x)| x.powi(p as i32))
                    .product::<f64>()
            })
            .sum())
    }
}

/// All multi-indices of total degree `<= order` in `dim` variables, graded by
/// degree.
pub fn multi_indices(dim: usize, order: usize) -> Vec<MultiIndex> {
    graded_exponents(dim, order)
        .into_iter()
        .map(|e| MultiIndex::new(e.into_iter().map(u32::from).collect()))
        .collect()
}

fn unit_exp(dim: usize, axis: usize) -> Vec<u8> {
    let mut e = vec![0u8; dim];
    e[axis] = 1;
    e
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        self.try_add(rhs).expect("series shape mismatch in +")
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        self.try_sub(rhs).expect("series shape mismatch in -")
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        self.try_mul(rhs).expect("series shape mismatch in *")
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        self.scale(-1.0)
    }
}
