use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::expr::Expr;
use super::multiindex::MultiIndex;
use super::series::{multi_indices, TruncatedSeries};
use crate::error::{invalid, Error, Result};

/// Sparse polynomial `sum c_E x^E` in `dim` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<(MultiIndex, f64)>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<(MultiIndex, f64)>) -> Result<Self> {
        for (e, _) in &terms {
            if e.dim() != dim {
                return invalid(format!("monomial {e} does not have dimension {dim}"));
            }
        }
        Ok(Polynomial { dim, terms })
    }

    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Polynomial {
            dim,
            terms: vec![(MultiIndex::zeros(dim), c)],
        }
    }

    /// Random dense polynomial of total degree `<= degree` with coefficients
    /// uniform in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize, degree: usize) -> Self {
        let mut terms = Vec::new();
        for e in multi_indices(dim, degree) {
            terms.push((e, rng.gen_range(-1.0..=1.0)));
        }
        Polynomial { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(MultiIndex, f64)] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(e, _)| e.order()).max().unwrap_or(0)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .exponents()
                    .iter()
                    .zip(x)
                    .map(|(&p, v)| v.powi(p as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn derivative(&self, axis: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter_map(|(e, c)| {
                let p = e.exponents()[axis];
                (p > 0).then(|| {
                    let mut ex = e.exponents().to_vec();
                    ex[axis] -= 1;
                    (MultiIndex::new(ex), c * p as f64)
                })
            })
            .collect();
        Polynomial {
            dim: self.dim,
            terms,
        }
    }

    pub fn eval(&self, inputs: &[TruncatedSeries]) -> Result<TruncatedSeries> {
        let Some(shape) = inputs.first() else {
            return invalid("polynomial evaluation needs inputs");
        };
        if inputs.len() != self.dim {
            return invalid(format!(
                "polynomial in {} variables evaluated with {} inputs",
                self.dim,
                inputs.len()
            ));
        }
        let mut powers: Vec<Vec<TruncatedSeries>> = inputs
            .iter()
            .map(|s| vec![shape.scale(0.0).add_scalar(1.0), s.clone()])
            .collect();
        let mut out = shape.scale(0.0);
        for (e, c) in &self.terms {
            let mut term: Option<TruncatedSeries> = None;
            for (i, &p) in e.exponents().iter().enumerate() {
                if p == 0 {
                    continue;
                }
                while powers[i].len() <= p as usize {
                    let next = powers[i].last().unwrap().try_mul(&inputs[i])?;
                    powers[i].push(next);
                }
                let f = &powers[i][p as usize];
                term = Some(match term {
                    None => f.clone(),
                    Some(t) => t.try_mul(f)?,
                });
            }
            match term {
                None => out = out.add_scalar(*c),
                Some(t) => out.axpy(*c, &t)?,
            }
        }
        Ok(out)
    }
}

/// Scalar component specification: expression or polynomial.
#[derive(Debug, Clone, PartialEq)]
pub enum Component {
    Expr(Expr),
    Poly(Polynomial),
}

impl Component {
    pub fn eval(&self, inputs: &[TruncatedSeries]) -> Result<TruncatedSeries> {
        match self {
            Component::Expr(e) => e.eval(inputs),
            Component::Poly(p) => p.eval(inputs),
        }
    }

    fn arity(&self) -> usize {
        match self {
            Component::Expr(e) => e.arity(),
            Component::Poly(p) => p.dim(),
        }
    }
}

type Evaluator = dyn Fn(&[f64], usize) -> Result<Vec<TruncatedSeries>> + Send + Sync;

/// Smooth map from an open subset of `R^n` to `R^d`, accessed through its
/// truncated Taylor expansions.
#[derive(Clone)]
pub struct SmoothField {
    dim: usize,
    components: usize,
    eval: Arc<Evaluator>,
}

impl fmt::Debug for SmoothField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothField")
            .field("dim", &self.dim)
            .field("components", &self.components)
            .finish_non_exhaustive()
    }
}

impl SmoothField {
    /// Wraps an evaluator returning the `components` Taylor expansions at a
    /// point, truncated at the requested order.
    pub fn from_fn<F>(dim: usize, components: usize, f: F) -> Self
    where
        F: Fn(&[f64], usize) -> Result<Vec<TruncatedSeries>> + Send + Sync + 'static,
    {
        SmoothField {
            dim,
            components,
            eval: Arc::new(f),
        }
    }

    pub fn from_components(dim: usize, comps: Vec<Component>) -> Result<Self> {
        for c in &comps {
            if c.arity() > dim {
                return invalid(format!(
                    "component uses {} coordinates but the chart has dimension {dim}",
                    c.arity()
                ));
            }
        }
        let d = comps.len();
        Ok(Self::from_fn(dim, d, move |x, k| {
            let vars = TruncatedSeries::variables(x, k)?;
            comps.iter().map(|c| c.eval(&vars)).collect()
        }))
    }

    pub fn from_exprs(dim: usize, exprs: Vec<Expr>) -> Result<Self> {
        Self::from_components(dim, exprs.into_iter().map(Component::Expr).collect())
    }

    /// Parses one expression per component.
    pub fn parse(dim: usize, sources: &[&str]) -> Result<Self> {
        let exprs = sources
            .iter()
            .map(|s| Expr::parse(s))
            .collect::<Result<Vec<_>>>()?;
        Self::from_exprs(dim, exprs)
    }

    pub fn from_polynomials(dim: usize, polys: Vec<Polynomial>) -> Result<Self> {
        Self::from_components(dim, polys.into_iter().map(Component::Poly).collect())
    }

    pub fn constant(dim: usize, values: Vec<f64>) -> Self {
        let d = values.len();
        Self::from_fn(dim, d, move |_, k| {
            values
                .iter()
                .map(|&v| TruncatedSeries::constant(dim, k, v))
                .collect()
        })
    }

    pub fn zero(dim: usize, components: usize) -> Self {
        Self::constant(dim, vec![0.0; components])
    }

    /// Identity map of `R^dim`.
    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, dim, TruncatedSeries::variables)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Taylor expansions of all components about `point`, to order `order`.
    pub fn taylor(&self, point: &[f64], order: usize) -> Result<Vec<TruncatedSeries>> {
        if point.len() != self.dim {
            return invalid(format!(
                "point has dimension {} but the field is defined on R^{}",
                point.len(),
                self.dim
            ));
        }
        if point.iter().any(|v| !v.is_finite()) {
            return invalid("point has non-finite coordinates");
        }
        let out = (self.eval)(point, order)?;
        if out.len() != self.components {
            return Err(Error::Evaluation(format!(
                "field evaluator returned {} components, expected {}",
                out.len(),
                self.components
            )));
        }
        for s in &out {
            if s.raw().iter().any(|c| !c.is_finite()) {
                return Err(Error::Evaluation("non-finite Taylor coefficient".into()));
            }
        }
        Ok(out)
    }

    pub fn value(&self, point: &[f64]) -> Result<Vec<f64>> {
        Ok(self.taylor(point, 0)?.iter().map(|s| s.value()).collect())
    }

    /// Composition `self(inner)`, where `inner` holds one series per chart
    /// coordinate.
    pub fn compose(&self, inner: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        if inner.len() != self.dim {
            return invalid(format!(
                "composition needs {} inner series, got {}",
                self.dim,
                inner.len()
            ));
        }
        let center: Vec<f64> = inner.iter().map(|s| s.value()).collect();
        let order = inner[0].order();
        self.taylor(&center, order)?
            .iter()
            .map(|s| s.compose(&center, inner))
            .collect()
    }

    /// The sub-field made of the listed components.
    pub fn select(&self, indices: Vec<usize>) -> Result<SmoothField> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.components) {
            return invalid(format!("component {bad} out of range"));
        }
        let inner = self.clone();
        Ok(Self::from_fn(self.dim, indices.len(), move |x, k| {
            let all = inner.taylor(x, k)?;
            Ok(indices.iter().map(|&i| all[i].clone()).collect())
        }))
    }

    pub fn scaled(&self, factor: f64) -> SmoothField {
        let inner = self.clone();
        Self::from_fn(self.dim, self.components, move |x, k| {
            Ok(inner
                .taylor(x, k)?
                .iter()
                .map(|s| s.scale(factor))
                .collect())
        })
    }

    /// Componentwise `a * self + b * other`.
    pub fn linear_combination(&self, a: f64, other: &SmoothField, b: f64) -> Result<SmoothField> {
        if self.dim != other.dim || self.components != other.components {
            return invalid("fields of different shapes cannot be combined");
        }
        let (f, g) = (self.clone(), other.clone());
        Ok(Self::from_fn(self.dim, self.components, move |x, k| {
            let (u, v) = (f.taylor(x, k)?, g.taylor(x, k)?);
            u.iter()
                .zip(&v)
                .map(|(p, q)| {
                    let mut s = p.scale(a);
                    s.axpy(b, q)?;
                    Ok(s)
                })
                .collect()
        }))
    }

    /// Concatenates the components of several fields on the same chart.
    pub fn stack(fields: &[SmoothField]) -> Result<SmoothField> {
        let Some(first) = fields.first() else {
            return invalid("cannot stack an empty list of fields");
        };
        let dim = first.dim;
        if fields.iter().any(|f| f.dim != dim) {
            return invalid("stacked fields must share a chart dimension");
        }
        let total = fields.iter().map(|f| f.components).sum();
        let parts = fields.to_vec();
        Ok(Self::from_fn(dim, total, move |x, k| {
            let mut out = Vec::with_capacity(total);
            for f in &parts {
                out.extend(f.taylor(x, k)?);
            }
            Ok(out)
        }))
    }

    /// Gradient field with components `f_c,i` at index `c * n + i`.
    pub fn gradient(&self) -> SmoothField {
        let f = self.clone();
        let n = self.dim;
        Self::from_fn(n, self.components * n, move |x, k| {
            let mut out = Vec::with_capacity(f.components * n);
            for s in f.taylor(x, k + 1)? {
                for i in 0..n {
                    out.push(s.differentiate(i)?);
                }
            }
            Ok(out)
        })
    }

    /// Pulls the field back along `map`, a field from `R^m` into this chart.
    pub fn pullback(&self, map: &SmoothField) -> Result<SmoothField> {
        if map.components != self.dim {
            return invalid(format!(
                "map lands in R^{} but the field lives on R^{}",
                map.components, self.dim
            ));
        }
        let (f, m) = (self.clone(), map.clone());
        Ok(Self::from_fn(map.dim, self.components, move |y, k| {
            let inner = m.taylor(y, k)?;
            f.compose(&inner)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn polynomial_series_matches_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = Polynomial::random(&mut rng, 2, 3);
        assert_eq!(p.terms().len(), 10);
        let x = [0.3, -0.7];
        let s = p.eval(&TruncatedSeries::variables(&x, 3).unwrap()).unwrap();
        assert!((s.value() - p.value(&x)).abs() < 1e-14);
        let dx = p.derivative(0).value(&x);
        let got = s.derivative(&MultiIndex::unit(2, 0)).unwrap();
        assert!((got - dx).abs() < 1e-13);
    }

    #[test]
    fn rejects_components_beyond_chart() {
        assert!(SmoothField::parse(2, &["x3"]).is_err());
        let f = SmoothField::parse(2, &["x1"]).unwrap();
        assert!(f.taylor(&[0.0], 1).is_err());
    }

    #[test]
    fn pullback_composes() {
        let f = SmoothField::parse(2, &["x1*x2"]).unwrap();
        let m = SmoothField::parse(1, &["x1", "x1^2"]).unwrap();
        let g = f.pullback(&m).unwrap();
        let s = g.taylor(&[2.0], 3).unwrap();
        // t^3 about 2: 8, 12, 6, 1
        let want = [8.0, 12.0, 6.0, 1.0];
        for (k, w) in want.iter().enumerate() {
            assert!((s[0].coeff(&MultiIndex::new(vec![k as u32])).unwrap() - w).abs() < 1e-12);
        }
    }
}
