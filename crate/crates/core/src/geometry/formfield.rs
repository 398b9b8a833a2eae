use std::sync::Arc;

use super::form::{FormValue, SeriesForm};
use crate::error::{invalid, Result};
use crate::jetcore::{SmoothField, TruncatedSeries};

/// Smooth field of `p`-forms on a chart, accessed through Taylor expansions
/// of its coefficients.
pub trait FormField: Send + Sync {
    fn dim(&self) -> usize;
    fn degree(&self) -> usize;
    /// Coefficients about `point`, truncated at `order`.
    fn series_at(&self, point: &[f64], order: usize) -> Result<SeriesForm>;

    fn value_at(&self, point: &[f64]) -> Result<FormValue> {
        Ok(self.series_at(point, 0)?.value())
    }
}

/// Form with one scalar field per listed basis tuple.
#[derive(Debug, Clone)]
pub struct CoefficientForm {
    dim: usize,
    degree: usize,
    tuples: Vec<Vec<usize>>,
    coeffs: SmoothField,
}

impl CoefficientForm {
    pub fn new(
        dim: usize,
        degree: usize,
        tuples: Vec<Vec<usize>>,
        coeffs: SmoothField,
    ) -> Result<Self> {
        if coeffs.components() != tuples.len() || coeffs.dim() != dim {
            return invalid("coefficient field does not match the basis tuples");
        }
        if degree > dim || tuples.iter().any(|t| t.len() != degree) {
            return invalid("basis tuples do not match the degree");
        }
        Ok(CoefficientForm {
            dim,
            degree,
            tuples,
            coeffs,
        })
    }
}

impl FormField for CoefficientForm {
    fn dim(&self) -> usize {
        self.dim
    }
    fn degree(&self) -> usize {
        self.degree
    }
    fn series_at(&self, point: &[f64], order: usize) -> Result<SeriesForm> {
        let values = self.coeffs.taylor(point, order)?;
        let like = TruncatedSeries::zeros(self.dim, order)?;
        let mut out = SeriesForm::zero(self.dim, self.degree, &like)?;
        for (t, v) in self.tuples.iter().zip(&values) {
            out.add(t, v)?;
        }
        Ok(out)
    }
}

type FormEvaluator = dyn Fn(&[f64], usize) -> Result<SeriesForm> + Send + Sync;

/// Form field backed by a closure.
#[derive(Clone)]
pub struct FnForm {
    dim: usize,
    degree: usize,
    eval: Arc<FormEvaluator>,
}

impl FnForm {
    pub fn new<F>(dim: usize, degree: usize, f: F) -> Self
    where
        F: Fn(&[f64], usize) -> Result<SeriesForm> + Send + Sync + 'static,
    {
        FnForm {
            dim,
            degree,
            eval: Arc::new(f),
        }
    }
}

impl FormField for FnForm {
    fn dim(&self) -> usize {
        self.dim
    }
    fn degree(&self) -> usize {
        self.degree
    }
    fn series_at(&self, point: &[f64], order: usize) -> Result<SeriesForm> {
        let f = (self.eval)(point, order)?;
        if f.dim() != self.dim || f.degree() != self.degree {
            return invalid("form evaluator returned the wrong shape");
        }
        Ok(f)
    }
}

/// `map^* form`, where `map` goes from parameters into the form's chart.
#[derive(Clone)]
pub struct Pullback {
    form: Arc<dyn FormField>,
    map: SmoothField,
}

impl Pullback {
    pub fn new(form: Arc<dyn FormField>, map: SmoothField) -> Result<Self> {
        if map.components() != form.dim() {
            return invalid(format!(
                "map lands in R^{} but the form lives on R^{}",
                map.components(),
                form.dim()
            ));
        }
        if form.degree() > map.dim() {
            return invalid("pullback degree exceeds the parameter dimension");
        }
        Ok(Pullback { form, map })
    }
}

/// Series of the map about `y` together with its jacobian, both truncated at
/// `order`.
pub fn map_with_jacobian(
    map: &SmoothField,
    y: &[f64],
    order: usize,
) -> Result<(Vec<TruncatedSeries>, Vec<Vec<TruncatedSeries>>)> {
    let x = map.taylor(y, order + 1)?;
    let jac = x
        .iter()
        .map(|xi| {
            (0..map.dim())
                .map(|a| xi.differentiate(a))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let x = x
        .iter()
        .map(|s| s.truncate(order))
        .collect::<Result<Vec<_>>>()?;
    Ok((x, jac))
}

impl FormField for Pullback {
    fn dim(&self) -> usize {
        self.map.dim()
    }
    fn degree(&self) -> usize {
        self.form.degree()
    }
    fn series_at(&self, point: &[f64], order: usize) -> Result<SeriesForm> {
        let (x, jac) = map_with_jacobian(&self.map, point, order)?;
        let center: Vec<f64> = x.iter().map(|s| s.value()).collect();
        let outer = self.form.series_at(&center, order)?;
        let like = &x[0];
        let mut composed = SeriesForm::zero(outer.dim(), outer.degree(), like)?;
        for t in super::form::basis_tuples(outer.dim(), outer.degree()) {
            let c = outer.get(&t);
            if c.max_abs() == 0.0 {
                continue;
            }
            composed.add(&t, &c.compose(&center, &x)?)?;
        }
        composed.pullback(&jac)
    }
}

/// `d form`.
#[derive(Clone)]
pub struct ExteriorDerivative {
    form: Arc<dyn FormField>,
}

impl ExteriorDerivative {
    pub fn new(form: Arc<dyn FormField>) -> Result<Self> {
        if form.degree() >= form.dim() {
            return invalid("exterior derivative of a top-degree form");
        }
        Ok(ExteriorDerivative { form })
    }
}

impl FormField for ExteriorDerivative {
    fn dim(&self) -> usize {
        self.form.dim()
    }
    fn degree(&self) -> usize {
        self.form.degree() + 1
    }
    fn series_at(&self, point: &[f64], order: usize) -> Result<SeriesForm> {
        self.form.series_at(point, order + 1)?.exterior_derivative()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pullback_commutes_with_d() {
        // omega = x1 x2^2 dx1 + sin(x1) dx2 on R^2, map y -> (y1 + y2^2, y1 y2)
        let coeffs = SmoothField::parse(2, &["x1*x2^2", "sin(x1)"]).unwrap();
        let omega: Arc<dyn FormField> =
            Arc::new(CoefficientForm::new(2, 1, vec![vec![0], vec![1]], coeffs).unwrap());
        let map = SmoothField::parse(2, &["x1 + x2^2", "x1*x2"]).unwrap();
        let d_then_pull = Pullback::new(
            Arc::new(ExteriorDerivative::new(omega.clone()).unwrap()),
            map.clone(),
        )
        .unwrap();
        let pull_then_d =
            ExteriorDerivative::new(Arc::new(Pullback::new(omega, map).unwrap())).unwrap();
        let y = [0.3, -0.4];
        let a = d_then_pull.value_at(&y).unwrap();
        let b = pull_then_d.value_at(&y).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-13);
        assert!(a.max_abs() > 1e-3);
    }
}
