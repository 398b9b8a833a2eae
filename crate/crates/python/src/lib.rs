//! Python bindings: fields, jets, stresses, balance checks and scenarios.

use std::collections::BTreeMap;

use hyperstress::balance::{
    coordinate_transversals, first_integration_by_parts, verify_balance_order2,
};
use hyperstress::bundles::JetSection1;
use hyperstress::geometry::{Body, Chart, QuadratureRule};
use hyperstress::jetcore::{finite_difference_jet, jet_extension, SmoothField};
use hyperstress::nonholonomic::{
    lift_second_order, restrict_to_second_order, second_contraction_values, NonHolonomicStress,
    VariationalStress2,
};
use hyperstress::scenario::{generate_scenario, run_scenario as run_scenario_text, Overrides};
use hyperstress::stress::{invariant_divergence, verify_balance_order1, VariationalStress1};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: hyperstress::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse(dim: usize, exprs: &[String]) -> PyResult<SmoothField> {
    let refs: Vec<&str> = exprs.iter().map(String::as_str).collect();
    SmoothField::parse(dim, &refs).map_err(err)
}

type Terms = Vec<(Vec<usize>, f64)>;

fn rule(order: usize) -> PyResult<QuadratureRule> {
    QuadratureRule::new(order).map_err(err)
}

/// Smooth map `R^dim -> R^d` given by one expression per component.
#[pyclass(name = "Field", frozen)]
struct PyField {
    inner: SmoothField,
}

#[pymethods]
impl PyField {
    #[new]
    fn new(dim: usize, exprs: Vec<String>) -> PyResult<Self> {
        Ok(PyField {
            inner: parse(dim, &exprs)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn components(&self) -> usize {
        self.inner.components()
    }

    fn value(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.value(&x).map_err(err)
    }

    /// Derivative arrays `[A^0, A^1, ..., A^k]`, each flattened as
    /// `alpha`, then the axes in order.
    fn jet(&self, x: Vec<f64>, k: usize) -> PyResult<Vec<Vec<f64>>> {
        let j = jet_extension(&self.inner, &x, k).map_err(err)?;
        Ok((0..=k).map(|p| j.array(p).to_vec()).collect())
    }

    #[pyo3(signature = (x, k, h = 1e-4))]
    fn finite_difference_jet(&self, x: Vec<f64>, k: usize, h: f64) -> PyResult<Vec<Vec<f64>>> {
        let j = finite_difference_jet(&self.inner, &x, k, h).map_err(err)?;
        Ok((0..=k).map(|p| j.array(p).to_vec()).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Field(dim={}, components={})",
            self.inner.dim(),
            self.inner.components()
        )
    }
}

/// Box body `[lower, upper]` in an unbounded chart.
#[pyclass(name = "Body", frozen)]
struct PyBody {
    inner: Body,
}

#[pymethods]
impl PyBody {
    #[new]
    fn new(lower: Vec<f64>, upper: Vec<f64>) -> PyResult<Self> {
        let n = lower.len();
        Ok(PyBody {
            inner: Body::new(Chart::unbounded(n), lower, upper, None).map_err(err)?,
        })
    }

    #[staticmethod]
    fn unit_box(n: usize) -> Self {
        PyBody {
            inner: Body::unit_box(n),
        }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn face_ids(&self) -> Vec<String> {
        self.inner
            .faces()
            .iter()
            .map(|f| f.id().to_string())
            .collect()
    }

    fn edge_ids(&self) -> Vec<String> {
        self.inner.edges().into_iter().map(|e| e.id).collect()
    }
}

/// Order-one variational stress `(S^0, S^1)`.
#[pyclass(name = "Stress1", frozen)]
struct PyStress1 {
    inner: VariationalStress1,
}

#[pymethods]
impl PyStress1 {
    #[new]
    fn new(dim: usize, s0: Vec<String>, s1: Vec<String>) -> PyResult<Self> {
        Ok(PyStress1 {
            inner: VariationalStress1::new(parse(dim, &s0)?, parse(dim, &s1)?).map_err(err)?,
        })
    }

    fn invariant_divergence(&self, w: &PyField, x: Vec<f64>) -> PyResult<f64> {
        invariant_divergence(&self.inner, &w.inner, &x).map_err(err)
    }

    /// Terms of the order-one balance identity.
    #[pyo3(signature = (w, body, quad_order = 6))]
    fn balance(
        &self,
        w: &PyField,
        body: &PyBody,
        quad_order: usize,
    ) -> PyResult<BTreeMap<String, f64>> {
        let r = verify_balance_order1(&self.inner, &w.inner, &body.inner, &rule(quad_order)?)
            .map_err(err)?;
        let mut out = BTreeMap::from([
            ("lhs".to_string(), r.lhs),
            ("interior".to_string(), r.interior),
            ("boundary".to_string(), r.boundary),
            ("residual".to_string(), r.residual),
            ("relative".to_string(), r.relative),
        ]);
        out.extend(r.faces.into_iter().map(|(f, v)| (format!("face:{f}"), v)));
        Ok(out)
    }
}

/// Order-two stress `(S^0, S^1, S^2)`; `S^2` is symmetrized.
#[pyclass(name = "Stress2", frozen)]
struct PyStress2 {
    inner: VariationalStress2,
}

#[pymethods]
impl PyStress2 {
    #[new]
    fn new(dim: usize, s0: Vec<String>, s1: Vec<String>, s2: Vec<String>) -> PyResult<Self> {
        let inner = VariationalStress2::new(parse(dim, &s0)?, parse(dim, &s1)?, parse(dim, &s2)?)
            .map_err(err)?;
        Ok(PyStress2 { inner })
    }

    /// Values `(S^0, S^1, S^2)` at `x`.
    fn values(&self, x: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let s = &self.inner;
        Ok((
            s.s0.value(&x).map_err(err)?,
            s.s1.value(&x).map_err(err)?,
            s.s2().value(&x).map_err(err)?,
        ))
    }

    #[pyo3(signature = (lam = 1.0))]
    fn lift(&self, lam: f64) -> PyResult<PyNonHolonomic> {
        Ok(PyNonHolonomic {
            inner: lift_second_order(&self.inner, lam).map_err(err)?,
        })
    }
}

/// Non-holonomic stress `(X^0, X^1, X^2, X^3)`.
#[pyclass(name = "NonHolonomicStress", frozen)]
struct PyNonHolonomic {
    inner: NonHolonomicStress,
}

#[pymethods]
impl PyNonHolonomic {
    #[new]
    fn new(
        dim: usize,
        x0: Vec<String>,
        x1: Vec<String>,
        x2: Vec<String>,
        x3: Vec<String>,
    ) -> PyResult<Self> {
        let inner = NonHolonomicStress::new(
            parse(dim, &x0)?,
            parse(dim, &x1)?,
            parse(dim, &x2)?,
            parse(dim, &x3)?,
        )
        .map_err(err)?;
        Ok(PyNonHolonomic { inner })
    }

    fn restrict(&self) -> PyStress2 {
        PyStress2 {
            inner: restrict_to_second_order(&self.inner),
        }
    }

    /// Second contraction of `X^3` at `x`: for each fiber index a list of
    /// `(basis tuple, coefficient)` pairs.
    fn second_contraction(&self, x: Vec<f64>) -> PyResult<Vec<Terms>> {
        let v = self.inner.x3.value(&x).map_err(err)?;
        let forms = second_contraction_values(&v, self.inner.base_dim()).map_err(err)?;
        Ok(forms
            .iter()
            .map(|f| f.entries().map(|(t, c)| (t.clone(), c)).collect())
            .collect())
    }

    /// Terms of the first integration by parts for the section `(a0, a1)`.
    #[pyo3(signature = (a0, a1, body, quad_order = 6))]
    fn first_integration_by_parts(
        &self,
        a0: &PyField,
        a1: &PyField,
        body: &PyBody,
        quad_order: usize,
    ) -> PyResult<BTreeMap<String, f64>> {
        let a = JetSection1::new(a0.inner.clone(), a1.inner.clone()).map_err(err)?;
        let r = first_integration_by_parts(&self.inner, &a, &body.inner, &rule(quad_order)?)
            .map_err(err)?;
        Ok(BTreeMap::from([
            ("lhs".to_string(), r.lhs),
            ("boundary".to_string(), r.boundary),
            ("interior".to_string(), r.interior),
            ("residual".to_string(), r.residual),
            ("relative".to_string(), r.relative),
        ]))
    }

    /// Terms of the second-order balance identity with coordinate
    /// transversals.
    #[pyo3(signature = (u, body, quad_order = 6, tol = 1e-9))]
    fn balance(
        &self,
        u: &PyField,
        body: &PyBody,
        quad_order: usize,
        tol: f64,
    ) -> PyResult<BTreeMap<String, f64>> {
        let t = coordinate_transversals(&body.inner).map_err(err)?;
        let r = verify_balance_order2(
            &self.inner,
            &u.inner,
            &body.inner,
            &t,
            &rule(quad_order)?,
            tol,
        )
        .map_err(err)?;
        let mut out = BTreeMap::from([
            ("lhs".to_string(), r.lhs),
            ("edge_sum".to_string(), r.edge_sum),
            ("face_divergence_sum".to_string(), r.face_divergence_sum),
            (
                "boundary_div_traction_sum".to_string(),
                r.boundary_div_traction_sum,
            ),
            ("div_div".to_string(), r.div_div),
            ("residual".to_string(), r.residual),
            ("relative".to_string(), r.relative),
        ]);
        out.extend(r.edges.into_iter().map(|(e, v)| (format!("edge:{e}"), v)));
        Ok(out)
    }
}

/// Runs a scenario given as TOML text; returns `(overall_pass, jsonl)`.
#[pyfunction]
#[pyo3(signature = (text, checks = Vec::new(), quad_order = None, tolerances = Vec::new()))]
fn run_scenario(
    text: &str,
    checks: Vec<String>,
    quad_order: Option<usize>,
    tolerances: Vec<(String, f64)>,
) -> PyResult<(bool, String)> {
    let r = run_scenario_text(
        text,
        &checks,
        &Overrides {
            quad_order,
            tolerances,
        },
    )
    .map_err(err)?;
    Ok((r.overall_pass, r.to_jsonl()))
}

/// Random polynomial scenario as TOML text.
#[pyfunction]
#[pyo3(signature = (seed, n, degree, d = 1))]
fn generate(seed: u64, n: usize, degree: usize, d: usize) -> PyResult<String> {
    generate_scenario(seed, n, d, degree).map_err(err)
}

#[pymodule]
#[pyo3(name = "hyperstress")]
fn hyperstress_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PyBody>()?;
    m.add_class::<PyStress1>()?;
    m.add_class::<PyStress2>()?;
    m.add_class::<PyNonHolonomic>()?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    Ok(())
}
