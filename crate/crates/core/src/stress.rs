//! Order-one variational stresses: action, traction, Cauchy surface force,
//! divergence and the order-one balance identity.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::geometry::{
    omit, Body, FacePatch, FnForm, FormField, FormValue, Pullback, QuadratureRule, SeriesForm,
};
use crate::jetcore::{JetValue, SmoothField, TruncatedSeries};

/// Stress `S` with components `S^0_alpha` and `S^{1j}_alpha` relative to
/// `dx^1 ^ ... ^ dx^n`; `s1` stores `S^{1j}_alpha` at `alpha * n + j`.
#[derive(Debug, Clone)]
pub struct VariationalStress1 {
    pub s0: SmoothField,
    pub s1: SmoothField,
}

impl VariationalStress1 {
    pub fn new(s0: SmoothField, s1: SmoothField) -> Result<Self> {
        if s0.dim() != s1.dim() || s1.components() != s0.components() * s0.dim() {
            return invalid(format!(
                "S^1 needs {} components on R^{}, got {} on R^{}",
                s0.components() * s0.dim(),
                s0.dim(),
                s1.components(),
                s1.dim()
            ));
        }
        Ok(VariationalStress1 { s0, s1 })
    }

    pub fn base_dim(&self) -> usize {
        self.s0.dim()
    }

    pub fn fiber_dim(&self) -> usize {
        self.s0.components()
    }

    fn check_fiber(&self, w: &SmoothField) -> Result<()> {
        if w.dim() != self.base_dim() || w.components() != self.fiber_dim() {
            return invalid(format!(
                "velocity must have {} components on R^{}",
                self.fiber_dim(),
                self.base_dim()
            ));
        }
        Ok(())
    }
}

fn sign(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Coefficient of `S(A)` on `dx^1 ^ ... ^ dx^n`.
pub(crate) fn action_density(s0: &[f64], s1: &[f64], a: &JetValue) -> f64 {
    let (n, d) = (a.base_dim(), a.fiber_dim());
    let mut acc = 0.0;
    for alpha in 0..d {
        acc += s0[alpha] * a.get(alpha, &[]);
        for i in 0..n {
            acc += s1[alpha * n + i] * a.get(alpha, &[i]);
        }
    }
    acc
}

/// `S(A) = (S^0_alpha A^alpha + S^{1i}_alpha A^alpha_i) dx^1 ^ ... ^ dx^n`.
pub fn stress_action(s: &VariationalStress1, a: &JetValue, x: &[f64]) -> Result<FormValue> {
    let (n, d) = (s.base_dim(), s.fiber_dim());
    if a.base_dim() != n || a.fiber_dim() != d || a.order() < 1 {
        return invalid("jet shape does not match the stress");
    }
    let v = action_density(&s.s0.value(x)?, &s.s1.value(x)?, a);
    Ok(FormValue::volume(n).scale(v))
}

/// Traction stress `sigma` with `sigma_(omit j), alpha` stored at
/// `alpha * n + j`.
#[derive(Debug, Clone)]
pub struct TractionStress {
    pub sigma: SmoothField,
    fiber: usize,
}

impl TractionStress {
    pub fn new(sigma: SmoothField, fiber: usize) -> Result<Self> {
        if sigma.components() != fiber * sigma.dim() {
            return invalid("traction needs d * n components");
        }
        Ok(TractionStress { sigma, fiber })
    }

    pub fn base_dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber
    }

    /// The `(n-1)`-form field `sigma(w)`.
    pub fn applied(&self, w: &SmoothField) -> Result<FnForm> {
        let n = self.base_dim();
        if w.dim() != n || w.components() != self.fiber {
            return invalid("velocity shape does not match the traction");
        }
        let (sigma, w, d) = (self.sigma.clone(), w.clone(), self.fiber);
        Ok(FnForm::new(n, n - 1, move |x, k| {
            let s = sigma.taylor(x, k)?;
            let v = w.taylor(x, k)?;
            let like = TruncatedSeries::zeros(n, k)?;
            let mut out = SeriesForm::zero(n, n - 1, &like)?;
            for j in 0..n {
                let mut c = like.clone();
                for alpha in 0..d {
                    c = c.try_add(&s[alpha * n + j].try_mul(&v[alpha])?)?;
                }
                out.add(&omit(n, &[j]), &c)?;
            }
            Ok(out)
        }))
    }
}

/// `p_sigma(S)`: `sigma_(omit j), alpha = (-1)^(j-1) S^{1j}_alpha` (one-based
/// `j`); the order-zero part is discarded.
pub fn traction_projection(s: &VariationalStress1) -> TractionStress {
    let (n, d) = (s.base_dim(), s.fiber_dim());
    let s1 = s.s1.clone();
    let sigma = SmoothField::from_fn(n, d * n, move |x, k| {
        let mut v = s1.taylor(x, k)?;
        for alpha in 0..d {
            for j in 0..n {
                v[alpha * n + j] = v[alpha * n + j].scale(sign(j));
            }
        }
        Ok(v)
    });
    TractionStress { sigma, fiber: d }
}

/// `sum_{j, alpha} sigma_(omit j), alpha w^alpha dx(omit j)` at `x`.
pub fn traction_action(sigma: &TractionStress, w: &SmoothField, x: &[f64]) -> Result<FormValue> {
    sigma.applied(w)?.value_at(x)
}

/// Cauchy surface force `t_V = iota_V^* o sigma` on one face.
#[derive(Debug, Clone)]
pub struct SurfaceForce {
    sigma: TractionStress,
    face: FacePatch,
}

pub fn surface_force(sigma: &TractionStress, face: &FacePatch) -> Result<SurfaceForce> {
    if face.ambient_dim() != sigma.base_dim() {
        return invalid("face does not lie in the traction's chart");
    }
    Ok(SurfaceForce {
        sigma: sigma.clone(),
        face: face.clone(),
    })
}

impl SurfaceForce {
    /// `t_V(w)` as a top-degree form on the face parameters.
    pub fn applied(&self, w: &SmoothField) -> Result<Pullback> {
        Pullback::new(Arc::new(self.sigma.applied(w)?), self.face.map().clone())
    }

    /// Integral of `t_V(w)` over the oriented face.
    pub fn power(&self, w: &SmoothField, rule: &QuadratureRule) -> Result<f64> {
        self.face.integrate(Arc::new(self.sigma.applied(w)?), rule)
    }
}

/// `div S` by the local formula `S^{1j}_alpha,j - S^0_alpha`.
pub fn divergence(s: &VariationalStress1) -> SmoothField {
    let (n, d) = (s.base_dim(), s.fiber_dim());
    let (s0, s1) = (s.s0.clone(), s.s1.clone());
    SmoothField::from_fn(n, d, move |x, k| {
        let a = s0.taylor(x, k)?;
        let b = s1.taylor(x, k + 1)?;
        let mut out = Vec::with_capacity(d);
        for alpha in 0..d {
            let mut c = a[alpha].scale(-1.0);
            for j in 0..n {
                c = c.try_add(&b[alpha * n + j].differentiate(j)?)?;
            }
            out.push(c);
        }
        Ok(out)
    })
}

/// Body force `b = -div S`.
#[derive(Debug, Clone)]
pub struct BodyForce {
    pub b: SmoothField,
}

pub fn body_force(s: &VariationalStress1) -> BodyForce {
    BodyForce {
        b: divergence(s).scaled(-1.0),
    }
}

/// Coefficient of `d(sigma(w)) - S(j^1 w)` on `dx^1 ^ ... ^ dx^n` at `x`,
/// the invariant definition of `div S (w)`.
pub fn invariant_divergence(s: &VariationalStress1, w: &SmoothField, x: &[f64]) -> Result<f64> {
    s.check_fiber(w)?;
    let n = s.base_dim();
    let sw = traction_projection(s).applied(w)?;
    let dsw = sw.series_at(x, 1)?.exterior_derivative()?.value();
    let jet = JetValue::from_series(&w.taylor(x, 1)?)?;
    let act = action_density(&s.s0.value(x)?, &s.s1.value(x)?, &jet);
    Ok(dsw.get(&(0..n).collect::<Vec<_>>()) - act)
}

/// `residual / max |term|`, or the residual itself when every term vanishes.
pub(crate) fn relative(residual: f64, terms: &[f64]) -> f64 {
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    if scale > 0.0 {
        residual / scale
    } else {
        residual
    }
}

/// Terms of `int_B S(j^1 w) = int_B b(w) + int_dB t(w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Balance1Report {
    pub lhs: f64,
    pub interior: f64,
    pub boundary: f64,
    pub faces: Vec<(String, f64)>,
    pub residual: f64,
    pub relative: f64,
}

pub fn verify_balance_order1(
    s: &VariationalStress1,
    w: &SmoothField,
    body: &Body,
    rule: &QuadratureRule,
) -> Result<Balance1Report> {
    s.check_fiber(w)?;
    if body.dim() != s.base_dim() {
        return invalid(format!(
            "body has dimension {} but the stress lives on R^{}",
            body.dim(),
            s.base_dim()
        ));
    }
    let d = s.fiber_dim();
    let div = divergence(s);
    let (mut lhs, mut interior) = (0.0, 0.0);
    for (x, wt) in body.nodes(rule)? {
        let jet = JetValue::from_series(&w.taylor(&x, 1)?)?;
        lhs += wt * action_density(&s.s0.value(&x)?, &s.s1.value(&x)?, &jet);
        let b = div.value(&x)?;
        interior -= wt * (0..d).map(|a| b[a] * jet.get(a, &[])).sum::<f64>();
    }
    let sigma = traction_projection(s);
    let mut faces = Vec::new();
    for face in body.faces() {
        let v = surface_force(&sigma, &face)?.power(w, rule)?;
        faces.push((face.id().to_string(), v));
    }
    let boundary: f64 = faces.iter().map(|(_, v)| v).sum();
    let residual = (lhs - interior - boundary).abs();
    let mut terms = vec![lhs, interior, boundary];
    terms.extend(faces.iter().map(|(_, v)| *v));
    Ok(Balance1Report {
        lhs,
        interior,
        boundary,
        faces,
        residual,
        relative: relative(residual, &terms),
    })
}
