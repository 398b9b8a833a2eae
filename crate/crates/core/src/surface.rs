//! Hyper-surface stresses restricted to boundary faces: vertical and tangent
//! parts, tangent tractions and the surface divergence.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::geometry::linalg::{det, inverse, submatrix, Scalar};
use crate::geometry::{
    map_with_jacobian, omit, Body, Chart, FacePatch, FnForm, FormField, QuadratureRule, SeriesForm,
};
use crate::jetcore::{SmoothField, TruncatedSeries};
use crate::nonholonomic::HyperSurfaceStress;
use crate::stress::{divergence, traction_projection, TractionStress, VariationalStress1};

/// Series of the face point and its `n x (n-1)` jacobian about `y`.
fn frame(
    face: &FacePatch,
    y: &[f64],
    k: usize,
) -> Result<(Vec<TruncatedSeries>, Vec<Vec<TruncatedSeries>>)> {
    map_with_jacobian(face.map(), y, k)
}

/// `m_j = det` of the face jacobian with row `j` removed: the pullback of
/// `dx(omit j)` is `m_j dy^1 ^ ... ^ dy^(n-1)`.
fn minors(jac: &[Vec<TruncatedSeries>], like: &TruncatedSeries) -> Vec<TruncatedSeries> {
    let n = jac.len();
    let cols: Vec<usize> = (0..n - 1).collect();
    (0..n)
        .map(|j| det(&submatrix(jac, &omit(n, &[j]), &cols), like))
        .collect()
}

/// `nu_i = det[e_1, ..., e_(n-1), d_i]`, the covector annihilating the face
/// tangents.
fn annihilator(jac: &[Vec<TruncatedSeries>], like: &TruncatedSeries) -> Vec<TruncatedSeries> {
    let n = jac.len();
    (0..n)
        .map(|i| {
            let m: Vec<Vec<TruncatedSeries>> = (0..n)
                .map(|r| {
                    let mut row = jac[r].clone();
                    row.push(like.constant_like(if r == i { 1.0 } else { 0.0 }));
                    row
                })
                .collect();
            det(&m, like)
        })
        .collect()
}

fn dot(
    a: &[TruncatedSeries],
    b: &[TruncatedSeries],
    like: &TruncatedSeries,
) -> Result<TruncatedSeries> {
    let mut acc = like.scale(0.0);
    for (p, q) in a.iter().zip(b) {
        acc = acc.try_add(&p.try_mul(q)?)?;
    }
    Ok(acc)
}

/// `Z = rho_V(Y)` on the face parameters: `z0` holds `Z^0_alpha`, `z1` holds
/// `Z^1i_alpha` at `alpha * n + i`, both relative to `dy^1 ^ ... ^ dy^(n-1)`.
#[derive(Debug, Clone)]
pub struct RestrictedSurfaceStress {
    pub face: FacePatch,
    pub z0: SmoothField,
    pub z1: SmoothField,
}

impl RestrictedSurfaceStress {
    pub fn ambient_dim(&self) -> usize {
        self.face.ambient_dim()
    }

    pub fn fiber_dim(&self) -> usize {
        self.z0.components()
    }

    /// `Z(j^1 u)` as a top-degree form on the face parameters.
    pub fn applied_holonomic(&self, u: &SmoothField) -> Result<FnForm> {
        let (n, d) = (self.ambient_dim(), self.fiber_dim());
        if u.dim() != n || u.components() != d {
            return invalid("velocity shape does not match the surface stress");
        }
        let m = n - 1;
        let u_face = u.pullback(self.face.map())?;
        let grad_face = u.gradient().pullback(self.face.map())?;
        let (z0, z1) = (self.z0.clone(), self.z1.clone());
        Ok(FnForm::new(m, m, move |y, k| {
            let (a, b) = (z0.taylor(y, k)?, z1.taylor(y, k)?);
            let (w, g) = (u_face.taylor(y, k)?, grad_face.taylor(y, k)?);
            let like = TruncatedSeries::zeros(m, k)?;
            let c = dot(&a, &w, &like)?.try_add(&dot(&b, &g, &like)?)?;
            let mut out = SeriesForm::zero(m, m, &like)?;
            out.add(&(0..m).collect::<Vec<_>>(), &c)?;
            Ok(out)
        }))
    }
}

/// Pulls every `dx(omit j)` slot of `Y` back to the face.
pub fn restrict_y(y: &HyperSurfaceStress, face: &FacePatch) -> Result<RestrictedSurfaceStress> {
    let (n, d) = (y.base_dim(), y.fiber_dim());
    if face.ambient_dim() != n {
        return invalid("face does not lie in the stress chart");
    }
    let m = n - 1;
    let (f0, fc) = (y.y0.clone(), face.clone());
    let z0 = SmoothField::from_fn(m, d, move |p, k| {
        let (xs, jac) = frame(&fc, p, k)?;
        let mj = minors(&jac, &xs[0]);
        let v = f0.compose(&xs)?;
        (0..d)
            .map(|alpha| dot(&v[alpha * n..(alpha + 1) * n], &mj, &xs[0]))
            .collect()
    });
    let (f1, fc) = (y.y1.clone(), face.clone());
    let z1 = SmoothField::from_fn(m, d * n, move |p, k| {
        let (xs, jac) = frame(&fc, p, k)?;
        let mj = minors(&jac, &xs[0]);
        let v = f1.compose(&xs)?;
        (0..d * n)
            .map(|ai| dot(&v[ai * n..(ai + 1) * n], &mj, &xs[0]))
            .collect()
    });
    Ok(RestrictedSurfaceStress {
        face: face.clone(),
        z0,
        z1,
    })
}

/// `v_alpha = Z^1i_alpha nu_i`: the part of `Z` seen by jets that vanish
/// along the face. On a face `x^n = c` with parameters `x^1..x^(n-1)` this is
/// the `i = n` column.
pub fn vertical_projection(z: &RestrictedSurfaceStress) -> SmoothField {
    let (n, d) = (z.ambient_dim(), z.fiber_dim());
    let (z1, face) = (z.z1.clone(), z.face.clone());
    SmoothField::from_fn(n - 1, d, move |p, k| {
        let (xs, jac) = frame(&face, p, k)?;
        let nu = annihilator(&jac, &xs[0]);
        let v = z1.taylor(p, k)?;
        (0..d)
            .map(|alpha| dot(&v[alpha * n..(alpha + 1) * n], &nu, &xs[0]))
            .collect()
    })
}

/// True when the vertical projection vanishes within `tol` at every point.
pub fn is_tangent(z: &RestrictedSurfaceStress, points: &[Vec<f64>], tol: f64) -> Result<bool> {
    let v = vertical_projection(z);
    for p in points {
        if v.value(p)?.iter().any(|c| c.abs() > tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Vector field `N` along a face, transversal to it, given in chart
/// components as a function of the face parameters.
#[derive(Debug, Clone)]
pub struct TransversalField {
    face: FacePatch,
    field: SmoothField,
}

const VALIDATION_ORDER: usize = 6;

impl TransversalField {
    /// Checks transversality at the face's Gauss nodes.
    pub fn new(face: &FacePatch, field: SmoothField) -> Result<Self> {
        let n = face.ambient_dim();
        if field.dim() != n - 1 || field.components() != n {
            return invalid(format!("transversal field must map R^{} into R^{n}", n - 1));
        }
        let t = TransversalField {
            face: face.clone(),
            field,
        };
        let rule = QuadratureRule::new(VALIDATION_ORDER)?;
        for (y, _) in face.nodes(&rule) {
            let (xs, jac) = frame(face, &y, 0)?;
            let mut m = jac
                .iter()
                .map(|r| r.iter().map(|s| s.value()).collect::<Vec<_>>())
                .collect::<Vec<_>>();
            let nv = t.field.value(&y)?;
            for (row, v) in m.iter_mut().zip(&nv) {
                row.push(*v);
            }
            let scale = m
                .iter()
                .flatten()
                .fold(0.0f64, |a, v| a.max(v.abs()))
                .max(1.0);
            if det(&m, &0.0).abs() <= 1e-12 * scale.powi(n as i32) {
                return invalid(format!(
                    "transversal field is tangent to face {} at {:?}",
                    face.id(),
                    xs.iter().map(|s| s.value()).collect::<Vec<_>>()
                ));
            }
        }
        Ok(t)
    }

    /// The constant coordinate vector `d/dx^axis`.
    pub fn coordinate(face: &FacePatch, axis: usize) -> Result<Self> {
        let n = face.ambient_dim();
        if axis >= n {
            return invalid(format!("axis {axis} out of range"));
        }
        let mut v = vec![0.0; n];
        v[axis] = 1.0;
        Self::new(face, SmoothField::constant(n - 1, v))
    }

    /// Unit normal for the metric `g` (chart field with `g_ij` at `i * n + j`).
    pub fn metric_normal(face: &FacePatch, metric: &SmoothField) -> Result<Self> {
        let n = face.ambient_dim();
        if metric.dim() != n || metric.components() != n * n {
            return invalid("metric needs n * n components on the chart");
        }
        let (fc, g) = (face.clone(), metric.clone());
        let field = SmoothField::from_fn(n - 1, n, move |p, k| {
            let (xs, jac) = frame(&fc, p, k)?;
            let nu = annihilator(&jac, &xs[0]);
            let gv = g.compose(&xs)?;
            let gm: Vec<Vec<TruncatedSeries>> =
                (0..n).map(|i| gv[i * n..(i + 1) * n].to_vec()).collect();
            let ginv = inverse(&gm, 1e-14)?;
            let raised: Vec<TruncatedSeries> = (0..n)
                .map(|i| dot(&ginv[i], &nu, &xs[0]))
                .collect::<Result<_>>()?;
            let norm = dot(&raised, &nu, &xs[0])?.sqrt()?;
            raised.iter().map(|r| r.try_div(&norm)).collect()
        });
        Self::new(face, field)
    }

    /// Euclidean unit normal.
    pub fn euclidean_normal(face: &FacePatch) -> Result<Self> {
        let n = face.ambient_dim();
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        Self::metric_normal(face, &SmoothField::constant(n, id))
    }

    pub fn face(&self) -> &FacePatch {
        &self.face
    }

    pub fn field(&self) -> &SmoothField {
        &self.field
    }

    /// Series of `M^-1` for `M = [e_1, ..., e_(n-1), N]`; the last row is `phi`.
    fn inverse_frame(&self, y: &[f64], k: usize) -> Result<Vec<Vec<TruncatedSeries>>> {
        let (_, jac) = frame(&self.face, y, k)?;
        let nv = self.field.taylor(y, k)?;
        let m: Vec<Vec<TruncatedSeries>> = jac
            .into_iter()
            .zip(nv)
            .map(|(mut row, v)| {
                row.push(v);
                row
            })
            .collect();
        inverse(&m, 1e-14)
    }

    /// `phi` with `phi(e_a) = 0` and `phi(N) = 1` at `y`.
    pub fn phi(&self, y: &[f64]) -> Result<Vec<f64>> {
        let inv = self.inverse_frame(y, 0)?;
        Ok(inv[inv.len() - 1].iter().map(|s| s.value()).collect())
    }

    /// Splits a chart vector `v` at `y` as `sum_a c_a e_a + c_N N`; returns
    /// `(c_1..c_(n-1), c_N)`.
    pub fn split_vector(&self, y: &[f64], v: &[f64]) -> Result<(Vec<f64>, f64)> {
        let inv = self.inverse_frame(y, 0)?;
        let n = inv.len();
        if v.len() != n {
            return invalid("vector dimension does not match the chart");
        }
        let c: Vec<f64> = inv
            .iter()
            .map(|r| r.iter().zip(v).map(|(a, b)| a.value() * b).sum())
            .collect();
        Ok((c[..n - 1].to_vec(), c[n - 1]))
    }
}

/// Tangent part `Ybar^a` (at `alpha * (n-1) + a`) and normal part
/// `Z^1i phi_i` (at `alpha`) of the first-order slot of `Z`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub tangent: SmoothField,
    pub normal: SmoothField,
}

fn check_face(z: &RestrictedSurfaceStress, t: &TransversalField) -> Result<()> {
    if z.face.id() != t.face.id() || z.ambient_dim() != t.face.ambient_dim() {
        return invalid(format!(
            "transversal field belongs to face {}, not {}",
            t.face.id(),
            z.face.id()
        ));
    }
    Ok(())
}

pub fn transversal_decomposition(
    z: &RestrictedSurfaceStress,
    t: &TransversalField,
) -> Result<Decomposition> {
    check_face(z, t)?;
    let (n, d) = (z.ambient_dim(), z.fiber_dim());
    let m = n - 1;
    let split = |rows: std::ops::Range<usize>, comps: usize| {
        let (z1, t) = (z.z1.clone(), t.clone());
        SmoothField::from_fn(m, comps, move |p, k| {
            let inv = t.inverse_frame(p, k)?;
            let v = z1.taylor(p, k)?;
            let mut out = Vec::with_capacity(comps);
            for alpha in 0..d {
                for r in rows.clone() {
                    out.push(dot(&inv[r], &v[alpha * n..(alpha + 1) * n], &v[0])?);
                }
            }
            Ok(out)
        })
    };
    Ok(Decomposition {
        tangent: split(0..m, d * m),
        normal: split(m..n, d),
    })
}

/// `proj_1` applied to `Z`: `Z^1` replaced by `sum_a Ybar^a e_a`.
pub fn tangent_part(
    z: &RestrictedSurfaceStress,
    t: &TransversalField,
) -> Result<RestrictedSurfaceStress> {
    let dec = transversal_decomposition(z, t)?;
    let (n, d) = (z.ambient_dim(), z.fiber_dim());
    let m = n - 1;
    let (bar, face) = (dec.tangent, z.face.clone());
    let z1 = SmoothField::from_fn(m, d * n, move |p, k| {
        let (_, jac) = frame(&face, p, k)?;
        let b = bar.taylor(p, k)?;
        let mut out = Vec::with_capacity(d * n);
        for alpha in 0..d {
            for row in &jac {
                out.push(dot(row, &b[alpha * m..(alpha + 1) * m], &b[0])?);
            }
        }
        Ok(out)
    });
    Ok(RestrictedSurfaceStress {
        face: z.face.clone(),
        z0: z.z0.clone(),
        z1,
    })
}

/// `tau_V(Y) = sum_a (-1)^(a-1) Ybar^a dy(omit a)`, a traction stress on the
/// face parameters.
pub fn tangent_traction(y: &HyperSurfaceStress, t: &TransversalField) -> Result<TractionStress> {
    if y.base_dim() < 2 {
        return invalid("tangent tractions need n >= 2");
    }
    let z = restrict_y(y, &t.face)?;
    let dec = transversal_decomposition(&z, t)?;
    let stress = VariationalStress1::new(
        SmoothField::zero(y.base_dim() - 1, y.fiber_dim()),
        dec.tangent,
    )?;
    Ok(traction_projection(&stress))
}

/// `div_V Y (j^1 u)` from the local representation
/// `Ybar^a_,a u - Z^0 u - (Z^1 . phi)(N . grad u)`, a top form on the face
/// parameters.
pub fn surface_divergence(
    y: &HyperSurfaceStress,
    t: &TransversalField,
    u: &SmoothField,
) -> Result<FnForm> {
    let (n, d) = (y.base_dim(), y.fiber_dim());
    if u.dim() != n || u.components() != d {
        return invalid("velocity shape does not match the stress");
    }
    let m = n - 1;
    let z = restrict_y(y, &t.face)?;
    let dec = transversal_decomposition(&z, t)?;
    let (bar, normal, z0, nf) = (dec.tangent, dec.normal, z.z0.clone(), t.field.clone());
    let u_face = u.pullback(t.face.map())?;
    let grad_face = u.gradient().pullback(t.face.map())?;
    Ok(FnForm::new(m, m, move |p, k| {
        let b = bar.taylor(p, k + 1)?;
        let (c, a) = (normal.taylor(p, k)?, z0.taylor(p, k)?);
        let (w, g, nv) = (
            u_face.taylor(p, k)?,
            grad_face.taylor(p, k)?,
            nf.taylor(p, k)?,
        );
        let like = TruncatedSeries::zeros(m, k)?;
        let mut acc = like.clone();
        for alpha in 0..d {
            let mut div = a[alpha].scale(-1.0);
            for r in 0..m {
                div = div.try_add(&b[alpha * m + r].differentiate(r)?)?;
            }
            acc = acc.try_add(&div.try_mul(&w[alpha])?)?;
            let dn = dot(&g[alpha * n..(alpha + 1) * n], &nv, &like)?;
            acc = acc.try_sub(&c[alpha].try_mul(&dn)?)?;
        }
        let mut out = SeriesForm::zero(m, m, &like)?;
        out.add(&(0..m).collect::<Vec<_>>(), &acc)?;
        Ok(out)
    }))
}

/// `d(tau_V(Y)(u)) - Z(j^1 u)`, the defining relation of the surface
/// divergence.
pub fn surface_divergence_defining(
    y: &HyperSurfaceStress,
    t: &TransversalField,
    u: &SmoothField,
) -> Result<FnForm> {
    let m = y.base_dim() - 1;
    let tau = Arc::new(tangent_traction(y, t)?.applied(&u.pullback(t.face.map())?)?);
    let z = Arc::new(restrict_y(y, &t.face)?.applied_holonomic(u)?);
    Ok(FnForm::new(m, m, move |p, k| {
        let dt = tau.series_at(p, k + 1)?.exterior_derivative()?;
        let zz = z.series_at(p, k)?;
        let tuple: Vec<usize> = (0..m).collect();
        let mut out = SeriesForm::zero(m, m, &dt.get(&tuple))?;
        out.add(&tuple, &dt.get(&tuple).try_sub(&zz.get(&tuple))?)?;
        Ok(out)
    }))
}

/// A tangent surface stress viewed as an order-one stress on the face
/// parameter box, with its traction (the edge force on the face boundary)
/// and its divergence.
#[derive(Debug, Clone)]
pub struct EdgeForce {
    pub stress: VariationalStress1,
    pub traction: TractionStress,
    pub divergence: SmoothField,
    pub body: Body,
}

/// Requires `Z` tangent within `tol` at the face's Gauss nodes.
pub fn tangent_edge_force(z: &RestrictedSurfaceStress, tol: f64) -> Result<EdgeForce> {
    let rule = QuadratureRule::new(VALIDATION_ORDER)?;
    let nodes: Vec<Vec<f64>> = z.face.nodes(&rule).into_iter().map(|(y, _)| y).collect();
    if !is_tangent(z, &nodes, tol)? {
        return invalid(format!(
            "surface stress on face {} is not tangent",
            z.face.id()
        ));
    }
    let t = TransversalField::euclidean_normal(&z.face)?;
    let dec = transversal_decomposition(z, &t)?;
    let stress = VariationalStress1::new(z.z0.clone(), dec.tangent)?;
    let m = z.ambient_dim() - 1;
    let body = Body::new(
        Chart::unbounded(m),
        z.face.lower().to_vec(),
        z.face.upper().to_vec(),
        None,
    )?;
    Ok(EdgeForce {
        traction: traction_projection(&stress),
        divergence: divergence(&stress),
        stress,
        body,
    })
}
