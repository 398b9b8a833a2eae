use std::sync::Arc;

use super::formfield::{FormField, Pullback};
use super::linalg::det;
use super::quadrature::QuadratureRule;
use crate::error::{invalid, Result};
use crate::jetcore::{SmoothField, TruncatedSeries};

/// Coordinate domain `(lower, upper)` of a chart in `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Chart {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_box(&lower, &upper, "chart")?;
        Ok(Chart { lower, upper })
    }

    /// The whole of `R^n`.
    pub fn unbounded(n: usize) -> Self {
        Chart {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (a, b))| *v >= a - slack && *v <= b + slack)
    }
}

fn check_box(lower: &[f64], upper: &[f64], what: &str) -> Result<()> {
    if lower.len() != upper.len() {
        return invalid(format!("{what} bounds have different lengths"));
    }
    for (a, b) in lower.iter().zip(upper) {
        if a.is_nan() || b.is_nan() || a >= b {
            return invalid(format!(
                "{what} needs lower < upper on every axis, got [{a}, {b}]"
            ));
        }
    }
    Ok(())
}

/// Series of a map at `point` with its square jacobian determinant.
fn jacobian_det(map: &SmoothField, point: &[f64]) -> Result<f64> {
    let x = map.taylor(point, 1)?;
    let jac: Vec<Vec<f64>> = x
        .iter()
        .map(|s| {
            (0..map.dim())
                .map(|a| s.differentiate(a).map(|d| d.value()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(det(&jac, &0.0))
}

/// Compact region given as the image of a reference box under an optional
/// patch map into the chart.
#[derive(Debug, Clone)]
pub struct Body {
    chart: Chart,
    lower: Vec<f64>,
    upper: Vec<f64>,
    patch: Option<SmoothField>,
    param_sign: f64,
}

impl Body {
    /// Validates the box, and for a patch map checks on a probe grid that its
    /// jacobian determinant keeps one sign and that the image stays in the
    /// chart.
    pub fn new(
        chart: Chart,
        lower: Vec<f64>,
        upper: Vec<f64>,
        patch: Option<SmoothField>,
    ) -> Result<Self> {
        let n = chart.dim();
        check_box(&lower, &upper, "body box")?;
        if lower.len() != n {
            return invalid(format!(
                "body box has dimension {} but the chart has dimension {n}",
                lower.len()
            ));
        }
        let mut param_sign = 1.0;
        let probe = QuadratureRule::new(4)?;
        let mut corners = probe.box_nodes(&lower, &upper);
        corners.push((lower.clone(), 0.0));
        corners.push((upper.clone(), 0.0));
        if let Some(p) = &patch {
            if p.dim() != n || p.components() != n {
                return invalid(format!("patch map must go from R^{n} to R^{n}"));
            }
            let mut signs = Vec::new();
            for (xi, _) in &corners {
                let d = jacobian_det(p, xi)?;
                if d.abs() < 1e-12 {
                    return invalid("patch map jacobian is singular on the body box");
                }
                signs.push(d.signum());
            }
            if signs.iter().any(|s| *s != signs[0]) {
                return invalid("patch map jacobian changes sign on the body box");
            }
            param_sign = signs[0];
        }
        let body = Body {
            chart,
            lower,
            upper,
            patch,
            param_sign,
        };
        for (xi, _) in &corners {
            let x = body.map().value(xi)?;
            if !body.chart.contains(&x, 1e-12) {
                return invalid(format!("body point {x:?} lies outside the chart"));
            }
        }
        Ok(body)
    }

    /// The unit box `[0, 1]^n` in an unbounded chart.
    pub fn unit_box(n: usize) -> Self {
        Body {
            chart: Chart::unbounded(n),
            lower: vec![0.0; n],
            upper: vec![1.0; n],
            patch: None,
            param_sign: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Map from the reference box into the chart (identity without a patch).
    pub fn map(&self) -> SmoothField {
        self.patch
            .clone()
            .unwrap_or_else(|| SmoothField::identity(self.dim()))
    }

    /// `+1` when the patch map preserves orientation, `-1` otherwise.
    pub fn param_sign(&self) -> f64 {
        self.param_sign
    }

    /// Quadrature nodes mapped into the chart, with weights that include the
    /// absolute jacobian determinant, so that `sum w f(x)` approximates the
    /// integral of `f dx^1 ^ ... ^ dx^n` over the body.
    pub fn nodes(&self, rule: &QuadratureRule) -> Result<Vec<(Vec<f64>, f64)>> {
        let map = self.map();
        rule.box_nodes(&self.lower, &self.upper)
            .into_iter()
            .map(|(xi, w)| {
                let x = map.value(&xi)?;
                let jw = match &self.patch {
                    None => w,
                    Some(p) => w * jacobian_det(p, &xi)?.abs(),
                };
                Ok((x, jw))
            })
            .collect()
    }

    /// Integral over the body of an `n`-form on the chart.
    pub fn integrate(&self, form: Arc<dyn FormField>, rule: &QuadratureRule) -> Result<f64> {
        if form.degree() != self.dim() || form.dim() != self.dim() {
            return invalid(format!(
                "cannot integrate a {}-form over a {}-dimensional body",
                form.degree(),
                self.dim()
            ));
        }
        let pulled = Pullback::new(form, self.map())?;
        integrate_box(&pulled, &self.lower, &self.upper, self.param_sign, rule)
    }

    /// The `2n` boundary faces with their induced orientations.
    pub fn faces(&self) -> Vec<FacePatch> {
        let n = self.dim();
        let mut out = Vec::with_capacity(2 * n);
        for axis in 0..n {
            for upper in [false, true] {
                let fixed = if upper {
                    self.upper[axis]
                } else {
                    self.lower[axis]
                };
                let axis_sign = if axis % 2 == 0 { 1.0 } else { -1.0 };
                let side_sign = if upper { 1.0 } else { -1.0 };
                let keep: Vec<usize> = (0..n).filter(|&a| a != axis).collect();
                let plo = keep.iter().map(|&a| self.lower[a]).collect();
                let pup = keep.iter().map(|&a| self.upper[a]).collect();
                let patch = self.patch.clone();
                let map = SmoothField::from_fn(n - 1, n, move |y, k| {
                    let xi = insert_coordinate(y, axis, fixed, k, n)?;
                    match &patch {
                        None => Ok(xi),
                        Some(p) => p.compose(&xi),
                    }
                });
                out.push(FacePatch {
                    id: face_id(axis, upper),
                    ambient: n,
                    lower: plo,
                    upper: pup,
                    map,
                    orientation: self.param_sign * axis_sign * side_sign,
                    source: Some((axis, upper)),
                });
            }
        }
        out
    }

    /// The codimension-two edges, each with the two face sides that meet
    /// there. The sides of a pair share a parameterization.
    pub fn edges(&self) -> Vec<Edge> {
        let faces = self.faces();
        let mut edges: Vec<Edge> = Vec::new();
        for (fi, face) in faces.iter().enumerate() {
            let (axis, upper) = face.source.expect("box faces know their axis");
            for side in face.sides() {
                let other_axis = face_param_axes(self.dim(), axis)[side.param_axis];
                let a = (axis, upper);
                let b = (other_axis, side.upper);
                let key = if a < b { (a, b) } else { (b, a) };
                let id = format!(
                    "{}/{}",
                    face_id(key.0 .0, key.0 .1),
                    face_id(key.1 .0, key.1 .1)
                );
                match edges.iter_mut().find(|e| e.id == id) {
                    Some(e) => e.sides.push((fi, side)),
                    None => edges.push(Edge {
                        id,
                        sides: vec![(fi, side)],
                    }),
                }
            }
        }
        edges
    }
}

fn face_id(axis: usize, upper: bool) -> String {
    format!("x{}{}", axis + 1, if upper { "+" } else { "-" })
}

fn face_param_axes(n: usize, axis: usize) -> Vec<usize> {
    (0..n).filter(|&a| a != axis).collect()
}

/// Coordinate series of the point obtained by inserting `fixed` at position
/// `axis` into the parameters `y`.
fn insert_coordinate(
    y: &[f64],
    axis: usize,
    fixed: f64,
    order: usize,
    n: usize,
) -> Result<Vec<TruncatedSeries>> {
    let mut vars = TruncatedSeries::variables(y, order)?;
    let like = match vars.first() {
        Some(v) => v.scale(0.0),
        None => TruncatedSeries::zeros(0, order)?,
    };
    vars.insert(axis, like.add_scalar(fixed));
    debug_assert_eq!(vars.len(), n);
    Ok(vars)
}

/// Oriented `(n-1)`-dimensional patch of a boundary, parameterized over a box.
#[derive(Debug, Clone)]
pub struct FacePatch {
    id: String,
    ambient: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    map: SmoothField,
    orientation: f64,
    source: Option<(usize, bool)>,
}

impl FacePatch {
    /// Custom patch, e.g. a closed curve. `orientation` is `+1` when the
    /// parameter order agrees with the induced boundary orientation.
    pub fn new(
        id: impl Into<String>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        map: SmoothField,
        orientation: f64,
    ) -> Result<Self> {
        check_box(&lower, &upper, "face parameter box")?;
        if map.dim() != lower.len() || map.components() != lower.len() + 1 {
            return invalid("face map must go from R^(n-1) to R^n");
        }
        if orientation != 1.0 && orientation != -1.0 {
            return invalid("face orientation must be +1 or -1");
        }
        Ok(FacePatch {
            id: id.into(),
            ambient: map.components(),
            lower,
            upper,
            map,
            orientation,
            source: None,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn param_dim(&self) -> usize {
        self.ambient - 1
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn map(&self) -> &SmoothField {
        &self.map
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    /// Fixed reference-box axis and side for faces of a box body.
    pub fn source(&self) -> Option<(usize, bool)> {
        self.source
    }

    pub fn nodes(&self, rule: &QuadratureRule) -> Vec<(Vec<f64>, f64)> {
        rule.box_nodes(&self.lower, &self.upper)
    }

    /// Integral over the oriented face of an `(n-1)`-form on the chart.
    pub fn integrate(&self, form: Arc<dyn FormField>, rule: &QuadratureRule) -> Result<f64> {
        let pulled = restrict_form(form, self)?;
        integrate_box(&pulled, &self.lower, &self.upper, self.orientation, rule)
    }

    /// The `2(n-1)` sides of the parameter box with orientations induced from
    /// the oriented face.
    pub fn sides(&self) -> Vec<FaceSide> {
        let m = self.param_dim();
        let mut out = Vec::new();
        for a in 0..m {
            for upper in [false, true] {
                let fixed = if upper { self.upper[a] } else { self.lower[a] };
                let axis_sign = if a % 2 == 0 { 1.0 } else { -1.0 };
                let side_sign = if upper { 1.0 } else { -1.0 };
                let embed = SmoothField::from_fn(m - 1, m, move |s, k| {
                    insert_coordinate(s, a, fixed, k, m)
                });
                out.push(FaceSide {
                    param_axis: a,
                    upper,
                    lower: face_param_axes(m, a)
                        .iter()
                        .map(|&b| self.lower[b])
                        .collect(),
                    upper_bounds: face_param_axes(m, a)
                        .iter()
                        .map(|&b| self.upper[b])
                        .collect(),
                    embed,
                    orientation: self.orientation * axis_sign * side_sign,
                });
            }
        }
        out
    }
}

/// One side of a face parameter box.
#[derive(Debug, Clone)]
pub struct FaceSide {
    pub param_axis: usize,
    pub upper: bool,
    pub lower: Vec<f64>,
    pub upper_bounds: Vec<f64>,
    /// Map from the side parameters into the face parameters.
    pub embed: SmoothField,
    /// Induced orientation relative to the side parameter order.
    pub orientation: f64,
}

impl FaceSide {
    /// Integral over the oriented side of an `(n-2)`-form on the face
    /// parameter box.
    pub fn integrate(&self, form: Arc<dyn FormField>, rule: &QuadratureRule) -> Result<f64> {
        let pulled = Pullback::new(form, self.embed.clone())?;
        integrate_box(
            &pulled,
            &self.lower,
            &self.upper_bounds,
            self.orientation,
            rule,
        )
    }
}

/// Codimension-two edge shared by two faces: `(face index, side)` pairs.
#[derive(Debug, Clone)]
pub struct Edge {
    pub id: String,
    pub sides: Vec<(usize, FaceSide)>,
}

/// Pullback of a chart form to the face parameters.
pub fn restrict_form(form: Arc<dyn FormField>, face: &FacePatch) -> Result<Pullback> {
    if form.dim() != face.ambient_dim() || form.degree() != face.param_dim() {
        return invalid(format!(
            "cannot restrict a {}-form on R^{} to a face of R^{}",
            form.degree(),
            form.dim(),
            face.ambient_dim()
        ));
    }
    Pullback::new(form, face.map.clone())
}

/// `sign * sum w f` over the tensor nodes of a box, for a top-degree form on
/// the box coordinates.
pub fn integrate_box(
    form: &dyn FormField,
    lower: &[f64],
    upper: &[f64],
    sign: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    if form.degree() != form.dim() || form.dim() != lower.len() {
        return invalid(format!(
            "integrand must be a top-degree form on R^{}, got a {}-form on R^{}",
            lower.len(),
            form.degree(),
            form.dim()
        ));
    }
    let top: Vec<usize> = (0..lower.len()).collect();
    let mut acc = 0.0;
    for (y, w) in rule.box_nodes(lower, upper) {
        acc += w * form.value_at(&y)?.get(&top);
    }
    Ok(sign * acc)
}
