//! Scenario files: schema, construction of the library objects, check
//! execution, reports and the random scenario generator.

mod checks;
mod generate;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bundles::JetSection1;
use crate::covariance::FrameChange;
use crate::error::{Error, Result};
use crate::geometry::{Body, Chart, FacePatch, QuadratureRule, TransitionMap};
use crate::jetcore::{Component, Expr, MultiIndex, Polynomial, SmoothField};
use crate::nonholonomic::{NonHolonomicStress, VariationalStress2};
use crate::stress::VariationalStress1;
use crate::surface::TransversalField;

pub use checks::{run_check, CheckId};
pub use generate::generate_scenario;
pub use report::{digest, CheckRecord, RunReport};

pub const SCHEMA: &str = "hyperstress-scenario/1";

/// Bundled scenarios by name.
pub const BUNDLED: &[(&str, &str)] = &[
    (
        "square-order1",
        include_str!("../../scenarios/square-order1.toml"),
    ),
    (
        "cube-order1",
        include_str!("../../scenarios/cube-order1.toml"),
    ),
    (
        "square-order2",
        include_str!("../../scenarios/square-order2.toml"),
    ),
    (
        "symmetric-contraction",
        include_str!("../../scenarios/symmetric-contraction.toml"),
    ),
    (
        "disk-closed",
        include_str!("../../scenarios/disk-closed.toml"),
    ),
    (
        "torus-closed",
        include_str!("../../scenarios/torus-closed.toml"),
    ),
    (
        "shear-covariance",
        include_str!("../../scenarios/shear-covariance.toml"),
    ),
];

/// One field component: an expression in `x1..xn`, a number, or explicit
/// monomials `[[exponents], coefficient]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentSpec {
    Number(f64),
    Expr(String),
    Monomials { monomials: Vec<(Vec<u32>, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxBlock {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TransversalSpec {
    /// `"coordinate"` or `"normal"`
    Kind(String),
    Metric {
        metric: Vec<ComponentSpec>,
    },
    /// Face id to the `n` components of `N` in the face parameters.
    PerFace(BTreeMap<String, Vec<ComponentSpec>>),
}

fn default_quad_order() -> usize {
    6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryBlock {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<BoxBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<BoxBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<Vec<ComponentSpec>>,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transversal: Option<TransversalSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleBlock {
    pub d: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Order1Block {
    pub s0: Vec<ComponentSpec>,
    pub s1: Vec<ComponentSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Order2Block {
    pub s0: Vec<ComponentSpec>,
    pub s1: Vec<ComponentSpec>,
    pub s2: Vec<ComponentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonHolonomicBlock {
    pub x0: Vec<ComponentSpec>,
    pub x1: Vec<ComponentSpec>,
    pub x2: Vec<ComponentSpec>,
    pub x3: Vec<ComponentSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StressBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order1: Option<Order1Block>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order2: Option<Order2Block>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonholonomic: Option<NonHolonomicBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityBlock {
    pub u: Vec<ComponentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<Vec<ComponentSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<Vec<ComponentSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceBlock {
    pub forward: Vec<ComponentSpec>,
    pub inverse: Vec<ComponentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Vec<ComponentSpec>>,
    pub points: Vec<Vec<f64>>,
}

fn default_closed_order() -> usize {
    40
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedBoundaryBlock {
    pub map: Vec<ComponentSpec>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default = "default_closed_order")]
    pub quad_order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub balance: f64,
    pub pointwise: f64,
    pub algebraic: f64,
    pub balance2: f64,
    pub jet: f64,
    pub lambda: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            balance: 1e-10,
            pointwise: 1e-11,
            algebraic: 1e-14,
            balance2: 1e-9,
            jet: 1e-6,
            lambda: 1e-13,
        }
    }
}

impl Tolerances {
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(config(
                format!("tolerances.{key}"),
                "tolerance must be finite and non-negative",
            ));
        }
        let slot = match key {
            "balance" => &mut self.balance,
            "pointwise" => &mut self.pointwise,
            "algebraic" => &mut self.algebraic,
            "balance2" => &mut self.balance2,
            "jet" => &mut self.jet,
            "lambda" => &mut self.lambda,
            _ => return Err(config(format!("tolerances.{key}"), "unknown tolerance key")),
        };
        *slot = value;
        Ok(())
    }
}

/// Scenario file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<String>>,
    pub geometry: GeometryBlock,
    pub bundle: BundleBlock,
    #[serde(default)]
    pub stress: StressBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<VelocityBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariance: Option<CovarianceBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_boundary: Option<ClosedBoundaryBlock>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn config(key: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let field = msg
                .find("field `")
                .and_then(|i| msg[i + 7..].split('`').next());
            let key = match (field, e.span()) {
                (Some(f), _) => f.to_string(),
                (None, Some(span)) => {
                    format!("line {}", text[..span.start].matches('\n').count() + 1)
                }
                (None, None) => "<document>".to_string(),
            };
            config(key, msg)
        })?;
        if s.schema != SCHEMA {
            return Err(config(
                "schema",
                format!("expected \"{SCHEMA}\", got \"{}\"", s.schema),
            ));
        }
        Ok(s)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config("<document>", e.to_string()))
    }
}

/// Run-time options that override scenario values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub quad_order: Option<usize>,
    pub tolerances: Vec<(String, f64)>,
}

impl Overrides {
    /// Canonical text folded into the report digest.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        if let Some(q) = self.quad_order {
            out.push_str(&format!("quad_order={q};"));
        }
        for (k, v) in &self.tolerances {
            out.push_str(&format!("{k}={v:e};"));
        }
        out
    }
}

/// Library objects built from a scenario.
#[derive(Debug, Clone)]
pub struct Built {
    pub name: String,
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    pub body: Body,
    pub rule: QuadratureRule,
    pub transversals: Vec<TransversalField>,
    pub order1: Option<VariationalStress1>,
    pub order2: Option<VariationalStress2>,
    pub lambda: f64,
    pub nonholonomic: Option<NonHolonomicStress>,
    pub u: Option<SmoothField>,
    pub section: Option<JetSection1>,
    pub covariance: Option<(FrameChange, Vec<Vec<f64>>)>,
    pub closed: Option<(FacePatch, QuadratureRule)>,
    pub tolerances: Tolerances,
    pub requested: Option<Vec<String>>,
}

fn component(spec: &ComponentSpec, dim: usize, key: &str) -> Result<Component> {
    match spec {
        ComponentSpec::Number(c) => Ok(Component::Poly(Polynomial::constant(dim, *c))),
        ComponentSpec::Expr(src) => {
            let e = Expr::parse(src).map_err(|e| config(key, e.to_string()))?;
            if e.arity() > dim {
                return Err(config(
                    key,
                    format!("`{src}` uses x{} on R^{dim}", e.arity()),
                ));
            }
            Ok(Component::Expr(e))
        }
        ComponentSpec::Monomials { monomials } => {
            let mut terms = Vec::with_capacity(monomials.len());
            for (exps, c) in monomials {
                if exps.len() != dim {
                    return Err(config(
                        key,
                        format!("monomial {exps:?} needs {dim} exponents"),
                    ));
                }
                terms.push((MultiIndex::new(exps.clone()), *c));
            }
            Ok(Component::Poly(
                Polynomial::new(dim, terms).map_err(|e| config(key, e.to_string()))?,
            ))
        }
    }
}

/// A field on `R^dim` with exactly `count` components.
fn field(specs: &[ComponentSpec], dim: usize, count: usize, key: &str) -> Result<SmoothField> {
    if specs.len() != count {
        return Err(config(
            key,
            format!("expected {count} components, got {}", specs.len()),
        ));
    }
    let comps = specs
        .iter()
        .enumerate()
        .map(|(i, s)| component(s, dim, &format!("{key}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    SmoothField::from_components(dim, comps).map_err(|e| config(key, e.to_string()))
}

fn boxed(
    b: &Option<BoxBlock>,
    n: usize,
    key: &str,
    default: (f64, f64),
) -> Result<(Vec<f64>, Vec<f64>)> {
    match b {
        None => Ok((vec![default.0; n], vec![default.1; n])),
        Some(b) => {
            if b.lower.len() != n || b.upper.len() != n {
                return Err(config(
                    format!("{key}.lower"),
                    format!(
                        "bounds need {n} entries to match geometry.n, got {} and {}",
                        b.lower.len(),
                        b.upper.len()
                    ),
                ));
            }
            if !b.lower.iter().zip(&b.upper).all(|(a, c)| a < c) {
                return Err(config(
                    format!("{key}.upper"),
                    "every upper bound must exceed its lower bound",
                ));
            }
            Ok((b.lower.clone(), b.upper.clone()))
        }
    }
}

fn with_key<T>(r: Result<T>, key: &str) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config { .. } => e,
        other => config(key, other.to_string()),
    })
}

impl Scenario {
    pub fn build(&self, overrides: &Overrides) -> Result<Built> {
        let g = &self.geometry;
        let (n, d) = (g.n, self.bundle.d);
        if !(2..=4).contains(&n) {
            return Err(config(
                "geometry.n",
                format!("dimension {n} is not supported (2..=4)"),
            ));
        }
        if d == 0 {
            return Err(config("bundle.d", "fiber dimension must be positive"));
        }
        let mut tolerances = self.tolerances;
        for (k, v) in &overrides.tolerances {
            tolerances.set(k, *v)?;
        }
        let quad = overrides.quad_order.unwrap_or(g.quad_order);
        let rule = with_key(QuadratureRule::new(quad), "geometry.quad_order")?;
        let chart = match &g.chart {
            None => Chart::unbounded(n),
            Some(_) => {
                let (lo, hi) = boxed(&g.chart, n, "geometry.chart", (0.0, 1.0))?;
                with_key(Chart::new(lo, hi), "geometry.chart")?
            }
        };
        let (lo, hi) = boxed(&g.body, n, "geometry.body", (0.0, 1.0))?;
        let patch = match &g.patch {
            None => None,
            Some(p) => Some(field(p, n, n, "geometry.patch")?),
        };
        let body = with_key(Body::new(chart, lo, hi, patch), "geometry.body")?;
        let transversals = self.transversals(&body, n)?;

        let st = &self.stress;
        let order1 = match &st.order1 {
            None => None,
            Some(b) => Some(with_key(
                VariationalStress1::new(
                    field(&b.s0, n, d, "stress.order1.s0")?,
                    field(&b.s1, n, d * n, "stress.order1.s1")?,
                ),
                "stress.order1",
            )?),
        };
        let mut lambda = 1.0;
        let order2 = match &st.order2 {
            None => None,
            Some(b) => {
                if let Some(l) = b.lambda {
                    if !(0.0..=1.0).contains(&l) {
                        return Err(config(
                            "stress.order2.lambda",
                            format!("split {l} must lie in [0, 1]"),
                        ));
                    }
                    lambda = l;
                }
                Some(with_key(
                    VariationalStress2::new(
                        field(&b.s0, n, d, "stress.order2.s0")?,
                        field(&b.s1, n, d * n, "stress.order2.s1")?,
                        field(&b.s2, n, d * n * n, "stress.order2.s2")?,
                    ),
                    "stress.order2",
                )?)
            }
        };
        let nonholonomic = match &st.nonholonomic {
            None => None,
            Some(b) => Some(with_key(
                NonHolonomicStress::new(
                    field(&b.x0, n, d, "stress.nonholonomic.x0")?,
                    field(&b.x1, n, d * n, "stress.nonholonomic.x1")?,
                    field(&b.x2, n, d * n, "stress.nonholonomic.x2")?,
                    field(&b.x3, n, d * n * n, "stress.nonholonomic.x3")?,
                ),
                "stress.nonholonomic",
            )?),
        };

        let (u, section) = match &self.velocity {
            None => (None, None),
            Some(v) => {
                let u = field(&v.u, n, d, "velocity.u")?;
                let section = match (&v.a0, &v.a1) {
                    (None, None) => JetSection1::holonomic(&u),
                    (Some(a0), Some(a1)) => with_key(
                        JetSection1::new(
                            field(a0, n, d, "velocity.a0")?,
                            field(a1, n, d * n, "velocity.a1")?,
                        ),
                        "velocity",
                    )?,
                    (None, Some(_)) => return Err(config("velocity.a0", "a1 given without a0")),
                    (Some(_), None) => return Err(config("velocity.a1", "a0 given without a1")),
                };
                (Some(u), Some(section))
            }
        };

        let covariance = match &self.covariance {
            None => None,
            Some(c) => {
                for (i, p) in c.points.iter().enumerate() {
                    if p.len() != n {
                        return Err(config(
                            format!("covariance.points[{i}]"),
                            format!("point needs {n} coordinates"),
                        ));
                    }
                }
                let t = with_key(
                    TransitionMap::new(
                        field(&c.forward, n, n, "covariance.forward")?,
                        field(&c.inverse, n, n, "covariance.inverse")?,
                        &c.points,
                    ),
                    "covariance.inverse",
                )?;
                let frame = match &c.frame {
                    Some(f) => field(f, n, d * d, "covariance.frame")?,
                    None => FrameChange::identity(n, d).a,
                };
                Some((
                    with_key(FrameChange::new(t, frame, &c.points), "covariance.frame")?,
                    c.points.clone(),
                ))
            }
        };

        let closed = match &self.closed_boundary {
            None => None,
            Some(c) => {
                if n < 2 || c.lower.len() != n - 1 || c.upper.len() != n - 1 {
                    return Err(config(
                        "closed_boundary.lower",
                        format!("closed boundary needs {} parameters", n.saturating_sub(1)),
                    ));
                }
                let map = field(&c.map, n - 1, n, "closed_boundary.map")?;
                let face = with_key(
                    FacePatch::new("closed", c.lower.clone(), c.upper.clone(), map, 1.0),
                    "closed_boundary",
                )?;
                let r = with_key(
                    QuadratureRule::new(c.quad_order),
                    "closed_boundary.quad_order",
                )?;
                Some((face, r))
            }
        };

        Ok(Built {
            name: self.name.clone(),
            seed: self.seed,
            n,
            d,
            body,
            rule,
            transversals,
            order1,
            order2,
            lambda,
            nonholonomic,
            u,
            section,
            covariance,
            closed,
            tolerances,
            requested: self.checks.clone(),
        })
    }

    fn transversals(&self, body: &Body, n: usize) -> Result<Vec<TransversalField>> {
        let key = "geometry.transversal";
        let faces = body.faces();
        let coordinate = || -> Result<Vec<TransversalField>> {
            faces
                .iter()
                .map(|f| {
                    with_key(
                        TransversalField::coordinate(f, f.source().expect("box face").0),
                        key,
                    )
                })
                .collect()
        };
        match &self.geometry.transversal {
            None => coordinate(),
            Some(TransversalSpec::Kind(k)) if k == "coordinate" => coordinate(),
            Some(TransversalSpec::Kind(k)) if k == "normal" => faces
                .iter()
                .map(|f| with_key(TransversalField::euclidean_normal(f), key))
                .collect(),
            Some(TransversalSpec::Kind(k)) => {
                Err(config(key, format!("unknown transversal kind \"{k}\"")))
            }
            Some(TransversalSpec::Metric { metric }) => {
                let g = field(metric, n, n * n, "geometry.transversal.metric")?;
                faces
                    .iter()
                    .map(|f| with_key(TransversalField::metric_normal(f, &g), key))
                    .collect()
            }
            Some(TransversalSpec::PerFace(map)) => {
                if let Some(bad) = map
                    .keys()
                    .find(|k| !faces.iter().any(|f| f.id() == k.as_str()))
                {
                    return Err(config(format!("{key}.{bad}"), "no such face"));
                }
                faces
                    .iter()
                    .map(|f| {
                        let fkey = format!("{key}.{}", f.id());
                        let spec = map
                            .get(f.id())
                            .ok_or_else(|| config(&fkey, "missing transversal field"))?;
                        with_key(
                            TransversalField::new(f, field(spec, n - 1, n, &fkey)?),
                            &fkey,
                        )
                    })
                    .collect()
            }
        }
    }
}

/// Scenario text by bundled name or file path.
pub fn load_text(name_or_path: &str) -> Result<String> {
    if let Some((_, text)) = BUNDLED.iter().find(|(n, _)| *n == name_or_path) {
        return Ok(text.to_string());
    }
    std::fs::read_to_string(name_or_path)
        .map_err(|e| config("--scenario", format!("cannot read {name_or_path}: {e}")))
}

/// Parses, builds and runs the selected checks (all applicable ones when
/// `checks` is empty or contains `all`).
pub fn run_scenario(text: &str, checks: &[String], overrides: &Overrides) -> Result<RunReport> {
    let scenario = Scenario::parse(text)?;
    let built = scenario.build(overrides)?;
    let explicit: Vec<String> = if checks.is_empty() || checks.iter().any(|c| c == "all") {
        built.requested.clone().unwrap_or_default()
    } else {
        checks.to_vec()
    };
    let ids: Vec<CheckId> = if explicit.is_empty() {
        CheckId::ALL
            .iter()
            .copied()
            .filter(|c| c.applicable(&built))
            .collect()
    } else {
        let mut ids = Vec::new();
        for c in &explicit {
            let id = CheckId::parse(c)
                .ok_or_else(|| config("--check", format!("unknown check \"{c}\"")))?;
            if !id.applicable(&built) {
                return Err(config(
                    id.required_key(),
                    format!("check {} needs this block", id.as_str()),
                ));
            }
            ids.push(id);
        }
        ids
    };
    let mut records = ids
        .iter()
        .map(|id| run_check(*id, &built))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| a.id.cmp(&b.id));
    records.dedup_by(|a, b| a.id == b.id);
    let overall_pass = records.iter().all(|r| r.pass);
    Ok(RunReport {
        scenario: built.name,
        digest: digest(text, overrides),
        records,
        overall_pass,
    })
}
