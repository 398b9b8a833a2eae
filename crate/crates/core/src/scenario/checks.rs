use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Built, CheckRecord};
use crate::balance::{
    closed_boundary_term, first_integration_by_parts, holonomic_power, verify_balance_order2,
};
use crate::covariance::{extra_term_mismatch, invariance_check, Quantity};
use crate::error::Result;
use crate::geometry::{linalg::det, FormField, FormValue, QuadratureRule};
use crate::jetcore::{finite_difference_jet, jet_extension, JetValue, SmoothField};
use crate::nonholonomic::{
    lift_second_order, nh_divergence_density, nh_invariant_divergence, nh_traction,
    restrict_to_second_order, second_contraction_values, HyperSurfaceStress, NonHolonomicStress,
    VariationalStress2,
};
use crate::stress::{
    divergence, invariant_divergence, surface_force, traction_projection, verify_balance_order1,
};
use crate::surface::{surface_divergence, surface_divergence_defining, TransversalField};

const SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckId {
    Balance1,
    Balance2,
    Cauchy,
    Covariance,
    DivConsistency,
    JetOracle,
    LambdaInvariance,
    SecondContraction,
    StokesClosed,
}

impl CheckId {
    pub const ALL: [CheckId; 9] = [
        CheckId::Balance1,
        CheckId::Balance2,
        CheckId::Cauchy,
        CheckId::Covariance,
        CheckId::DivConsistency,
        CheckId::JetOracle,
        CheckId::LambdaInvariance,
        CheckId::SecondContraction,
        CheckId::StokesClosed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::Balance1 => "balance1",
            CheckId::Balance2 => "balance2",
            CheckId::Cauchy => "cauchy",
            CheckId::Covariance => "covariance",
            CheckId::DivConsistency => "div-consistency",
            CheckId::JetOracle => "jet-oracle",
            CheckId::LambdaInvariance => "lambda-invariance",
            CheckId::SecondContraction => "second-contraction",
            CheckId::StokesClosed => "stokes-closed",
        }
    }

    pub fn parse(s: &str) -> Option<CheckId> {
        CheckId::ALL.iter().copied().find(|c| c.as_str() == s)
    }

    /// Whether the scenario carries the blocks the check reads.
    pub fn applicable(self, b: &Built) -> bool {
        let u = b.u.is_some();
        match self {
            CheckId::Balance1 | CheckId::Cauchy => u && b.order1.is_some(),
            CheckId::Balance2 => u && has_second_order(b),
            CheckId::DivConsistency => u && (b.order1.is_some() || has_second_order(b)),
            CheckId::SecondContraction => b.nonholonomic.is_some() || b.order2.is_some(),
            CheckId::Covariance => u && b.covariance.is_some() && has_second_order(b),
            CheckId::StokesClosed => u && b.closed.is_some() && has_second_order(b),
            CheckId::LambdaInvariance => u && (b.nonholonomic.is_some() || b.order2.is_some()),
            CheckId::JetOracle => u,
        }
    }

    /// Key reported when an explicitly requested check is not applicable.
    pub fn required_key(self) -> &'static str {
        match self {
            CheckId::Balance1 | CheckId::Cauchy => "stress.order1",
            CheckId::Covariance => "covariance",
            CheckId::StokesClosed => "closed_boundary",
            CheckId::JetOracle => "velocity",
            _ => "stress.nonholonomic",
        }
    }
}

fn has_second_order(b: &Built) -> bool {
    b.order1.is_some() || b.order2.is_some() || b.nonholonomic.is_some()
}

/// Order-two stress of the scenario: given directly, restricted from the
/// non-holonomic stress, or the order-one stress viewed at order two.
fn stress2(b: &Built) -> Option<VariationalStress2> {
    if let Some(s) = &b.order2 {
        return Some(s.clone());
    }
    if let Some(x) = &b.nonholonomic {
        return Some(restrict_to_second_order(x));
    }
    b.order1.as_ref().map(VariationalStress2::from_order1)
}

fn nonholonomic(b: &Built) -> Result<Option<NonHolonomicStress>> {
    if let Some(x) = &b.nonholonomic {
        return Ok(Some(x.clone()));
    }
    match stress2(b) {
        Some(s) => Ok(Some(lift_second_order(&s, b.lambda)?)),
        None => Ok(None),
    }
}

/// Seeded points in the interior of the body.
pub(crate) fn sample_points(b: &Built) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(b.seed);
    let map = b.body.map();
    let (lo, hi) = (b.body.lower(), b.body.upper());
    (0..SAMPLES)
        .map(|_| {
            let p: Vec<f64> = lo
                .iter()
                .zip(hi)
                .map(|(a, c)| rng.gen_range(*a..*c))
                .collect();
            map.value(&p)
        })
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

struct Out {
    terms: BTreeMap<String, f64>,
}

impl Out {
    fn new() -> Self {
        Out {
            terms: BTreeMap::new(),
        }
    }

    fn put(&mut self, key: impl Into<String>, v: f64) {
        self.terms.insert(key.into(), v);
    }

    fn finish(self, id: CheckId, residual: f64, tolerance: f64) -> CheckRecord {
        CheckRecord {
            id: id.as_str().to_string(),
            terms: self.terms,
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

pub fn run_check(id: CheckId, b: &Built) -> Result<CheckRecord> {
    let tol = &b.tolerances;
    let mut out = Out::new();
    let u = b.u.as_ref();
    match id {
        CheckId::Balance1 => {
            let (s, u) = (
                b.order1.as_ref().expect("applicable"),
                u.expect("applicable"),
            );
            let r = verify_balance_order1(s, u, &b.body, &b.rule)?;
            out.put("lhs", r.lhs);
            out.put("interior", r.interior);
            out.put("boundary", r.boundary);
            for (f, v) in &r.faces {
                out.put(format!("face:{f}"), *v);
            }
            Ok(out.finish(id, r.relative, tol.balance))
        }
        CheckId::Balance2 => {
            let x = nonholonomic(b)?.expect("applicable");
            let u = u.expect("applicable");
            let r = verify_balance_order2(&x, u, &b.body, &b.transversals, &b.rule, tol.balance2)?;
            out.put("lhs", r.lhs);
            out.put("edge_sum", r.edge_sum);
            out.put("face_divergence_sum", r.face_divergence_sum);
            out.put("boundary_div_traction_sum", r.boundary_div_traction_sum);
            out.put("div_div", r.div_div);
            for (e, v) in &r.edges {
                out.put(format!("edge:{e}"), *v);
            }
            for (f, v) in &r.face_divergence {
                out.put(format!("face_divergence:{f}"), *v);
            }
            for (f, v) in &r.boundary_div_traction {
                out.put(format!("boundary_div_traction:{f}"), *v);
            }
            let section = b.section.as_ref().expect("velocity gives a section");
            let ibp = first_integration_by_parts(&x, section, &b.body, &b.rule)?;
            out.put("first_ibp_relative", ibp.relative);
            out.put("second_ibp_relative", r.relative);
            Ok(out.finish(id, r.relative.max(ibp.relative), tol.balance2))
        }
        CheckId::Cauchy => {
            let (s, u) = (
                b.order1.as_ref().expect("applicable"),
                u.expect("applicable"),
            );
            let sigma = traction_projection(s);
            let (n, d) = (s.base_dim(), s.fiber_dim());
            let top: Vec<usize> = (0..n - 1).collect();
            let mut worst = 0.0f64;
            for face in b.body.faces() {
                let force = surface_force(&sigma, &face)?.applied(u)?;
                let mut face_worst = 0.0f64;
                for (y, _) in face.nodes(&b.rule) {
                    let x = face.map().value(&y)?;
                    let jac: Vec<Vec<f64>> = face
                        .map()
                        .taylor(&y, 1)?
                        .iter()
                        .map(|c| {
                            (0..n - 1)
                                .map(|a| c.differentiate(a).map(|s| s.value()))
                                .collect()
                        })
                        .collect::<Result<_>>()?;
                    let (s1, uv) = (s.s1.value(&x)?, u.value(&x)?);
                    let mut direct = 0.0;
                    for j in 0..n {
                        let minor: Vec<Vec<f64>> = jac
                            .iter()
                            .enumerate()
                            .filter(|(r, _)| *r != j)
                            .map(|(_, row)| row.clone())
                            .collect();
                        let flux: f64 = (0..d).map(|al| s1[al * n + j] * uv[al]).sum();
                        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                        direct += sign * flux * det(&minor, &0.0);
                    }
                    let lib = force.value_at(&y)?.get(&top);
                    face_worst = face_worst.max((lib - direct).abs());
                }
                out.put(format!("face:{}", face.id()), face_worst);
                worst = worst.max(face_worst);
            }
            Ok(out.finish(id, worst, tol.pointwise))
        }
        CheckId::DivConsistency => {
            let u = u.expect("applicable");
            let points = sample_points(b)?;
            let mut worst = 0.0f64;
            if let Some(s) = &b.order1 {
                let div = divergence(s);
                let mut w = 0.0f64;
                for x in &points {
                    let local = dot(&div.value(x)?, &u.value(x)?);
                    w = w.max((invariant_divergence(s, u, x)? - local).abs());
                }
                out.put("order1", w);
                worst = worst.max(w);
            }
            if let Some(x) = nonholonomic(b)? {
                let a = b.section.as_ref().expect("velocity gives a section");
                let mut w = 0.0f64;
                for p in &points {
                    w = w.max(
                        (nh_invariant_divergence(&x, a, p)? - nh_divergence_density(&x, a, p)?)
                            .abs(),
                    );
                }
                out.put("nonholonomic", w);
                worst = worst.max(w);
                let y = nh_traction(&x);
                let mut w = 0.0f64;
                for t in &b.transversals {
                    w = w.max(surface_gap(&y, t, u, &b.rule)?);
                }
                out.put("surface", w);
                worst = worst.max(w);
            }
            Ok(out.finish(id, worst, tol.pointwise))
        }
        CheckId::SecondContraction => {
            let x3 = match (&b.nonholonomic, &b.order2) {
                (Some(x), _) => x.x3.clone(),
                (None, Some(s)) => s.s2().clone(),
                (None, None) => unreachable!("applicable"),
            };
            let n = b.n;
            let mut worst = 0.0f64;
            let mut symmetric = true;
            let mut sym_worst = 0.0f64;
            for p in sample_points(b)? {
                let v = x3.value(&p)?;
                let formula = second_contraction_values(&v, n)?;
                let routed = interior_route(&v, n)?;
                for (f, r) in formula.iter().zip(&routed) {
                    worst = worst.max(f.max_abs_diff(r)?);
                }
                let scale = v.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1.0);
                let asym = (0..v.len()).fold(0.0f64, |m, idx| {
                    let (al, i, j) = (idx / (n * n), (idx / n) % n, idx % n);
                    m.max((v[idx] - v[(al * n + j) * n + i]).abs())
                });
                if asym > tol.algebraic * scale {
                    symmetric = false;
                }
                sym_worst = sym_worst.max(formula.iter().fold(0.0f64, |m, f| m.max(f.max_abs())));
            }
            out.put("routes", worst);
            out.put("symmetric", if symmetric { 1.0 } else { 0.0 });
            out.put("contraction_max", sym_worst);
            let residual = if symmetric {
                worst.max(sym_worst)
            } else {
                worst
            };
            Ok(out.finish(id, residual, tol.algebraic))
        }
        CheckId::Covariance => {
            let (f, points) = b.covariance.as_ref().expect("applicable");
            let (s, u) = (stress2(b).expect("applicable"), u.expect("applicable"));
            let action = invariance_check(Quantity::Action, &s, f, u, points)?;
            let traction = invariance_check(Quantity::Traction, &s, f, u, points)?;
            let vertical = invariance_check(Quantity::VerticalContraction, &s, f, u, points)?;
            let naive = invariance_check(Quantity::NaiveContraction, &s, f, u, points)?;
            let mismatch = extra_term_mismatch(&s, f, points)?;
            out.put("action", action);
            out.put("traction", traction);
            out.put("vertical_contraction", vertical);
            out.put("naive_contraction", naive);
            out.put("extra_term_mismatch", mismatch);
            let residual = action.max(traction).max(vertical).max(mismatch);
            Ok(out.finish(id, residual, tol.pointwise))
        }
        CheckId::StokesClosed => {
            let (face, rule) = b.closed.as_ref().expect("applicable");
            let x = nonholonomic(b)?.expect("applicable");
            let t = TransversalField::euclidean_normal(face)?;
            let c = closed_boundary_term(&nh_traction(&x), u.expect("applicable"), &t, rule)?;
            out.put("exact_integral", c.exact_integral);
            out.put("side_sum", c.side_sum);
            Ok(out.finish(id, c.exact_integral.abs(), tol.balance))
        }
        CheckId::LambdaInvariance => {
            let s = stress2(b).expect("applicable");
            let u = u.expect("applicable");
            let mut powers = Vec::new();
            for lambda in [0.0, 0.5, 1.0] {
                let x = lift_second_order(&s, lambda)?;
                let p = holonomic_power(&x, u, &b.body, &b.rule)?;
                let r =
                    verify_balance_order2(&x, u, &b.body, &b.transversals, &b.rule, tol.balance2)?;
                out.put(format!("power:{lambda}"), p);
                out.put(format!("edge_sum:{lambda}"), r.edge_sum);
                out.put(
                    format!("face_divergence_sum:{lambda}"),
                    r.face_divergence_sum,
                );
                out.put(
                    format!("boundary_div_traction_sum:{lambda}"),
                    r.boundary_div_traction_sum,
                );
                powers.push(p);
            }
            let spread = powers
                .iter()
                .fold(0.0f64, |m, p| m.max((p - powers[0]).abs()));
            Ok(out.finish(id, spread, tol.lambda))
        }
        CheckId::JetOracle => {
            let u = u.expect("applicable");
            let mut first = 0.0f64;
            let mut second = 0.0f64;
            for x in sample_points(b)? {
                let exact = jet_extension(u, &x, 2)?;
                let fd = finite_difference_jet(u, &x, 2, 1e-4)?;
                first = first
                    .max(order_gap(&exact, &fd, 0))
                    .max(order_gap(&exact, &fd, 1));
                second = second.max(order_gap(&exact, &fd, 2));
            }
            out.put("order1", first);
            out.put("order2", second);
            Ok(out.finish(id, first.max(second), tol.jet))
        }
    }
}

fn order_gap(a: &JetValue, b: &JetValue, p: usize) -> f64 {
    max_abs_diff(a.array(p), b.array(p))
}

/// `sum_ij X^3ij d/dx^j _| (d/dx^i _| volume)` for every fiber index.
fn interior_route(x3: &[f64], n: usize) -> Result<Vec<FormValue>> {
    let d = x3.len() / (n * n);
    let vol = FormValue::volume(n);
    (0..d)
        .map(|alpha| {
            let mut acc = FormValue::zero(n, n - 2)?;
            for i in 0..n {
                let inner = vol.interior_axis(i)?;
                for j in 0..n {
                    acc =
                        acc.try_add(&inner.interior_axis(j)?.scale(x3[(alpha * n + i) * n + j]))?;
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Largest gap between the surface divergence and its defining relation
/// at the quadrature nodes of one face.
fn surface_gap(
    y: &HyperSurfaceStress,
    t: &TransversalField,
    u: &SmoothField,
    rule: &QuadratureRule,
) -> Result<f64> {
    let face = t.face();
    let top: Vec<usize> = (0..face.param_dim()).collect();
    let div = surface_divergence(y, t, u)?;
    let defining = surface_divergence_defining(y, t, u)?;
    let mut w = 0.0f64;
    for (p, _) in face.nodes(rule) {
        w = w.max((div.value_at(&p)?.get(&top) - defining.value_at(&p)?.get(&top)).abs());
    }
    Ok(w)
}
