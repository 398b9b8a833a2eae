//! Second-order virtual power: integration by parts of a non-holonomic
//! stress down to body, face, edge and boundary terms.

use std::sync::Arc;

use crate::bundles::{iterated_jet, JetSection1};
use crate::error::{invalid, Result};
use crate::geometry::{
    integrate_box, Body, ExteriorDerivative, FacePatch, FormField, QuadratureRule,
};
use crate::jetcore::SmoothField;
use crate::nonholonomic::{
    nh_density, nh_divergence, nh_traction, HyperSurfaceStress, NonHolonomicStress,
};
use crate::stress::{action_density, relative, surface_force, traction_projection, SurfaceForce};
use crate::surface::{restrict_y, surface_divergence, tangent_traction, TransversalField};

fn check(x: &NonHolonomicStress, n: usize, d: usize, body: &Body) -> Result<()> {
    if x.base_dim() != n || x.fiber_dim() != d {
        return invalid("section shape does not match the stress");
    }
    if body.dim() != n {
        return invalid(format!(
            "body has dimension {} but the stress lives on R^{n}",
            body.dim()
        ));
    }
    Ok(())
}

/// Terms of `int_B X(j^1 A) = int_dB Y(A) - int_B div X(A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationByParts {
    pub lhs: f64,
    pub boundary: f64,
    pub interior: f64,
    pub residual: f64,
    pub relative: f64,
}

pub fn first_integration_by_parts(
    x: &NonHolonomicStress,
    a: &JetSection1,
    body: &Body,
    rule: &QuadratureRule,
) -> Result<IntegrationByParts> {
    check(x, a.base_dim(), a.fiber_dim(), body)?;
    let div = nh_divergence(x);
    let (mut lhs, mut interior) = (0.0, 0.0);
    for (p, w) in body.nodes(rule)? {
        lhs += w * nh_density(&x.values(&p)?, &iterated_jet(a, &p)?);
        interior += w * action_density(&div.s0.value(&p)?, &div.s1.value(&p)?, &a.value(&p)?);
    }
    let ya: Arc<dyn FormField> = Arc::new(nh_traction(x).applied(a)?);
    let mut boundary = 0.0;
    for face in body.faces() {
        boundary += face.integrate(ya.clone(), rule)?;
    }
    let residual = (lhs - (boundary - interior)).abs();
    Ok(IntegrationByParts {
        lhs,
        boundary,
        interior,
        residual,
        relative: relative(residual, &[lhs, boundary, interior]),
    })
}

/// `X^3ij_,ij - X^1i_,i - X^2i_,i + X^0`.
pub fn div_div(x: &NonHolonomicStress) -> SmoothField {
    let (n, d) = (x.base_dim(), x.fiber_dim());
    let x = x.clone();
    SmoothField::from_fn(n, d, move |p, k| {
        let (a0, a1, a2, a3) = (
            x.x0.taylor(p, k)?,
            x.x1.taylor(p, k + 1)?,
            x.x2.taylor(p, k + 1)?,
            x.x3.taylor(p, k + 2)?,
        );
        (0..d)
            .map(|alpha| {
                let mut c = a0[alpha].clone();
                for i in 0..n {
                    let s = a1[alpha * n + i].try_add(&a2[alpha * n + i])?;
                    c = c.try_sub(&s.differentiate(i)?)?;
                    for j in 0..n {
                        c = c.try_add(
                            &a3[(alpha * n + i) * n + j]
                                .differentiate(j)?
                                .differentiate(i)?,
                        )?;
                    }
                }
                Ok(c)
            })
            .collect()
    })
}

/// `p_sigma(div X)` restricted to a face.
pub fn boundary_div_traction(x: &NonHolonomicStress, face: &FacePatch) -> Result<SurfaceForce> {
    surface_force(&traction_projection(&nh_divergence(x)), face)
}

/// Per-face and per-edge terms of
/// `int_dB Y(j^1 u) = sum_edges int (tau_l + tau_m)(u) - sum_faces int div_V Y(j^1 u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAssembly {
    pub faces: Vec<(String, f64)>,
    pub edges: Vec<(String, f64)>,
    pub face_divergence: Vec<(String, f64)>,
    pub face_sum: f64,
    pub edge_sum: f64,
    pub face_divergence_sum: f64,
    pub residual: f64,
}

fn transversal_for<'a>(
    transversals: &'a [TransversalField],
    face: &FacePatch,
) -> Result<&'a TransversalField> {
    transversals
        .iter()
        .find(|t| t.face().id() == face.id())
        .ok_or_else(|| {
            crate::Error::InvalidArgument(format!("no transversal field for face {}", face.id()))
        })
}

pub fn edge_assembly(
    y: &HyperSurfaceStress,
    u: &SmoothField,
    body: &Body,
    transversals: &[TransversalField],
    rule: &QuadratureRule,
) -> Result<EdgeAssembly> {
    let faces = body.faces();
    let mut taus = Vec::with_capacity(faces.len());
    let (mut face_terms, mut div_terms) = (Vec::new(), Vec::new());
    for face in &faces {
        let t = transversal_for(transversals, face)?;
        let u_face = u.pullback(face.map())?;
        let tau: Arc<dyn FormField> = Arc::new(tangent_traction(y, t)?.applied(&u_face)?);
        taus.push(tau);
        let z = restrict_y(y, face)?.applied_holonomic(u)?;
        face_terms.push((
            face.id().to_string(),
            integrate_box(&z, face.lower(), face.upper(), face.orientation(), rule)?,
        ));
        let div = surface_divergence(y, t, u)?;
        div_terms.push((
            face.id().to_string(),
            integrate_box(&div, face.lower(), face.upper(), face.orientation(), rule)?,
        ));
    }
    let mut edge_terms = Vec::new();
    for edge in body.edges() {
        let mut v = 0.0;
        for (fi, side) in &edge.sides {
            v += side.integrate(taus[*fi].clone(), rule)?;
        }
        edge_terms.push((edge.id, v));
    }
    let sum = |t: &[(String, f64)]| t.iter().map(|(_, v)| v).sum::<f64>();
    let (face_sum, edge_sum, face_divergence_sum) =
        (sum(&face_terms), sum(&edge_terms), sum(&div_terms));
    Ok(EdgeAssembly {
        residual: (face_sum - (edge_sum - face_divergence_sum)).abs(),
        faces: face_terms,
        edges: edge_terms,
        face_divergence: div_terms,
        face_sum,
        edge_sum,
        face_divergence_sum,
    })
}

/// Terms of
/// `int_B X(j^1 j^1 u) = edges - face divergences - int_dB p_sigma(div X)(u) + int_B div div X (u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    pub lhs: f64,
    pub edges: Vec<(String, f64)>,
    pub face_divergence: Vec<(String, f64)>,
    pub boundary_div_traction: Vec<(String, f64)>,
    pub edge_sum: f64,
    pub face_divergence_sum: f64,
    pub boundary_div_traction_sum: f64,
    pub div_div: f64,
    pub residual: f64,
    pub relative: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl BalanceReport {
    pub fn rhs(&self) -> f64 {
        self.edge_sum - self.face_divergence_sum - self.boundary_div_traction_sum + self.div_div
    }
}

/// `int_B X(j^1 j^1 u)`.
pub fn holonomic_power(
    x: &NonHolonomicStress,
    u: &SmoothField,
    body: &Body,
    rule: &QuadratureRule,
) -> Result<f64> {
    check(x, u.dim(), u.components(), body)?;
    let a = JetSection1::holonomic(u);
    let mut lhs = 0.0;
    for (p, w) in body.nodes(rule)? {
        lhs += w * nh_density(&x.values(&p)?, &iterated_jet(&a, &p)?);
    }
    Ok(lhs)
}

/// Relative residual is checked against `tol`.
pub fn verify_balance_order2(
    x: &NonHolonomicStress,
    u: &SmoothField,
    body: &Body,
    transversals: &[TransversalField],
    rule: &QuadratureRule,
    tol: f64,
) -> Result<BalanceReport> {
    let lhs = holonomic_power(x, u, body, rule)?;
    let y = nh_traction(x);
    let asm = edge_assembly(&y, u, body, transversals, rule)?;
    let mut bdt = Vec::new();
    for face in body.faces() {
        bdt.push((
            face.id().to_string(),
            boundary_div_traction(x, &face)?.power(u, rule)?,
        ));
    }
    let dd = div_div(x);
    let mut div_div_term = 0.0;
    for (p, w) in body.nodes(rule)? {
        let (a, b) = (dd.value(&p)?, u.value(&p)?);
        div_div_term += w * a.iter().zip(&b).map(|(p, q)| p * q).sum::<f64>();
    }
    let boundary_div_traction_sum = bdt.iter().map(|(_, v)| v).sum();
    let mut report = BalanceReport {
        lhs,
        edges: asm.edges,
        face_divergence: asm.face_divergence,
        boundary_div_traction: bdt,
        edge_sum: asm.edge_sum,
        face_divergence_sum: asm.face_divergence_sum,
        boundary_div_traction_sum,
        div_div: div_div_term,
        residual: 0.0,
        relative: 0.0,
        tolerance: tol,
        pass: false,
    };
    report.residual = (lhs - report.rhs()).abs();
    let mut terms = vec![
        lhs,
        report.edge_sum,
        report.face_divergence_sum,
        report.boundary_div_traction_sum,
        report.div_div,
    ];
    terms.extend(
        report
            .edges
            .iter()
            .chain(&report.face_divergence)
            .chain(&report.boundary_div_traction)
            .map(|(_, v)| *v),
    );
    report.relative = relative(report.residual, &terms);
    report.pass = report.relative <= tol;
    Ok(report)
}

/// Exact term on a closed face: `int_V d(tau_V(Y)(u))` by quadrature, and
/// the sum of `tau_V(Y)(u)` over the sides of the parameter box.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedBoundary {
    pub exact_integral: f64,
    pub side_sum: f64,
}

pub fn closed_boundary_term(
    y: &HyperSurfaceStress,
    u: &SmoothField,
    t: &TransversalField,
    rule: &QuadratureRule,
) -> Result<ClosedBoundary> {
    let face = t.face();
    let tau: Arc<dyn FormField> =
        Arc::new(tangent_traction(y, t)?.applied(&u.pullback(face.map())?)?);
    let d_tau = ExteriorDerivative::new(tau.clone())?;
    let exact_integral =
        integrate_box(&d_tau, face.lower(), face.upper(), face.orientation(), rule)?;
    let mut side_sum = 0.0;
    for side in face.sides() {
        side_sum += side.integrate(tau.clone(), rule)?;
    }
    Ok(ClosedBoundary {
        exact_integral,
        side_sum,
    })
}

/// Coordinate transversals `d/dx^axis` on every face of a box body.
pub fn coordinate_transversals(body: &Body) -> Result<Vec<TransversalField>> {
    body.faces()
        .iter()
        .map(|f| {
            let (axis, _) = f.source().expect("box faces know their axis");
            TransversalField::coordinate(f, axis)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonholonomic::lift_second_order;
    use crate::nonholonomic::VariationalStress2;

    fn xs(n: usize, x0: &[&str], x1: &[&str], x2: &[&str], x3: &[&str]) -> NonHolonomicStress {
        NonHolonomicStress::new(
            SmoothField::parse(n, x0).unwrap(),
            SmoothField::parse(n, x1).unwrap(),
            SmoothField::parse(n, x2).unwrap(),
            SmoothField::parse(n, x3).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn div_div_terms() {
        let x = xs(2, &["3"], &["0", "0"], &["0", "0"], &["0", "0", "0", "0"]);
        assert_eq!(div_div(&x).value(&[0.2, 0.3]).unwrap(), vec![3.0]);
        let x = xs(
            2,
            &["0"],
            &["0", "0"],
            &["0", "0"],
            &["x1^2", "0", "0", "0"],
        );
        assert_eq!(div_div(&x).value(&[0.2, 0.3]).unwrap(), vec![2.0]);
    }

    #[test]
    fn adapted_boundary_div_traction() {
        // X^1n = 1: (-1)^(n-1) (0 - 1) on x^n = 1
        for n in [2usize, 3] {
            let mut x1 = vec!["0"; n];
            x1[n - 1] = "1";
            let x = xs(n, &["0"], &x1, &vec!["0"; n], &vec!["0"; n * n]);
            let face = Body::unit_box(n)
                .faces()
                .into_iter()
                .find(|f| f.id() == format!("x{n}+"))
                .unwrap();
            let u = SmoothField::constant(n, vec![1.0]);
            let f = boundary_div_traction(&x, &face)
                .unwrap()
                .applied(&u)
                .unwrap();
            let coeff = f
                .value_at(&vec![0.5; n - 1])
                .unwrap()
                .get(&(0..n - 1).collect::<Vec<_>>());
            let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(coeff, -sign);
        }
    }

    #[test]
    fn only_x0() {
        let x = xs(
            2,
            &["1 + x1"],
            &["0", "0"],
            &["0", "0"],
            &["0", "0", "0", "0"],
        );
        let u = SmoothField::parse(2, &["x2^2 + x1"]).unwrap();
        let body = Body::unit_box(2);
        let tr = coordinate_transversals(&body).unwrap();
        let rule = QuadratureRule::new(4).unwrap();
        let r = verify_balance_order2(&x, &u, &body, &tr, &rule, 1e-9).unwrap();
        assert!((r.lhs - r.div_div).abs() < 1e-14);
        assert!(r.edge_sum.abs() < 1e-14 && r.face_divergence_sum.abs() < 1e-14);
        assert!(r.pass);
    }

    #[test]
    fn full_identity_on_square() {
        let x = xs(
            2,
            &["x1*x2"],
            &["x1^2", "1 - x2"],
            &["x2", "x1*x2"],
            &["x1 + x2^2", "2*x1", "x2*x1", "x1^2 - x2"],
        );
        let u = SmoothField::parse(2, &["x1^2*x2 - x2 + 0.5"]).unwrap();
        let body = Body::unit_box(2);
        let tr = coordinate_transversals(&body).unwrap();
        let rule = QuadratureRule::new(6).unwrap();
        let r = verify_balance_order2(&x, &u, &body, &tr, &rule, 1e-9).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.edges.len(), 4);
        let a = JetSection1::holonomic(&u);
        let ibp = first_integration_by_parts(&x, &a, &body, &rule).unwrap();
        assert!(ibp.residual < 1e-12);
        let asm = edge_assembly(&nh_traction(&x), &u, &body, &tr, &rule).unwrap();
        assert!(asm.residual < 1e-12);
    }

    #[test]
    fn lift_split_keeps_lhs() {
        let s = VariationalStress2::new(
            SmoothField::parse(2, &["x1"]).unwrap(),
            SmoothField::parse(2, &["x2", "1"]).unwrap(),
            SmoothField::parse(2, &["1", "x1", "x2", "2"]).unwrap(),
        )
        .unwrap();
        let u = SmoothField::parse(2, &["x1*x2^2"]).unwrap();
        let body = Body::unit_box(2);
        let rule = QuadratureRule::new(4).unwrap();
        let a = holonomic_power(&lift_second_order(&s, 0.0).unwrap(), &u, &body, &rule).unwrap();
        let b = holonomic_power(&lift_second_order(&s, 1.0).unwrap(), &u, &body, &rule).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn missing_transversal() {
        let x = NonHolonomicStress::zero(2, 1);
        let body = Body::unit_box(2);
        let mut tr = coordinate_transversals(&body).unwrap();
        tr.pop();
        let u = SmoothField::zero(2, 1);
        let rule = QuadratureRule::new(2).unwrap();
        assert!(edge_assembly(&nh_traction(&x), &u, &body, &tr, &rule).is_err());
    }
}
