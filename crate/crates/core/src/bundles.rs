//! Jet bundles `J^k U`, the iterated jet bundle `J^1(J^1 U)` and the maps
//! between them.

use crate::error::{invalid, Result};
use crate::jetcore::{JetValue, SmoothField};

/// Point `B = (B^0, B^1_i, B^2_i, B^3_ij)` of `J^1(J^1 U)`. For `B = j^1 A`
/// one has `B^2_i = A^0_,i` and `B^3_ij = A^1_i,j`: the first index of `B^3`
/// is the index of `A^1`, the second the derivative index.
#[derive(Debug, Clone, PartialEq)]
pub struct IteratedJetValue {
    pub n: usize,
    pub d: usize,
    /// `B^0_alpha`
    pub b0: Vec<f64>,
    /// `B^1_{alpha,i}` at `alpha * n + i`
    pub b1: Vec<f64>,
    /// `B^2_{alpha,i}` at `alpha * n + i`
    pub b2: Vec<f64>,
    /// `B^3_{alpha,ij}` at `(alpha * n + i) * n + j`
    pub b3: Vec<f64>,
}

impl IteratedJetValue {
    pub fn zeros(n: usize, d: usize) -> Self {
        IteratedJetValue {
            n,
            d,
            b0: vec![0.0; d],
            b1: vec![0.0; d * n],
            b2: vec![0.0; d * n],
            b3: vec![0.0; d * n * n],
        }
    }

    pub fn b3(&self, alpha: usize, i: usize, j: usize) -> f64 {
        self.b3[(alpha * self.n + i) * self.n + j]
    }

    pub fn max_abs_diff(&self, other: &IteratedJetValue) -> Result<f64> {
        if self.n != other.n || self.d != other.d {
            return invalid("iterated jets of different shapes");
        }
        let pairs = [
            (&self.b0, &other.b0),
            (&self.b1, &other.b1),
            (&self.b2, &other.b2),
            (&self.b3, &other.b3),
        ];
        Ok(pairs
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// `pi^k_l`: keeps the derivatives up to order `l`.
pub fn project_jet(a: &JetValue, l: usize) -> Result<JetValue> {
    a.truncated(l)
}

/// `iota : J^2 U -> J^1(J^1 U)`, `(A^0, A^1, A^2) -> (A^0, A^1, A^1, A^2)`.
pub fn include_holonomic(a: &JetValue) -> Result<IteratedJetValue> {
    if a.order() != 2 {
        return invalid(format!("expected a second jet, got order {}", a.order()));
    }
    let (n, d) = (a.base_dim(), a.fiber_dim());
    Ok(IteratedJetValue {
        n,
        d,
        b0: a.array(0).to_vec(),
        b1: a.array(1).to_vec(),
        b2: a.array(1).to_vec(),
        b3: a.array(2).to_vec(),
    })
}

/// `pi_S : J^1(J^1 U) -> J^2 U`, keeps `B^0, B^1` and symmetrizes `B^3`.
pub fn symmetrize_iterated(b: &IteratedJetValue) -> JetValue {
    let (n, d) = (b.n, b.d);
    let mut out = JetValue::zeros(n, d, 2);
    for alpha in 0..d {
        out.set(alpha, &[], b.b0[alpha]);
        for i in 0..n {
            out.set(alpha, &[i], b.b1[alpha * n + i]);
            for j in i..n {
                out.set(
                    alpha,
                    &[i, j],
                    0.5 * (b.b3(alpha, i, j) + b.b3(alpha, j, i)),
                );
            }
        }
    }
    out
}

/// Vertical subbundles of `J^1(J^1 U)` named by the slots that may be
/// nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subbundle {
    /// `B^0 = 0, B^1 = 0`
    V23,
    /// `B^0 = 0, B^2 = 0`
    V13,
    /// only `B^3`
    V3,
    /// `B^0 = 0`
    V123,
}

impl Subbundle {
    pub fn contains(self, b: &IteratedJetValue, tol: f64) -> bool {
        let zero = |v: &[f64]| v.iter().all(|x| x.abs() <= tol);
        match self {
            Subbundle::V23 => zero(&b.b0) && zero(&b.b1),
            Subbundle::V13 => zero(&b.b0) && zero(&b.b2),
            Subbundle::V3 => zero(&b.b0) && zero(&b.b1) && zero(&b.b2),
            Subbundle::V123 => zero(&b.b0),
        }
    }
}

/// Checked inclusion of `B` in a vertical subbundle.
pub fn subbundle_part(
    b: &IteratedJetValue,
    which: Subbundle,
    tol: f64,
) -> Result<IteratedJetValue> {
    if !which.contains(b, tol) {
        return invalid(format!("iterated jet does not lie in {which:?}"));
    }
    Ok(b.clone())
}

/// Upper arrays `A^(r+1) .. A^k` of a jet, flagged vertical when the lower
/// arrays `A^0 .. A^r` all vanish, i.e. when `A` lies in `ker pi^k_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalPart {
    pub arrays: Vec<Vec<f64>>,
    pub is_vertical: bool,
}

pub fn vertical_part(a: &JetValue, r: usize) -> Result<VerticalPart> {
    if r >= a.order() {
        return invalid(format!(
            "vertical order {r} must be below the jet order {}",
            a.order()
        ));
    }
    Ok(VerticalPart {
        arrays: (r + 1..=a.order()).map(|p| a.array(p).to_vec()).collect(),
        is_vertical: (0..=r).all(|p| a.array(p).iter().all(|v| *v == 0.0)),
    })
}

/// Section `A = (A^0, A^1)` of `J^1 U`; `a1` stores `A^1_{alpha,i}` at
/// `alpha * n + i`.
#[derive(Debug, Clone)]
pub struct JetSection1 {
    pub a0: SmoothField,
    pub a1: SmoothField,
}

impl JetSection1 {
    pub fn new(a0: SmoothField, a1: SmoothField) -> Result<Self> {
        if a0.dim() != a1.dim() || a1.components() != a0.components() * a0.dim() {
            return invalid("J^1 section needs A^1 with d * n components on the same chart");
        }
        Ok(JetSection1 { a0, a1 })
    }

    /// `j^1 u`
    pub fn holonomic(u: &SmoothField) -> Self {
        JetSection1 {
            a0: u.clone(),
            a1: u.gradient(),
        }
    }

    pub fn base_dim(&self) -> usize {
        self.a0.dim()
    }

    pub fn fiber_dim(&self) -> usize {
        self.a0.components()
    }

    /// Value `(A^0, A^1)` at `x` as a first jet.
    pub fn value(&self, x: &[f64]) -> Result<JetValue> {
        let (n, d) = (self.base_dim(), self.fiber_dim());
        let a0 = self.a0.value(x)?;
        let a1 = self.a1.value(x)?;
        let mut out = JetValue::zeros(n, d, 1);
        for alpha in 0..d {
            out.set(alpha, &[], a0[alpha]);
            for i in 0..n {
                out.set(alpha, &[i], a1[alpha * n + i]);
            }
        }
        Ok(out)
    }
}

/// `j^1 A (x)` for a section of `J^1 U`.
pub fn iterated_jet(a: &JetSection1, x: &[f64]) -> Result<IteratedJetValue> {
    let (n, d) = (a.base_dim(), a.fiber_dim());
    let s0 = a.a0.taylor(x, 1)?;
    let s1 = a.a1.taylor(x, 1)?;
    let mut b = IteratedJetValue::zeros(n, d);
    for alpha in 0..d {
        b.b0[alpha] = s0[alpha].value();
        for i in 0..n {
            b.b1[alpha * n + i] = s1[alpha * n + i].value();
            b.b2[alpha * n + i] = s0[alpha].differentiate(i)?.value();
            for j in 0..n {
                b.b3[(alpha * n + i) * n + j] = s1[alpha * n + i].differentiate(j)?.value();
            }
        }
    }
    Ok(b)
}

/// General section `(B^0, B^1, B^2, B^3)` of `J^1(J^1 U)`, with the same
/// index layout as [`IteratedJetValue`].
#[derive(Debug, Clone)]
pub struct IteratedSection {
    pub b0: SmoothField,
    pub b1: SmoothField,
    pub b2: SmoothField,
    pub b3: SmoothField,
}

impl IteratedSection {
    pub fn new(b0: SmoothField, b1: SmoothField, b2: SmoothField, b3: SmoothField) -> Result<Self> {
        let (n, d) = (b0.dim(), b0.components());
        let ok = [&b1, &b2, &b3].iter().all(|f| f.dim() == n)
            && b1.components() == d * n
            && b2.components() == d * n
            && b3.components() == d * n * n;
        if !ok {
            return invalid("iterated section components have inconsistent shapes");
        }
        Ok(IteratedSection { b0, b1, b2, b3 })
    }

    /// `B = j^1 A`.
    pub fn from_jet_section(a: &JetSection1) -> Self {
        IteratedSection {
            b0: a.a0.clone(),
            b1: a.a1.clone(),
            b2: a.a0.gradient(),
            b3: a.a1.gradient(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HolonomyClass {
    /// `B = j^1 j^1 u`
    Holonomic,
    /// Base-compatible, `B = j^1 B_0` and `B^1 = B^2`, but `B^3` not symmetric.
    SemiHolonomic,
    /// `B_0 = (B^0, B^1)` is the first jet of `B^0`.
    BaseCompatible,
    None,
}

/// Classifies a section by sampling the defining identities at `points`.
pub fn holonomy_class(b: &IteratedSection, points: &[Vec<f64>], tol: f64) -> Result<HolonomyClass> {
    if points.is_empty() {
        return invalid("holonomy classification needs sample points");
    }
    let grad0 = b.b0.gradient();
    let grad1 = b.b1.gradient();
    let n = b.b0.dim();
    let close = |u: &[f64], v: &[f64]| u.iter().zip(v).all(|(a, c)| (a - c).abs() <= tol);
    let (mut base, mut first_jet, mut symmetric) = (true, true, true);
    for x in points {
        let g0 = grad0.value(x)?;
        let g1 = grad1.value(x)?;
        let v1 = b.b1.value(x)?;
        let v2 = b.b2.value(x)?;
        let v3 = b.b3.value(x)?;
        base &= close(&v1, &g0);
        first_jet &= close(&v2, &g0) && close(&v3, &g1) && close(&v1, &v2);
        for c in 0..v3.len() / (n * n) {
            for i in 0..n {
                for j in 0..n {
                    symmetric &= (v3[(c * n + i) * n + j] - v3[(c * n + j) * n + i]).abs() <= tol;
                }
            }
        }
    }
    Ok(match (base, base && first_jet, symmetric) {
        (_, true, true) => HolonomyClass::Holonomic,
        (_, true, false) => HolonomyClass::SemiHolonomic,
        (true, false, _) => HolonomyClass::BaseCompatible,
        _ => HolonomyClass::None,
    })
}
