//! Non-holonomic hyper-stresses on `J^1(J^1 U)`, second-order stresses and
//! the maps between them.

use crate::bundles::{IteratedJetValue, JetSection1, Subbundle};
use crate::error::{invalid, Result};
use crate::geometry::{omit, FnForm, FormField, FormValue, SeriesForm};
use crate::jetcore::{JetValue, SmoothField, TruncatedSeries};
use crate::stress::{action_density, VariationalStress1};

fn sign(i: usize) -> f64 {
    if i.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn check_shapes(n: usize, fields: &[(&SmoothField, usize, &str)]) -> Result<()> {
    for (f, comps, name) in fields {
        if f.dim() != n || f.components() != *comps {
            return invalid(format!(
                "{name} needs {comps} components on R^{n}, got {} on R^{}",
                f.components(),
                f.dim()
            ));
        }
    }
    Ok(())
}

/// Non-holonomic stress `X = (X^0, X^1i, X^2i, X^3ij)` relative to
/// `dx^1 ^ ... ^ dx^n`, laid out like [`IteratedJetValue`].
#[derive(Debug, Clone)]
pub struct NonHolonomicStress {
    pub x0: SmoothField,
    pub x1: SmoothField,
    pub x2: SmoothField,
    pub x3: SmoothField,
}

/// Values of the four blocks of `X` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct NhValues {
    pub x0: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub x3: Vec<f64>,
}

impl NonHolonomicStress {
    pub fn new(x0: SmoothField, x1: SmoothField, x2: SmoothField, x3: SmoothField) -> Result<Self> {
        let (n, d) = (x0.dim(), x0.components());
        check_shapes(
            n,
            &[
                (&x1, d * n, "X^1"),
                (&x2, d * n, "X^2"),
                (&x3, d * n * n, "X^3"),
            ],
        )?;
        Ok(NonHolonomicStress { x0, x1, x2, x3 })
    }

    pub fn zero(n: usize, d: usize) -> Self {
        NonHolonomicStress {
            x0: SmoothField::zero(n, d),
            x1: SmoothField::zero(n, d * n),
            x2: SmoothField::zero(n, d * n),
            x3: SmoothField::zero(n, d * n * n),
        }
    }

    pub fn base_dim(&self) -> usize {
        self.x0.dim()
    }

    pub fn fiber_dim(&self) -> usize {
        self.x0.components()
    }

    pub fn values(&self, x: &[f64]) -> Result<NhValues> {
        Ok(NhValues {
            x0: self.x0.value(x)?,
            x1: self.x1.value(x)?,
            x2: self.x2.value(x)?,
            x3: self.x3.value(x)?,
        })
    }
}

pub(crate) fn nh_density(v: &NhValues, b: &IteratedJetValue) -> f64 {
    let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(p, q)| p * q).sum::<f64>();
    dot(&v.x0, &b.b0) + dot(&v.x1, &b.b1) + dot(&v.x2, &b.b2) + dot(&v.x3, &b.b3)
}

/// `X(B) = (X^0 B^0 + X^1i B^1_i + X^2i B^2_i + X^3ij B^3_ij) dx^1 ^ ... ^ dx^n`.
pub fn nh_action(
    x_stress: &NonHolonomicStress,
    b: &IteratedJetValue,
    x: &[f64],
) -> Result<FormValue> {
    if b.n != x_stress.base_dim() || b.d != x_stress.fiber_dim() {
        return invalid("iterated jet shape does not match the stress");
    }
    Ok(FormValue::volume(b.n).scale(nh_density(&x_stress.values(x)?, b)))
}

/// Second-order stress `(S^0, S^1i, S^2ij)` with `S^2` symmetric, stored at
/// `(alpha * n + i) * n + j`.
#[derive(Debug, Clone)]
pub struct VariationalStress2 {
    pub s0: SmoothField,
    pub s1: SmoothField,
    s2: SmoothField,
}

impl VariationalStress2 {
    /// `S^2` is replaced by its symmetric part.
    pub fn new(s0: SmoothField, s1: SmoothField, s2: SmoothField) -> Result<Self> {
        let (n, d) = (s0.dim(), s0.components());
        check_shapes(n, &[(&s1, d * n, "S^1"), (&s2, d * n * n, "S^2")])?;
        let raw = s2;
        let s2 = SmoothField::from_fn(n, d * n * n, move |x, k| {
            let v = raw.taylor(x, k)?;
            let mut out = v.clone();
            for alpha in 0..d {
                for i in 0..n {
                    for j in 0..n {
                        let (a, b) = ((alpha * n + i) * n + j, (alpha * n + j) * n + i);
                        out[a] = v[a].try_add(&v[b])?.scale(0.5);
                    }
                }
            }
            Ok(out)
        });
        Ok(VariationalStress2 { s0, s1, s2 })
    }

    /// Order-one stress viewed as a second-order stress with `S^2 = 0`.
    pub fn from_order1(s: &VariationalStress1) -> Self {
        let (n, d) = (s.base_dim(), s.fiber_dim());
        VariationalStress2 {
            s0: s.s0.clone(),
            s1: s.s1.clone(),
            s2: SmoothField::zero(n, d * n * n),
        }
    }

    pub fn s2(&self) -> &SmoothField {
        &self.s2
    }

    pub fn base_dim(&self) -> usize {
        self.s0.dim()
    }

    pub fn fiber_dim(&self) -> usize {
        self.s0.components()
    }
}

/// Coefficient of `S(A)` for a second jet `A`.
pub fn stress2_density(s: &VariationalStress2, a: &JetValue, x: &[f64]) -> Result<f64> {
    let (n, d) = (s.base_dim(), s.fiber_dim());
    if a.base_dim() != n || a.fiber_dim() != d || a.order() < 2 {
        return invalid("expected a second jet matching the stress");
    }
    let (s0, s1, s2) = (s.s0.value(x)?, s.s1.value(x)?, s.s2.value(x)?);
    let mut acc = 0.0;
    for alpha in 0..d {
        acc += s0[alpha] * a.get(alpha, &[]);
        for i in 0..n {
            acc += s1[alpha * n + i] * a.get(alpha, &[i]);
            for j in 0..n {
                acc += s2[(alpha * n + i) * n + j] * a.get(alpha, &[i, j]);
            }
        }
    }
    Ok(acc)
}

/// `iota^* X`: `S^0 = X^0`, `S^1 = X^1 + X^2`, `S^2 = (X^3 + X^3^T) / 2`.
pub fn restrict_to_second_order(x: &NonHolonomicStress) -> VariationalStress2 {
    let s1 =
        x.x1.linear_combination(1.0, &x.x2, 1.0)
            .expect("X^1 and X^2 share a shape");
    VariationalStress2::new(x.x0.clone(), s1, x.x3.clone()).expect("shapes checked on construction")
}

/// `X^0 = S^0`, `X^1 = (1 - lambda) S^1`, `X^2 = lambda S^1`, `X^3 = S^2`.
pub fn lift_second_order(s: &VariationalStress2, lambda: f64) -> Result<NonHolonomicStress> {
    if !(0.0..=1.0).contains(&lambda) {
        return invalid(format!("split {lambda} must lie in [0, 1]"));
    }
    Ok(NonHolonomicStress {
        x0: s.s0.clone(),
        x1: s.s1.scaled(1.0 - lambda),
        x2: s.s1.scaled(lambda),
        x3: s.s2.clone(),
    })
}

/// Hyper-surface stress `Y = p_sigma(X)`; `y0` holds `Y^0_(omit j), alpha` at
/// `alpha * n + j`, `y1` holds `Y^1i_(omit j), alpha` at
/// `(alpha * n + i) * n + j`.
#[derive(Debug, Clone)]
pub struct HyperSurfaceStress {
    pub y0: SmoothField,
    pub y1: SmoothField,
}

impl HyperSurfaceStress {
    pub fn new(y0: SmoothField, y1: SmoothField) -> Result<Self> {
        let n = y0.dim();
        if !y0.components().is_multiple_of(n) {
            return invalid("Y^0 needs d * n components");
        }
        let d = y0.components() / n;
        check_shapes(n, &[(&y1, d * n * n, "Y^1")])?;
        Ok(HyperSurfaceStress { y0, y1 })
    }

    pub fn base_dim(&self) -> usize {
        self.y0.dim()
    }

    pub fn fiber_dim(&self) -> usize {
        self.y0.components() / self.base_dim()
    }

    /// The `(n-1)`-form field `Y(A)` for a section `A` of `J^1 U`.
    pub fn applied(&self, a: &JetSection1) -> Result<FnForm> {
        let (n, d) = (self.base_dim(), self.fiber_dim());
        if a.base_dim() != n || a.fiber_dim() != d {
            return invalid("section shape does not match the hyper-surface stress");
        }
        let (y0, y1, a0, a1) = (self.y0.clone(), self.y1.clone(), a.a0.clone(), a.a1.clone());
        Ok(FnForm::new(n, n - 1, move |x, k| {
            let (y0, y1) = (y0.taylor(x, k)?, y1.taylor(x, k)?);
            let (a0, a1) = (a0.taylor(x, k)?, a1.taylor(x, k)?);
            let like = TruncatedSeries::zeros(n, k)?;
            let mut out = SeriesForm::zero(n, n - 1, &like)?;
            for j in 0..n {
                let mut c = like.clone();
                for alpha in 0..d {
                    c = c.try_add(&y0[alpha * n + j].try_mul(&a0[alpha])?)?;
                    for i in 0..n {
                        c = c.try_add(&y1[(alpha * n + i) * n + j].try_mul(&a1[alpha * n + i])?)?;
                    }
                }
                out.add(&omit(n, &[j]), &c)?;
            }
            Ok(out)
        }))
    }
}

/// `Y^0_(omit j) = (-1)^(j-1) X^2j`, `Y^1i_(omit j) = (-1)^(j-1) X^3ij`
/// (one-based `j`).
pub fn nh_traction(x: &NonHolonomicStress) -> HyperSurfaceStress {
    let (n, d) = (x.base_dim(), x.fiber_dim());
    let (x2, x3) = (x.x2.clone(), x.x3.clone());
    let y0 = SmoothField::from_fn(n, d * n, move |p, k| {
        let v = x2.taylor(p, k)?;
        Ok(v.iter()
            .enumerate()
            .map(|(idx, s)| s.scale(sign(idx % n)))
            .collect())
    });
    let y1 = SmoothField::from_fn(n, d * n * n, move |p, k| {
        let v = x3.taylor(p, k)?;
        Ok(v.iter()
            .enumerate()
            .map(|(idx, s)| s.scale(sign(idx % n)))
            .collect())
    });
    HyperSurfaceStress { y0, y1 }
}

/// `div X` as an order-one stress acting on `J^1 U`: order-zero slot
/// `X^2j_,j - X^0`, order-one slot `X^3ij_,j - X^1i`.
pub fn nh_divergence(x: &NonHolonomicStress) -> VariationalStress1 {
    let (n, d) = (x.base_dim(), x.fiber_dim());
    let (x0, x2) = (x.x0.clone(), x.x2.clone());
    let s0 = SmoothField::from_fn(n, d, move |p, k| {
        let a = x0.taylor(p, k)?;
        let b = x2.taylor(p, k + 1)?;
        (0..d)
            .map(|alpha| {
                let mut c = a[alpha].scale(-1.0);
                for j in 0..n {
                    c = c.try_add(&b[alpha * n + j].differentiate(j)?)?;
                }
                Ok(c)
            })
            .collect()
    });
    let (x1, x3) = (x.x1.clone(), x.x3.clone());
    let s1 = SmoothField::from_fn(n, d * n, move |p, k| {
        let a = x1.taylor(p, k)?;
        let b = x3.taylor(p, k + 1)?;
        (0..d * n)
            .map(|ai| {
                let mut c = a[ai].scale(-1.0);
                for j in 0..n {
                    c = c.try_add(&b[ai * n + j].differentiate(j)?)?;
                }
                Ok(c)
            })
            .collect()
    });
    VariationalStress1::new(s0, s1).expect("divergence slots have the order-one layout")
}

/// `div X (A)` at `x` from the local representation.
pub fn nh_divergence_density(
    x_stress: &NonHolonomicStress,
    a: &JetSection1,
    x: &[f64],
) -> Result<f64> {
    let div = nh_divergence(x_stress);
    Ok(action_density(
        &div.s0.value(x)?,
        &div.s1.value(x)?,
        &a.value(x)?,
    ))
}

/// Coefficient of `d(Y(A)) - X(j^1 A)` on `dx^1 ^ ... ^ dx^n` at `x`.
pub fn nh_invariant_divergence(
    x_stress: &NonHolonomicStress,
    a: &JetSection1,
    x: &[f64],
) -> Result<f64> {
    let n = x_stress.base_dim();
    let ya = nh_traction(x_stress).applied(a)?;
    let dya = ya.series_at(x, 1)?.exterior_derivative()?.value();
    let b = crate::bundles::iterated_jet(a, x)?;
    Ok(dya.get(&(0..n).collect::<Vec<_>>()) - nh_density(&x_stress.values(x)?, &b))
}

/// `iota_3^* X`: the `X^3` block.
pub fn significant_components(x: &NonHolonomicStress) -> SmoothField {
    x.x3.clone()
}

/// Restriction of `X` to a vertical subbundle: the blocks that pair with the
/// subbundle are kept and the others set to zero.
pub fn restrict_to_subbundle(x: &NonHolonomicStress, which: Subbundle) -> NonHolonomicStress {
    let (n, d) = (x.base_dim(), x.fiber_dim());
    let (keep1, keep2) = match which {
        Subbundle::V23 => (false, true),
        Subbundle::V13 => (true, false),
        Subbundle::V3 => (false, false),
        Subbundle::V123 => (true, true),
    };
    NonHolonomicStress {
        x0: SmoothField::zero(n, d),
        x1: if keep1 {
            x.x1.clone()
        } else {
            SmoothField::zero(n, d * n)
        },
        x2: if keep2 {
            x.x2.clone()
        } else {
            SmoothField::zero(n, d * n)
        },
        x3: x.x3.clone(),
    }
}

/// First contraction `C^1`: component `(omit i, j, alpha)` stored at
/// `(alpha * n + i) * n + j` equals `(-1)^(i-1) X^3ij` (one-based `i`).
pub fn contraction_c1(x3: &SmoothField, n: usize) -> Result<SmoothField> {
    if x3.dim() != n || !x3.components().is_multiple_of(n * n) {
        return invalid("X^3 needs d * n * n components");
    }
    let f = x3.clone();
    Ok(SmoothField::from_fn(n, x3.components(), move |p, k| {
        let v = f.taylor(p, k)?;
        Ok(v.iter()
            .enumerate()
            .map(|(idx, s)| s.scale(sign((idx / n) % n)))
            .collect())
    }))
}

/// Second contraction of `X^3` values: for each `alpha` the `(n-2)`-form
/// `sum_{i>j} (-1)^(i+j) (X^3ij - X^3ji) dx(omit j, i)`.
pub fn second_contraction_values(x3: &[f64], n: usize) -> Result<Vec<FormValue>> {
    if n < 2 {
        return invalid("the second contraction needs n >= 2");
    }
    if !x3.len().is_multiple_of(n * n) {
        return invalid("X^3 needs d * n * n entries");
    }
    let d = x3.len() / (n * n);
    (0..d)
        .map(|alpha| {
            let mut f = FormValue::zero(n, n - 2)?;
            for i in 0..n {
                for j in 0..i {
                    let a = x3[(alpha * n + i) * n + j] - x3[(alpha * n + j) * n + i];
                    f.add(&omit(n, &[j, i]), sign(i + j) * a)?;
                }
            }
            Ok(f)
        })
        .collect()
}

/// The second contraction of the `X^3` field at `x`.
pub fn second_contraction(x3: &SmoothField, x: &[f64]) -> Result<Vec<FormValue>> {
    second_contraction_values(&x3.value(x)?, x3.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::include_holonomic;
    use crate::jetcore::jet_extension;

    fn c(n: usize, v: Vec<f64>) -> SmoothField {
        SmoothField::constant(n, v)
    }

    #[test]
    fn single_x3_term() {
        let x = NonHolonomicStress::new(
            c(2, vec![0.0]),
            c(2, vec![0.0; 2]),
            c(2, vec![0.0; 2]),
            c(2, vec![0.0, 4.0, 0.0, 0.0]),
        )
        .unwrap();
        let mut b = IteratedJetValue::zeros(2, 1);
        b.b3[1] = 1.0;
        assert_eq!(nh_action(&x, &b, &[0.0, 0.0]).unwrap().get(&[0, 1]), 4.0);
    }

    #[test]
    fn restriction_local_formula() {
        let x = NonHolonomicStress::new(
            c(2, vec![0.0]),
            c(2, vec![1.0, 0.0]),
            c(2, vec![0.0, 2.0]),
            c(2, vec![0.0, 1.0, 0.0, 0.0]),
        )
        .unwrap();
        let s = restrict_to_second_order(&x);
        assert_eq!(s.s1.value(&[0.0, 0.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(s.s2().value(&[0.0, 0.0]).unwrap(), vec![0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn lift_split() {
        let s = VariationalStress2::new(
            c(2, vec![1.0]),
            c(2, vec![2.0, 3.0]),
            c(2, vec![1.0, 2.0, 2.0, 5.0]),
        )
        .unwrap();
        let x = lift_second_order(&s, 1.0).unwrap();
        assert_eq!(x.x1.value(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(x.x2.value(&[0.0, 0.0]).unwrap(), vec![2.0, 3.0]);
        assert!(lift_second_order(&s, 1.5).is_err());
        assert!(lift_second_order(&s, -0.1).is_err());
    }

    #[test]
    fn holonomic_action_matches_restricted_stress() {
        let x = NonHolonomicStress::new(
            SmoothField::parse(2, &["x1*x2"]).unwrap(),
            SmoothField::parse(2, &["1 + x1", "x2^2"]).unwrap(),
            SmoothField::parse(2, &["x2", "-3"]).unwrap(),
            SmoothField::parse(2, &["x1", "2*x2", "-x1*x2", "0.5"]).unwrap(),
        )
        .unwrap();
        let u = SmoothField::parse(2, &["sin(x1) * x2^2 + x1^3"]).unwrap();
        let p = [0.3, -0.7];
        let j2 = jet_extension(&u, &p, 2).unwrap();
        let lhs = nh_action(&x, &include_holonomic(&j2).unwrap(), &p)
            .unwrap()
            .get(&[0, 1]);
        let rhs = stress2_density(&restrict_to_second_order(&x), &j2, &p).unwrap();
        assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn traction_signs() {
        let x = NonHolonomicStress::new(
            c(2, vec![0.0]),
            c(2, vec![0.0; 2]),
            c(2, vec![5.0, 7.0]),
            c(2, vec![1.0, 2.0, 3.0, 4.0]),
        )
        .unwrap();
        let y = nh_traction(&x);
        assert_eq!(y.y0.value(&[0.0, 0.0]).unwrap(), vec![5.0, -7.0]);
        assert_eq!(y.y1.value(&[0.0, 0.0]).unwrap(), vec![1.0, -2.0, 3.0, -4.0]);
    }

    #[test]
    fn divergence_of_linear_x3() {
        // X^3ij = x^j delta_ij: the order-one slot gains 1 per index
        let x = NonHolonomicStress::new(
            c(2, vec![0.0]),
            c(2, vec![0.0; 2]),
            c(2, vec![0.0; 2]),
            SmoothField::parse(2, &["x1", "0", "0", "x2"]).unwrap(),
        )
        .unwrap();
        let div = nh_divergence(&x);
        assert_eq!(div.s1.value(&[0.2, 0.9]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(div.s0.value(&[0.2, 0.9]).unwrap(), vec![0.0]);
    }

    #[test]
    fn c1_signs() {
        let x3 = c(2, vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(
            contraction_c1(&x3, 2).unwrap().value(&[0.0, 0.0]).unwrap(),
            vec![0.0, 1.0, 0.0, 0.0]
        );
        let x3 = c(2, vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(
            contraction_c1(&x3, 2).unwrap().value(&[0.0, 0.0]).unwrap(),
            vec![0.0, 0.0, -1.0, 0.0]
        );
    }

    #[test]
    fn second_contraction_antisymmetric_part() {
        let f = second_contraction_values(&[0.0, 1.0, -1.0, 0.0], 2).unwrap();
        assert_eq!(f[0].get(&[]), 2.0);
        let f = second_contraction_values(&[0.0, 3.0, 3.0, 1.0], 2).unwrap();
        assert_eq!(f[0].max_abs(), 0.0);
        assert!(second_contraction_values(&[1.0], 1).is_err());
    }

    #[test]
    fn subbundle_blocks() {
        let x = NonHolonomicStress::new(
            c(1, vec![1.0]),
            c(1, vec![2.0]),
            c(1, vec![3.0]),
            c(1, vec![4.0]),
        )
        .unwrap();
        let r = restrict_to_subbundle(&x, Subbundle::V13);
        let v = r.values(&[0.0]).unwrap();
        assert_eq!((v.x0[0], v.x1[0], v.x2[0], v.x3[0]), (0.0, 2.0, 0.0, 4.0));
        let v = restrict_to_subbundle(&x, Subbundle::V23)
            .values(&[0.0])
            .unwrap();
        assert_eq!((v.x0[0], v.x1[0], v.x2[0], v.x3[0]), (0.0, 0.0, 3.0, 4.0));
    }
}
