//! Transformation of jets and second-order stress components under a change
//! of chart and fiber frame, and the corresponding invariance checks.

use crate::error::{invalid, Result};
use crate::geometry::linalg::{det, inverse};
use crate::geometry::{omit, FormValue, TransitionMap};
use crate::jetcore::{jet_extension, JetValue, SmoothField};
use crate::nonholonomic::{stress2_density, VariationalStress2};

/// Chart change `x -> x'` together with the fiber frame change
/// `u'^a' = A^a'_a(x) u^a`; `a` stores `A^a'_a` at `a' * d + a`.
#[derive(Debug, Clone)]
pub struct FrameChange {
    pub transition: TransitionMap,
    pub a: SmoothField,
}

impl FrameChange {
    /// Checks that `A` is invertible at the samples.
    pub fn new(transition: TransitionMap, a: SmoothField, samples: &[Vec<f64>]) -> Result<Self> {
        let n = transition.dim();
        let comps = a.components();
        let d = (comps as f64).sqrt().round() as usize;
        if a.dim() != n || d * d != comps || d == 0 {
            return invalid("fiber frame change needs d * d components on the chart");
        }
        let f = FrameChange { transition, a };
        for x in samples {
            let m = f.a_matrix(x)?;
            if det(&m, &0.0).abs() < 1e-12 {
                return invalid(format!("fiber frame change is singular at {x:?}"));
            }
        }
        Ok(f)
    }

    pub fn identity(n: usize, d: usize) -> Self {
        let mut id = vec![0.0; d * d];
        for a in 0..d {
            id[a * d + a] = 1.0;
        }
        FrameChange {
            transition: TransitionMap::identity(n),
            a: SmoothField::constant(n, id),
        }
    }

    pub fn base_dim(&self) -> usize {
        self.transition.dim()
    }

    pub fn fiber_dim(&self) -> usize {
        (self.a.components() as f64).sqrt().round() as usize
    }

    fn a_matrix(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let d = self.fiber_dim();
        let v = self.a.value(x)?;
        Ok((0..d).map(|r| v[r * d..(r + 1) * d].to_vec()).collect())
    }

    fn check(&self, n: usize, d: usize) -> Result<()> {
        if n != self.base_dim() || d != self.fiber_dim() {
            return invalid("data shape does not match the frame change");
        }
        Ok(())
    }

    /// The same change viewed from the primed side.
    pub fn inverted(&self, samples: &[Vec<f64>]) -> Result<Self> {
        let (n, d) = (self.base_dim(), self.fiber_dim());
        let (a, back) = (self.a.clone(), self.transition.inverse().clone());
        let a_inv = SmoothField::from_fn(n, d * d, move |xp, k| {
            let x = back.taylor(xp, k)?;
            let av = a.compose(&x)?;
            let m: Vec<Vec<_>> = (0..d).map(|r| av[r * d..(r + 1) * d].to_vec()).collect();
            Ok(inverse(&m, 1e-14)?.into_iter().flatten().collect())
        });
        let primed: Vec<Vec<f64>> = samples
            .iter()
            .map(|x| self.transition.forward().value(x))
            .collect::<Result<_>>()?;
        FrameChange::new(self.transition.swapped(), a_inv, &primed)
    }
}

/// Jets of the transition data at a point: `x' = x'(x)`, `J`, the forward
/// jacobian, the second jet of the inverse map at `x'` and of `A` at `x`.
struct ChartData {
    xp: Vec<f64>,
    j: f64,
    forward_jac: Vec<Vec<f64>>,
    inv: JetValue,
    a: JetValue,
}

impl ChartData {
    fn at(f: &FrameChange, x: &[f64]) -> Result<Self> {
        let xp = f.transition.forward().value(x)?;
        let forward_jac = f.transition.jacobian(x)?;
        Ok(ChartData {
            j: det(&forward_jac, &0.0),
            inv: jet_extension(f.transition.inverse(), &xp, 2)?,
            a: jet_extension(&f.a, x, 2)?,
            xp,
            forward_jac,
        })
    }

    /// `x^i_,i'`
    fn dx(&self, i: usize, ip: usize) -> f64 {
        self.inv.get(i, &[ip])
    }

    /// `x^i_,i'j'`
    fn ddx(&self, i: usize, ip: usize, jp: usize) -> f64 {
        self.inv.get(i, &[ip, jp])
    }

    /// `A^a'_a` with derivatives along `axes`.
    fn a(&self, d: usize, ap: usize, a: usize, axes: &[usize]) -> f64 {
        self.a.get(ap * d + a, axes)
    }
}

/// `u'(x') = A(x) u(x)` with `x = x(x')`, a field on the primed chart.
pub fn primed_section(u: &SmoothField, f: &FrameChange) -> Result<SmoothField> {
    let (n, d) = (f.base_dim(), f.fiber_dim());
    if u.dim() != n || u.components() != d {
        return invalid("section shape does not match the frame change");
    }
    let (u, a, back) = (u.clone(), f.a.clone(), f.transition.inverse().clone());
    Ok(SmoothField::from_fn(n, d, move |xp, k| {
        let x = back.taylor(xp, k)?;
        let (uv, av) = (u.compose(&x)?, a.compose(&x)?);
        (0..d)
            .map(|ap| {
                let mut c = uv[0].scale(0.0);
                for al in 0..d {
                    c = c.try_add(&av[ap * d + al].try_mul(&uv[al])?)?;
                }
                Ok(c)
            })
            .collect()
    }))
}

/// Second jet of `u'` at `x'(x)` from the second jet of `u` at `x` by the
/// chain rule.
pub fn transform_jet2(u: &JetValue, f: &FrameChange, x: &[f64]) -> Result<JetValue> {
    let (n, d) = (u.base_dim(), u.fiber_dim());
    f.check(n, d)?;
    if u.order() < 2 {
        return invalid("transform_jet2 needs a second jet");
    }
    let c = ChartData::at(f, x)?;
    let mut out = JetValue::zeros(n, d, 2);
    for ap in 0..d {
        let mut v0 = 0.0;
        for al in 0..d {
            v0 += c.a(d, ap, al, &[]) * u.get(al, &[]);
        }
        out.set(ap, &[], v0);
        // first derivative of A u along x^i
        let g = |i: usize| -> f64 {
            (0..d)
                .map(|al| {
                    c.a(d, ap, al, &[i]) * u.get(al, &[]) + c.a(d, ap, al, &[]) * u.get(al, &[i])
                })
                .sum()
        };
        // second derivative of A u along x^i, x^j
        let h = |i: usize, j: usize| -> f64 {
            (0..d)
                .map(|al| {
                    c.a(d, ap, al, &[i, j]) * u.get(al, &[])
                        + c.a(d, ap, al, &[i]) * u.get(al, &[j])
                        + c.a(d, ap, al, &[j]) * u.get(al, &[i])
                        + c.a(d, ap, al, &[]) * u.get(al, &[i, j])
                })
                .sum()
        };
        for ip in 0..n {
            out.set(ap, &[ip], (0..n).map(|i| g(i) * c.dx(i, ip)).sum());
            for jp in ip..n {
                let mut v = 0.0;
                for i in 0..n {
                    v += g(i) * c.ddx(i, ip, jp);
                    for j in 0..n {
                        v += h(i, j) * c.dx(i, ip) * c.dx(j, jp);
                    }
                }
                out.set(ap, &[ip, jp], v);
            }
        }
    }
    Ok(out)
}

/// Second-order stress components at one point; `s1` at `a * n + i`, `s2` at
/// `(a * n + i) * n + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stress2Components {
    pub n: usize,
    pub d: usize,
    pub s0: Vec<f64>,
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
}

impl Stress2Components {
    pub fn of(s: &VariationalStress2, x: &[f64]) -> Result<Self> {
        Ok(Stress2Components {
            n: s.base_dim(),
            d: s.fiber_dim(),
            s0: s.s0.value(x)?,
            s1: s.s1.value(x)?,
            s2: s.s2().value(x)?,
        })
    }

    /// Coefficient of `S(A)` on `dx^1 ^ ... ^ dx^n`.
    pub fn density(&self, a: &JetValue) -> f64 {
        let (n, d) = (self.n, self.d);
        let mut acc = 0.0;
        for al in 0..d {
            acc += self.s0[al] * a.get(al, &[]);
            for i in 0..n {
                acc += self.s1[al * n + i] * a.get(al, &[i]);
                for j in 0..n {
                    acc += self.s2[(al * n + i) * n + j] * a.get(al, &[i, j]);
                }
            }
        }
        acc
    }
}

/// Unprimed components at `x` of the stress whose primed components are
/// `primed` (a stress on the primed chart), so that
/// `S(j^2 u) dx = S'(j^2 u') dx'`.
pub fn transform_stress2(
    primed: &VariationalStress2,
    f: &FrameChange,
    x: &[f64],
) -> Result<Stress2Components> {
    let (n, d) = (primed.base_dim(), primed.fiber_dim());
    f.check(n, d)?;
    let c = ChartData::at(f, x)?;
    let sp = Stress2Components::of(primed, &c.xp)?;
    let (s0p, s1p, s2p) = (&sp.s0, &sp.s1, &sp.s2);
    let s2p_at = |ap: usize, ip: usize, jp: usize| s2p[(ap * n + ip) * n + jp];
    let mut out = Stress2Components {
        n,
        d,
        s0: vec![0.0; d],
        s1: vec![0.0; d * n],
        s2: vec![0.0; d * n * n],
    };
    for al in 0..d {
        for ap in 0..d {
            let a0 = c.a(d, ap, al, &[]);
            let mut v0 = s0p[ap] * a0;
            for ip in 0..n {
                for i in 0..n {
                    v0 += s1p[ap * n + ip] * c.a(d, ap, al, &[i]) * c.dx(i, ip);
                }
                for jp in 0..n {
                    let s = s2p_at(ap, ip, jp);
                    for i in 0..n {
                        v0 += s * c.a(d, ap, al, &[i]) * c.ddx(i, ip, jp);
                        for j in 0..n {
                            v0 += s * c.a(d, ap, al, &[i, j]) * c.dx(i, ip) * c.dx(j, jp);
                        }
                    }
                }
            }
            out.s0[al] += c.j * v0;
            for k in 0..n {
                let mut v1 = 0.0;
                for ip in 0..n {
                    v1 += s1p[ap * n + ip] * a0 * c.dx(k, ip);
                    for jp in 0..n {
                        let s = s2p_at(ap, ip, jp);
                        let mut w = a0 * c.ddx(k, ip, jp);
                        for j in 0..n {
                            w += c.a(d, ap, al, &[j])
                                * (c.dx(j, ip) * c.dx(k, jp) + c.dx(k, ip) * c.dx(j, jp));
                        }
                        v1 += s * w;
                    }
                }
                out.s1[al * n + k] += c.j * v1;
                for l in 0..n {
                    let mut v2 = 0.0;
                    for ip in 0..n {
                        for jp in 0..n {
                            v2 += s2p_at(ap, ip, jp) * a0 * c.dx(k, ip) * c.dx(l, jp);
                        }
                    }
                    out.s2[(al * n + k) * n + l] += c.j * v2;
                }
            }
        }
    }
    Ok(out)
}

/// `J S'^1i' A x^i_,i'`: `S^1` transformed as if it were a tensor.
pub fn tensorial_order1(
    primed: &VariationalStress2,
    f: &FrameChange,
    x: &[f64],
) -> Result<Vec<f64>> {
    let (n, d) = (primed.base_dim(), primed.fiber_dim());
    f.check(n, d)?;
    let c = ChartData::at(f, x)?;
    let s1p = primed.s1.value(&c.xp)?;
    let mut out = vec![0.0; d * n];
    for al in 0..d {
        for k in 0..n {
            let mut v = 0.0;
            for ap in 0..d {
                for ip in 0..n {
                    v += s1p[ap * n + ip] * c.a(d, ap, al, &[]) * c.dx(k, ip);
                }
            }
            out[al * n + k] = c.j * v;
        }
    }
    Ok(out)
}

/// The extra term `J S'^2i'j' (2 A_,j x^j_,i' x^k_,j' + A x^k_,i'j')` by which
/// `S^1k` fails to transform as a tensor.
pub fn predicted_extra_term(
    primed: &VariationalStress2,
    f: &FrameChange,
    x: &[f64],
) -> Result<Vec<f64>> {
    let (n, d) = (primed.base_dim(), primed.fiber_dim());
    f.check(n, d)?;
    let c = ChartData::at(f, x)?;
    let s2p = primed.s2().value(&c.xp)?;
    let mut out = vec![0.0; d * n];
    for al in 0..d {
        for k in 0..n {
            let mut v = 0.0;
            for ap in 0..d {
                for ip in 0..n {
                    for jp in 0..n {
                        let mut w = c.a(d, ap, al, &[]) * c.ddx(k, ip, jp);
                        for j in 0..n {
                            w += 2.0 * c.a(d, ap, al, &[j]) * c.dx(j, ip) * c.dx(k, jp);
                        }
                        v += s2p[(ap * n + ip) * n + jp] * w;
                    }
                }
            }
            out[al * n + k] = c.j * v;
        }
    }
    Ok(out)
}

/// Unprimed `S^1k_a` at `x` read off by evaluating `J S'(j^2 u')` for the
/// section `u^b = delta^b_a (x^k - x0^k)`, whose jet at `x0` has only the
/// first derivative `u^a_,k = 1`. The primed jets are computed from the
/// composed series, not by the chain-rule formulas.
pub fn probe_order1(primed: &VariationalStress2, f: &FrameChange, x0: &[f64]) -> Result<Vec<f64>> {
    let (n, d) = (primed.base_dim(), primed.fiber_dim());
    f.check(n, d)?;
    let xp = f.transition.forward().value(x0)?;
    let j = f.transition.jacobian_det(x0)?;
    let mut out = vec![0.0; d * n];
    for al in 0..d {
        for k in 0..n {
            let c = x0[k];
            let u = SmoothField::from_fn(n, d, move |p, ord| {
                let v = crate::jetcore::TruncatedSeries::variable(n, ord, k, p[k])?.add_scalar(-c);
                let z = v.scale(0.0);
                Ok((0..d)
                    .map(|b| if b == al { v.clone() } else { z.clone() })
                    .collect())
            });
            let up = jet_extension(&primed_section(&u, f)?, &xp, 2)?;
            out[al * n + k] = j * stress2_density(primed, &up, &xp)?;
        }
    }
    Ok(out)
}

/// Quantities compared across the two charts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// `S(j^2 u) dx` against `S'(j^2 u') dx'`.
    Action,
    /// `p_sigma` of the order-one part applied to `u`, against the pullback
    /// of the primed traction form.
    Traction,
    /// Probed `S^1` against the tensorial transform of `S'^1`.
    NaiveContraction,
    /// Contraction of `S^2` with a vertical first jet, against the pullback
    /// of the primed contraction.
    VerticalContraction,
}

fn sign(i: usize) -> f64 {
    if i.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Pullback of a primed form at `x' = x'(x)` to the unprimed chart.
fn pull(form: &FormValue, c: &ChartData) -> Result<FormValue> {
    form.pullback(&c.forward_jac)
}

/// Maximum discrepancy of `q` over the sample points; `u` is the test
/// velocity on the unprimed chart.
pub fn invariance_check(
    q: Quantity,
    primed: &VariationalStress2,
    f: &FrameChange,
    u: &SmoothField,
    points: &[Vec<f64>],
) -> Result<f64> {
    let (n, d) = (primed.base_dim(), primed.fiber_dim());
    f.check(n, d)?;
    let up_field = primed_section(u, f)?;
    let mut worst = 0.0f64;
    for x in points {
        let c = ChartData::at(f, x)?;
        let disc = match q {
            Quantity::Action => {
                let s = transform_stress2(primed, f, x)?;
                let lhs = s.density(&jet_extension(u, x, 2)?);
                let rhs =
                    c.j * stress2_density(primed, &jet_extension(&up_field, &c.xp, 2)?, &c.xp)?;
                (lhs - rhs).abs()
            }
            Quantity::Traction => {
                let order1 = VariationalStress2::from_order1(
                    &crate::stress::VariationalStress1::new(primed.s0.clone(), primed.s1.clone())?,
                );
                let s = transform_stress2(&order1, f, x)?;
                let (uv, upv) = (u.value(x)?, up_field.value(&c.xp)?);
                let mut here = FormValue::zero(n, n - 1)?;
                let mut there = FormValue::zero(n, n - 1)?;
                let s1p = order1.s1.value(&c.xp)?;
                for k in 0..n {
                    let a: f64 = (0..d).map(|al| s.s1[al * n + k] * uv[al]).sum();
                    here.add(&omit(n, &[k]), sign(k) * a)?;
                    let b: f64 = (0..d).map(|ap| s1p[ap * n + k] * upv[ap]).sum();
                    there.add(&omit(n, &[k]), sign(k) * b)?;
                }
                here.max_abs_diff(&pull(&there, &c)?)?
            }
            Quantity::NaiveContraction => {
                let probed = probe_order1(primed, f, x)?;
                let tensorial = tensorial_order1(primed, f, x)?;
                probed
                    .iter()
                    .zip(&tensorial)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            }
            Quantity::VerticalContraction => {
                let u0 = u.value(x)?;
                let shifted = u.linear_combination(1.0, &SmoothField::constant(n, u0), -1.0)?;
                let (ju, jup) = (
                    jet_extension(&shifted, x, 1)?,
                    jet_extension(&primed_section(&shifted, f)?, &c.xp, 1)?,
                );
                let s = transform_stress2(primed, f, x)?;
                let s2p = primed.s2().value(&c.xp)?;
                let mut here = FormValue::zero(n, n - 1)?;
                let mut there = FormValue::zero(n, n - 1)?;
                for i in 0..n {
                    let (mut a, mut b) = (0.0, 0.0);
                    for j in 0..n {
                        for al in 0..d {
                            a += s.s2[(al * n + i) * n + j] * ju.get(al, &[j]);
                            b += s2p[(al * n + i) * n + j] * jup.get(al, &[j]);
                        }
                    }
                    here.add(&omit(n, &[i]), sign(i) * a)?;
                    there.add(&omit(n, &[i]), sign(i) * b)?;
                }
                here.max_abs_diff(&pull(&there, &c)?)?
            }
        };
        worst = worst.max(disc);
    }
    Ok(worst)
}

/// Maximum over the points of `|(probed S^1 - tensorial S^1) - extra term|`.
pub fn extra_term_mismatch(
    primed: &VariationalStress2,
    f: &FrameChange,
    points: &[Vec<f64>],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for x in points {
        let probed = probe_order1(primed, f, x)?;
        let tensorial = tensorial_order1(primed, f, x)?;
        let extra = predicted_extra_term(primed, f, x)?;
        for k in 0..probed.len() {
            worst = worst.max((probed[k] - tensorial[k] - extra[k]).abs());
        }
    }
    Ok(worst)
}
