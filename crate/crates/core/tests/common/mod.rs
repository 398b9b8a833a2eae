//! Dense polynomial arithmetic with exact box integrals, used as an oracle
//! independent of the truncated-series engine.
#![allow(dead_code)]

use std::collections::BTreeMap;

use hyperstress::jetcore::{MultiIndex, Polynomial, SmoothField};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub n: usize,
    pub terms: BTreeMap<Vec<u32>, f64>,
}

fn exponents(n: usize, degree: usize) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for e in 0..=degree {
        for mut rest in exponents(n - 1, degree - e) {
            rest.insert(0, e as u32);
            out.push(rest);
        }
    }
    out
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        Poly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn random<R: Rng>(rng: &mut R, n: usize, degree: usize) -> Self {
        let terms = exponents(n, degree)
            .into_iter()
            .map(|e| (e, rng.gen_range(-1.0..1.0)))
            .collect();
        Poly { n, terms }
    }

    pub fn random_vec<R: Rng>(rng: &mut R, n: usize, degree: usize, count: usize) -> Vec<Poly> {
        (0..count).map(|_| Poly::random(rng, n, degree)).collect()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut t = self.terms.clone();
        for (e, c) in &o.terms {
            *t.entry(e.clone()).or_insert(0.0) += c;
        }
        Poly {
            n: self.n,
            terms: t,
        }
    }

    pub fn scale(&self, f: f64) -> Poly {
        Poly {
            n: self.n,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * f)).collect(),
        }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut t: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (e, c) in &self.terms {
            for (f, k) in &o.terms {
                let s: Vec<u32> = e.iter().zip(f).map(|(a, b)| a + b).collect();
                *t.entry(s).or_insert(0.0) += c * k;
            }
        }
        Poly {
            n: self.n,
            terms: t,
        }
    }

    pub fn deriv(&self, axis: usize) -> Poly {
        let mut t = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[axis] > 0 {
                let mut f = e.clone();
                f[axis] -= 1;
                *t.entry(f).or_insert(0.0) += c * e[axis] as f64;
            }
        }
        Poly {
            n: self.n,
            terms: t,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(x)
                    .map(|(p, v)| v.powi(*p as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Exact integral over the box `[lower, upper]`.
    pub fn integrate(&self, lower: &[f64], upper: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| {
                        let q = p as i32 + 1;
                        (upper[i].powi(q) - lower[i].powi(q)) / q as f64
                    })
                    .product::<f64>()
            })
            .sum()
    }
}

pub fn dot(a: &[Poly], b: &[Poly]) -> Poly {
    a.iter()
        .zip(b)
        .fold(Poly::zero(a[0].n), |acc, (p, q)| acc.add(&p.mul(q)))
}

pub fn field(polys: &[Poly]) -> SmoothField {
    let n = polys[0].n;
    let ps = polys
        .iter()
        .map(|p| {
            Polynomial::new(
                n,
                p.terms
                    .iter()
                    .map(|(e, c)| (MultiIndex::new(e.clone()), *c))
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    SmoothField::from_polynomials(n, ps).unwrap()
}

pub fn values(polys: &[Poly], x: &[f64]) -> Vec<f64> {
    polys.iter().map(|p| p.eval(x)).collect()
}

/// Sign of the permutation `p` of `0..p.len()`, zero when indices repeat.
pub fn levi_civita(p: &[usize]) -> f64 {
    let mut s = 1.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] == p[j] {
                return 0.0;
            }
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

pub fn random_point<R: Rng>(rng: &mut R, lower: &[f64], upper: &[f64]) -> Vec<f64> {
    lower
        .iter()
        .zip(upper)
        .map(|(a, b)| rng.gen_range(*a..*b))
        .collect()
}
