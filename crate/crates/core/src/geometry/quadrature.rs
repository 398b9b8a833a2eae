use crate::error::{invalid, Result};

/// Tensor-product Gauss-Legendre rule with `order` nodes per axis; exact for
/// polynomials of degree `2 * order - 1` in each variable.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 || order > 200 {
            return invalid(format!("quadrature order {order} must be in 1..=200"));
        }
        let (nodes, weights) = gauss_legendre(order);
        Ok(QuadratureRule {
            order,
            nodes,
            weights,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Nodes and weights on `[-1, 1]`.
    pub fn reference(&self) -> (&[f64], &[f64]) {
        (&self.nodes, &self.weights)
    }

    /// Tensor-product nodes and weights on the box `[lower, upper]`. A
    /// zero-dimensional box has one node of weight 1.
    pub fn box_nodes(&self, lower: &[f64], upper: &[f64]) -> Vec<(Vec<f64>, f64)> {
        let mut out = vec![(Vec::with_capacity(lower.len()), 1.0)];
        for (a, b) in lower.iter().zip(upper) {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let mut next = Vec::with_capacity(out.len() * self.order);
            for (p, w) in &out {
                for (t, v) in self.nodes.iter().zip(&self.weights) {
                    let mut q = p.clone();
                    q.push(mid + half * t);
                    next.push((q, w * v * half));
                }
            }
            out = next;
        }
        out
    }
}

fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

// P_n(x) and P_n'(x) by the three-term recurrence
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_monomials_exactly() {
        for order in 1..=12 {
            let q = QuadratureRule::new(order).unwrap();
            for deg in 0..2 * order {
                let got: f64 = q
                    .box_nodes(&[0.0], &[1.0])
                    .iter()
                    .map(|(p, w)| w * p[0].powi(deg as i32))
                    .sum();
                assert!(
                    (got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14,
                    "order {order} deg {deg}"
                );
            }
        }
    }

    #[test]
    fn zero_dimensional_box() {
        let q = QuadratureRule::new(3).unwrap();
        let nodes = q.box_nodes(&[], &[]);
        assert_eq!(nodes.len(), 1);
        assert_eq!(nodes[0].1, 1.0);
    }

    #[test]
    fn rejects_order_zero() {
        assert!(QuadratureRule::new(0).is_err());
    }
}
