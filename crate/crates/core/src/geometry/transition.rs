use super::linalg::det;
use crate::error::{invalid, Result};
use crate::jetcore::{SmoothField, TruncatedSeries};

/// Chart change `x -> x'` with its inverse `x' -> x`.
#[derive(Debug, Clone)]
pub struct TransitionMap {
    forward: SmoothField,
    inverse: SmoothField,
}

impl TransitionMap {
    /// Checks `inverse(forward(x)) = x` within `1e-10` and `det dx'/dx != 0`
    /// at every sample point.
    pub fn new(forward: SmoothField, inverse: SmoothField, samples: &[Vec<f64>]) -> Result<Self> {
        let n = forward.dim();
        if forward.components() != n || inverse.dim() != n || inverse.components() != n {
            return invalid("transition maps must go from R^n to R^n");
        }
        let t = TransitionMap { forward, inverse };
        for x in samples {
            let back = t.inverse.value(&t.forward.value(x)?)?;
            let err = back
                .iter()
                .zip(x)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if err > 1e-10 {
                return invalid(format!(
                    "inverse transition misses the round trip by {err:e} at {x:?}"
                ));
            }
            let j = t.jacobian_det(x)?;
            if j.abs() < 1e-12 {
                return invalid(format!("transition is singular at {x:?}"));
            }
        }
        Ok(t)
    }

    pub fn identity(n: usize) -> Self {
        TransitionMap {
            forward: SmoothField::identity(n),
            inverse: SmoothField::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.forward.dim()
    }

    pub fn forward(&self) -> &SmoothField {
        &self.forward
    }

    pub fn inverse(&self) -> &SmoothField {
        &self.inverse
    }

    /// The reverse chart change `x' -> x`.
    pub fn swapped(&self) -> Self {
        TransitionMap {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    /// `J = det(dx'^i / dx^j)` at `x`.
    pub fn jacobian_det(&self, x: &[f64]) -> Result<f64> {
        let jac = self.jacobian(x)?;
        Ok(det(&jac, &0.0))
    }

    /// `dx'^i / dx^j` at `x`, rows indexed by `i`.
    pub fn jacobian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        series_jacobian(&self.forward.taylor(x, 1)?)
    }
}

fn series_jacobian(s: &[TruncatedSeries]) -> Result<Vec<Vec<f64>>> {
    s.iter()
        .map(|c| {
            (0..c.dim())
                .map(|a| c.differentiate(a).map(|d| d.value()))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_shear() {
        let f = SmoothField::parse(2, &["x1 + x2^2", "x2"]).unwrap();
        let g = SmoothField::parse(2, &["x1 - x2^2", "x2"]).unwrap();
        let t = TransitionMap::new(f, g, &[vec![0.3, 0.7], vec![-1.0, 2.0]]).unwrap();
        assert_eq!(t.jacobian_det(&[0.3, 0.7]).unwrap(), 1.0);
        assert_eq!(t.jacobian(&[0.3, 0.7]).unwrap()[0][1], 1.4);
    }

    #[test]
    fn rejects_wrong_inverse() {
        let f = SmoothField::parse(1, &["2*x1"]).unwrap();
        let g = SmoothField::parse(1, &["x1"]).unwrap();
        assert!(TransitionMap::new(f, g, &[vec![1.0]]).is_err());
    }

    #[test]
    fn rejects_singular() {
        let f = SmoothField::parse(1, &["x1^3"]).unwrap();
        let g = SmoothField::parse(1, &["x1"]).unwrap();
        assert!(TransitionMap::new(f, g, &[vec![0.0]]).is_err());
    }
}
