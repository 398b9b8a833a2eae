use super::field::SmoothField;
use super::multiindex::MultiIndex;
use super::series::TruncatedSeries;
use crate::error::{invalid, Result};

/// Point of `J^k U` over a fixed base point: the arrays
/// `A^p_{alpha, i1..ip} = d^p w^alpha / dx^i1 .. dx^ip` for `p = 0..=k`,
/// stored densely with full index symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct JetValue {
    n: usize,
    d: usize,
    arrays: Vec<Vec<f64>>,
}

impl JetValue {
    pub fn zeros(n: usize, d: usize, order: usize) -> Self {
        let arrays = (0..=order)
            .map(|p| vec![0.0; d * n.pow(p as u32)])
            .collect();
        JetValue { n, d, arrays }
    }

    /// Reads the jet off one Taylor series per component.
    pub fn from_series(series: &[TruncatedSeries]) -> Result<Self> {
        let Some(first) = series.first() else {
            return invalid("a jet needs at least one component");
        };
        let (n, k) = (first.dim(), first.order());
        let mut jet = Self::zeros(n, series.len(), k);
        for (alpha, s) in series.iter().enumerate() {
            if s.dim() != n || s.order() != k {
                return invalid("component series have different shapes");
            }
            for p in 0..=k {
                for flat in 0..n.pow(p as u32) {
                    let axes = unflatten(n, p, flat);
                    let v = s.derivative(&MultiIndex::from_axes(n, &axes))?;
                    jet.arrays[p][alpha * n.pow(p as u32) + flat] = v;
                }
            }
        }
        Ok(jet)
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn fiber_dim(&self) -> usize {
        self.d
    }

    pub fn order(&self) -> usize {
        self.arrays.len() - 1
    }

    /// `A^p_{alpha, axes}` with `p = axes.len()`.
    pub fn get(&self, alpha: usize, axes: &[usize]) -> f64 {
        let p = axes.len();
        self.arrays[p][alpha * self.n.pow(p as u32) + flatten(self.n, axes)]
    }

    /// Sets a component and all of its index permutations.
    pub fn set(&mut self, alpha: usize, axes: &[usize], value: f64) {
        let p = axes.len();
        let stride = self.n.pow(p as u32);
        for perm in permutations(axes) {
            self.arrays[p][alpha * stride + flatten(self.n, &perm)] = value;
        }
    }

    /// Dense array of order `p`, indexed `alpha * n^p + flat(i1..ip)`.
    pub fn array(&self, p: usize) -> &[f64] {
        &self.arrays[p]
    }

    /// Drops the orders above `k`.
    pub fn truncated(&self, k: usize) -> Result<JetValue> {
        if k > self.order() {
            return invalid(format!(
                "cannot project order {} jet to order {k}",
                self.order()
            ));
        }
        Ok(JetValue {
            n: self.n,
            d: self.d,
            arrays: self.arrays[..=k].to_vec(),
        })
    }

    pub fn max_abs_diff(&self, other: &JetValue) -> Result<f64> {
        if self.n != other.n || self.d != other.d || self.order() != other.order() {
            return invalid("jets of different shapes");
        }
        Ok(self
            .arrays
            .iter()
            .flatten()
            .zip(other.arrays.iter().flatten())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

pub(crate) fn flatten(n: usize, axes: &[usize]) -> usize {
    axes.iter().fold(0, |acc, &a| acc * n + a)
}

pub(crate) fn unflatten(n: usize, p: usize, mut flat: usize) -> Vec<usize> {
    let mut axes = vec![0; p];
    for slot in axes.iter_mut().rev() {
        *slot = flat % n;
        flat /= n;
    }
    axes
}

fn permutations(axes: &[usize]) -> Vec<Vec<usize>> {
    if axes.len() <= 1 {
        return vec![axes.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..axes.len() {
        let mut rest = axes.to_vec();
        let head = rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// `j^k w (x)` from the Taylor coefficients of `w`.
pub fn jet_extension(w: &SmoothField, x: &[f64], k: usize) -> Result<JetValue> {
    JetValue::from_series(&w.taylor(x, k)?)
}

/// Central finite-difference approximation of `j^k w (x)` for `k <= 2`.
pub fn finite_difference_jet(w: &SmoothField, x: &[f64], k: usize, h: f64) -> Result<JetValue> {
    if k > 2 {
        return invalid("finite-difference jets are available up to order 2");
    }
    if h <= 0.0 || !h.is_finite() {
        return invalid(format!("step {h} must be positive"));
    }
    let n = x.len();
    let d = w.components();
    let at = |shift: &[(usize, f64)]| -> Result<Vec<f64>> {
        let mut p = x.to_vec();
        for &(i, s) in shift {
            p[i] += s;
        }
        w.value(&p)
    };
    let mut jet = JetValue::zeros(n, d, k);
    let w0 = at(&[])?;
    for (alpha, v) in w0.iter().enumerate() {
        jet.set(alpha, &[], *v);
    }
    if k >= 1 {
        for i in 0..n {
            let (p, m) = (at(&[(i, h)])?, at(&[(i, -h)])?);
            for alpha in 0..d {
                jet.set(alpha, &[i], (p[alpha] - m[alpha]) / (2.0 * h));
            }
            if k == 2 {
                for alpha in 0..d {
                    let v = (p[alpha] - 2.0 * w0[alpha] + m[alpha]) / (h * h);
                    jet.set(alpha, &[i, i], v);
                }
            }
        }
    }
    if k == 2 {
        for i in 0..n {
            for j in i + 1..n {
                let pp = at(&[(i, h), (j, h)])?;
                let pm = at(&[(i, h), (j, -h)])?;
                let mp = at(&[(i, -h), (j, h)])?;
                let mm = at(&[(i, -h), (j, -h)])?;
                for alpha in 0..d {
                    let v = (pp[alpha] - pm[alpha] - mp[alpha] + mm[alpha]) / (4.0 * h * h);
                    jet.set(alpha, &[i, j], v);
                }
            }
        }
    }
    Ok(jet)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_storage() {
        let mut j = JetValue::zeros(3, 1, 3);
        j.set(0, &[0, 2, 1], 5.0);
        assert_eq!(j.get(0, &[2, 1, 0]), 5.0);
        assert_eq!(j.get(0, &[1, 0, 2]), 5.0);
        assert_eq!(j.get(0, &[0, 0, 2]), 0.0);
    }

    #[test]
    fn jet_of_product() {
        let w = SmoothField::parse(2, &["x1^2 * x2"]).unwrap();
        let j = jet_extension(&w, &[1.0, 2.0], 2).unwrap();
        assert_eq!(j.get(0, &[]), 2.0);
        assert_eq!(j.get(0, &[0]), 4.0);
        assert_eq!(j.get(0, &[1]), 1.0);
        assert_eq!(j.get(0, &[0, 0]), 4.0);
        assert_eq!(j.get(0, &[0, 1]), 2.0);
        assert_eq!(j.get(0, &[1, 1]), 0.0);
    }

    #[test]
    fn fd_rejects_high_order() {
        let w = SmoothField::parse(1, &["x1"]).unwrap();
        assert!(finite_difference_jet(&w, &[0.0], 3, 1e-3).is_err());
    }

    #[test]
    fn index_round_trip() {
        for flat in 0..27 {
            assert_eq!(flatten(3, &unflatten(3, 3, flat)), flat);
        }
    }
}
