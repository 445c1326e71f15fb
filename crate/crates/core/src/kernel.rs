//! Kernel matrices and finite measures on indexed target sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense symmetric nonnegative kernel. Only the diagonal may be `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    n: usize,
    values: Vec<f64>,
}

impl KernelMatrix {
    /// Builds a kernel from raw (possibly asymmetric) entries and symmetrizes
    /// it as `(F(x,y) + F(y,x)) / 2`.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = f(i, i);
            for j in i + 1..n {
                let v = 0.5 * (f(i, j) + f(j, i));
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self::validated(n, values)
    }

    /// Builds a kernel whose entries are already symmetric; only `i <= j` is evaluated.
    pub fn from_symmetric_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self::validated(n, values)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
        }
        Self::from_fn(n, |i, j| rows[i][j])
    }

    fn validated(n: usize, values: Vec<f64>) -> Result<Self> {
        for i in 0..n {
            for j in 0..n {
                let v = values[i * n + j];
                if v.is_nan() || v < 0.0 {
                    return Err(Error::InvalidKernel(format!("entry ({i},{j}) = {v} is not nonnegative")));
                }
                if v.is_infinite() && i != j {
                    return Err(Error::InvalidKernel(format!("off-diagonal entry ({i},{j}) is infinite")));
                }
            }
        }
        Ok(KernelMatrix { n, values })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_symmetric_fn(n, |i, j| if i == j { 1.0 } else { 0.0 }).expect("identity is valid")
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_symmetric_fn(n, |_, _| c)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn has_infinite_diagonal(&self, i: usize) -> bool {
        self.get(i, i).is_infinite()
    }

    /// `c * F` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("scale factor {c} must be positive")));
        }
        Ok(KernelMatrix { n: self.n, values: self.values.iter().map(|v| v * c).collect() })
    }

    /// Kernel restricted to the given indices, in order.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        let m = idx.len();
        let mut values = Vec::with_capacity(m * m);
        for &i in idx {
            for &j in idx {
                values.push(self.get(i, j));
            }
        }
        KernelMatrix { n: m, values }
    }

    /// `phi(y) = sum_x mu(x) F(x, y)` with the convention `0 * inf = 0`.
    pub fn potential(&self, mu: &Measure) -> Result<Vec<f64>> {
        self.check_dim(mu)?;
        let mut phi = vec![0.0; self.n];
        for (x, &w) in mu.weights().iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (p, &f) in phi.iter_mut().zip(self.row(x)) {
                *p += w * f;
            }
        }
        Ok(phi)
    }

    pub(crate) fn check_dim(&self, mu: &Measure) -> Result<()> {
        if mu.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: mu.len() });
        }
        Ok(())
    }
}

/// Nonnegative weights over an indexed target set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    weights: Vec<f64>,
}

impl Measure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidMeasure(format!("weight {w} is not a finite nonnegative number")));
        }
        Ok(Measure { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Measure { weights: vec![1.0 / n as f64; n] }
    }

    pub fn point(n: usize, at: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[at] = 1.0;
        Measure { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.mass() - 1.0).abs() < 1e-12
    }

    /// Rescaled to total mass one (`None` for the zero measure).
    pub fn normalized(&self) -> Option<Measure> {
        let m = self.mass();
        (m > 0.0).then(|| Measure { weights: self.weights.iter().map(|w| w / m).collect() })
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights.iter().enumerate().filter(|(_, w)| **w > 0.0).map(|(i, _)| i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_fn_symmetrizes() {
        let k = KernelMatrix::from_fn(2, |i, j| if i < j { 1.0 } else if i > j { 0.0 } else { 2.0 }).unwrap();
        assert_eq!(k.get(0, 1), 0.5);
        assert_eq!(k.get(1, 0), 0.5);
        assert_eq!(k.get(1, 1), 2.0);
    }

    #[test]
    fn rejects_infinite_off_diagonal() {
        let r = KernelMatrix::from_rows(&[vec![1.0, f64::INFINITY], vec![f64::INFINITY, 1.0]]);
        assert!(matches!(r, Err(Error::InvalidKernel(_))));
    }

    #[test]
    fn rejects_negative_entries() {
        assert!(KernelMatrix::from_rows(&[vec![-1.0]]).is_err());
        assert!(KernelMatrix::from_rows(&[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn infinite_diagonal_allowed() {
        let k = KernelMatrix::from_rows(&[vec![f64::INFINITY, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(k.has_infinite_diagonal(0));
        assert!(!k.has_infinite_diagonal(1));
    }

    #[test]
    fn measure_validation() {
        assert!(Measure::new(vec![0.5, -0.1]).is_err());
        let m = Measure::new(vec![1.0, 3.0]).unwrap().normalized().unwrap();
        assert_eq!(m.weights(), &[0.25, 0.75]);
        assert!(Measure::new(vec![0.0, 0.0]).unwrap().normalized().is_none());
    }
}
