use std::ops::Index;

use crate::error::{Error, Result};

/// Modal coefficients; entry `i` belongs to the `(i+1)`-th eigenpair.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoefficientVector {
    values: Vec<f64>,
}

impl CoefficientVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("coefficient {i} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }

    /// `e_k` with `n` entries.
    pub fn unit(n: usize, k: usize) -> Self {
        let mut values = vec![0.0; n];
        values[k] = 1.0;
        Self { values }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> f64) -> Self {
        Self { values: (0..n).map(f).collect() }
    }

    pub fn mode_count(&self) -> usize {
        self.values.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.values.iter()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * factor).collect() }
    }

    /// First `n` entries (zero-padded if shorter).
    pub fn truncated(&self, n: usize) -> Self {
        Self { values: (0..n).map(|i| self.values.get(i).copied().unwrap_or(0.0)).collect() }
    }

    /// `sqrt(Σ_{i≥k} v_i²)` for every `k`; nonincreasing by construction.
    pub fn tail_norms(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out: Vec<f64> = self
            .values
            .iter()
            .rev()
            .map(|v| {
                acc += v * v;
                acc.sqrt()
            })
            .collect();
        out.reverse();
        out
    }
}

impl Index<usize> for CoefficientVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl From<CoefficientVector> for Vec<f64> {
    fn from(c: CoefficientVector) -> Self {
        c.values
    }
}
