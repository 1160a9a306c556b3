use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `t_k = k * step`, `k = 0..=n_steps`, on `[0, t_final]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_final: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, n_steps: usize) -> Result<Self> {
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::config(format!("t_final must be positive, got {t_final}")));
        }
        if n_steps < 2 {
            return Err(Error::config(format!("n_steps must be >= 2, got {n_steps}")));
        }
        Ok(Self { t_final, n_steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn step(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    /// Number of nodes, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_final
        } else {
            k as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.node(k)).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.len()).map(|k| f(self.node(k))).collect()
    }

    /// Same horizon with `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.t_final, self.n_steps * factor.max(1))
    }

    pub fn ensure_same(&self, other: &TimeGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "grid (T={}, n={}) vs (T={}, n={})",
                self.t_final, self.n_steps, other.t_final, other.n_steps
            )))
        }
    }

    pub fn ensure_len(&self, samples: &[f64], what: &str) -> Result<()> {
        if samples.len() == self.len() {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what} has {} samples, grid has {} nodes",
                samples.len(),
                self.len()
            )))
        }
    }

    /// Trapezoid weights (without the factor `step`) for `∫₀^{t_k}`.
    pub fn trapezoid_weights(k: usize) -> impl Iterator<Item = f64> {
        (0..=k).map(move |i| if i == 0 || i == k { 0.5 } else { 1.0 })
    }
}
