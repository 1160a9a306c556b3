use serde::{Deserialize, Serialize};

use super::grid::TimeGrid;
use crate::error::{Error, Result};

/// `(c0 + c1 t + c2 t²) e^{rate t}`.
///
/// Covers every closed-form kernel the configuration layer can name and is
/// closed under the exponential reweighting used by the gamma shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpPoly {
    pub coeffs: [f64; 3],
    pub rate: f64,
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self { coeffs: [0.0; 3], rate: 0.0 }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: [c, 0.0, 0.0], rate: 0.0 }
    }

    /// `e^{a t}`.
    pub fn exp(a: f64) -> Self {
        Self { coeffs: [1.0, 0.0, 0.0], rate: a }
    }

    pub fn poly(c0: f64, c1: f64, c2: f64) -> Self {
        Self { coeffs: [c0, c1, c2], rate: 0.0 }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let [c0, c1, c2] = self.coeffs;
        (c0 + t * (c1 + t * c2)) * (self.rate * t).exp()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let [c0, c1, c2] = self.coeffs;
        let p = c0 + t * (c1 + t * c2);
        let dp = c1 + 2.0 * c2 * t;
        (dp + self.rate * p) * (self.rate * t).exp()
    }

    /// `e^{-γ t}` times this function.
    pub fn shifted(&self, gamma: f64) -> Self {
        Self { coeffs: self.coeffs, rate: self.rate - gamma }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { coeffs: self.coeffs.map(|c| c * factor), rate: self.rate }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Parse `zero`, `constant c`, `exp a` or `poly c0 c1 c2`.
    ///
    /// Tabulated kernels (`table <path>`) need file access and are handled by
    /// the caller through [`Kernel::from_samples`].
    pub fn parse(spec: &str) -> Result<Self> {
        let mut words = spec.split_whitespace();
        let name = words.next().unwrap_or("");
        let args: Vec<f64> = words
            .map(|w| {
                w.parse::<f64>()
                    .map_err(|_| Error::config(format!("kernel '{spec}': '{w}' is not a number")))
            })
            .collect::<Result<_>>()?;
        let arity = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::config(format!(
                    "kernel '{name}' takes {n} argument(s), got {}",
                    args.len()
                )))
            }
        };
        let form = match name {
            "zero" => {
                arity(0)?;
                Self::zero()
            }
            "constant" => {
                arity(1)?;
                Self::constant(args[0])
            }
            "exp" => {
                arity(1)?;
                Self::exp(args[0])
            }
            "poly" => {
                arity(3)?;
                Self::poly(args[0], args[1], args[2])
            }
            other => return Err(Error::config(format!("unknown kernel form '{other}'"))),
        };
        if form.coeffs.iter().chain([&form.rate]).any(|c| !c.is_finite()) {
            return Err(Error::config(format!("kernel '{spec}' has non-finite parameters")));
        }
        Ok(form)
    }
}

/// A scalar function of time sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    grid: TimeGrid,
    values: Vec<f64>,
    derivative: Option<Vec<f64>>,
    label: String,
}

impl Kernel {
    pub fn from_closed_form(grid: TimeGrid, form: &ExpPoly, label: impl Into<String>) -> Self {
        Self {
            grid,
            values: grid.sample(|t| form.eval(t)),
            derivative: Some(grid.sample(|t| form.derivative(t))),
            label: label.into(),
        }
    }

    pub fn from_samples(grid: TimeGrid, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        grid.ensure_len(&values, "kernel")?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("kernel samples must be finite"));
        }
        Ok(Self { grid, values, derivative: None, label: label.into() })
    }

    pub fn zero(grid: TimeGrid) -> Self {
        Self::from_closed_form(grid, &ExpPoly::zero(), "zero")
    }

    pub fn with_derivative(mut self, derivative: Vec<f64>) -> Result<Self> {
        self.grid.ensure_len(&derivative, "kernel derivative")?;
        self.derivative = Some(derivative);
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn derivative_values(&self) -> Option<&[f64]> {
        self.derivative.as_deref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn at0(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("grid has at least three nodes")
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
            derivative: self.derivative.as_ref().map(|d| d.iter().map(|v| v * factor).collect()),
            label: if factor == -1.0 { format!("-({})", self.label) } else { format!("{factor}*({})", self.label) },
        }
    }

    /// `e^{-γt} k(t)`, carrying the derivative along when it is known.
    pub fn exp_weighted(&self, gamma: f64) -> Self {
        if gamma == 0.0 {
            return self.clone();
        }
        let w = self.grid.sample(|t| (-gamma * t).exp());
        let values: Vec<f64> = self.values.iter().zip(&w).map(|(v, e)| v * e).collect();
        let derivative = self.derivative.as_ref().map(|d| {
            d.iter()
                .zip(&self.values)
                .zip(&w)
                .map(|((dv, v), e)| (dv - gamma * v) * e)
                .collect()
        });
        Self { grid: self.grid, values, derivative, label: format!("exp(-{gamma}t)*({})", self.label) }
    }

    /// The stored derivative, or second-order finite differences (centred in the
    /// interior, one-sided at both ends).
    pub fn derivative_or_fd(&self) -> Vec<f64> {
        if let Some(d) = &self.derivative {
            return d.clone();
        }
        let v = &self.values;
        let n = v.len() - 1;
        let h = self.grid.step();
        let mut d = vec![0.0; v.len()];
        d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        for k in 1..n {
            d[k] = (v[k + 1] - v[k - 1]) / (2.0 * h);
        }
        d[n] = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
        d
    }
}
