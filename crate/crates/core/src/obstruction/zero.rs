use rayon::prelude::*;

use crate::error::{Error, Result};
use super::terms::ModeTerms;
use crate::simulator::MemorySystem;
use crate::spectral::CoefficientVector;

/// Below this the coefficient of `ξ_n` is treated as zero.
pub const DIVISION_GUARD: f64 = 1e-14;

/// Per-mode data of the problem "steer `ξ` to zero at `T`".
///
/// With no control, `θ_n(T) = (e^{−λ_n²T} − β_n) ξ_n` where
/// `β_n = (e₀∗R + H_n∗e₀ − R∗H_n∗e₀)(T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroControlProblem {
    pub horizon: f64,
    pub lambda_sq: Vec<f64>,
    pub beta: Vec<f64>,
    pub decay: Vec<f64>,
    pub r_at_t: f64,
}

impl ZeroControlProblem {
    /// Modes `1..=max_n`.
    pub fn build(sys: &MemorySystem, max_n: usize) -> Result<Self> {
        if max_n == 0 || max_n > sys.basis().len() {
            return Err(Error::config(format!("max_n = {max_n} must be in 1..={}", sys.basis().len())));
        }
        let t = sys.grid().t_final();
        let lambda_sq: Vec<f64> = sys.basis().lambda_sqs()[..max_n].to_vec();
        let beta = lambda_sq
            .par_iter()
            .map(|&l| bracket_at_t(sys, l))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            horizon: t,
            decay: lambda_sq.iter().map(|l| (-l * t).exp()).collect(),
            lambda_sq,
            beta,
            r_at_t: sys.resolvent().last(),
        })
    }

    pub fn max_n(&self) -> usize {
        self.beta.len()
    }

    /// Coefficient of `ξ_n` on the right side: `β_n − e^{−λ_n²T}`.
    pub fn coefficient(&self, n: usize) -> Result<f64> {
        let i = self.index(n)?;
        Ok(self.beta[i] - self.decay[i])
    }

    /// The transfer right side for mode `n` and initial coefficient `ξ_n`.
    pub fn rhs(&self, n: usize, xi_n: f64) -> Result<f64> {
        Ok(self.coefficient(n)? * xi_n)
    }

    /// `|β_n| λ_n²`.
    pub fn profile(&self) -> Vec<f64> {
        self.beta.iter().zip(&self.lambda_sq).map(|(b, l)| b.abs() * l).collect()
    }

    pub fn threshold(&self) -> ThresholdOutcome {
        threshold_of(self)
    }

    fn index(&self, n: usize) -> Result<usize> {
        if n == 0 || n > self.max_n() {
            return Err(Error::OutOfRange { index: n, len: self.max_n() });
        }
        Ok(n - 1)
    }
}

fn bracket_at_t(sys: &MemorySystem, lambda_sq: f64) -> Result<f64> {
    Ok(ModeTerms::compute(sys, lambda_sq)?.beta())
}

/// Right side of the zero-control transfer formula for mode `n`.
pub fn zero_control_rhs(sys: &MemorySystem, xi: &CoefficientVector, n: usize) -> Result<f64> {
    if n == 0 || n > xi.len().min(sys.basis().len()) {
        return Err(Error::OutOfRange { index: n, len: xi.len().min(sys.basis().len()) });
    }
    let xi_n = xi[n - 1];
    if xi_n == 0.0 {
        return Ok(0.0);
    }
    let l = sys.basis().lambda_sq(n - 1);
    let t = sys.grid().t_final();
    Ok((bracket_at_t(sys, l)? - (-l * t).exp()) * xi_n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdOutcome {
    /// Smallest `N` such that `|β_n|λ_n²` stays above half the plateau on `[N, max_n]`.
    pub threshold: Option<usize>,
    /// Median of `|β_n|λ_n²` over `n ∈ [max_n/10, max_n]`.
    pub plateau: f64,
    pub profile: Vec<f64>,
    pub r_at_t: f64,
}

impl ThresholdOutcome {
    pub fn is_degenerate(&self) -> bool {
        self.plateau == 0.0
    }

    pub fn verdict(&self) -> &'static str {
        match self.threshold {
            _ if self.is_degenerate() => "memoryless degenerate",
            Some(_) => "threshold found",
            None => "no threshold",
        }
    }
}

pub fn find_threshold_n(sys: &MemorySystem, max_n: usize) -> Result<ThresholdOutcome> {
    let zp = ZeroControlProblem::build(sys, max_n)?;
    Ok(zp.threshold())
}

fn threshold_of(zp: &ZeroControlProblem) -> ThresholdOutcome {
    let profile = zp.profile();
    let max_n = profile.len();
    let lo = (max_n / 10).max(1);
    let mut top: Vec<f64> = profile[lo - 1..].to_vec();
    top.sort_by(f64::total_cmp);
    let mid = top.len() / 2;
    let plateau = if top.len() % 2 == 1 { top[mid] } else { 0.5 * (top[mid - 1] + top[mid]) };
    let threshold = if plateau > 0.0 {
        let bad = profile.iter().rposition(|p| *p < 0.5 * plateau);
        match bad {
            None => Some(1),
            Some(i) if i + 1 < max_n => Some(i + 2),
            Some(_) => None,
        }
    } else {
        None
    };
    ThresholdOutcome { threshold, plateau, profile, r_at_t: zp.r_at_t }
}

/// `ξ_n = (c_n/λ_n²) / (β_n − e^{−λ_n²T})` for `n ≥ threshold`, zero below.
pub fn solve_xi_for_coefficients(zp: &ZeroControlProblem, c: &CoefficientVector, threshold: usize) -> Result<CoefficientVector> {
    if threshold == 0 || threshold > zp.max_n() {
        return Err(Error::OutOfRange { index: threshold, len: zp.max_n() });
    }
    if c.len() < zp.max_n() {
        return Err(Error::config(format!("need {} coefficients, got {}", zp.max_n(), c.len())));
    }
    let mut xi = vec![0.0; zp.max_n()];
    for n in threshold..=zp.max_n() {
        let k = zp.coefficient(n)?;
        if k.abs() < DIVISION_GUARD {
            return Err(Error::DivisionGuard { mode: n, value: k });
        }
        xi[n - 1] = c[n - 1] / zp.lambda_sq[n - 1] / k;
    }
    CoefficientVector::new(xi)
}
