use rayon::prelude::*;

use crate::control::{min_norm_memoryless_with, MinNormOptions, MomentSystem};
use crate::error::{Error, Result};
use crate::spectral::{sobolev_decay_fit, CoefficientVector, DecayFit, Region, SpectralBasis};
use crate::volterra::TimeGrid;

/// `η(x) = (δ² − |x − x₀|²)²₊`: C¹ with jumping second derivative, so in `H²` but not `H³`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoughTarget {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Projected coefficients `η_n`.
    pub eta: CoefficientVector,
    /// `d_n = λ_n² η_n`.
    pub d: CoefficientVector,
    /// `None` when the basis is too small to fit.
    pub fit: Option<DecayFit>,
}

impl RoughTarget {
    pub fn eval(&self, x: &[f64]) -> f64 {
        biweight(&self.center, self.radius, x)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self { eta: self.eta.scaled(alpha), d: self.d.scaled(alpha), ..self.clone() }
    }
}

fn biweight(center: &[f64], radius: f64, x: &[f64]) -> f64 {
    let r2: f64 = center.iter().zip(x).map(|(c, v)| (v - c) * (v - c)).sum();
    let s = radius * radius - r2;
    if s > 0.0 {
        s * s
    } else {
        0.0
    }
}

pub fn build_rough_target(basis: &SpectralBasis, center: &[f64], radius: f64) -> Result<RoughTarget> {
    let domain = basis.domain();
    if center.len() != domain.dim() {
        return Err(Error::config(format!("center has {} coordinates, domain has {}", center.len(), domain.dim())));
    }
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::config(format!("radius must be positive, got {radius}")));
    }
    let omega_tilde = domain.omega_tilde.as_ref().ok_or_else(|| Error::config("rough target needs ω̃"))?;
    let support = Region::new(center.iter().map(|c| (c - radius, c + radius)).collect())?;
    let inside = support.bounds.iter().zip(&omega_tilde.bounds).all(|(s, w)| w.0 < s.0 && s.1 < w.1);
    if !inside {
        return Err(Error::config(format!("support {:?} is not strictly inside ω̃ {:?}", support.bounds, omega_tilde.bounds)));
    }
    let eta = basis.project_fn_on(&support, |x| biweight(center, radius, x))?;
    let d = CoefficientVector::from_fn(eta.len(), |n| basis.lambda_sq(n) * eta[n]);
    let fit = match sobolev_decay_fit(&eta, basis) {
        Ok(f) => Some(f),
        Err(Error::UndefinedFit(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(RoughTarget { center: center.to_vec(), radius, eta, d, fit })
}

/// `e^{−λ_n²} sign(d_n)`.
pub fn smooth_reference(basis: &SpectralBasis, rough: &RoughTarget) -> CoefficientVector {
    CoefficientVector::from_fn(rough.d.len(), |n| {
        let d = rough.d[n];
        let s = if d > 0.0 {
            1.0
        } else if d < 0.0 {
            -1.0
        } else {
            0.0
        };
        s * (-basis.lambda_sq(n)).exp()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupPoint {
    pub mode_count: usize,
    pub cost_rough: f64,
    pub cost_smooth: f64,
    pub gramian_cond: f64,
    pub regularized: bool,
}

/// Minimum-norm distributed cost of reaching `d_n/λ_n²`, `n ≤ N`, against the smooth reference.
pub fn blowup_experiment(
    basis: &SpectralBasis,
    grid: TimeGrid,
    rough: &RoughTarget,
    mode_counts: &[usize],
    opts: MinNormOptions,
) -> Result<Vec<BlowupPoint>> {
    if let (Some(omega), Some(tilde)) = (&basis.domain().omega, &basis.domain().omega_tilde) {
        if omega.touches(tilde) {
            return Err(Error::config("ω and ω̃ must be disjoint"));
        }
    }
    let smooth = smooth_reference(basis, rough);
    mode_counts
        .par_iter()
        .map(|&n| {
            let r = min_norm_memoryless_with(&MomentSystem::distributed(basis, grid, n, &rough.eta)?, opts)?;
            let s = min_norm_memoryless_with(&MomentSystem::distributed(basis, grid, n, &smooth)?, opts)?;
            Ok(BlowupPoint {
                mode_count: n,
                cost_rough: r.cost,
                cost_smooth: s.cost,
                gramian_cond: r.gramian_cond,
                regularized: r.regularized || s.regularized,
            })
        })
        .collect()
}
