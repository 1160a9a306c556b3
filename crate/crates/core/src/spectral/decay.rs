use super::basis::SpectralBasis;
use super::coeffs::CoefficientVector;
use crate::error::{Error, Result};

/// Coefficients below this fraction of the largest one are treated as zero.
pub const ZERO_FLOOR: f64 = 1e-13;

/// Least-squares fit `|ξ_n| ≈ C λ_n^{−s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub exponent: f64,
    /// RMS of the log–log residuals.
    pub residual: f64,
    pub points_used: usize,
}

impl DecayFit {
    /// Decay faster than any power the window can resolve.
    pub fn is_super_polynomial(&self) -> bool {
        self.exponent > 10.0
    }
}

/// Fit over modes `[K/8, K)` of the `K` supplied coefficients.
///
/// Sine coefficients of piecewise-smooth fields oscillate (parity zeros,
/// beating between the two kink locations), so the window reaches well below
/// the top half to average over several oscillation periods. If every
/// coefficient in the window is negligible while earlier ones are not, the
/// decay is reported as infinite.
pub fn sobolev_decay_fit(coeffs: &CoefficientVector, basis: &SpectralBasis) -> Result<DecayFit> {
    let k = coeffs.len().min(basis.len());
    if k < 16 {
        return Err(Error::UndefinedFit(format!("need at least 16 modes, got {k}")));
    }
    let max = coeffs.iter().take(k).fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return Err(Error::UndefinedFit("all coefficients are zero".into()));
    }
    let floor = ZERO_FLOOR * max;
    let (xs, ys): (Vec<f64>, Vec<f64>) = (k / 8..k)
        .filter(|&n| coeffs[n].abs() > floor)
        .map(|n| (0.5 * basis.lambda_sq(n).ln(), coeffs[n].abs().ln()))
        .unzip();
    if xs.len() < 2 {
        return Ok(DecayFit { exponent: f64::INFINITY, residual: 0.0, points_used: xs.len() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::UndefinedFit("fit window has a single eigenvalue".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual =
        (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(DecayFit { exponent: -slope, residual, points_used: xs.len() })
}
