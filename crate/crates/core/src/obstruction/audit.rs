use rayon::prelude::*;

use crate::error::{Error, Result};
use super::terms::ModeTerms;
use crate::simulator::MemorySystem;

#[derive(Debug, Clone, PartialEq)]
pub struct HnAuditRow {
    pub n: usize,
    pub lambda_sq: f64,
    /// `λ_n² sup_t |H_n(t)|`.
    pub lam2_sup_hn: f64,
    /// `λ_n⁴ |∫₀ᵀ H_n(T−τ)(e^{−λ_n²τ} − ∫₀^τ e^{−λ_n²(τ−s)}R(s) ds) dτ|`.
    pub lam4_iterated: f64,
}

/// Modes `first..=last`.
pub fn hn_bound_audit(sys: &MemorySystem, first: usize, last: usize) -> Result<Vec<HnAuditRow>> {
    if first == 0 || first > last || last > sys.basis().len() {
        return Err(Error::config(format!("mode range {first}..={last} must lie in 1..={}", sys.basis().len())));
    }
    (first..=last)
        .into_par_iter()
        .map(|n| {
            let l = sys.basis().lambda_sq(n - 1);
            let terms = ModeTerms::compute(sys, l)?;
            Ok(HnAuditRow {
                n,
                lambda_sq: l,
                lam2_sup_hn: l * terms.sup_hn,
                lam4_iterated: l * l * terms.iterated().abs(),
            })
        })
        .collect()
}

/// `max/min` of a positive sequence; infinite if the minimum is zero.
pub fn range_ratio(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values.into_iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v.abs()), hi.max(v.abs())));
    if hi == 0.0 {
        1.0
    } else if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}
