//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;
use std::sync::Arc;

use memheat_core::{CoefficientVector, Domain, ExpPoly, Kernel, MemorySystem, Region, SpectralBasis, TimeGrid};

pub fn exp_kernel(t: f64, n_steps: usize) -> Kernel {
    Kernel::from_closed_form(TimeGrid::new(t, n_steps).unwrap(), &ExpPoly::exp(-1.0), "exp -1")
}

/// Interval `(0, π)` with `ω = (0, π/2)` and `ω̃ = (2, 2.8)`.
pub fn interval_basis(modes: usize) -> Arc<SpectralBasis> {
    let domain = Domain::interval(PI)
        .and_then(|d| d.with_omega(Region::interval(0.0, PI / 2.0)?))
        .and_then(|d| d.with_omega_tilde(Region::interval(2.0, 2.8)?))
        .unwrap();
    Arc::new(SpectralBasis::build(domain, modes).unwrap())
}

pub fn exp_system(n_steps: usize, modes: usize) -> MemorySystem {
    MemorySystem::new(exp_kernel(1.0, n_steps), -1.0, interval_basis(modes)).unwrap()
}

pub fn harmonic(k: usize) -> CoefficientVector {
    CoefficientVector::from_fn(k, |n| 1.0 / (n + 1) as f64)
}
