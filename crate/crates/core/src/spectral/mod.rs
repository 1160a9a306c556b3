//! Dirichlet eigenpairs of intervals and boxes.
//!
//! Modes are `φ_n(x) = Π_d sqrt(2/ℓ_d) sin(n_d π x_d / ℓ_d)`, sorted by `λ_n²`
//! with ties broken by the index tuple. All integrals use composite
//! Gauss–Legendre rules resolving the highest active mode on each axis.

mod basis;
mod coeffs;
mod decay;
mod domain;
mod quadrature;

pub use basis::{BoundaryNode, Mode, SpectralBasis, DEFAULT_MODE_CAP};
pub use coeffs::CoefficientVector;
pub use decay::{sobolev_decay_fit, DecayFit, ZERO_FLOOR};
pub use domain::{Domain, DomainKind, Face, Region};
pub use quadrature::{gauss_legendre, Rule1D, TensorQuadrature, PANEL_ORDER};

/// Direction of the `c_n ↔ ξ_n = c_n / λ_n²` map describing `dom A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomA {
    /// `c ↦ ξ`, divide by `λ_n²`.
    ToState,
    /// `ξ ↦ c`, multiply by `λ_n²`.
    ToGenerator,
}

pub fn dom_a_coefficients(coeffs: &CoefficientVector, basis: &SpectralBasis, direction: DomA) -> CoefficientVector {
    CoefficientVector::from_fn(coeffs.len(), |n| {
        let l2 = basis.lambda_sq(n);
        match direction {
            DomA::ToState => coeffs[n] / l2,
            DomA::ToGenerator => coeffs[n] * l2,
        }
    })
}
