//! Numerical machinery for the Coleman–Gurtin heat equation with memory
//!
//! ```text
//! θ' = aθ + Δθ + ∫₀ᵗ M(t−s) Δθ(s) ds + F
//! ```
//!
//! on intervals and rectangular boxes with Dirichlet boundary data.
//!
//! The crate is organised bottom-up:
//!
//! * [`volterra`]: second-kind Volterra solver, resolvent kernels, the `L`, `Z_n`
//!   and `J` kernels of the MacCamy reduction.
//! * [`spectral`]: analytic Dirichlet eigenpairs, projections and boundary moments.
//! * [`simulator`]: modal simulation by three independent routes.
//! * [`control`]: minimum-norm moment controls for the memoryless equation and
//!   their transfer to the memory system.
//! * [`obstruction`]: the zero-control transfer formula, rough targets and the
//!   control-cost blow-up experiment.

pub mod control;
pub mod error;
pub mod obstruction;
pub mod simulator;
pub mod spectral;
pub mod volterra;

pub use control::{ControlKind, ControlSignal, MinNormControl, MomentSystem, SweepPoint};
pub use error::{Error, Result};
pub use obstruction::{BlowupPoint, HnAuditRow, RoughTarget, ThresholdOutcome};
pub use simulator::{ForcingSpec, MemorySystem, ModalTrajectory, Route};
pub use spectral::{CoefficientVector, Domain, DomainKind, Face, Region, SpectralBasis};
pub use volterra::{ExpPoly, Kernel, TimeGrid, TwoVarKernel, VolterraKernel};
