use super::moment::{default_boundary_shapes, min_norm_memoryless_with, MinNormControl, MinNormOptions, MomentSystem};
use super::signal::{ControlKind, SpatialShape};
use super::transfer::{transfer_boundary, transfer_distributed, TransferredControl};
use crate::error::{Error, Result};
use crate::simulator::{ForcingSpec, MemorySystem, Route};
use crate::spectral::CoefficientVector;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub route: Route,
    pub min_norm: MinNormOptions,
    /// Boundary shapes; the defaults of [`default_boundary_shapes`] when `None`.
    pub boundary_shapes: Option<Vec<SpatialShape>>,
    pub shapes_per_face: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { route: Route::MacCamy, min_norm: MinNormOptions::default(), boundary_shapes: None, shapes_per_face: 4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub mode_count: usize,
    /// `(Σ_{n<N} (θ_n(T) − η_n)² + Σ_{n≥N} η_n²)^{1/2} / ‖η‖`.
    pub residual: f64,
    /// `‖θ(T) − η‖ / ‖η‖` over every mode of the basis.
    pub full_residual: f64,
    /// `‖θ_{n≥N}(T)‖ / ‖η‖`.
    pub spillover: f64,
    pub control_norm: f64,
    pub memoryless_cost: f64,
    pub gramian_cond: f64,
    pub regularized: bool,
}

/// One steering run: memoryless design, transfer, memory simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Steering {
    pub design: MinNormControl,
    pub transferred: TransferredControl,
    pub terminal: CoefficientVector,
}

pub fn moment_system_for(
    sys: &MemorySystem,
    target: &CoefficientVector,
    n_modes: usize,
    kind: ControlKind,
    opts: &SweepOptions,
) -> Result<MomentSystem> {
    let basis = sys.basis();
    match kind {
        ControlKind::Distributed => MomentSystem::distributed(basis, *sys.grid(), n_modes, target),
        ControlKind::Boundary => {
            let shapes = opts.boundary_shapes.clone().unwrap_or_else(|| default_boundary_shapes(basis, opts.shapes_per_face));
            MomentSystem::boundary(basis, *sys.grid(), n_modes, target, shapes, sys.window())
        }
    }
}

pub fn steer(
    sys: &MemorySystem,
    target: &CoefficientVector,
    n_modes: usize,
    kind: ControlKind,
    opts: &SweepOptions,
) -> Result<Steering> {
    if target.len() != sys.basis().len() {
        return Err(Error::config(format!("target has {} modes, basis has {}", target.len(), sys.basis().len())));
    }
    let ms = moment_system_for(sys, target, n_modes, kind, opts)?;
    let design = min_norm_memoryless_with(&ms, opts.min_norm)?;
    let transferred = match kind {
        ControlKind::Distributed => transfer_distributed(&design.signal, sys.j()?, sys.resolvent())?,
        ControlKind::Boundary => transfer_boundary(&design.signal, sys.j()?, sys.window())?,
    };
    let forcing = ForcingSpec::controlled(sys.basis().len(), transferred.physical.clone());
    let terminal = sys.simulate(&forcing, opts.route)?.terminal_checked()?;
    Ok(Steering { design, transferred, terminal })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

pub fn reachability_sweep(
    sys: &MemorySystem,
    target: &CoefficientVector,
    mode_counts: &[usize],
    kind: ControlKind,
    opts: &SweepOptions,
) -> Result<Vec<SweepPoint>> {
    let eta_norm = target.norm();
    mode_counts
        .iter()
        .map(|&n| {
            let s = steer(sys, target, n, kind, opts)?;
            let diff: Vec<f64> = s.terminal.iter().zip(target.iter()).map(|(a, b)| a - b).collect();
            let head: f64 = diff[..n].iter().map(|d| d * d).sum();
            let tail: f64 = target.values()[n..].iter().map(|v| v * v).sum();
            let full: f64 = diff.iter().map(|d| d * d).sum();
            let spill: f64 = s.terminal.values()[n..].iter().map(|v| v * v).sum();
            Ok(SweepPoint {
                mode_count: n,
                residual: ratio((head + tail).sqrt(), eta_norm),
                full_residual: ratio(full.sqrt(), eta_norm),
                spillover: ratio(spill.sqrt(), eta_norm),
                control_norm: s.transferred.physical.l2_norm(),
                memoryless_cost: s.design.cost,
                gramian_cond: s.design.gramian_cond,
                regularized: s.design.regularized,
            })
        })
        .collect()
}
