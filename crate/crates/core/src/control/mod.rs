//! Moment-based controls for the memoryless heat equation and their transfer to
//! the system with memory.

mod moment;
mod signal;
mod sweep;
mod transfer;

#[cfg(test)]
mod tests;

pub use moment::{
    default_boundary_shapes, gramian_condition, min_norm_memoryless, min_norm_memoryless_with, MinNormControl,
    MinNormOptions, MomentSystem, DEFAULT_COND_THRESHOLD, DEFAULT_TIKHONOV_FLOOR,
};
pub use signal::{ControlKind, ControlSignal, SpatialShape};
pub use sweep::{moment_system_for, reachability_sweep, steer, Steering, SweepOptions, SweepPoint};
pub use transfer::{transfer_boundary, transfer_distributed, transfer_forward, TransferredControl};
