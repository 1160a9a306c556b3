//! Second-kind Volterra equations on a uniform grid.
//!
//! Everything here uses the product trapezoid rule, so the discrete objects
//! (resolvent, `Z_n`, `H_n`, `J`) satisfy their defining identities exactly in
//! the discrete algebra and approximate the continuous ones at second order.

mod grid;
mod kernel;
mod series;
mod solver;

pub use grid::TimeGrid;
pub use kernel::{ExpPoly, Kernel};
pub use series::{
    j_kernel, j_kernel_with_tolerance, Reflected, TwoVarKernel, DEFAULT_SERIES_TOLERANCE,
    DEFAULT_TRUNCATION_ORDER,
};
pub use solver::{
    apply_second_kind, cauchy_product, convolve, exp_product_convolution, exp_decay, l_kernel, resolvent, solve_on, solve_second_kind,
    trapezoid_convolution, zn_kernel, zn_kernel_product, Negated, VolterraKernel, SINGULAR_PIVOT,
};
