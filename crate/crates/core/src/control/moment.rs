use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use super::signal::{shape_couplings, ControlKind, ControlSignal, SpatialShape};
use crate::error::{Error, Result};
use crate::spectral::{CoefficientVector, SpectralBasis};
use crate::volterra::TimeGrid;

pub const DEFAULT_COND_THRESHOLD: f64 = 1e12;
pub const DEFAULT_TIKHONOV_FLOOR: f64 = 1e-12;

/// Finite moment problem `Σ_m B_{nm} ∫₀ᵀ e^{−λ_n²(T−r)} v_m(r) dr = s η_n`, `n < N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSystem {
    pub kind: ControlKind,
    pub grid: TimeGrid,
    pub shapes: Vec<SpatialShape>,
    /// `N × shapes`.
    pub couplings: Vec<Vec<f64>>,
    pub lambda_sq: Vec<f64>,
    pub eta: Vec<f64>,
    /// Controls are confined to `[0, support_end]`.
    pub support_end: f64,
}

impl MomentSystem {
    /// Shapes `χ_ω φ_m`, `m < n_modes`.
    pub fn distributed(basis: &SpectralBasis, grid: TimeGrid, n_modes: usize, eta: &CoefficientVector) -> Result<Self> {
        let shapes = (0..n_modes).map(SpatialShape::MaskedMode).collect();
        Self::new(ControlKind::Distributed, basis, grid, n_modes, eta, shapes, 0.0)
    }

    /// Boundary shapes on `Γ`, controls vanishing on `(T − window, T]`.
    pub fn boundary(
        basis: &SpectralBasis,
        grid: TimeGrid,
        n_modes: usize,
        eta: &CoefficientVector,
        shapes: Vec<SpatialShape>,
        window: f64,
    ) -> Result<Self> {
        Self::new(ControlKind::Boundary, basis, grid, n_modes, eta, shapes, window)
    }

    pub fn new(
        kind: ControlKind,
        basis: &SpectralBasis,
        grid: TimeGrid,
        n_modes: usize,
        eta: &CoefficientVector,
        shapes: Vec<SpatialShape>,
        window: f64,
    ) -> Result<Self> {
        if n_modes == 0 || n_modes > basis.len() {
            return Err(Error::config(format!("mode set size {n_modes} must be in 1..={}", basis.len())));
        }
        if shapes.is_empty() {
            return Err(Error::config("control needs at least one spatial shape"));
        }
        if !(0.0..grid.t_final()).contains(&window) {
            return Err(Error::config(format!("trailing window {window} must be in [0, T)")));
        }
        let mut couplings = shape_couplings(kind, &shapes, basis)?;
        couplings.truncate(n_modes);
        Ok(Self {
            kind,
            grid,
            shapes,
            couplings,
            lambda_sq: basis.lambda_sqs()[..n_modes].to_vec(),
            eta: eta.truncated(n_modes).into_vec(),
            support_end: grid.t_final() - window,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.lambda_sq.len()
    }

    /// Trapezoid weights `h w_j` restricted to the control support.
    fn time_weights(&self) -> Vec<f64> {
        let h = self.grid.step();
        let n = self.grid.n_steps();
        (0..=n)
            .map(|j| {
                if self.grid.node(j) > self.support_end + 1e-12 * self.grid.t_final() {
                    0.0
                } else if j == 0 || j == n {
                    0.5 * h
                } else {
                    h
                }
            })
            .collect()
    }

    /// `e^{−λ_n²(T − t_j)}` for each active mode.
    fn exponentials(&self) -> Vec<Vec<f64>> {
        let t = self.grid.t_final();
        self.lambda_sq.iter().map(|l| self.grid.sample(|s| (-l * (t - s)).exp())).collect()
    }

    /// `W_{nk} = Σ_m B_{nm} B_{km} Σ_j h w_j e^{−(λ_n²+λ_k²)(T−t_j)}`.
    pub fn gramian(&self) -> DMatrix<f64> {
        let n = self.mode_count();
        let w = self.time_weights();
        let e = self.exponentials();
        let bb: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|k| self.couplings[i].iter().zip(&self.couplings[k]).map(|(a, b)| a * b).sum()).collect())
            .collect();
        let entries: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|k| {
                        if k < i {
                            return 0.0;
                        }
                        let q: f64 = w.iter().zip(&e[i]).zip(&e[k]).map(|((w, a), b)| w * a * b).sum();
                        bb[i][k] * q
                    })
                    .collect()
            })
            .collect();
        DMatrix::from_fn(n, n, |i, k| if k >= i { entries[i][k] } else { entries[k][i] })
    }

    /// `v_m(t_j) = s Σ_n B_{nm} e^{−λ_n²(T−t_j)} c_n` on the support.
    pub fn profiles(&self, c: &[f64]) -> Vec<Vec<f64>> {
        let s = self.kind.sign();
        let e = self.exponentials();
        let mask: Vec<f64> = self.time_weights().iter().map(|w| if *w > 0.0 { 1.0 } else { 0.0 }).collect();
        (0..self.shapes.len())
            .map(|m| {
                (0..self.grid.len())
                    .map(|j| s * mask[j] * (0..self.mode_count()).map(|n| self.couplings[n][m] * e[n][j] * c[n]).sum::<f64>())
                    .collect()
            })
            .collect()
    }

    /// Achieved moments `s Σ_m B_{nm} Σ_j h w_j e^{−λ_n²(T−t_j)} v_m(t_j)` for each active mode.
    pub fn moments(&self, profiles: &[Vec<f64>]) -> Vec<f64> {
        let s = self.kind.sign();
        let w = self.time_weights();
        let e = self.exponentials();
        (0..self.mode_count())
            .map(|n| {
                s * profiles
                    .iter()
                    .enumerate()
                    .map(|(m, p)| self.couplings[n][m] * p.iter().zip(&w).zip(&e[n]).map(|((v, w), e)| v * w * e).sum::<f64>())
                    .sum::<f64>()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinNormOptions {
    /// Above this condition number the Gramian is regularized.
    pub cond_threshold: f64,
    /// Tikhonov shift relative to `trace(W)/dim(W)`.
    pub tikhonov_floor: f64,
}

impl Default for MinNormOptions {
    fn default() -> Self {
        Self { cond_threshold: DEFAULT_COND_THRESHOLD, tikhonov_floor: DEFAULT_TIKHONOV_FLOOR }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinNormControl {
    pub signal: ControlSignal,
    pub coefficients: Vec<f64>,
    pub gramian_cond: f64,
    /// The Tikhonov shift was applied; moments then match only approximately.
    pub regularized: bool,
    pub epsilon: f64,
    /// `‖v‖_{L²(0,T)}`.
    pub cost: f64,
    /// `|Wc − η|∞ / |η|∞`.
    pub moment_residual: f64,
}

pub fn gramian_condition(w: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(w.clone()).eigenvalues;
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Minimum-norm control of the memoryless equation within the exponential ansatz.
pub fn min_norm_memoryless(ms: &MomentSystem) -> Result<MinNormControl> {
    min_norm_memoryless_with(ms, MinNormOptions::default())
}

pub fn min_norm_memoryless_with(ms: &MomentSystem, opts: MinNormOptions) -> Result<MinNormControl> {
    let n = ms.mode_count();
    let w = ms.gramian();
    let eta = DVector::from_column_slice(&ms.eta);
    let cond = gramian_condition(&w);
    let eta_max = ms.eta.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut regularized = cond > opts.cond_threshold;
    let mut epsilon = 0.0;
    let mut solution = None;
    if !regularized {
        solution = w.clone().cholesky().map(|ch| ch.solve(&eta));
        regularized = solution.is_none();
    }
    if regularized {
        epsilon = opts.tikhonov_floor * w.trace() / n as f64;
        let shifted = &w + DMatrix::identity(n, n) * epsilon;
        solution = shifted.cholesky().map(|ch| ch.solve(&eta));
    }
    let c = solution.ok_or_else(|| Error::Numerical("Gramian is not positive definite even after regularization".into()))?;

    let achieved = &w * &c;
    let moment_residual = if eta_max == 0.0 {
        0.0
    } else {
        (achieved - &eta).amax() / eta_max
    };
    let coefficients: Vec<f64> = c.iter().copied().collect();
    let signal = ControlSignal::new(ms.kind, ms.grid, ms.shapes.clone(), ms.profiles(&coefficients))?;
    let cost = c.dot(&(&w * &c)).max(0.0).sqrt();
    Ok(MinNormControl { signal, coefficients, gramian_cond: cond, regularized, epsilon, cost, moment_residual })
}

/// Boundary shapes used when none are configured: the face indicators on an
/// interval, `Π_{d≠axis} sin(jπx_d/ℓ_d)`, `j = 1..=per_face`, on each face of a box.
pub fn default_boundary_shapes(basis: &SpectralBasis, per_face: usize) -> Vec<SpatialShape> {
    let domain = basis.domain();
    if domain.dim() == 1 {
        return domain.gamma.iter().map(|f| SpatialShape::FaceIndicator(*f)).collect();
    }
    let lengths = domain.lengths();
    let nodes = basis.boundary_nodes();
    let mut shapes = vec![];
    for face in &domain.gamma {
        for j in 1..=per_face {
            let values = nodes
                .iter()
                .map(|b| {
                    if b.face != *face {
                        return 0.0;
                    }
                    (0..lengths.len())
                        .filter(|&d| d != face.axis)
                        .map(|d| (j as f64 * std::f64::consts::PI * b.point[d] / lengths[d]).sin())
                        .product()
                })
                .collect();
            shapes.push(SpatialShape::Samples(values));
        }
    }
    shapes
}
