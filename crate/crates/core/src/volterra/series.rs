use rayon::prelude::*;

use super::grid::TimeGrid;
use super::kernel::Kernel;
use super::solver::{cauchy_product, VolterraKernel};
use crate::error::{Error, Result};

pub const DEFAULT_TRUNCATION_ORDER: usize = 40;
pub const DEFAULT_SERIES_TOLERANCE: f64 = 1e-12;

/// Lower-triangular samples `J(t_i, s_j)`, `j <= i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoVarKernel {
    grid: TimeGrid,
    rows: Vec<Vec<f64>>,
    truncation_order: usize,
    terms_used: usize,
    converged: bool,
}

impl TwoVarKernel {
    pub fn zero(grid: TimeGrid) -> Self {
        Self {
            grid,
            rows: (0..grid.len()).map(|i| vec![0.0; i + 1]).collect(),
            truncation_order: 1,
            terms_used: 0,
            converged: true,
        }
    }

    /// Build from a closure evaluated on `s <= t` node pairs.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let rows = (0..grid.len())
            .map(|i| (0..=i).map(|j| f(grid.node(i), grid.node(j))).collect())
            .collect();
        Self { grid, rows, truncation_order: 1, terms_used: 0, converged: true }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn truncation_order(&self) -> usize {
        self.truncation_order
    }

    /// Number of series terms actually summed.
    pub fn terms_used(&self) -> usize {
        self.terms_used
    }

    /// `false` when the a-priori tail bound was still above tolerance at the cap.
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn sup_norm(&self) -> f64 {
        self.rows.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫₀^{t_k} J(t_k, τ) e(τ) dτ` for every node, by the trapezoid rule.
    pub fn integrate_against(&self, e: &[f64]) -> Result<Vec<f64>> {
        self.grid.ensure_len(e, "integrand")?;
        let h = self.grid.step();
        Ok(self
            .rows
            .iter()
            .enumerate()
            .map(|(k, row)| {
                if k == 0 {
                    return 0.0;
                }
                let inner: f64 = row[1..k].iter().zip(&e[1..k]).map(|(j, v)| j * v).sum();
                h * (0.5 * row[0] * e[0] + inner + 0.5 * row[k] * e[k])
            })
            .collect())
    }
}

impl VolterraKernel for TwoVarKernel {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    fn interior_sum(&self, i: usize, y: &[f64]) -> f64 {
        if i < 2 {
            return 0.0;
        }
        self.rows[i][1..i].iter().zip(&y[1..i]).map(|(a, b)| a * b).sum()
    }
}

/// `K(r, s) = −J(T − s, T − r)`: the kernel of `u(r) − ∫₀ʳ J(T−s, T−r) u(s) ds`
/// written in the solver's `y + ∫K y` form.
pub struct Reflected<'a>(pub &'a TwoVarKernel);

impl VolterraKernel for Reflected<'_> {
    fn grid(&self) -> &TimeGrid {
        &self.0.grid
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        let n = self.0.grid.n_steps();
        -self.0.rows[n - j][n - i]
    }
}

/// `log((T^m max|L|^m / m!)·(T^m / m!))`.
fn log_term_bound(m: usize, t_final: f64, l_max: f64) -> f64 {
    let log_fact: f64 = (1..=m).map(|i| (i as f64).ln()).sum();
    let m = m as f64;
    2.0 * m * t_final.ln() + m * l_max.ln() - 2.0 * log_fact
}

/// `J(t, s) = −Σ_{m≥1} L^{*m}(t − s) s^m / m!`, assembled on the grid.
///
/// The sum is built term by term in the trapezoid convolution algebra, so that
/// `∫₀ᵗ J(t,τ)e^{−λ²τ}dτ` reproduces `H∗e^{−λ²·}` with `H = resolvent(zn_kernel(L, λ²))`
/// to round-off for every `λ²`, not only up to the quadrature error.
/// Writing `L̃ = L` with `L̃₀ = L₀/2`, `b = h²L₀/4`, `w = (½, 1, 1, …)`:
///
/// ```text
/// J̃(k, i) = (b/β) w_k δ_{ki} + Σ_{p≥2} (b/β − 1) [(hL̃)^{*(p−1)}/β^{p−1}]_{k−i} [h^{p−1} w^{*p}]_i,   β = 1 + b
/// J(t_k, s_i) = J̃(k, i) / (h w_i^{(k)})
/// ```
///
/// where `w_i^{(k)}` are the trapezoid weights on `[0, t_k]`.
pub fn j_kernel(l: &Kernel, truncation_order: usize) -> Result<TwoVarKernel> {
    j_kernel_with_tolerance(l, truncation_order, DEFAULT_SERIES_TOLERANCE)
}

pub fn j_kernel_with_tolerance(l: &Kernel, truncation_order: usize, tolerance: f64) -> Result<TwoVarKernel> {
    if truncation_order == 0 {
        return Err(Error::config("truncation_order must be >= 1"));
    }
    let grid = *l.grid();
    let n = grid.len();
    let h = grid.step();
    let l_max = l.sup_norm();
    if l_max == 0.0 {
        let mut j = TwoVarKernel::zero(grid);
        j.truncation_order = truncation_order;
        return Ok(j);
    }

    let l0 = l.at0();
    let b = 0.25 * h * h * l0;
    let beta = 1.0 + b;
    let mut g: Vec<f64> = l.values().iter().map(|v| h * v).collect();
    g[0] *= 0.5;
    let tw: Vec<f64> = (0..n).map(|i| if i == 0 { 0.5 } else { 1.0 }).collect();

    // (A_p, q_p) pairs; row k of J̃ is Σ_p A_p[k−i] q_p[i].
    let mut terms: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(truncation_order + 1);
    let mut delta = vec![0.0; n];
    delta[0] = b / beta;
    terms.push((delta, tw.clone()));

    let mut gp = vec![0.0; n];
    gp[0] = 1.0;
    let mut q = tw.clone();
    let log_tol = tolerance.ln();
    let mut converged = false;
    let mut terms_used = 0;
    for m in 1..=truncation_order {
        gp = cauchy_product(&gp, &g).into_iter().map(|v| v / beta).collect();
        // cauchy(q, w)_k = Σ_{j≤k} q_j − ½ q_k
        let mut acc = 0.0;
        q = q
            .iter()
            .map(|&v| {
                acc += v;
                h * (acc - 0.5 * v)
            })
            .collect();
        let a: Vec<f64> = gp.iter().map(|v| v * (b / beta - 1.0)).collect();
        terms.push((a, q.clone()));
        terms_used = m;
        if log_term_bound(m, grid.t_final(), l_max) < log_tol {
            converged = true;
            break;
        }
    }

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            if k == 0 {
                return vec![0.0];
            }
            (0..=k)
                .map(|i| {
                    let jt: f64 = terms.iter().map(|(a, q)| a[k - i] * q[i]).sum();
                    let w = if i == 0 || i == k { 0.5 } else { 1.0 };
                    jt / (h * w)
                })
                .collect()
        })
        .collect();

    Ok(TwoVarKernel { grid, rows, truncation_order, terms_used, converged })
}
