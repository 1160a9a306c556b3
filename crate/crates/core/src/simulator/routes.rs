//! Per-mode solvers. Every function here works on one `λ²` and is pure.

use crate::error::{Error, Result};
use crate::volterra::{exp_decay, resolvent, solve_second_kind, trapezoid_convolution, zn_kernel, Kernel, TwoVarKernel};

fn axpy(out: &mut [f64], alpha: f64, x: &[f64]) {
    for (o, v) in out.iter_mut().zip(x) {
        *o += alpha * v;
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn is_zero(v: &[f64]) -> bool {
    v.iter().all(|&x| x == 0.0)
}

/// `θ' = (a − λ²)θ − λ² M∗θ + F − f − M∗f`, trapezoid in the local term and
/// in the memory integral.
pub(crate) fn direct_row(m: &Kernel, a: f64, lambda_sq: f64, xi: f64, big_f: &[f64], small_f: &[f64]) -> Result<Vec<f64>> {
    let grid = *m.grid();
    let h = grid.step();
    let mv = m.values();
    let n = grid.len();
    let mut source = sub(big_f, small_f);
    if !is_zero(small_f) {
        axpy(&mut source, -1.0, &trapezoid_convolution(mv, small_f, h));
    }
    let c = a - lambda_sq;
    let pivot = 1.0 - 0.5 * h * c + 0.25 * h * h * lambda_sq * mv[0];
    if pivot.abs() < crate::volterra::SINGULAR_PIVOT {
        return Err(Error::SingularStep { node: 1 });
    }
    let mut theta = vec![0.0; n];
    theta[0] = xi;
    // Φ_{k-1}, the right side at the previous node.
    let mut phi_prev = c * xi + source[0];
    for k in 1..n {
        let hist: f64 = 0.5 * mv[k] * theta[0] + mv[1..k].iter().rev().zip(&theta[1..k]).map(|(a, b)| a * b).sum::<f64>();
        let known = theta[k - 1] + 0.5 * h * phi_prev + 0.5 * h * (-lambda_sq * h * hist + source[k]);
        theta[k] = known / pivot;
        let conv = h * (hist + 0.5 * mv[0] * theta[k]);
        phi_prev = c * theta[k] - lambda_sq * conv + source[k];
    }
    Ok(theta)
}

/// `G − f` with `G = F − R∗F`.
pub(crate) fn g_minus_f(r: &Kernel, big_f: &[f64], small_f: &[f64]) -> Vec<f64> {
    let mut out = sub(big_f, small_f);
    if !is_zero(big_f) {
        axpy(&mut out, -1.0, &trapezoid_convolution(r.values(), big_f, r.grid().step()));
    }
    out
}

/// `θ + Z∗θ = [e₀ − e₀∗R]ξ + e₀∗(G − f)`.
pub(crate) fn maccamy_row(r: &Kernel, l: &Kernel, lambda_sq: f64, xi: f64, gf: &[f64]) -> Result<Vec<f64>> {
    let grid = *r.grid();
    let h = grid.step();
    let e0 = exp_decay(&grid, lambda_sq);
    let mut rhs = vec![0.0; grid.len()];
    if xi != 0.0 {
        axpy(&mut rhs, xi, &e0);
        axpy(&mut rhs, -xi, &trapezoid_convolution(&e0, r.values(), h));
    }
    if !is_zero(gf) {
        axpy(&mut rhs, 1.0, &trapezoid_convolution(&e0, gf, h));
    }
    let z = zn_kernel(l, lambda_sq)?;
    solve_second_kind(&z, &rhs)
}

/// `H_n`, the resolvent of `Z_n`.
pub(crate) fn hn_kernel(l: &Kernel, lambda_sq: f64) -> Result<Kernel> {
    resolvent(&zn_kernel(l, lambda_sq)?)
}

/// `e₀∗R + H∗e₀ − R∗(H∗e₀)`, the coefficient of `−ξ_n` in the closed form.
///
/// Expanding `θ = (δ − H)∗[(e₀ − e₀∗R)ξ]` gives these signs; they are the
/// ones that make the closed form agree with the Volterra equation for `θ_n`.
pub(crate) fn xi_bracket(r: &Kernel, hn: &Kernel, lambda_sq: f64) -> Vec<f64> {
    let grid = *r.grid();
    let h = grid.step();
    let e0 = exp_decay(&grid, lambda_sq);
    let he0 = trapezoid_convolution(hn.values(), &e0, h);
    let mut out = trapezoid_convolution(&e0, r.values(), h);
    axpy(&mut out, 1.0, &he0);
    axpy(&mut out, -1.0, &trapezoid_convolution(r.values(), &he0, h));
    out
}

/// `θ = e₀ξ − [e₀∗R + H∗e₀ − R∗(H∗e₀)]ξ + (e₀ − ∫J e₀)∗(G − f)`.
pub(crate) fn closedform_row(r: &Kernel, l: &Kernel, j: Option<&TwoVarKernel>, lambda_sq: f64, xi: f64, gf: &[f64]) -> Result<Vec<f64>> {
    let grid = *r.grid();
    let e0 = exp_decay(&grid, lambda_sq);
    let mut theta = vec![0.0; grid.len()];
    if xi != 0.0 {
        let hn = hn_kernel(l, lambda_sq)?;
        axpy(&mut theta, xi, &e0);
        axpy(&mut theta, -xi, &xi_bracket(r, &hn, lambda_sq));
    }
    if !is_zero(gf) {
        let j = j.ok_or_else(|| Error::Numerical("closed form needs J for a forced mode".into()))?;
        let jq = j.integrate_against(&e0)?;
        let kernel = sub(&e0, &jq);
        axpy(&mut theta, 1.0, &trapezoid_convolution(&kernel, gf, grid.step()));
    }
    Ok(theta)
}
