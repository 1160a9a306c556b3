use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::control::MinNormOptions;
use crate::error::Error;
use crate::simulator::MemorySystem;
use crate::spectral::{CoefficientVector, Domain, Region, SpectralBasis};
use crate::volterra::{ExpPoly, Kernel, TimeGrid};

fn domain(omega_tilde: (f64, f64)) -> Domain {
    Domain::interval(PI)
        .unwrap()
        .with_omega(Region::interval(0.0, PI / 2.0).unwrap())
        .unwrap()
        .with_omega_tilde(Region::interval(omega_tilde.0, omega_tilde.1).unwrap())
        .unwrap()
}

fn basis(modes: usize) -> Arc<SpectralBasis> {
    Arc::new(SpectralBasis::build(domain((2.0, 2.8)), modes).unwrap())
}

fn exp_memory(t: f64, n_steps: usize, modes: usize) -> MemorySystem {
    let grid = TimeGrid::new(t, n_steps).unwrap();
    MemorySystem::new(Kernel::from_closed_form(grid, &ExpPoly::exp(-1.0), "exp"), -1.0, basis(modes)).unwrap()
}

/// `β(T)` for `M = e^{−t}`, `λ² = 1` from the equivalent ODE system, RK4 with a fine step.
///
/// `R = e^{−2t}` and `H` is the impulse response of `x'' + 3x' + 3x`, so with
/// `y₁ = e₀`, `y₂ = R∗e₀`, `y₃ = H∗e₀`, `y₅ = R∗y₃` the bracket is `y₂ + y₃ − y₅`.
fn bracket_by_ode(t: f64) -> f64 {
    let f = |y: &[f64; 5]| -> [f64; 5] { [-y[0], -2.0 * y[1] + y[0], y[3], y[0] - 3.0 * y[3] - 3.0 * y[2], -2.0 * y[4] + y[2]] };
    let steps = 20_000;
    let h = t / steps as f64;
    let mut y = [1.0, 0.0, 0.0, 0.0, 0.0];
    let add = |a: &[f64; 5], b: &[f64; 5], s: f64| -> [f64; 5] { std::array::from_fn(|i| a[i] + s * b[i]) };
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&add(&y, &k1, h / 2.0));
        let k3 = f(&add(&y, &k2, h / 2.0));
        let k4 = f(&add(&y, &k3, h));
        y = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    y[1] + y[2] - y[4]
}

#[test]
fn rhs_trivial_cases() {
    let sys = exp_memory(1.0, 200, 4);
    assert_eq!(zero_control_rhs(&sys, &CoefficientVector::zeros(4), 2).unwrap(), 0.0);

    let free = MemorySystem::memoryless(TimeGrid::new(1.0, 200).unwrap(), basis(4)).unwrap();
    let xi = CoefficientVector::new(vec![1.0, -2.0, 0.5, 3.0]).unwrap();
    for n in 1..=4 {
        let l = (n * n) as f64;
        assert_eq!(zero_control_rhs(&free, &xi, n).unwrap(), -(-l).exp() * xi[n - 1]);
    }
    assert!(matches!(zero_control_rhs(&free, &xi, 0), Err(Error::OutOfRange { .. })));
}

#[test]
fn rhs_matches_ode_oracle() {
    let sys = exp_memory(1.0, 1000, 3);
    let got = zero_control_rhs(&sys, &CoefficientVector::new(vec![1.0, 0.0, 0.0]).unwrap(), 1).unwrap();
    let expect = bracket_by_ode(1.0) - (-1.0f64).exp();
    assert!((got - expect).abs() <= 1e-6, "{got} vs {expect}");
}

#[test]
fn rhs_is_linear_in_xi() {
    let sys = exp_memory(1.0, 300, 6);
    let xi = CoefficientVector::from_fn(6, |n| 1.0 / (n + 1) as f64);
    for n in 1..=6 {
        let one = zero_control_rhs(&sys, &xi, n).unwrap();
        let two = zero_control_rhs(&sys, &xi.scaled(2.0), n).unwrap();
        assert_eq!(two, 2.0 * one);
    }
}

#[test]
fn memoryless_threshold_is_degenerate() {
    let free = MemorySystem::memoryless(TimeGrid::new(1.0, 200).unwrap(), basis(30)).unwrap();
    let out = find_threshold_n(&free, 30).unwrap();
    assert!(out.is_degenerate());
    assert_eq!(out.threshold, None);
    assert_eq!(out.verdict(), "memoryless degenerate");
    assert_eq!(out.r_at_t, 0.0);
}

#[test]
fn exp_kernel_threshold_and_plateau() {
    let sys = exp_memory(1.0, 1000, 50);
    let out = find_threshold_n(&sys, 50).unwrap();
    let n = out.threshold.expect("threshold");
    assert!(n <= 50);
    assert!(out.plateau > 0.0);
    assert!(out.r_at_t != 0.0);
    let tail = &out.profile[n - 1..];
    assert!(tail.iter().all(|p| *p >= 0.5 * out.plateau));
    // The rescaled bracket settles: the last modes differ by well under a percent.
    let (a, b) = (out.profile[44], out.profile[49]);
    assert!((a - b).abs() <= 1e-2 * b, "{a} {b}");
}

#[test]
fn xi_solve_round_trip() {
    let sys = exp_memory(1.0, 1000, 50);
    let zp = ZeroControlProblem::build(&sys, 50).unwrap();
    let n0 = zp.threshold().threshold.unwrap();
    let zero = solve_xi_for_coefficients(&zp, &CoefficientVector::zeros(50), n0).unwrap();
    assert!(zero.iter().all(|v| *v == 0.0));

    let c = CoefficientVector::from_fn(50, |n| (-1.0f64).powi(n as i32) / (n + 1) as f64);
    let xi = solve_xi_for_coefficients(&zp, &c, n0).unwrap();
    for n in 1..n0 {
        assert_eq!(xi[n - 1], 0.0);
    }
    for n in n0..=50 {
        let want = c[n - 1] / zp.lambda_sq[n - 1];
        let got = zero_control_rhs(&sys, &xi, n).unwrap();
        assert!((got - want).abs() <= 1e-8 * want.abs(), "mode {n}");
    }
}

#[test]
fn division_guard_names_the_mode() {
    let free = MemorySystem::memoryless(TimeGrid::new(1.0, 200).unwrap(), basis(8)).unwrap();
    let zp = ZeroControlProblem::build(&free, 8).unwrap();
    let err = solve_xi_for_coefficients(&zp, &CoefficientVector::from_fn(8, |_| 1.0), 1).unwrap_err();
    // e^{−25} is above the guard, e^{−36} is not.
    assert!(matches!(err, Error::DivisionGuard { mode: 6, .. }), "{err:?}");
}

#[test]
fn rough_target_xi_stays_bounded() {
    let sys = exp_memory(1.0, 1000, 120);
    let rough = build_rough_target(sys.basis(), &[2.4], 0.3).unwrap();
    let zp = ZeroControlProblem::build(&sys, 120).unwrap();
    let n0 = zp.threshold().threshold.unwrap();
    let xi = solve_xi_for_coefficients(&zp, &rough.d, n0).unwrap();
    // ξ_n ≈ d_n / R(T) with d_n = λ_n²η_n ~ n^{−1}: square summable, so the squared
    // partial norms gain about half as much from 60..120 as from 30..60.
    let sq = |k: usize| xi.values()[..k].iter().map(|v| v * v).sum::<f64>();
    let (a, b, c) = (sq(30), sq(60), sq(120));
    assert!(c.is_finite() && c > 0.0);
    let ratio = (c - b) / (b - a);
    assert!(ratio < 0.6, "{a} {b} {c}");
}

#[test]
fn centred_rough_target() {
    let basis = SpectralBasis::build(domain((1.0, 2.2)), 160).unwrap();
    let rough = build_rough_target(&basis, &[PI / 2.0], 0.3).unwrap();
    let fit = rough.fit.expect("fit");
    assert!((2.8..=3.2).contains(&fit.exponent), "{}", fit.exponent);
    let max = rough.eta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for n in (1..160).step_by(2) {
        assert!(rough.eta[n].abs() <= 1e-12 * max, "even mode {}", n + 1);
    }
    let double = rough.scaled(2.0);
    for n in 0..160 {
        assert_eq!(double.d[n], 2.0 * rough.d[n]);
    }
    // Lowest coefficient from ∫(δ²−y²)² cos y dy, term by term.
    let d = 0.3f64;
    let (s, c) = d.sin_cos();
    let i0 = 2.0 * s;
    let i2 = 2.0 * (d * d * s + 2.0 * d * c - 2.0 * s);
    let i4 = 2.0 * (d.powi(4) * s + 4.0 * d.powi(3) * c - 12.0 * d * d * s - 24.0 * d * c + 24.0 * s);
    let analytic = (2.0 / PI).sqrt() * (d.powi(4) * i0 - 2.0 * d * d * i2 + i4);
    assert!((rough.eta[0] - analytic).abs() <= 1e-10, "{} {analytic}", rough.eta[0]);
}

#[test]
fn rough_target_support_must_be_inside() {
    let b = basis(10);
    assert!(matches!(build_rough_target(&b, &[2.6], 0.3), Err(Error::Config(_))));
    assert!(matches!(build_rough_target(&b, &[2.4, 1.0], 0.3), Err(Error::Config(_))));
    let bare = SpectralBasis::build(Domain::interval(PI).unwrap(), 10).unwrap();
    assert!(build_rough_target(&bare, &[2.4], 0.3).is_err());
}

#[test]
fn blowup_dichotomy() {
    let b = basis(40);
    let grid = TimeGrid::new(1.0, 1000).unwrap();
    let rough = build_rough_target(&b, &[2.4], 0.3).unwrap();
    let pts = blowup_experiment(&b, grid, &rough, &[10, 20, 40], MinNormOptions::default()).unwrap();
    assert!(pts[1].cost_rough > pts[0].cost_rough && pts[2].cost_rough > pts[1].cost_rough);
    assert!(pts[2].cost_rough / pts[0].cost_rough >= 10.0, "{pts:?}");
    assert!(pts[2].cost_smooth / pts[0].cost_smooth <= 2.0, "{pts:?}");

    let none = blowup_experiment(&b, grid, &rough.scaled(0.0), &[10], MinNormOptions::default()).unwrap();
    assert_eq!(none[0].cost_rough, 0.0);
}

#[test]
fn audit_without_memory_is_zero() {
    let free = MemorySystem::memoryless(TimeGrid::new(1.0, 200).unwrap(), basis(10)).unwrap();
    for row in hn_bound_audit(&free, 1, 10).unwrap() {
        assert_eq!((row.lam2_sup_hn, row.lam4_iterated), (0.0, 0.0));
    }
}

#[test]
fn audit_profile_is_flat_past_the_first_mode() {
    let sys = exp_memory(1.0, 1000, 50);
    let rows = hn_bound_audit(&sys, 1, 50).unwrap();
    let b = rows[9].lam2_sup_hn;
    for row in &rows[1..] {
        assert!(row.lam2_sup_hn >= 0.5 * b && row.lam2_sup_hn <= 2.0 * b, "{row:?}");
    }
    assert!(rows[0].lam2_sup_hn < 0.5 * b);
}

#[test]
fn audit_bound_grows_with_horizon() {
    let short = hn_bound_audit(&exp_memory(1.0, 500, 20), 1, 20).unwrap();
    let long = hn_bound_audit(&exp_memory(2.0, 1000, 20), 1, 20).unwrap();
    let mt = |rows: &[HnAuditRow]| rows.iter().map(|r| r.lam2_sup_hn).fold(0.0, f64::max);
    assert!(mt(&long) >= mt(&short));
}
