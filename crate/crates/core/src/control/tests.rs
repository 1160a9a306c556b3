use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_abs_diff_eq;
use nalgebra::{DVector, SymmetricEigen};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::*;
use crate::simulator::{ForcingSpec, MemorySystem, Route};
use crate::spectral::{CoefficientVector, Domain, Face, Region, SpectralBasis};
use crate::volterra::{ExpPoly, Kernel, TimeGrid};

fn basis_on(omega: (f64, f64), modes: usize) -> Arc<SpectralBasis> {
    let domain = Domain::interval(PI).unwrap().with_omega(Region::interval(omega.0, omega.1).unwrap()).unwrap();
    Arc::new(SpectralBasis::build(domain, modes).unwrap())
}

fn boundary_basis(modes: usize) -> Arc<SpectralBasis> {
    let domain = Domain::interval(PI).unwrap().with_gamma(vec![Face::LEFT]).unwrap();
    Arc::new(SpectralBasis::build(domain, modes).unwrap())
}

fn memory(basis: Arc<SpectralBasis>, n_steps: usize) -> MemorySystem {
    let grid = TimeGrid::new(1.0, n_steps).unwrap();
    MemorySystem::new(Kernel::from_closed_form(grid, &ExpPoly::exp(-1.0), "exp"), -1.0, basis).unwrap()
}

fn harmonic(k: usize, band: usize) -> CoefficientVector {
    CoefficientVector::from_fn(k, |n| if n < band { 1.0 / (n + 1) as f64 } else { 0.0 })
}

fn rel(a: &CoefficientVector, b: &CoefficientVector) -> f64 {
    let d: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y).powi(2)).sum();
    d.sqrt() / b.norm()
}

#[test]
fn zero_target_gives_zero_control() {
    let basis = basis_on((0.0, PI / 2.0), 8);
    let grid = TimeGrid::new(1.0, 200).unwrap();
    let ms = MomentSystem::distributed(&basis, grid, 5, &CoefficientVector::zeros(8)).unwrap();
    let c = min_norm_memoryless(&ms).unwrap();
    assert!(c.signal.profiles.iter().flatten().all(|v| *v == 0.0));
    assert_eq!(c.cost, 0.0);
    assert_eq!(c.moment_residual, 0.0);
}

#[test]
fn single_mode_profile() {
    let basis = basis_on((0.0, PI), 1);
    let grid = TimeGrid::new(1.0, 1000).unwrap();
    let ms = MomentSystem::distributed(&basis, grid, 1, &CoefficientVector::new(vec![1.0]).unwrap()).unwrap();
    assert_abs_diff_eq!(ms.couplings[0][0], 1.0, epsilon = 1e-12);
    let c = min_norm_memoryless(&ms).unwrap();
    assert!(!c.regularized);
    let gram = (1.0 - (-2.0f64).exp()) / 2.0;
    for (k, v) in c.signal.profiles[0].iter().enumerate() {
        let r = grid.node(k);
        assert_abs_diff_eq!(*v, (-(1.0 - r)).exp() / gram, epsilon = 1e-6);
    }
}

#[test]
fn memoryless_simulation_hits_moments() {
    let basis = basis_on((0.0, PI / 2.0), 12);
    let grid = TimeGrid::new(1.0, 400).unwrap();
    let eta = harmonic(12, 12);
    let ms = MomentSystem::distributed(&basis, grid, 5, &eta).unwrap();
    let c = min_norm_memoryless(&ms).unwrap();
    assert!(!c.regularized);
    assert!(c.moment_residual <= 1e-8, "{}", c.moment_residual);
    let sys = MemorySystem::memoryless(grid, basis).unwrap();
    let theta = sys
        .simulate(&ForcingSpec::controlled(12, c.signal.clone()), Route::MacCamy)
        .unwrap()
        .terminal();
    for n in 0..5 {
        assert!((theta[n] - eta[n]).abs() <= 1e-6, "mode {n}: {} vs {}", theta[n], eta[n]);
    }
    assert_abs_diff_eq!(c.cost, c.signal.l2_norm(), epsilon = 1e-9 * c.cost);
}

#[test]
fn gramian_is_symmetric_psd() {
    let basis = basis_on((0.0, PI / 2.0), 20);
    let grid = TimeGrid::new(1.0, 300).unwrap();
    for (kind, n) in [(ControlKind::Distributed, 20), (ControlKind::Boundary, 8)] {
        let ms = match kind {
            ControlKind::Distributed => MomentSystem::distributed(&basis, grid, n, &harmonic(20, 20)).unwrap(),
            ControlKind::Boundary => {
                let b = boundary_basis(20);
                MomentSystem::boundary(&b, grid, n, &harmonic(20, 20), default_boundary_shapes(&b, 1), 0.1).unwrap()
            }
        };
        let w = ms.gramian();
        assert_eq!(w, w.transpose());
        let eig = SymmetricEigen::new(w.clone()).eigenvalues;
        let max = eig.amax();
        assert!(eig.iter().all(|l| *l >= -1e-12 * max));
    }
}

#[test]
fn ill_conditioned_gramian_is_flagged() {
    let basis = basis_on((0.0, PI / 2.0), 40);
    let grid = TimeGrid::new(1.0, 400).unwrap();
    let ms = MomentSystem::distributed(&basis, grid, 40, &harmonic(40, 40)).unwrap();
    let c = min_norm_memoryless(&ms).unwrap();
    assert!(c.gramian_cond > DEFAULT_COND_THRESHOLD);
    assert!(c.regularized);
    let w = ms.gramian();
    assert_abs_diff_eq!(c.epsilon, DEFAULT_TIKHONOV_FLOOR * w.trace() / 40.0, epsilon = 1e-30);
}

#[test]
fn zero_moment_perturbations_leave_targets_and_raise_cost() {
    let basis = basis_on((0.0, PI / 2.0), 10);
    let grid = TimeGrid::new(1.0, 400).unwrap();
    let eta = harmonic(10, 10);
    let ms = MomentSystem::distributed(&basis, grid, 4, &eta).unwrap();
    let c = min_norm_memoryless(&ms).unwrap();
    let w = ms.gramian();
    let chol = w.clone().cholesky().unwrap();
    let sys = MemorySystem::memoryless(grid, Arc::clone(&basis)).unwrap();
    let base = sys.simulate(&ForcingSpec::controlled(10, c.signal.clone()), Route::MacCamy).unwrap().terminal();

    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..3 {
        let raw: Vec<Vec<f64>> =
            (0..ms.shapes.len()).map(|_| (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        // Remove the component along the ansatz: p − A*(W⁻¹ A p).
        let m = DVector::from_vec(ms.moments(&raw));
        let back = ms.profiles(chol.solve(&m).as_slice());
        let perp: Vec<Vec<f64>> = raw.iter().zip(&back).map(|(p, b)| p.iter().zip(b).map(|(x, y)| x - y).collect()).collect();
        assert!(ms.moments(&perp).iter().all(|v| v.abs() < 1e-10));

        let profiles: Vec<Vec<f64>> =
            c.signal.profiles.iter().zip(&perp).map(|(v, p)| v.iter().zip(p).map(|(x, y)| x + y).collect()).collect();
        let perturbed = c.signal.with_profiles(profiles).unwrap();
        assert!(perturbed.l2_norm() > c.cost);
        let theta = sys.simulate(&ForcingSpec::controlled(10, perturbed), Route::MacCamy).unwrap().terminal();
        for n in 0..4 {
            assert!((theta[n] - base[n]).abs() < 1e-9, "mode {n}");
        }
    }
}

#[test]
fn transfer_with_zero_kernel_is_identity() {
    let basis = basis_on((0.0, PI / 2.0), 6);
    let grid = TimeGrid::new(1.0, 200).unwrap();
    let sys = MemorySystem::memoryless(grid, basis).unwrap();
    let shapes = vec![SpatialShape::MaskedMode(0), SpatialShape::MaskedMode(1)];
    let u = ControlSignal::new(ControlKind::Distributed, grid, shapes, vec![grid.sample(|t| t.sin()), grid.sample(|t| 1.0 - t)])
        .unwrap();
    let out = transfer_distributed(&u, sys.j().unwrap(), sys.resolvent()).unwrap();
    assert_eq!(out.physical.profiles, u.profiles);

    let f = ControlSignal::new(ControlKind::Boundary, grid, vec![SpatialShape::FaceIndicator(Face::LEFT)], vec![grid.sample(|t| t * t)])
        .unwrap();
    assert_eq!(transfer_boundary(&f, sys.j().unwrap(), 0.1).unwrap().physical.profiles, f.profiles);
}

#[test]
fn transfer_round_trip_and_linearity() {
    let sys = memory(basis_on((0.0, PI / 2.0), 6), 400);
    let grid = *sys.grid();
    let j = sys.j().unwrap();
    let shapes = vec![SpatialShape::MaskedMode(0), SpatialShape::MaskedMode(2)];
    let g1 = ControlSignal::new(
        ControlKind::Distributed,
        grid,
        shapes.clone(),
        vec![grid.sample(|t| (3.0 * t).cos()), grid.sample(|t| t * (1.0 - t))],
    )
    .unwrap();
    let g2 = ControlSignal::new(ControlKind::Distributed, grid, shapes, vec![grid.sample(|t| t.exp()), grid.sample(|_| 1.0)]).unwrap();

    for g in [&g1, &g2] {
        let out = transfer_distributed(g, j, sys.resolvent()).unwrap();
        let back = transfer_forward(&out.physical, j, sys.resolvent()).unwrap();
        for (a, b) in back.profiles.iter().flatten().zip(g.profiles.iter().flatten()) {
            assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    let (alpha, beta) = (2.5, -0.75);
    let combo: Vec<Vec<f64>> = g1
        .profiles
        .iter()
        .zip(&g2.profiles)
        .map(|(p, q)| p.iter().zip(q).map(|(x, y)| alpha * x + beta * y).collect())
        .collect();
    let lhs = transfer_distributed(&g1.with_profiles(combo).unwrap(), j, sys.resolvent()).unwrap().physical;
    let t1 = transfer_distributed(&g1, j, sys.resolvent()).unwrap().physical;
    let t2 = transfer_distributed(&g2, j, sys.resolvent()).unwrap().physical;
    for (m, p) in lhs.profiles.iter().enumerate() {
        for (k, v) in p.iter().enumerate() {
            let expect = alpha * t1.profiles[m][k] + beta * t2.profiles[m][k];
            assert!((v - expect).abs() <= 1e-11 * (1.0 + expect.abs()));
        }
    }

    let f = ControlSignal::new(ControlKind::Boundary, grid, vec![SpatialShape::FaceIndicator(Face::LEFT)], vec![grid.sample(|t| t.sin())])
        .unwrap();
    let out = transfer_boundary(&f, j, sys.window()).unwrap();
    assert!(!out.physical.admissible_source);
    let back = transfer_forward(&out.physical, j, sys.resolvent()).unwrap();
    for (a, b) in back.profiles[0].iter().zip(&f.profiles[0]) {
        assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
    }
}

#[test]
fn transfer_rejects_wrong_kind() {
    let sys = memory(basis_on((0.0, PI / 2.0), 4), 50);
    let grid = *sys.grid();
    let f = ControlSignal::zero(ControlKind::Boundary, grid, vec![SpatialShape::FaceIndicator(Face::LEFT)]);
    assert!(transfer_distributed(&f, sys.j().unwrap(), sys.resolvent()).is_err());
}

#[test]
fn distributed_transfer_reaches_memoryless_endpoint() {
    let basis = basis_on((0.0, PI / 2.0), 10);
    let sys = memory(Arc::clone(&basis), 1000);
    let grid = *sys.grid();
    let eta = harmonic(10, 10);
    let ms = MomentSystem::distributed(&basis, grid, 6, &eta).unwrap();
    let design = min_norm_memoryless(&ms).unwrap();
    let free = MemorySystem::memoryless(grid, Arc::clone(&basis)).unwrap();
    let reference = free.simulate(&ForcingSpec::controlled(10, design.signal.clone()), Route::MacCamy).unwrap().terminal();

    let moved = transfer_distributed(&design.signal, sys.j().unwrap(), sys.resolvent()).unwrap();
    for route in Route::ALL {
        let theta = sys.simulate(&ForcingSpec::controlled(10, moved.physical.clone()), route).unwrap().terminal();
        let err = rel(&theta, &reference);
        assert!(err <= 1e-3, "{}: {err}", route.name());
    }
}

#[test]
fn boundary_transfer_reaches_memoryless_endpoint() {
    let basis = boundary_basis(10);
    let sys = memory(Arc::clone(&basis), 1000);
    let grid = *sys.grid();
    let eta = harmonic(10, 10);
    let ms = MomentSystem::boundary(&basis, grid, 4, &eta, default_boundary_shapes(&basis, 1), sys.window()).unwrap();
    let design = min_norm_memoryless(&ms).unwrap();
    assert!(design.signal.vanishes_on_trailing_window(sys.window()));
    let free = MemorySystem::memoryless(grid, Arc::clone(&basis)).unwrap();
    let reference = free.simulate(&ForcingSpec::controlled(10, design.signal.clone()), Route::MacCamy).unwrap().terminal();

    let moved = transfer_boundary(&design.signal, sys.j().unwrap(), sys.window()).unwrap();
    assert!(moved.physical.admissible_source);
    let traj = sys.simulate(&ForcingSpec::controlled(10, moved.physical), Route::MacCamy).unwrap();
    assert!(traj.endpoint_admissible);
    let err = rel(&traj.terminal(), &reference);
    assert!(err <= 5e-3, "{err}");
}

#[test]
fn sweep_with_zero_target_is_zero() {
    let sys = memory(basis_on((0.0, PI / 2.0), 12), 200);
    let pts = reachability_sweep(&sys, &CoefficientVector::zeros(12), &[2, 4], ControlKind::Distributed, &SweepOptions::default())
        .unwrap();
    for p in pts {
        assert_eq!((p.residual, p.full_residual, p.control_norm), (0.0, 0.0, 0.0));
    }
}

#[test]
fn band_limited_target_is_reached() {
    let sys = memory(basis_on((0.0, PI / 2.0), 20), 1000);
    let eta = harmonic(20, 5);
    let pts = reachability_sweep(&sys, &eta, &[5], ControlKind::Distributed, &SweepOptions::default()).unwrap();
    assert!(!pts[0].regularized);
    assert!(pts[0].residual <= 1e-4, "{:?}", pts[0]);
}

#[test]
fn harmonic_target_residuals_decrease() {
    let sys = memory(basis_on((0.0, PI / 2.0), 60), 1000);
    let eta = harmonic(60, 60);
    let pts = reachability_sweep(&sys, &eta, &[5, 10, 20, 40], ControlKind::Distributed, &SweepOptions::default()).unwrap();
    for w in pts.windows(2) {
        assert!(w[1].residual < w[0].residual, "{:?}", pts.iter().map(|p| p.residual).collect::<Vec<_>>());
    }
}
