use std::collections::BTreeMap;

use nalgebra::DVector;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::json;

use memheat_core::control::{
    reachability_sweep, steer, ControlKind, MinNormOptions, MomentSystem, SweepOptions, SweepPoint,
};
use memheat_core::obstruction::{
    blowup_experiment, build_rough_target, hn_bound_audit, range_ratio, BlowupPoint, HnAuditRow, RoughTarget,
    ThresholdOutcome, ZeroControlProblem,
};
use memheat_core::volterra::l_kernel;
use memheat_core::{CoefficientVector, ForcingSpec, MemorySystem, ModalTrajectory, Route};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::output::{Cell, OutputDir, Table};
use crate::CliError;

/// Metrics and warnings gathered by one experiment.
#[derive(Debug, Default)]
pub struct Report {
    pub metrics: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub verdict: Option<serde_json::Value>,
}

impl Report {
    fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }
}

pub fn execute(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Report, CliError> {
    match cfg.experiment {
        ExperimentKind::Resolvent => resolvent(cfg, out),
        ExperimentKind::Simulate => simulate(cfg, out),
        ExperimentKind::Control => control(cfg, out),
        ExperimentKind::Obstruct => obstruct(cfg, out),
        ExperimentKind::Audit => audit(cfg, out),
    }
}

fn harmonic(k: usize, band: usize) -> CoefficientVector {
    CoefficientVector::from_fn(k, |n| if n < band { 1.0 / (n + 1) as f64 } else { 0.0 })
}

fn resolvent(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Report, CliError> {
    let sys = cfg.system()?;
    let m = sys.kernel();
    let r = sys.resolvent();
    let l = l_kernel(m, r)?;
    let mut table = Table::new(["t", "M", "R", "L"]);
    for k in 0..m.grid().len() {
        table.push(vec![m.grid().node(k).into(), m.values()[k].into(), r.values()[k].into(), l.values()[k].into()]);
    }
    out.csv("resolvent.csv", &table)?;
    let mut report = Report::default();
    report.metric("R_at_T", r.last());
    report.metric("R_sup", r.sup_norm());
    report.metric("L_at_0", l.at0());
    Ok(report)
}

fn trajectory_table(traj: &ModalTrajectory) -> Table {
    let mut header = vec!["t".to_string()];
    header.extend((1..=traj.mode_count()).map(|n| format!("theta_{n}")));
    let mut table = Table::new(header);
    for k in 0..traj.grid.len() {
        let mut row: Vec<Cell> = vec![traj.grid.node(k).into()];
        row.extend((0..traj.mode_count()).map(|n| Cell::from(traj.row(n)[k])));
        table.push(row);
    }
    table
}

fn simulate(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Report, CliError> {
    let sys = cfg.system()?;
    let mut report = Report::default();
    if !sys.is_normalized() {
        report.warnings.push(format!("a = {} is not -M(0); simulated through the gamma shift", sys.a()));
    }
    let xi = match &cfg.simulate.xi {
        Some(v) => CoefficientVector::new(v.clone())?,
        None => harmonic(cfg.mode_count, cfg.mode_count),
    };
    let routes: Vec<Route> = if cfg.simulate.routes.is_empty() {
        Route::ALL.to_vec()
    } else {
        cfg.simulate.routes.iter().map(|r| Route::parse(r)).collect::<memheat_core::Result<_>>()?
    };
    let forcing = ForcingSpec::free(xi);
    let mut trajs = vec![];
    for route in routes {
        let traj = sys.simulate_unnormalized(&forcing, route)?;
        out.csv(&format!("trajectory_{}.csv", route.name()), &trajectory_table(&traj))?;
        report.metric(format!("terminal_norm_{}", route.name()), traj.terminal().norm());
        trajs.push((route, traj));
    }
    for i in 0..trajs.len() {
        for j in i + 1..trajs.len() {
            let d = trajs[i].1.relative_l2_diff(&trajs[j].1);
            report.metric(format!("diff_{}_{}", trajs[i].0.name(), trajs[j].0.name()), d);
        }
    }
    Ok(report)
}

fn control_target(cfg: &ExperimentConfig) -> Result<CoefficientVector, CliError> {
    Ok(match &cfg.control.target {
        Some(v) => CoefficientVector::new(v.clone())?,
        None => harmonic(cfg.mode_count, cfg.control.band.unwrap_or(cfg.mode_count)),
    })
}

fn sweep_options(cfg: &ExperimentConfig) -> Result<SweepOptions, CliError> {
    Ok(SweepOptions {
        route: Route::parse(&cfg.control.route)?,
        min_norm: MinNormOptions { cond_threshold: cfg.numerics.cond_threshold, tikhonov_floor: cfg.numerics.tikhonov_floor },
        boundary_shapes: None,
        shapes_per_face: cfg.control.shapes_per_face,
    })
}

/// Outcome of the `control` experiment without file output.
#[derive(Debug, Clone)]
pub struct ControlSummary {
    pub points: Vec<SweepPoint>,
    pub strictly_decreasing: bool,
}

pub fn control_summary(cfg: &ExperimentConfig, sys: &MemorySystem) -> Result<ControlSummary, CliError> {
    let kind = cfg.control.control_kind()?;
    let target = control_target(cfg)?;
    let points = reachability_sweep(sys, &target, &cfg.control.mode_counts, kind, &sweep_options(cfg)?)?;
    let strictly_decreasing = points.windows(2).all(|w| w[1].residual < w[0].residual);
    Ok(ControlSummary { points, strictly_decreasing })
}

fn control(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Report, CliError> {
    let sys = cfg.system()?.normalize()?;
    let kind = cfg.control.control_kind()?;
    let summary = control_summary(cfg, &sys)?;
    let mut report = Report::default();
    if cfg.a.is_some_and(|a| a != -sys.kernel().at0()) {
        report.warnings.push(format!("system normalized with gamma = {}", sys.shift()));
    }

    let mut table = Table::new(["N", "residual", "control_norm", "gramian_cond", "full_residual", "spillover", "regularized"]);
    for p in &summary.points {
        table.push(vec![
            p.mode_count.into(),
            p.residual.into(),
            p.control_norm.into(),
            p.gramian_cond.into(),
            p.full_residual.into(),
            p.spillover.into(),
            p.regularized.into(),
        ]);
        report.metric(format!("residual_N{}", p.mode_count), p.residual);
        if p.regularized {
            report.warnings.push(format!("N = {}: Gramian condition {:.3e}, Tikhonov-regularized", p.mode_count, p.gramian_cond));
        }
    }
    out.csv("residual_curve.csv", &table)?;
    report.metric("strictly_decreasing", summary.strictly_decreasing as u8 as f64);

    let n_max = *cfg.control.mode_counts.last().expect("validated non-empty");
    let steering = steer(&sys, &control_target(cfg)?, n_max, kind, &sweep_options(cfg)?)?;
    let physical = &steering.transferred.physical;
    let mut table = Table::new(["shape_index", "t", "value"]);
    for (m, p) in physical.profiles.iter().enumerate() {
        for (k, v) in p.iter().enumerate() {
            table.push(vec![m.into(), physical.grid.node(k).into(), (*v).into()]);
        }
    }
    out.csv("control.csv", &table)?;

    if let Some(seed) = cfg.seed {
        let shift = perturbation_check(&sys, cfg, kind, seed)?;
        report.metric("perturbation_max_shift", shift);
    }
    Ok(report)
}

/// Largest change of the resolved terminal moments under three random
/// zero-moment perturbations of the memoryless minimum-norm control.
fn perturbation_check(sys: &MemorySystem, cfg: &ExperimentConfig, kind: ControlKind, seed: u64) -> Result<f64, CliError> {
    let n = cfg.control.mode_counts[0];
    let opts = sweep_options(cfg)?;
    let ms: MomentSystem = memheat_core::control::moment_system_for(sys, &control_target(cfg)?, n, kind, &opts)?;
    let design = memheat_core::control::min_norm_memoryless_with(&ms, opts.min_norm)?;
    let chol = ms
        .gramian()
        .cholesky()
        .ok_or_else(|| memheat_core::Error::Numerical("Gramian is not positive definite".into()))?;
    let free = MemorySystem::memoryless(*sys.grid(), sys.basis_arc())?;
    let k = sys.basis().len();
    let base = free.simulate(&ForcingSpec::controlled(k, design.signal.clone()), Route::MacCamy)?.terminal();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let raw: Vec<Vec<f64>> = (0..ms.shapes.len())
            .map(|_| (0..ms.grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let back = ms.profiles(chol.solve(&DVector::from_vec(ms.moments(&raw))).as_slice());
        let profiles = design
            .signal
            .profiles
            .iter()
            .zip(raw.iter().zip(&back))
            .map(|(v, (p, b))| v.iter().zip(p.iter().zip(b)).map(|(v, (p, b))| v + p - b).collect())
            .collect();
        let theta = free.simulate(&ForcingSpec::controlled(k, design.signal.with_profiles(profiles)?), Route::MacCamy)?.terminal();
        for i in 0..n {
            worst = worst.max((theta[i] - base[i]).abs());
        }
    }
    Ok(worst)
}

/// Outcome of the obstruction experiment without file output.
#[derive(Debug, Clone)]
pub struct ObstructSummary {
    pub threshold: ThresholdOutcome,
    pub rough: RoughTarget,
    pub blowup: Vec<BlowupPoint>,
    pub audit: Vec<HnAuditRow>,
    pub blowup_ratio: f64,
    pub smooth_ratio: f64,
    pub r_at_t: f64,
}

pub fn obstruct_summary(cfg: &ExperimentConfig) -> Result<ObstructSummary, CliError> {
    let sys = cfg.system()?.normalize()?;
    let p = &cfg.obstruct;
    let zp = ZeroControlProblem::build(&sys, p.max_n)?;
    let threshold = zp.threshold();
    let rough = build_rough_target(sys.basis(), &p.center, p.radius)?;
    let opts = MinNormOptions { cond_threshold: cfg.numerics.cond_threshold, tikhonov_floor: cfg.numerics.tikhonov_floor };
    let blowup = blowup_experiment(sys.basis(), *sys.grid(), &rough, &p.mode_counts, opts)?;
    let audit = hn_bound_audit(&sys, 1, p.max_n)?;
    let (first, last) = (&blowup[0], &blowup[blowup.len() - 1]);
    Ok(ObstructSummary {
        blowup_ratio: last.cost_rough / first.cost_rough,
        smooth_ratio: last.cost_smooth / first.cost_smooth,
        r_at_t: zp.r_at_t,
        threshold,
        rough,
        blowup,
        audit,
    })
}

fn audit_table(rows: &[HnAuditRow]) -> Table {
    let mut table = Table::new(["n", "lam2_supHn", "lam4_iterated"]);
    for r in rows {
        table.push(vec![r.n.into(), r.lam2_sup_hn.into(), r.lam4_iterated.into()]);
    }
    table
}

fn obstruct(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Report, CliError> {
    let s = obstruct_summary(cfg)?;
    let mut report = Report::default();

    let mut table = Table::new(["N", "cost_rough", "cost_smooth", "gramian_cond"]);
    for b in &s.blowup {
        table.push(vec![b.mode_count.into(), b.cost_rough.into(), b.cost_smooth.into(), b.gramian_cond.into()]);
        if b.regularized {
            report.warnings.push(format!("N = {}: Gramian condition {:.3e}, Tikhonov-regularized", b.mode_count, b.gramian_cond));
        }
    }
    out.csv("cost_curve.csv", &table)?;
    out.csv("bound_audit.csv", &audit_table(&s.audit))?;

    let mut table = Table::new(["n", "lambda_sq", "eta_n", "d_n", "beta_profile"]);
    let basis = cfg.basis()?;
    for n in 0..s.rough.eta.len() {
        let profile = s.threshold.profile.get(n).copied().map_or(Cell::Text(String::new()), Cell::Real);
        table.push(vec![(n + 1).into(), basis.lambda_sq(n).into(), s.rough.eta[n].into(), s.rough.d[n].into(), profile]);
    }
    out.csv("rough_target.csv", &table)?;

    let exponent = s.rough.fit.as_ref().map(|f| f.exponent);
    report.metric("blowup_ratio", s.blowup_ratio);
    report.metric("smooth_ratio", s.smooth_ratio);
    report.metric("R_at_T", s.r_at_t);
    report.metric("plateau", s.threshold.plateau);
    if let Some(e) = exponent {
        report.metric("decay_exponent", e);
    }
    report.verdict = Some(json!({
        "blowup_ratio": s.blowup_ratio,
        "smooth_ratio": s.smooth_ratio,
        "threshold_N": s.threshold.threshold,
        "threshold_verdict": s.threshold.verdict(),
        "plateau": s.threshold.plateau,
        "R_at_T": s.r_at_t,
        "decay_exponent": exponent,
        "audit_ratio_lam2_supHn": range_ratio(s.audit.iter().map(|r| r.lam2_sup_hn)),
        "audit_ratio_lam4_iterated": range_ratio(s.audit.iter().map(|r| r.lam4_iterated)),
    }));
    out.json("verdict.json", report.verdict.as_ref().expect("set above"))?;
    Ok(report)
}

fn audit(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Report, CliError> {
    let sys = cfg.system()?.normalize()?;
    let rows = hn_bound_audit(&sys, cfg.audit.first, cfg.audit.last)?;
    out.csv("bound_audit.csv", &audit_table(&rows))?;
    let mut report = Report::default();
    report.metric("ratio_lam2_supHn", range_ratio(rows.iter().map(|r| r.lam2_sup_hn)));
    report.metric("ratio_lam4_iterated", range_ratio(rows.iter().map(|r| r.lam4_iterated)));
    report.metric("M_T", rows.iter().map(|r| r.lam2_sup_hn).fold(0.0, f64::max));
    Ok(report)
}
