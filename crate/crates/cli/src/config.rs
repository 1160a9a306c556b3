use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use memheat_core::control::{ControlKind, DEFAULT_COND_THRESHOLD, DEFAULT_TIKHONOV_FLOOR};
use memheat_core::simulator::DEFAULT_WINDOW_FRACTION;
use memheat_core::volterra::DEFAULT_TRUNCATION_ORDER;
use memheat_core::{Domain, ExpPoly, Face, Kernel, MemorySystem, Region, Route, SpectralBasis, TimeGrid};

use crate::CliError;

/// A configuration problem, tied to the field that caused it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config field `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

fn field(name: &str) -> impl FnOnce(memheat_core::Error) -> ConfigError + '_ {
    move |e| ConfigError::new(name, e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Resolvent,
    Simulate,
    Control,
    Obstruct,
    Audit,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Resolvent => "resolvent",
            Self::Simulate => "simulate",
            Self::Control => "control",
            Self::Obstruct => "obstruct",
            Self::Audit => "audit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    /// One length for an interval, two or three for a box.
    #[serde(default = "default_lengths")]
    pub lengths: Vec<f64>,
    #[serde(default)]
    pub omega: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub omega_tilde: Option<Vec<[f64; 2]>>,
    /// Face names: `left`, `right`, `bottom`, `top`, or `x<k>-` / `x<k>+`.
    #[serde(default)]
    pub gamma: Vec<String>,
}

fn default_lengths() -> Vec<f64> {
    vec![PI]
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self { lengths: default_lengths(), omega: None, omega_tilde: None, gamma: vec![] }
    }
}

impl DomainConfig {
    pub fn build(&self) -> Result<Domain, ConfigError> {
        let domain = match self.lengths.len() {
            1 => Domain::interval(self.lengths[0]),
            _ => Domain::box_domain(self.lengths.clone()),
        }
        .map_err(field("domain.lengths"))?;
        let region = |b: &[[f64; 2]], name: &str| Region::new(b.iter().map(|r| (r[0], r[1])).collect()).map_err(field(name));
        let mut domain = domain;
        if let Some(b) = &self.omega {
            domain = domain.with_omega(region(b, "domain.omega")?).map_err(field("domain.omega"))?;
        }
        if let Some(b) = &self.omega_tilde {
            domain = domain.with_omega_tilde(region(b, "domain.omega_tilde")?).map_err(field("domain.omega_tilde"))?;
        }
        if !self.gamma.is_empty() {
            let faces = self.gamma.iter().map(|g| Face::parse(g)).collect::<memheat_core::Result<Vec<_>>>().map_err(field("domain.gamma"))?;
            domain = domain.with_gamma(faces).map_err(field("domain.gamma"))?;
        }
        Ok(domain)
    }
}

/// `{"form": "exp -1"}` or `{"table": [...]}` sampled on the run's grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    Form(String),
    Table(Vec<f64>),
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig::Form("zero".into())
    }
}

impl KernelConfig {
    pub fn build(&self, grid: TimeGrid) -> Result<Kernel, ConfigError> {
        match self {
            KernelConfig::Form(s) => {
                let form = ExpPoly::parse(s).map_err(field("kernel.form"))?;
                Ok(Kernel::from_closed_form(grid, &form, s.clone()))
            }
            KernelConfig::Table(v) => Kernel::from_samples(grid, v.clone(), "table").map_err(field("kernel.table")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default = "default_truncation")]
    pub truncation_order: usize,
    #[serde(default = "default_window")]
    pub window_fraction: f64,
    #[serde(default = "default_cond")]
    pub cond_threshold: f64,
    #[serde(default = "default_floor")]
    pub tikhonov_floor: f64,
}

fn default_truncation() -> usize {
    DEFAULT_TRUNCATION_ORDER
}
fn default_window() -> f64 {
    DEFAULT_WINDOW_FRACTION
}
fn default_cond() -> f64 {
    DEFAULT_COND_THRESHOLD
}
fn default_floor() -> f64 {
    DEFAULT_TIKHONOV_FLOOR
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            truncation_order: default_truncation(),
            window_fraction: default_window(),
            cond_threshold: default_cond(),
            tikhonov_floor: default_floor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    /// Initial coefficients; `ξ_n = 1/n` when absent.
    #[serde(default)]
    pub xi: Option<Vec<f64>>,
    /// Route names; all three when empty.
    #[serde(default)]
    pub routes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlParams {
    #[serde(default = "default_control_kind")]
    pub kind: String,
    /// Target coefficients; `η_n = 1/n` when absent.
    #[serde(default)]
    pub target: Option<Vec<f64>>,
    /// Zero the default target beyond this many modes.
    #[serde(default)]
    pub band: Option<usize>,
    #[serde(default = "default_sweep")]
    pub mode_counts: Vec<usize>,
    #[serde(default = "default_route")]
    pub route: String,
    #[serde(default = "default_per_face")]
    pub shapes_per_face: usize,
}

fn default_control_kind() -> String {
    "distributed".into()
}
fn default_sweep() -> Vec<usize> {
    vec![5, 10, 20, 40]
}
fn default_route() -> String {
    "maccamy".into()
}
fn default_per_face() -> usize {
    4
}

impl Default for ControlParams {
    fn default() -> Self {
        Self {
            kind: default_control_kind(),
            target: None,
            band: None,
            mode_counts: default_sweep(),
            route: default_route(),
            shapes_per_face: default_per_face(),
        }
    }
}

impl ControlParams {
    pub fn control_kind(&self) -> Result<ControlKind, ConfigError> {
        match self.kind.as_str() {
            "distributed" => Ok(ControlKind::Distributed),
            "boundary" => Ok(ControlKind::Boundary),
            other => Err(ConfigError::new("control.kind", format!("expected distributed or boundary, got '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstructParams {
    #[serde(default = "default_center")]
    pub center: Vec<f64>,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_blowup")]
    pub mode_counts: Vec<usize>,
    /// Largest mode used for the threshold search and the bound audit.
    #[serde(default = "default_max_n")]
    pub max_n: usize,
}

fn default_center() -> Vec<f64> {
    vec![2.4]
}
fn default_radius() -> f64 {
    0.3
}
fn default_blowup() -> Vec<usize> {
    vec![10, 20, 40]
}
fn default_max_n() -> usize {
    50
}

impl Default for ObstructParams {
    fn default() -> Self {
        Self { center: default_center(), radius: default_radius(), mode_counts: default_blowup(), max_n: default_max_n() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditParams {
    #[serde(default = "default_first")]
    pub first: usize,
    #[serde(default = "default_max_n")]
    pub last: usize,
}

fn default_first() -> usize {
    1
}

impl Default for AuditParams {
    fn default() -> Self {
        Self { first: default_first(), last: default_max_n() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    /// Defaults to `−M(0)`, the normalized value.
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    #[serde(default = "default_modes")]
    pub mode_count: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub simulate: SimulateParams,
    #[serde(default)]
    pub control: ControlParams,
    #[serde(default)]
    pub obstruct: ObstructParams,
    #[serde(default)]
    pub audit: AuditParams,
}

fn default_horizon() -> f64 {
    1.0
}
fn default_steps() -> usize {
    1000
}
fn default_modes() -> usize {
    10
}

/// The obstruction experiment run by `memheat obstruct` without `--config`.
pub const DEFAULT_OBSTRUCT: &str = include_str!("../configs/obstruct_default.json");

impl ExperimentConfig {
    /// Every field at its default.
    pub fn minimal(kind: ExperimentKind) -> Self {
        serde_json::from_value(serde_json::json!({ "experiment": kind })).expect("defaults deserialize")
    }

    pub fn bundled_obstruct() -> Self {
        Self::from_json(DEFAULT_OBSTRUCT).expect("bundled config is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::new(json_field(&e), e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("--config", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(ConfigError::new("horizon", format!("must be positive, got {}", self.horizon)));
        }
        if self.n_steps == 0 {
            return Err(ConfigError::new("n_steps", "must be at least 1"));
        }
        if self.mode_count == 0 {
            return Err(ConfigError::new("mode_count", "must be at least 1"));
        }
        if let KernelConfig::Form(s) = &self.kernel {
            ExpPoly::parse(s).map_err(field("kernel.form"))?;
        }
        if let KernelConfig::Table(v) = &self.kernel {
            if v.len() != self.n_steps + 1 {
                return Err(ConfigError::new("kernel.table", format!("needs n_steps + 1 = {} samples, got {}", self.n_steps + 1, v.len())));
            }
        }
        if !(0.0..1.0).contains(&self.numerics.window_fraction) {
            return Err(ConfigError::new("numerics.window_fraction", "must be in [0, 1)"));
        }
        if self.numerics.truncation_order == 0 {
            return Err(ConfigError::new("numerics.truncation_order", "must be at least 1"));
        }
        self.domain.build()?;
        match self.experiment {
            ExperimentKind::Simulate => {
                for r in &self.simulate.routes {
                    Route::parse(r).map_err(field("simulate.routes"))?;
                }
                if let Some(xi) = &self.simulate.xi {
                    if xi.len() != self.mode_count {
                        return Err(ConfigError::new("simulate.xi", format!("needs {} entries, got {}", self.mode_count, xi.len())));
                    }
                }
            }
            ExperimentKind::Control => {
                self.control.control_kind()?;
                Route::parse(&self.control.route).map_err(field("control.route"))?;
                check_counts(&self.control.mode_counts, self.mode_count, "control.mode_counts")?;
                if let Some(t) = &self.control.target {
                    if t.len() != self.mode_count {
                        return Err(ConfigError::new("control.target", format!("needs {} entries, got {}", self.mode_count, t.len())));
                    }
                }
            }
            ExperimentKind::Obstruct => {
                check_counts(&self.obstruct.mode_counts, self.mode_count, "obstruct.mode_counts")?;
                if self.obstruct.max_n == 0 || self.obstruct.max_n > self.mode_count {
                    return Err(ConfigError::new("obstruct.max_n", format!("must be in 1..={}", self.mode_count)));
                }
            }
            ExperimentKind::Audit => {
                let a = &self.audit;
                if a.first == 0 || a.first > a.last || a.last > self.mode_count {
                    return Err(ConfigError::new("audit", format!("range {}..={} must lie in 1..={}", a.first, a.last, self.mode_count)));
                }
            }
            ExperimentKind::Resolvent => {}
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid, ConfigError> {
        TimeGrid::new(self.horizon, self.n_steps).map_err(field("n_steps"))
    }

    pub fn basis(&self) -> Result<Arc<SpectralBasis>, ConfigError> {
        Ok(Arc::new(SpectralBasis::build(self.domain.build()?, self.mode_count).map_err(field("mode_count"))?))
    }

    pub fn kernel(&self) -> Result<Kernel, ConfigError> {
        self.kernel.build(self.grid()?)
    }

    /// The memory system; `a` defaults to `−M(0)`.
    /// Invalid settings surface as config errors, a failed resolvent solve as numerical.
    pub fn system(&self) -> Result<MemorySystem, CliError> {
        let m = self.kernel()?;
        let a = self.a.unwrap_or(-m.at0());
        MemorySystem::new(m, a, self.basis()?)
            .and_then(|s| s.with_truncation_order(self.numerics.truncation_order))
            .and_then(|s| s.with_window_fraction(self.numerics.window_fraction))
            .map_err(|e| match e {
                memheat_core::Error::Config(m) => ConfigError::new("kernel", m).into(),
                other => CliError::from(other),
            })
    }
}

fn check_counts(counts: &[usize], modes: usize, name: &str) -> Result<(), ConfigError> {
    if counts.is_empty() {
        return Err(ConfigError::new(name, "must not be empty"));
    }
    if counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConfigError::new(name, "must be strictly increasing"));
    }
    if counts[0] == 0 || *counts.last().unwrap() > modes {
        return Err(ConfigError::new(name, format!("entries must lie in 1..={modes} (mode_count)")));
    }
    Ok(())
}

/// Best guess at the offending field from a serde message such as "unknown field `x`".
fn json_field(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    msg.split('`').nth(1).map(str::to_string).unwrap_or_else(|| "<document>".into())
}
