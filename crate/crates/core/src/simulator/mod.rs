//! Modal simulation of `θ' = aθ + Δθ + ∫₀ᵗ M(t−s)Δθ(s)ds + F` with Dirichlet
//! datum `f` on `Γ`.
//!
//! Each mode obeys a scalar equation that can be integrated three ways:
//!
//! * [`Route::Direct`]: the projected integro-differential equation,
//! * [`Route::MacCamy`]: the second-kind Volterra equation with kernel `Z_n`,
//! * [`Route::ClosedForm`]: the explicit representation through `H_n` and `J`.
//!
//! They agree up to the `O(h²)` quadrature error.

mod routes;

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::control::{ControlKind, ControlSignal};
use crate::error::{Error, Result};
use crate::spectral::{CoefficientVector, SpectralBasis};
use crate::volterra::{j_kernel, l_kernel, resolvent, zn_kernel, Kernel, TimeGrid, TwoVarKernel, DEFAULT_TRUNCATION_ORDER};

pub(crate) use routes::hn_kernel;


/// Default trailing admissibility window as a fraction of `T`.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    Direct,
    MacCamy,
    ClosedForm,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::Direct, Route::MacCamy, Route::ClosedForm];

    pub fn name(&self) -> &'static str {
        match self {
            Route::Direct => "direct",
            Route::MacCamy => "maccamy",
            Route::ClosedForm => "closedform",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Route::Direct),
            "maccamy" => Ok(Route::MacCamy),
            "closedform" => Ok(Route::ClosedForm),
            other => Err(Error::config(format!("unknown route '{other}'"))),
        }
    }
}

/// Initial state plus at most one active control.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingSpec {
    pub xi: CoefficientVector,
    pub distributed: Option<ControlSignal>,
    pub boundary: Option<ControlSignal>,
}

impl ForcingSpec {
    pub fn free(xi: CoefficientVector) -> Self {
        Self { xi, distributed: None, boundary: None }
    }

    /// Zero initial state driven by `control`.
    pub fn controlled(mode_count: usize, control: ControlSignal) -> Self {
        Self::with_control(CoefficientVector::zeros(mode_count), control)
    }

    pub fn with_control(xi: CoefficientVector, control: ControlSignal) -> Self {
        match control.kind {
            ControlKind::Distributed => Self { xi, distributed: Some(control), boundary: None },
            ControlKind::Boundary => Self { xi, distributed: None, boundary: Some(control) },
        }
    }

    pub fn validate(&self, grid: &TimeGrid) -> Result<()> {
        if self.distributed.is_some() && self.boundary.is_some() {
            return Err(Error::config("distributed and boundary controls cannot both be active"));
        }
        if let Some(d) = &self.distributed {
            check_kind(d, ControlKind::Distributed)?;
            grid.ensure_same(&d.grid)?;
        }
        if let Some(b) = &self.boundary {
            check_kind(b, ControlKind::Boundary)?;
            grid.ensure_same(&b.grid)?;
        }
        Ok(())
    }

    /// Controls multiplied by `e^{−γt}`.
    pub fn exp_weighted(&self, gamma: f64) -> Result<Self> {
        let weigh = |c: &ControlSignal| -> Result<ControlSignal> {
            let w = c.grid.sample(|t| (-gamma * t).exp());
            c.with_profiles(c.profiles.iter().map(|p| p.iter().zip(&w).map(|(v, e)| v * e).collect()).collect())
        };
        Ok(Self {
            xi: self.xi.clone(),
            distributed: self.distributed.as_ref().map(weigh).transpose()?,
            boundary: self.boundary.as_ref().map(weigh).transpose()?,
        })
    }
}

fn check_kind(c: &ControlSignal, kind: ControlKind) -> Result<()> {
    if c.kind == kind {
        Ok(())
    } else {
        Err(Error::config("control kind does not match its slot"))
    }
}

/// `θ_n(t_k)` for every mode of the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalTrajectory {
    pub grid: TimeGrid,
    pub rows: Vec<Vec<f64>>,
    pub route: Route,
    /// `false` when a boundary control does not vanish on the trailing window.
    pub endpoint_admissible: bool,
}

impl ModalTrajectory {
    pub fn mode_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n]
    }

    /// Coefficients at node `k`.
    pub fn at(&self, k: usize) -> Result<CoefficientVector> {
        if k >= self.grid.len() {
            return Err(Error::OutOfRange { index: k, len: self.grid.len() });
        }
        CoefficientVector::new(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Coefficients at `T`.
    pub fn terminal(&self) -> CoefficientVector {
        CoefficientVector::from_fn(self.rows.len(), |n| self.rows[n][self.grid.n_steps()])
    }

    /// Like [`Self::terminal`], refusing non-admissible boundary data.
    pub fn terminal_checked(&self) -> Result<CoefficientVector> {
        if self.endpoint_admissible {
            Ok(self.terminal())
        } else {
            Err(Error::config("boundary control does not vanish on the trailing window; θ(T) is not admissible"))
        }
    }

    /// Field values `Σ_n θ_n(t_k) φ_n(x)` at the given points.
    pub fn state_at<P: AsRef<[f64]> + Sync>(&self, basis: &SpectralBasis, k: usize, points: &[P]) -> Result<Vec<f64>> {
        Ok(basis.synthesize(&self.at(k)?, points))
    }

    pub fn exp_weighted(&self, gamma: f64) -> Self {
        let w = self.grid.sample(|t| (-gamma * t).exp());
        Self {
            rows: self.rows.iter().map(|r| r.iter().zip(&w).map(|(v, e)| v * e).collect()).collect(),
            ..self.clone()
        }
    }

    /// `‖θ_n − θ'_n‖/‖θ_n‖` in discrete `L²(0,T)`, for each row.
    pub fn row_relative_diffs(&self, other: &ModalTrajectory) -> Vec<f64> {
        self.rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
                let den: f64 = a.iter().map(|x| x * x).sum();
                if den == 0.0 {
                    num.sqrt()
                } else {
                    (num / den).sqrt()
                }
            })
            .collect()
    }

    /// Relative discrete `L²` difference over all modes and nodes.
    pub fn relative_l2_diff(&self, other: &ModalTrajectory) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in self.rows.iter().zip(&other.rows) {
            for (x, y) in a.iter().zip(b) {
                num += (x - y) * (x - y);
                den += x * x;
            }
        }
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }
}

/// Kernel, constant, basis and the derived kernels `R`, `L` (and `J` on demand).
#[derive(Debug, Clone)]
pub struct MemorySystem {
    m: Kernel,
    a: f64,
    shift: f64,
    basis: Arc<SpectralBasis>,
    r: Kernel,
    l: Kernel,
    truncation_order: usize,
    window_fraction: f64,
    j: OnceLock<std::result::Result<TwoVarKernel, Error>>,
}

impl MemorySystem {
    pub fn new(m: Kernel, a: f64, basis: Arc<SpectralBasis>) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::config("constant a must be finite"));
        }
        let r = resolvent(&m)?;
        let l = l_kernel(&m, &r)?;
        Ok(Self {
            m,
            a,
            shift: 0.0,
            basis,
            r,
            l,
            truncation_order: DEFAULT_TRUNCATION_ORDER,
            window_fraction: DEFAULT_WINDOW_FRACTION,
            j: OnceLock::new(),
        })
    }

    /// The normalized memoryless system (`M ≡ 0`, `a = 0`).
    pub fn memoryless(grid: TimeGrid, basis: Arc<SpectralBasis>) -> Result<Self> {
        Self::new(Kernel::zero(grid), 0.0, basis)
    }

    pub fn with_truncation_order(mut self, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::config("truncation_order must be >= 1"));
        }
        self.truncation_order = order;
        self.j = OnceLock::new();
        Ok(self)
    }

    pub fn with_window_fraction(mut self, fraction: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&fraction) {
            return Err(Error::config(format!("admissibility window fraction must be in [0, 1), got {fraction}")));
        }
        self.window_fraction = fraction;
        Ok(self)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.m
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Total `γ` applied by [`Self::gamma_shift`] so far.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn basis_arc(&self) -> Arc<SpectralBasis> {
        Arc::clone(&self.basis)
    }

    pub fn grid(&self) -> &TimeGrid {
        self.m.grid()
    }

    pub fn resolvent(&self) -> &Kernel {
        &self.r
    }

    pub fn l(&self) -> &Kernel {
        &self.l
    }

    pub fn truncation_order(&self) -> usize {
        self.truncation_order
    }

    pub fn window(&self) -> f64 {
        self.window_fraction * self.grid().t_final()
    }

    pub fn j(&self) -> Result<&TwoVarKernel> {
        self.j
            .get_or_init(|| j_kernel(&self.l, self.truncation_order))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn zn(&self, n: usize) -> Result<Kernel> {
        zn_kernel(&self.l, self.lambda_sq(n)?)
    }

    pub fn hn(&self, n: usize) -> Result<Kernel> {
        hn_kernel(&self.l, self.lambda_sq(n)?)
    }

    fn lambda_sq(&self, n: usize) -> Result<f64> {
        if n >= self.basis.len() {
            return Err(Error::OutOfRange { index: n, len: self.basis.len() });
        }
        Ok(self.basis.lambda_sq(n))
    }

    pub fn is_normalized(&self) -> bool {
        let m0 = self.m.at0();
        (self.a + m0).abs() <= 1e-12 * (1.0 + m0.abs())
    }

    /// `a ↦ a − γ`, `M ↦ e^{−γt}M`; derived kernels are rebuilt.
    pub fn gamma_shift(&self, gamma: f64) -> Result<Self> {
        if gamma == 0.0 {
            return Ok(self.clone());
        }
        let mut s = Self::new(self.m.exp_weighted(gamma), self.a - gamma, Arc::clone(&self.basis))?;
        s.shift = self.shift + gamma;
        s.truncation_order = self.truncation_order;
        s.window_fraction = self.window_fraction;
        Ok(s)
    }

    /// Shift by `γ = a + M(0)` so that `a = −M(0)`.
    pub fn normalize(&self) -> Result<Self> {
        if self.is_normalized() {
            return Ok(self.clone());
        }
        let mut s = self.gamma_shift(self.a + self.m.at0())?;
        s.a = -s.m.at0();
        Ok(s)
    }

    /// `G_n = F_n − R∗F_n` for a modal forcing profile.
    pub fn g_n(&self, f_modal: &[f64]) -> Result<Vec<f64>> {
        self.grid().ensure_len(f_modal, "modal forcing")?;
        Ok(routes::g_minus_f(&self.r, f_modal, &vec![0.0; f_modal.len()]))
    }

    fn ensure_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized { a: self.a, expected: -self.m.at0() })
        }
    }

    pub fn simulate_direct(&self, forcing: &ForcingSpec) -> Result<ModalTrajectory> {
        self.simulate(forcing, Route::Direct)
    }

    pub fn simulate_maccamy(&self, forcing: &ForcingSpec) -> Result<ModalTrajectory> {
        self.simulate(forcing, Route::MacCamy)
    }

    pub fn simulate_closedform(&self, forcing: &ForcingSpec) -> Result<ModalTrajectory> {
        self.simulate(forcing, Route::ClosedForm)
    }

    pub fn simulate(&self, forcing: &ForcingSpec, route: Route) -> Result<ModalTrajectory> {
        self.ensure_normalized()?;
        self.integrate(forcing, route)
    }

    /// Simulate a system with arbitrary `a`: normalize, simulate, and undo the shift.
    pub fn simulate_unnormalized(&self, forcing: &ForcingSpec, route: Route) -> Result<ModalTrajectory> {
        let gamma = self.a + self.m.at0();
        if gamma == 0.0 {
            return self.integrate(forcing, route);
        }
        let normalized = self.normalize()?;
        let traj = normalized.integrate(&forcing.exp_weighted(gamma)?, route)?;
        Ok(traj.exp_weighted(-gamma))
    }

    /// The projected integro-differential equation with the stored `a`, normalized or not.
    pub fn integrate_raw(&self, forcing: &ForcingSpec) -> Result<ModalTrajectory> {
        self.integrate(forcing, Route::Direct)
    }

    fn integrate(&self, forcing: &ForcingSpec, route: Route) -> Result<ModalTrajectory> {
        let grid = *self.grid();
        forcing.validate(&grid)?;
        let k = self.basis.len();
        let zeros = vec![0.0; grid.len()];
        let big_f = match &forcing.distributed {
            Some(c) => Some(c.modal_profiles(&self.basis)?),
            None => None,
        };
        let small_f = match &forcing.boundary {
            Some(c) => Some(c.modal_profiles(&self.basis)?),
            None => None,
        };
        let endpoint_admissible = forcing
            .boundary
            .as_ref()
            .is_none_or(|c| c.admissible_source || c.vanishes_on_trailing_window(self.window()));
        let j = if route == Route::ClosedForm && (big_f.is_some() || small_f.is_some()) {
            Some(self.j()?)
        } else {
            None
        };

        let rows = (0..k)
            .into_par_iter()
            .map(|n| {
                let lambda_sq = self.basis.lambda_sq(n);
                let xi = forcing.xi.values().get(n).copied().unwrap_or(0.0);
                let fb = big_f.as_ref().map_or(&zeros[..], |v| &v[n][..]);
                let fs = small_f.as_ref().map_or(&zeros[..], |v| &v[n][..]);
                match route {
                    Route::Direct => routes::direct_row(&self.m, self.a, lambda_sq, xi, fb, fs),
                    Route::MacCamy => {
                        let gf = routes::g_minus_f(&self.r, fb, fs);
                        routes::maccamy_row(&self.r, &self.l, lambda_sq, xi, &gf)
                    }
                    Route::ClosedForm => {
                        let gf = routes::g_minus_f(&self.r, fb, fs);
                        routes::closedform_row(&self.r, &self.l, j, lambda_sq, xi, &gf)
                    }
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("{} route produced non-finite values", route.name())));
        }
        Ok(ModalTrajectory { grid, rows, route, endpoint_admissible })
    }
}
