use crate::error::{Error, Result};
use crate::spectral::{Face, SpectralBasis};
use crate::volterra::TimeGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlKind {
    /// `χ_ω(x) u(t, x)` in the equation.
    Distributed,
    /// Dirichlet datum `f(t, x)` on `Γ`.
    Boundary,
}

impl ControlKind {
    /// Sign with which the actuator enters the modal equations (`+F_n` or `−f_n`).
    pub fn sign(&self) -> f64 {
        match self {
            ControlKind::Distributed => 1.0,
            ControlKind::Boundary => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpatialShape {
    /// `χ_ω φ_m` (0-based mode position `m`).
    MaskedMode(usize),
    /// `1` on one face of `Γ`, `0` elsewhere.
    FaceIndicator(Face),
    /// Values at the `ω` quadrature nodes (distributed) or at the `Γ` nodes (boundary).
    Samples(Vec<f64>),
}

/// Time profiles times spatial shapes: `Σ_m p_m(t) s_m(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    pub kind: ControlKind,
    pub grid: TimeGrid,
    pub shapes: Vec<SpatialShape>,
    pub profiles: Vec<Vec<f64>>,
    /// Boundary only: the memoryless control this signal was obtained from
    /// vanished on the trailing window, so the terminal state is admissible
    /// even though this signal itself need not vanish there.
    pub admissible_source: bool,
}

impl ControlSignal {
    pub fn new(kind: ControlKind, grid: TimeGrid, shapes: Vec<SpatialShape>, profiles: Vec<Vec<f64>>) -> Result<Self> {
        let s = Self { kind, grid, shapes, profiles, admissible_source: false };
        s.validate()?;
        Ok(s)
    }

    pub fn zero(kind: ControlKind, grid: TimeGrid, shapes: Vec<SpatialShape>) -> Self {
        let profiles = vec![vec![0.0; grid.len()]; shapes.len()];
        Self { kind, grid, shapes, profiles, admissible_source: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shapes.len() != self.profiles.len() {
            return Err(Error::config(format!(
                "{} shapes but {} time profiles",
                self.shapes.len(),
                self.profiles.len()
            )));
        }
        for p in &self.profiles {
            self.grid.ensure_len(p, "control profile")?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical("control profile is not finite".into()));
            }
        }
        for s in &self.shapes {
            match (self.kind, s) {
                (ControlKind::Distributed, SpatialShape::FaceIndicator(_)) => {
                    return Err(Error::config("face indicator used as a distributed shape"))
                }
                (ControlKind::Boundary, SpatialShape::MaskedMode(_)) => {
                    return Err(Error::config("masked mode used as a boundary shape"))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn with_profiles(&self, profiles: Vec<Vec<f64>>) -> Result<Self> {
        let s = Self { profiles, ..self.clone() };
        s.validate()?;
        Ok(s)
    }

    /// `‖v‖ = (Σ_m ∫₀ᵀ p_m²)^{1/2}` by the trapezoid rule.
    pub fn l2_norm(&self) -> f64 {
        let h = self.grid.step();
        let n = self.grid.n_steps();
        self.profiles
            .iter()
            .map(|p| {
                let inner: f64 = p[1..n].iter().map(|v| v * v).sum();
                h * (inner + 0.5 * (p[0] * p[0] + p[n] * p[n]))
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Every profile vanishes on the nodes of `(T − ε, T]`.
    pub fn vanishes_on_trailing_window(&self, epsilon: f64) -> bool {
        let cut = self.grid.t_final() - epsilon;
        let scale = self.profiles.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        (0..self.grid.len())
            .filter(|&k| self.grid.node(k) > cut)
            .all(|k| self.profiles.iter().all(|p| p[k].abs() <= 1e-12 * scale))
    }

    /// Coupling matrix `B` (`basis.len() × shapes`): `∫_ω φ_n s_m` or `∫_Γ γ₁φ_n s_m`.
    pub fn couplings(&self, basis: &SpectralBasis) -> Result<Vec<Vec<f64>>> {
        shape_couplings(self.kind, &self.shapes, basis)
    }

    /// `Σ_m B_{nm} p_m(t_k)` for every mode `n` of the basis.
    pub fn modal_profiles(&self, basis: &SpectralBasis) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        let b = self.couplings(basis)?;
        Ok(b.iter()
            .map(|row| {
                (0..self.grid.len())
                    .map(|k| row.iter().zip(&self.profiles).map(|(bnm, p)| bnm * p[k]).sum())
                    .collect()
            })
            .collect())
    }
}

pub(crate) fn shape_couplings(kind: ControlKind, shapes: &[SpatialShape], basis: &SpectralBasis) -> Result<Vec<Vec<f64>>> {
    let k = basis.len();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(shapes.len());
    let omega = basis.domain().omega_region();
    let needs_gram = shapes.iter().any(|s| matches!(s, SpatialShape::MaskedMode(_)));
    let gram = if needs_gram { Some(basis.region_gram(&omega, k)?) } else { None };
    for shape in shapes {
        let col = match (kind, shape) {
            (ControlKind::Distributed, SpatialShape::MaskedMode(m)) => {
                if *m >= k {
                    return Err(Error::OutOfRange { index: *m, len: k });
                }
                let g = gram.as_ref().expect("gram built for masked modes");
                (0..k).map(|n| g[n][*m]).collect()
            }
            (ControlKind::Distributed, SpatialShape::Samples(v)) => basis.project_values_on(&omega, v)?.into_vec(),
            (ControlKind::Boundary, SpatialShape::FaceIndicator(face)) => {
                if !basis.domain().gamma.contains(face) {
                    return Err(Error::config(format!("face {face} is not part of Γ")));
                }
                let mask: Vec<f64> =
                    basis.boundary_nodes().iter().map(|b| if b.face == *face { 1.0 } else { 0.0 }).collect();
                (0..k).map(|n| basis.boundary_moment(&mask, n)).collect::<Result<_>>()?
            }
            (ControlKind::Boundary, SpatialShape::Samples(v)) => {
                (0..k).map(|n| basis.boundary_moment(v, n)).collect::<Result<_>>()?
            }
            _ => return Err(Error::config("shape does not match the control kind")),
        };
        cols.push(col);
    }
    Ok((0..k).map(|n| cols.iter().map(|c| c[n]).collect()).collect())
}
