use std::f64::consts::PI;

use rayon::prelude::*;

use super::coeffs::CoefficientVector;
use super::domain::{Domain, Face, Region};
use super::quadrature::{Rule1D, TensorQuadrature};
use crate::error::{Error, Result};

pub const DEFAULT_MODE_CAP: usize = 4096;

/// One Dirichlet eigenpair: 1-based index tuple and `λ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub index: Vec<usize>,
    pub lambda_sq: f64,
    /// `Π_d sqrt(2/ℓ_d)`.
    pub normalization: f64,
}

/// Boundary quadrature node on one face of `Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryNode {
    pub face: Face,
    pub point: Vec<f64>,
    pub weight: f64,
}

/// Analytic eigenpairs of the Dirichlet Laplacian on an interval or box.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    domain: Domain,
    lengths: Vec<f64>,
    modes: Vec<Mode>,
    /// Highest 1-based index along each axis.
    axis_max: Vec<usize>,
    quadrature: TensorQuadrature,
    boundary: Vec<BoundaryNode>,
}

impl SpectralBasis {
    pub fn build(domain: Domain, mode_count: usize) -> Result<Self> {
        Self::build_with_cap(domain, mode_count, DEFAULT_MODE_CAP)
    }

    pub fn build_with_cap(domain: Domain, mode_count: usize, cap: usize) -> Result<Self> {
        domain.validate()?;
        if mode_count == 0 {
            return Err(Error::config("mode_count must be >= 1"));
        }
        if mode_count > cap {
            return Err(Error::config(format!("mode_count {mode_count} exceeds the cap {cap}")));
        }
        let lengths = domain.lengths();
        let modes = enumerate_modes(&lengths, mode_count);
        let mut axis_max = vec![1; lengths.len()];
        for m in &modes {
            for (d, &i) in m.index.iter().enumerate() {
                axis_max[d] = axis_max[d].max(i);
            }
        }
        let quadrature = TensorQuadrature {
            axes: lengths.iter().zip(&axis_max).map(|(&l, &n)| Rule1D::resolving(0.0, l, l, n)).collect(),
        };
        let mut basis = Self { domain, lengths, modes, axis_max, quadrature, boundary: vec![] };
        basis.boundary = basis.boundary_rule();
        Ok(basis)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// `λ²` of the mode stored at (0-based) position `n`.
    pub fn lambda_sq(&self, n: usize) -> f64 {
        self.modes[n].lambda_sq
    }

    pub fn lambda_sqs(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda_sq).collect()
    }

    pub fn quadrature(&self) -> &TensorQuadrature {
        &self.quadrature
    }

    /// Boundary nodes on `Γ`, face by face in the order `Γ` was given.
    pub fn boundary_nodes(&self) -> &[BoundaryNode] {
        &self.boundary
    }

    #[inline]
    fn factor(&self, d: usize, i: usize, x: f64) -> f64 {
        (i as f64 * PI * x / self.lengths[d]).sin()
    }

    pub fn eval(&self, n: usize, x: &[f64]) -> f64 {
        let m = &self.modes[n];
        m.normalization * m.index.iter().enumerate().map(|(d, &i)| self.factor(d, i, x[d])).product::<f64>()
    }

    pub fn gradient(&self, n: usize, x: &[f64]) -> Vec<f64> {
        let m = &self.modes[n];
        (0..self.lengths.len())
            .map(|axis| {
                let mut g = m.normalization;
                for (d, &i) in m.index.iter().enumerate() {
                    let k = i as f64 * PI / self.lengths[d];
                    g *= if d == axis { k * (k * x[d]).cos() } else { (k * x[d]).sin() };
                }
                g
            })
            .collect()
    }

    /// `Δφ_n(x)` from the analytic second derivatives.
    pub fn laplacian(&self, n: usize, x: &[f64]) -> f64 {
        let m = &self.modes[n];
        (0..self.lengths.len())
            .map(|axis| {
                let mut g = m.normalization;
                for (d, &i) in m.index.iter().enumerate() {
                    let k = i as f64 * PI / self.lengths[d];
                    g *= if d == axis { -k * k * (k * x[d]).sin() } else { (k * x[d]).sin() };
                }
                g
            })
            .sum()
    }

    /// `γ₁φ_n = ∂φ_n/∂ν` (exterior normal) at `x` on `face`.
    pub fn normal_derivative(&self, n: usize, face: &Face, x: &[f64]) -> f64 {
        let mut p = x.to_vec();
        p[face.axis] = if face.upper { self.lengths[face.axis] } else { 0.0 };
        face.normal_sign() * self.gradient(n, &p)[face.axis]
    }

    /// `γ₁φ_n` sampled at the boundary nodes.
    pub fn boundary_trace(&self, n: usize) -> Vec<f64> {
        self.boundary.iter().map(|b| self.normal_derivative(n, &b.face, &b.point)).collect()
    }

    /// `∫_Γ (γ₁φ_n) f dσ` for `f` sampled at the boundary nodes.
    pub fn boundary_moment(&self, f_shape: &[f64], n: usize) -> Result<f64> {
        if f_shape.len() != self.boundary.len() {
            return Err(Error::config(format!(
                "boundary shape has {} samples, Γ has {} nodes",
                f_shape.len(),
                self.boundary.len()
            )));
        }
        if n >= self.len() {
            return Err(Error::OutOfRange { index: n, len: self.len() });
        }
        Ok(self
            .boundary
            .iter()
            .zip(f_shape)
            .map(|(b, f)| b.weight * f * self.normal_derivative(n, &b.face, &b.point))
            .sum())
    }

    /// Quadrature over a sub-box, panels aligned with its edges.
    pub fn region_quadrature(&self, region: &Region) -> Result<TensorQuadrature> {
        if region.dim() != self.lengths.len() {
            return Err(Error::config("region dimension does not match the domain"));
        }
        Ok(TensorQuadrature {
            axes: region
                .bounds
                .iter()
                .zip(&self.lengths)
                .zip(&self.axis_max)
                .map(|((&(a, b), &l), &n)| Rule1D::resolving(a, b, l, n))
                .collect(),
        })
    }

    /// `∫ f φ_n` over a quadrature, for every mode.
    fn project_on(&self, quad: &TensorQuadrature, values: &[f64]) -> CoefficientVector {
        let points = quad.points();
        let weights = quad.weights();
        let wf: Vec<f64> = weights.iter().zip(values).map(|(w, f)| w * f).collect();
        let c = (0..self.len())
            .into_par_iter()
            .map(|n| points.iter().zip(&wf).map(|(x, v)| v * self.eval(n, x)).sum())
            .collect();
        let c: Vec<f64> = c;
        CoefficientVector::from_fn(c.len(), |i| c[i])
    }

    /// Coefficients `∫_Ω f φ_n` of a field given in closed form.
    pub fn project_fn(&self, f: impl Fn(&[f64]) -> f64) -> CoefficientVector {
        let values: Vec<f64> = self.quadrature.points().iter().map(|x| f(x)).collect();
        self.project_on(&self.quadrature, &values)
    }

    /// Coefficients of a field that vanishes outside `region`.
    pub fn project_fn_on(&self, region: &Region, f: impl Fn(&[f64]) -> f64) -> Result<CoefficientVector> {
        let quad = self.region_quadrature(region)?;
        let values: Vec<f64> = quad.points().iter().map(|x| f(x)).collect();
        Ok(self.project_on(&quad, &values))
    }

    /// Coefficients of a field vanishing outside `region`, sampled at the points
    /// of [`Self::region_quadrature`].
    pub fn project_values_on(&self, region: &Region, values: &[f64]) -> Result<CoefficientVector> {
        let quad = self.region_quadrature(region)?;
        if values.len() != quad.len() {
            return Err(Error::config(format!(
                "field has {} samples, region quadrature has {} nodes",
                values.len(),
                quad.len()
            )));
        }
        Ok(self.project_on(&quad, values))
    }

    /// Coefficients of a field sampled at the points of [`Self::quadrature`].
    pub fn project_values(&self, values: &[f64]) -> Result<CoefficientVector> {
        if values.len() != self.quadrature.len() {
            return Err(Error::config(format!(
                "field has {} samples, quadrature has {} nodes",
                values.len(),
                self.quadrature.len()
            )));
        }
        Ok(self.project_on(&self.quadrature, values))
    }

    /// `Σ_n c_n φ_n(x)` at each point.
    pub fn synthesize<P: AsRef<[f64]> + Sync>(&self, coeffs: &CoefficientVector, points: &[P]) -> Vec<f64> {
        let k = coeffs.len().min(self.len());
        points
            .par_iter()
            .map(|x| (0..k).map(|n| coeffs[n] * self.eval(n, x.as_ref())).sum())
            .collect()
    }

    /// `G_{nm} = ∫_region φ_n φ_m` over the first `k` modes.
    pub fn region_gram(&self, region: &Region, k: usize) -> Result<Vec<Vec<f64>>> {
        let quad = self.region_quadrature(region)?;
        let k = k.min(self.len());
        let points = quad.points();
        let weights = quad.weights();
        let table: Vec<Vec<f64>> = (0..k).into_par_iter().map(|n| points.iter().map(|x| self.eval(n, x)).collect()).collect();
        Ok((0..k)
            .into_par_iter()
            .map(|n| {
                (0..k)
                    .map(|m| weights.iter().zip(&table[n]).zip(&table[m]).map(|((w, a), b)| w * a * b).sum())
                    .collect()
            })
            .collect())
    }

    pub fn gram_matrix(&self, k: usize) -> Vec<Vec<f64>> {
        self.region_gram(&self.domain.full_region(), k).expect("full region matches the domain")
    }

    fn boundary_rule(&self) -> Vec<BoundaryNode> {
        let mut nodes = vec![];
        for face in &self.domain.gamma {
            let others: Vec<usize> = (0..self.lengths.len()).filter(|&d| d != face.axis).collect();
            let fixed = if face.upper { self.lengths[face.axis] } else { 0.0 };
            if others.is_empty() {
                nodes.push(BoundaryNode { face: *face, point: vec![fixed], weight: 1.0 });
                continue;
            }
            let quad = TensorQuadrature {
                axes: others
                    .iter()
                    .map(|&d| Rule1D::resolving(0.0, self.lengths[d], self.lengths[d], self.axis_max[d]))
                    .collect(),
            };
            for p in 0..quad.len() {
                let sub = quad.point(p);
                let mut point = vec![fixed; self.lengths.len()];
                for (&d, v) in others.iter().zip(sub) {
                    point[d] = v;
                }
                nodes.push(BoundaryNode { face: *face, point, weight: quad.weight(p) });
            }
        }
        nodes
    }
}

/// First `count` index tuples ordered by `λ²`, ties broken lexicographically.
fn enumerate_modes(lengths: &[f64], count: usize) -> Vec<Mode> {
    let norm: f64 = lengths.iter().map(|l| (2.0 / l).sqrt()).product();
    let lam = |idx: &[usize]| -> f64 {
        idx.iter().zip(lengths).map(|(&i, &l)| (i as f64 * PI / l).powi(2)).sum()
    };
    let mut bound: f64 = lengths.iter().map(|l| (PI / l).powi(2)).sum();
    loop {
        let mut found: Vec<Vec<usize>> = vec![];
        let mut idx = vec![1usize; lengths.len()];
        'outer: loop {
            if lam(&idx) <= bound {
                found.push(idx.clone());
            }
            // odometer over the box of tuples with single-axis eigenvalue under the bound
            let mut d = lengths.len();
            loop {
                if d == 0 {
                    break 'outer;
                }
                d -= 1;
                idx[d] += 1;
                let mut probe = vec![1usize; lengths.len()];
                probe[d] = idx[d];
                if lam(&probe) <= bound {
                    break;
                }
                idx[d] = 1;
            }
        }
        if found.len() >= count {
            let mut modes: Vec<Mode> =
                found.into_iter().map(|index| Mode { lambda_sq: lam(&index), index, normalization: norm }).collect();
            modes.sort_by(|a, b| a.lambda_sq.total_cmp(&b.lambda_sq).then_with(|| a.index.cmp(&b.index)));
            modes.truncate(count);
            return modes;
        }
        bound *= 2.0;
    }
}
