use std::f64::consts::PI;

/// Gauss–Legendre nodes per panel.
pub const PANEL_ORDER: usize = 16;

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1D {
    /// `panels` equal Gauss–Legendre panels on `[a, b]`.
    pub fn composite(a: f64, b: f64, panels: usize) -> Self {
        let (x, w) = gauss_legendre(PANEL_ORDER);
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * PANEL_ORDER);
        let mut weights = Vec::with_capacity(panels * PANEL_ORDER);
        for p in 0..panels {
            let left = a + p as f64 * width;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(left + 0.5 * width * (xi + 1.0));
                weights.push(0.5 * width * wi);
            }
        }
        Self { nodes, weights }
    }

    /// Panels no wider than a quarter wavelength of `sin(n_max π x / ℓ)`.
    pub fn resolving(a: f64, b: f64, length: f64, n_max: usize) -> Self {
        let panels = (2.0 * (b - a) * n_max as f64 / length).ceil() as usize;
        Self::composite(a, b, panels.max(4))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Tensor product of one-dimensional rules; points enumerate with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorQuadrature {
    pub axes: Vec<Rule1D>,
}

impl TensorQuadrature {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Rule1D::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of flat point `p`.
    pub fn unravel(&self, mut p: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for (d, rule) in self.axes.iter().enumerate().rev() {
            idx[d] = p % rule.len();
            p /= rule.len();
        }
        idx
    }

    pub fn point(&self, p: usize) -> Vec<f64> {
        self.unravel(p).iter().zip(&self.axes).map(|(&i, r)| r.nodes[i]).collect()
    }

    pub fn weight(&self, p: usize) -> f64 {
        self.unravel(p).iter().zip(&self.axes).map(|(&i, r)| r.weights[i]).product()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|p| self.point(p)).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|p| self.weight(p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_high_degree() {
        let (x, w) = gauss_legendre(PANEL_ORDER);
        for deg in 0..2 * PANEL_ORDER {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {deg}: {q} vs {exact}");
        }
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn composite_rule_integrates_oscillations() {
        let r = Rule1D::resolving(0.0, PI, PI, 40);
        let q: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * (40.0 * x).sin().powi(2)).sum();
        assert!((q - PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn tensor_enumeration_is_row_major() {
        let t = TensorQuadrature { axes: vec![Rule1D::composite(0.0, 1.0, 1), Rule1D::composite(0.0, 2.0, 2)] };
        assert_eq!(t.len(), 16 * 32);
        assert_eq!(t.unravel(33), vec![1, 1]);
        let total: f64 = t.weights().iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }
}
