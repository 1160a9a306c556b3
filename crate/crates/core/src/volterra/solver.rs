use super::grid::TimeGrid;
use super::kernel::Kernel;
use crate::error::{Error, Result};

/// Pivot magnitude below which a trapezoid step is declared singular.
pub const SINGULAR_PIVOT: f64 = 1e-14;

/// Kernel `K(t_i, t_j)`, `j <= i`, of `y(t) + ∫₀ᵗ K(t,s) y(s) ds = g(t)`.
pub trait VolterraKernel {
    fn grid(&self) -> &TimeGrid;

    fn at(&self, i: usize, j: usize) -> f64;

    /// `Σ_{j=1}^{i-1} K(t_i, t_j) y_j`.
    fn interior_sum(&self, i: usize, y: &[f64]) -> f64 {
        (1..i).map(|j| self.at(i, j) * y[j]).sum()
    }
}

impl VolterraKernel for Kernel {
    fn grid(&self) -> &TimeGrid {
        Kernel::grid(self)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.values()[i - j]
    }

    fn interior_sum(&self, i: usize, y: &[f64]) -> f64 {
        if i < 2 {
            return 0.0;
        }
        let v = self.values();
        v[1..i].iter().rev().zip(&y[1..i]).map(|(a, b)| a * b).sum()
    }
}

/// `-K`.
pub struct Negated<'a, K: ?Sized>(pub &'a K);

impl<K: VolterraKernel + ?Sized> VolterraKernel for Negated<'_, K> {
    fn grid(&self) -> &TimeGrid {
        self.0.grid()
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        -self.0.at(i, j)
    }

    fn interior_sum(&self, i: usize, y: &[f64]) -> f64 {
        -self.0.interior_sum(i, y)
    }
}

/// Solve `y_k + h[½K(k,0)y₀ + Σ_{j=1}^{k-1} K(k,j)y_j + ½K(k,k)y_k] = g_k`.
pub fn solve_second_kind<K: VolterraKernel + ?Sized>(kernel: &K, forcing: &[f64]) -> Result<Vec<f64>> {
    let grid = *kernel.grid();
    grid.ensure_len(forcing, "forcing")?;
    let h = grid.step();
    let mut y = vec![0.0; grid.len()];
    y[0] = forcing[0];
    for k in 1..grid.len() {
        let pivot = 1.0 + 0.5 * h * kernel.at(k, k);
        if pivot.abs() < SINGULAR_PIVOT {
            return Err(Error::SingularStep { node: k });
        }
        let history = 0.5 * kernel.at(k, 0) * y[0] + kernel.interior_sum(k, &y);
        y[k] = (forcing[k] - h * history) / pivot;
    }
    Ok(y)
}

/// The forward operator `y ↦ y + ∫₀ᵗ K(t,s) y(s) ds` with the same trapezoid weights
/// as [`solve_second_kind`], so the two are exact inverses up to round-off.
pub fn apply_second_kind<K: VolterraKernel + ?Sized>(kernel: &K, y: &[f64]) -> Result<Vec<f64>> {
    let grid = *kernel.grid();
    grid.ensure_len(y, "argument")?;
    let h = grid.step();
    let mut g = y.to_vec();
    for k in 1..grid.len() {
        let s = 0.5 * kernel.at(k, 0) * y[0] + kernel.interior_sum(k, y) + 0.5 * kernel.at(k, k) * y[k];
        g[k] += h * s;
    }
    Ok(g)
}

/// Like [`solve_second_kind`] but checks that `forcing` lives on `grid`.
pub fn solve_on<K: VolterraKernel + ?Sized>(kernel: &K, grid: &TimeGrid, forcing: &[f64]) -> Result<Vec<f64>> {
    kernel.grid().ensure_same(grid)?;
    solve_second_kind(kernel, forcing)
}

/// Truncated Cauchy product `c_k = Σ_{j=0}^{k} a_{k-j} b_j`, same length as `a`.
pub fn cauchy_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|k| a[..=k].iter().rev().zip(&b[..=k]).map(|(x, y)| x * y).sum())
        .collect()
}

/// Trapezoid rule for `(a∗b)(t_k) = ∫₀^{t_k} a(t_k − s) b(s) ds`.
pub fn trapezoid_convolution(a: &[f64], b: &[f64], h: f64) -> Vec<f64> {
    let n = a.len().min(b.len());
    let mut c = vec![0.0; n];
    for k in 1..n {
        let full: f64 = a[..=k].iter().rev().zip(&b[..=k]).map(|(x, y)| x * y).sum();
        c[k] = h * (full - 0.5 * (a[k] * b[0] + a[0] * b[k]));
    }
    c
}

/// `(a∗b)` for two sampled functions on `grid`.
pub fn convolve(grid: &TimeGrid, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    grid.ensure_len(a, "left factor")?;
    grid.ensure_len(b, "right factor")?;
    Ok(trapezoid_convolution(a, b, grid.step()))
}

/// `e^{-λ² t}` on the grid.
pub fn exp_decay(grid: &TimeGrid, lambda_sq: f64) -> Vec<f64> {
    grid.sample(|t| (-lambda_sq * t).exp())
}

/// Resolvent kernel: `R = M − M∗R`.
///
/// If `m` carries its derivative, `R'` is attached as `M' − M(0)R − M'∗R`.
pub fn resolvent(m: &Kernel) -> Result<Kernel> {
    let grid = *m.grid();
    let r = solve_second_kind(m, m.values())?;
    let derivative = m.derivative_values().map(|dm| {
        let conv = trapezoid_convolution(dm, &r, grid.step());
        dm.iter()
            .zip(&r)
            .zip(&conv)
            .map(|((d, rv), c)| d - m.at0() * rv - c)
            .collect::<Vec<_>>()
    });
    let kernel = Kernel::from_samples(grid, r, format!("resolvent({})", m.label()))?;
    match derivative {
        Some(d) => kernel.with_derivative(d),
        None => Ok(kernel),
    }
}

/// `L = R' + M(0) R`.
pub fn l_kernel(m: &Kernel, r: &Kernel) -> Result<Kernel> {
    m.grid().ensure_same(r.grid())?;
    let dr = r.derivative_or_fd();
    let m0 = m.at0();
    let values = dr.iter().zip(r.values()).map(|(d, v)| d + m0 * v).collect();
    Kernel::from_samples(*m.grid(), values, format!("L({})", m.label()))
}

/// `Z(t) = −∫₀ᵗ L(t−s) e^{−λ²s} ds`.
pub fn zn_kernel(l: &Kernel, lambda_sq: f64) -> Result<Kernel> {
    if !(lambda_sq > 0.0 && lambda_sq.is_finite()) {
        return Err(Error::config(format!("lambda_sq must be positive, got {lambda_sq}")));
    }
    let grid = *l.grid();
    let e0 = exp_decay(&grid, lambda_sq);
    let z = trapezoid_convolution(l.values(), &e0, grid.step()).into_iter().map(|v| -v).collect();
    Kernel::from_samples(grid, z, format!("Z[{lambda_sq}]"))
}

/// `∫₀^{t_k} f(u) e^{−λ²(t_k−u)} du` for `f` linear between nodes, the exponential
/// integrated exactly. Stays accurate when `hλ²` is large, where the trapezoid rule
/// overestimates by a factor of about `hλ²/2`.
pub fn exp_product_convolution(f: &[f64], lambda_sq: f64, h: f64) -> Vec<f64> {
    let x = lambda_sq * h;
    // Weights of f_{k−1} and f_k over one step.
    let (w_prev, w_next) = if x < 1e-4 {
        (h * (0.5 - x / 3.0 + x * x / 8.0), h * (0.5 - x / 6.0 + x * x / 24.0))
    } else {
        let e = (-x).exp();
        let q = -(-x).exp_m1() / x;
        ((q - e) / lambda_sq, (1.0 - q) / lambda_sq)
    };
    let decay = (-x).exp();
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(acc);
    for k in 1..f.len() {
        acc = decay * acc + w_prev * f[k - 1] + w_next * f[k];
        out.push(acc);
    }
    out
}

/// [`zn_kernel`] with the exponential integrated exactly.
pub fn zn_kernel_product(l: &Kernel, lambda_sq: f64) -> Result<Kernel> {
    if !(lambda_sq > 0.0 && lambda_sq.is_finite()) {
        return Err(Error::config(format!("lambda_sq must be positive, got {lambda_sq}")));
    }
    let grid = *l.grid();
    let z = exp_product_convolution(l.values(), lambda_sq, grid.step()).into_iter().map(|v| -v).collect();
    Kernel::from_samples(grid, z, format!("Z[{lambda_sq}]"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volterra::ExpPoly;
    use proptest::prelude::*;

    fn grid(t: f64, n: usize) -> TimeGrid {
        TimeGrid::new(t, n).unwrap()
    }

    fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn sup(a: &[f64]) -> f64 {
        a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Picard iteration `R ← M − M∗R` with a fine rectangle rule, written
    /// without any of the solver's machinery.
    fn picard_resolvent(m: impl Fn(f64) -> f64, t: f64, n: usize) -> Vec<f64> {
        let h = t / n as f64;
        let mv: Vec<f64> = (0..=n).map(|k| m(k as f64 * h)).collect();
        let mut r = mv.clone();
        for _ in 0..60 {
            let mut next = vec![0.0; n + 1];
            for k in 0..=n {
                let mut s = 0.0;
                for j in 0..=k {
                    let w = if j == 0 || j == k { 0.5 } else { 1.0 };
                    s += w * mv[k - j] * r[j];
                }
                next[k] = mv[k] - if k == 0 { 0.0 } else { h * s };
            }
            r = next;
        }
        r
    }

    #[test]
    fn zero_kernel_is_identity() {
        let g = grid(1.0, 50);
        let forcing = g.sample(|t| (3.0 * t).sin() + 0.2);
        let y = solve_second_kind(&Kernel::zero(g), &forcing).unwrap();
        assert_eq!(y, forcing);
    }

    #[test]
    fn constant_kernel_unit_forcing() {
        let g = grid(1.0, 1000);
        let k = Kernel::from_closed_form(g, &ExpPoly::constant(1.0), "1");
        let y = solve_second_kind(&k, &vec![1.0; g.len()]).unwrap();
        assert!(sup_diff(&y, &g.sample(|t| (-t).exp())) < 1e-6);
    }

    #[test]
    fn exponential_kernel_unit_forcing() {
        let g = grid(1.0, 1000);
        let k = Kernel::from_closed_form(g, &ExpPoly::exp(-1.0), "e");
        let y = solve_second_kind(&k, &vec![1.0; g.len()]).unwrap();
        let exact = g.sample(|t| 0.5 + 0.5 * (-2.0 * t).exp());
        assert!(sup_diff(&y, &exact) < 1e-6);
    }

    #[test]
    fn forcing_on_wrong_grid_is_rejected() {
        let g = grid(1.0, 10);
        let err = solve_second_kind(&Kernel::zero(g), &[1.0; 5]).unwrap_err();
        assert!(matches!(err, Error::GridMismatch(_)));
        let other = grid(2.0, 10);
        assert!(solve_on(&Kernel::zero(g), &other, &[0.0; 11]).is_err());
    }

    #[test]
    fn singular_step_reports_node() {
        // 1 + (h/2) k(0) = 0 with h = 0.1.
        let g = grid(1.0, 10);
        let k = Kernel::from_closed_form(g, &ExpPoly::constant(-20.0), "c");
        assert_eq!(solve_second_kind(&k, &[1.0; 11]), Err(Error::SingularStep { node: 1 }));
    }

    #[test]
    fn resolvent_examples() {
        let g = grid(1.0, 1000);
        let r0 = resolvent(&Kernel::zero(g)).unwrap();
        assert!(r0.is_zero());

        let r1 = resolvent(&Kernel::from_closed_form(g, &ExpPoly::constant(1.0), "1")).unwrap();
        assert_eq!(r1.at0(), 1.0);
        assert!(sup_diff(r1.values(), &g.sample(|t| (-t).exp())) < 1e-6);
        let picard = picard_resolvent(|_| 1.0, 1.0, 1000);
        assert!(sup_diff(r1.values(), &picard) < 1e-12);

        let m = Kernel::from_closed_form(g, &ExpPoly::exp(-1.0), "e");
        let r2 = resolvent(&m).unwrap();
        assert_eq!(r2.at0(), m.at0());
        assert!(sup_diff(r2.values(), &g.sample(|t| (-2.0 * t).exp())) < 1e-6);
        let dr = r2.derivative_values().unwrap();
        assert!(sup_diff(dr, &g.sample(|t| -2.0 * (-2.0 * t).exp())) < 1e-5);
    }

    #[test]
    fn resolvent_is_second_order() {
        let err = |n| {
            let g = grid(2.0, n);
            let r = resolvent(&Kernel::from_closed_form(g, &ExpPoly::constant(1.0), "1")).unwrap();
            sup_diff(r.values(), &g.sample(|t| (-t).exp()))
        };
        let ratio = err(500) / err(1000);
        assert!((3.8..4.2).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn resolvent_reciprocity() {
        let g = grid(1.0, 400);
        for form in [ExpPoly::constant(1.0), ExpPoly::exp(-1.0), ExpPoly::poly(1.0, 0.5, 0.0)] {
            let m = Kernel::from_closed_form(g, &form, "m");
            let r = resolvent(&m).unwrap();
            let back = resolvent(&r.scaled(-1.0)).unwrap();
            let minus_m: Vec<f64> = m.values().iter().map(|v| -v).collect();
            assert!(sup_diff(back.values(), &minus_m) <= 1e-12 * sup(m.values()));
        }
    }

    #[test]
    fn l_kernel_examples() {
        let g = grid(1.0, 1000);
        let zero = Kernel::zero(g);
        assert!(l_kernel(&zero, &resolvent(&zero).unwrap()).unwrap().is_zero());

        let one = Kernel::from_closed_form(g, &ExpPoly::constant(1.0), "1");
        let l1 = l_kernel(&one, &resolvent(&one).unwrap()).unwrap();
        assert!(sup(l1.values()) < 1e-6);

        let e = Kernel::from_closed_form(g, &ExpPoly::exp(-1.0), "e");
        let r = resolvent(&e).unwrap();
        let l2 = l_kernel(&e, &r).unwrap();
        assert!(sup_diff(l2.values(), &g.sample(|t| -(-2.0 * t).exp())) < 1e-5);
        assert_eq!(l2.at0(), r.derivative_values().unwrap()[0] + e.at0() * e.at0());

        // Without the analytic derivative the finite-difference path agrees.
        let tab = Kernel::from_samples(g, e.values().to_vec(), "tab").unwrap();
        let l3 = l_kernel(&tab, &resolvent(&tab).unwrap()).unwrap();
        assert!(sup_diff(l3.values(), l2.values()) < 1e-5);
    }

    #[test]
    fn zn_examples() {
        let g = grid(1.0, 1000);
        assert!(zn_kernel(&Kernel::zero(g), 3.0).unwrap().is_zero());
        assert!(zn_kernel(&Kernel::zero(g), 0.0).is_err());

        let c = 0.7;
        let z = zn_kernel(&Kernel::from_closed_form(g, &ExpPoly::constant(c), "c"), 1.0).unwrap();
        assert_eq!(z.at0(), 0.0);
        assert!(sup_diff(z.values(), &g.sample(|t| -c * (1.0 - (-t).exp()))) < 1e-6);

        let l = Kernel::from_closed_form(g, &ExpPoly::exp(-2.0).scaled(-1.0), "l");
        let z = zn_kernel(&l, 2.0).unwrap();
        assert!(sup_diff(z.values(), &g.sample(|t| t * (-2.0 * t).exp())) < 1e-6);
    }

    #[test]
    fn exp_product_is_exact_for_linear_data() {
        let grid = TimeGrid::new(1.0, 1000).unwrap();
        for l in [1e-3, 1.0, 2500.0] {
            let ones = exp_product_convolution(&vec![1.0; grid.len()], l, grid.step());
            let ramp = exp_product_convolution(&grid.nodes(), l, grid.step());
            for k in 0..grid.len() {
                let t = grid.node(k);
                let e = -(-l * t).exp_m1() / l;
                assert!((ones[k] - e).abs() <= 1e-12 * (1.0 + e), "{l} {k}");
                let r = t / l - e / l;
                assert!((ramp[k] - r).abs() <= 1e-11 * (1.0 + r.abs()), "{l} {k}");
            }
        }
    }

    #[test]
    fn trapezoid_convolution_commutes() {
        let g = grid(1.0, 37);
        let a = g.sample(|t| (2.0 * t).cos());
        let b = g.sample(|t| t * t - 0.3);
        let ab = convolve(&g, &a, &b).unwrap();
        let ba = convolve(&g, &b, &a).unwrap();
        assert!(sup_diff(&ab, &ba) < 1e-15);
        assert_eq!(ab[0], 0.0);
    }

    proptest! {
        #[test]
        fn round_trip_recovers_solution(ys in prop::collection::vec(-2.0f64..2.0, 21), c in -3.0f64..3.0, rate in -2.0f64..1.0) {
            let g = grid(1.0, 20);
            let m = Kernel::from_closed_form(g, &ExpPoly { coeffs: [c, 0.5, 0.0], rate }, "m");
            let conv = trapezoid_convolution(m.values(), &ys, g.step());
            let forcing: Vec<f64> = ys.iter().zip(&conv).map(|(y, c)| y + c).collect();
            let back = solve_second_kind(&m, &forcing).unwrap();
            prop_assert!(sup_diff(&back, &ys) <= 1e-12 * (1.0 + sup(&ys)));
        }

        #[test]
        fn solver_is_linear(
            g1 in prop::collection::vec(-1.0f64..1.0, 31),
            g2 in prop::collection::vec(-1.0f64..1.0, 31),
            alpha in -5.0f64..5.0,
            beta in -5.0f64..5.0,
        ) {
            let g = grid(1.5, 30);
            let m = Kernel::from_closed_form(g, &ExpPoly::poly(1.0, -0.4, 0.2), "m");
            let combo: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| alpha * a + beta * b).collect();
            let y = solve_second_kind(&m, &combo).unwrap();
            let y1 = solve_second_kind(&m, &g1).unwrap();
            let y2 = solve_second_kind(&m, &g2).unwrap();
            let lin: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| alpha * a + beta * b).collect();
            prop_assert!(sup_diff(&y, &lin) <= 1e-12 * (1.0 + sup(&lin)));
        }
    }
}
