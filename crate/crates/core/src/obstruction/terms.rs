use crate::error::Result;
use crate::simulator::MemorySystem;
use crate::volterra::{exp_product_convolution, resolvent, zn_kernel_product};

/// Per-mode pieces of the `ξ_n` bracket at `T`, exponentials integrated exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ModeTerms {
    pub sup_hn: f64,
    /// `(e₀∗R)(T)`.
    pub e0_r: f64,
    /// `(H_n∗e₀)(T)`.
    pub hn_e0: f64,
    /// `(R∗H_n∗e₀)(T)`.
    pub r_hn_e0: f64,
}

impl ModeTerms {
    pub fn compute(sys: &MemorySystem, lambda_sq: f64) -> Result<Self> {
        let grid = *sys.grid();
        let h = grid.step();
        let r = sys.resolvent().values();
        let hn = resolvent(&zn_kernel_product(sys.l(), lambda_sq)?)?;
        let hn_e0 = exp_product_convolution(hn.values(), lambda_sq, h);
        let n = grid.n_steps();
        let inner: f64 = (1..n).map(|j| r[n - j] * hn_e0[j]).sum();
        let r_hn_e0 = h * (inner + 0.5 * (r[n] * hn_e0[0] + r[0] * hn_e0[n]));
        Ok(Self {
            sup_hn: hn.sup_norm(),
            e0_r: *exp_product_convolution(r, lambda_sq, h).last().expect("grid has nodes"),
            hn_e0: hn_e0[n],
            r_hn_e0,
        })
    }

    /// `β_n = e₀∗R + H_n∗e₀ − R∗H_n∗e₀` at `T`.
    pub fn beta(&self) -> f64 {
        self.e0_r + self.iterated()
    }

    /// `H_n∗(e₀ − e₀∗R)` at `T`.
    pub fn iterated(&self) -> f64 {
        self.hn_e0 - self.r_hn_e0
    }
}
