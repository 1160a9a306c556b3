use super::signal::{ControlKind, ControlSignal};
use crate::error::{Error, Result};
use crate::volterra::{apply_second_kind, solve_second_kind, Kernel, Negated, Reflected, TwoVarKernel, VolterraKernel};

/// A memoryless control carried over to the memory system.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferredControl {
    /// What is fed to the memory system.
    pub physical: ControlSignal,
    /// Output of the `J` stage; equal to `physical` for boundary controls, and to
    /// `u − R∗u` for distributed ones.
    pub effective: ControlSignal,
}

fn check_kind(signal: &ControlSignal, kind: ControlKind) -> Result<()> {
    if signal.kind != kind {
        return Err(Error::config(format!("expected a {kind:?} control, got {:?}", signal.kind)));
    }
    signal.validate()
}

fn j_stage(signal: &ControlSignal, j: &TwoVarKernel) -> Result<Vec<Vec<f64>>> {
    signal.grid.ensure_same(j.grid())?;
    let reflected = Reflected(j);
    signal.profiles.iter().map(|p| solve_second_kind(&reflected, p)).collect()
}

/// Solve `w(r) − ∫ J(T−s, T−r) w(s) ds = ũ(r)`, then `u − R∗u = w`.
pub fn transfer_distributed(u_tilde: &ControlSignal, j: &TwoVarKernel, r: &Kernel) -> Result<TransferredControl> {
    check_kind(u_tilde, ControlKind::Distributed)?;
    u_tilde.grid.ensure_same(r.grid())?;
    let w = j_stage(u_tilde, j)?;
    let neg = Negated(r);
    let u = w.iter().map(|p| solve_second_kind(&neg, p)).collect::<Result<Vec<_>>>()?;
    Ok(TransferredControl { physical: u_tilde.with_profiles(u)?, effective: u_tilde.with_profiles(w)? })
}

/// Boundary data enter the modal equations without the resolvent, so only the `J`
/// stage applies. The result does not vanish near `T` even when `f̃` does, so it is
/// marked admissible whenever `f̃` vanishes on `(T − window, T]`.
pub fn transfer_boundary(f_tilde: &ControlSignal, j: &TwoVarKernel, window: f64) -> Result<TransferredControl> {
    check_kind(f_tilde, ControlKind::Boundary)?;
    let mut f = f_tilde.with_profiles(j_stage(f_tilde, j)?)?;
    f.admissible_source = f_tilde.admissible_source || f_tilde.vanishes_on_trailing_window(window);
    Ok(TransferredControl { physical: f.clone(), effective: f })
}

/// Inverse of the transfer: `ũ = w − ∫ J(T−s, T−r) w(s) ds` with `w = u − R∗u`
/// for distributed controls, `w = f` for boundary ones.
pub fn transfer_forward(physical: &ControlSignal, j: &TwoVarKernel, r: &Kernel) -> Result<ControlSignal> {
    physical.validate()?;
    physical.grid.ensure_same(j.grid())?;
    let reflected = Reflected(j);
    let neg = Negated(r);
    let profiles = physical
        .profiles
        .iter()
        .map(|p| {
            let w = match physical.kind {
                ControlKind::Distributed => apply_second_kind(&neg, p)?,
                ControlKind::Boundary => p.clone(),
            };
            apply_second_kind(&reflected, &w)
        })
        .collect::<Result<Vec<_>>>()?;
    physical.with_profiles(profiles)
}
