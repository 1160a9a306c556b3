use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    Interval { length: f64 },
    Box { lengths: Vec<f64> },
}

impl DomainKind {
    pub fn lengths(&self) -> Vec<f64> {
        match self {
            DomainKind::Interval { length } => vec![*length],
            DomainKind::Box { lengths } => lengths.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainKind::Interval { .. } => 1,
            DomainKind::Box { lengths } => lengths.len(),
        }
    }
}

/// Axis-aligned sub-box, one `(lo, hi)` pair per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub bounds: Vec<(f64, f64)>,
}

impl Region {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::config("region needs at least one axis"));
        }
        for &(lo, hi) in &bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::config(format!("region bounds ({lo}, {hi}) are empty or not finite")));
            }
        }
        Ok(Self { bounds })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.bounds.iter().zip(x).all(|(&(lo, hi), &v)| lo <= v && v <= hi)
    }

    /// Closures intersect.
    pub fn touches(&self, other: &Region) -> bool {
        self.bounds.iter().zip(&other.bounds).all(|(&(a, b), &(c, d))| a <= d && c <= b)
    }

    pub fn measure(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| hi - lo).product()
    }
}

/// A face `x_axis = 0` (`upper == false`) or `x_axis = ℓ_axis` of the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    pub axis: usize,
    pub upper: bool,
}

impl Face {
    pub const LEFT: Face = Face { axis: 0, upper: false };
    pub const RIGHT: Face = Face { axis: 0, upper: true };

    /// `left`, `right` (axis 0), `bottom`, `top` (axis 1), or `x<axis>-` / `x<axis>+`.
    pub fn parse(name: &str) -> Result<Self> {
        let face = match name {
            "left" => Face::LEFT,
            "right" => Face::RIGHT,
            "bottom" => Face { axis: 1, upper: false },
            "top" => Face { axis: 1, upper: true },
            _ => {
                let rest = name.strip_prefix('x').ok_or_else(|| Error::config(format!("unknown face '{name}'")))?;
                let (digits, sign) = rest.split_at(rest.len().saturating_sub(1));
                let axis = digits.parse::<usize>().map_err(|_| Error::config(format!("unknown face '{name}'")))?;
                match sign {
                    "-" => Face { axis, upper: false },
                    "+" => Face { axis, upper: true },
                    _ => return Err(Error::config(format!("unknown face '{name}'"))),
                }
            }
        };
        Ok(face)
    }

    /// Exterior normal component along `axis`.
    pub fn normal_sign(&self) -> f64 {
        if self.upper {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}{}", self.axis, if self.upper { '+' } else { '-' })
    }
}

/// `Ω = (0, ℓ₁) × … × (0, ℓ_d)` with control region `ω`, observation region `ω̃`
/// and controlled boundary part `Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub kind: DomainKind,
    /// `None` means all of `Ω`.
    pub omega: Option<Region>,
    pub omega_tilde: Option<Region>,
    pub gamma: Vec<Face>,
}

impl Domain {
    pub fn interval(length: f64) -> Result<Self> {
        let d = Self { kind: DomainKind::Interval { length }, omega: None, omega_tilde: None, gamma: vec![] };
        d.validate()?;
        Ok(d)
    }

    pub fn box_domain(lengths: Vec<f64>) -> Result<Self> {
        let d = Self { kind: DomainKind::Box { lengths }, omega: None, omega_tilde: None, gamma: vec![] };
        d.validate()?;
        Ok(d)
    }

    pub fn with_omega(mut self, omega: Region) -> Result<Self> {
        self.omega = Some(omega);
        self.validate()?;
        Ok(self)
    }

    pub fn with_omega_tilde(mut self, omega_tilde: Region) -> Result<Self> {
        self.omega_tilde = Some(omega_tilde);
        self.validate()?;
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: Vec<Face>) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.kind.lengths()
    }

    pub fn full_region(&self) -> Region {
        Region { bounds: self.lengths().into_iter().map(|l| (0.0, l)).collect() }
    }

    pub fn omega_region(&self) -> Region {
        self.omega.clone().unwrap_or_else(|| self.full_region())
    }

    pub fn validate(&self) -> Result<()> {
        let lengths = self.lengths();
        if lengths.is_empty() {
            return Err(Error::config("box needs at least one side"));
        }
        if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::config(format!("domain side length must be positive, got {l}")));
        }
        if let Some(omega) = &self.omega {
            check_dim(omega, lengths.len(), "omega")?;
            for (&(lo, hi), &l) in omega.bounds.iter().zip(&lengths) {
                if lo < 0.0 || hi > l {
                    return Err(Error::config(format!("omega ({lo}, {hi}) leaves the domain (0, {l})")));
                }
            }
        }
        if let Some(ot) = &self.omega_tilde {
            check_dim(ot, lengths.len(), "omega_tilde")?;
            for (&(lo, hi), &l) in ot.bounds.iter().zip(&lengths) {
                if lo <= 0.0 || hi >= l {
                    return Err(Error::config(format!(
                        "closure of omega_tilde ({lo}, {hi}) must lie inside (0, {l})"
                    )));
                }
            }
        }
        for (i, face) in self.gamma.iter().enumerate() {
            if face.axis >= lengths.len() {
                return Err(Error::config(format!("face {face} does not exist in dimension {}", lengths.len())));
            }
            if self.gamma[..i].contains(face) {
                return Err(Error::config(format!("face {face} listed twice")));
            }
        }
        Ok(())
    }

    /// `cl ω̃ ∩ cl ω = ∅`, required by distributed-control experiments.
    pub fn check_disjoint(&self) -> Result<()> {
        let ot = self.omega_tilde.as_ref().ok_or_else(|| Error::config("omega_tilde is not set"))?;
        if ot.touches(&self.omega_region()) {
            return Err(Error::config("closures of omega and omega_tilde intersect"));
        }
        Ok(())
    }

    /// Human-readable face name: `left`/`right` on intervals, `x<axis>±` otherwise.
    pub fn face_name(&self, face: &Face) -> String {
        match (&self.kind, face.upper) {
            (DomainKind::Interval { .. }, false) => "left".into(),
            (DomainKind::Interval { .. }, true) => "right".into(),
            _ => face.to_string(),
        }
    }
}

fn check_dim(region: &Region, dim: usize, what: &str) -> Result<()> {
    if region.dim() == dim {
        Ok(())
    } else {
        Err(Error::config(format!("{what} has {} axes, domain has {dim}", region.dim())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn face_names_round_trip() {
        assert_eq!(Face::parse("left").unwrap(), Face::LEFT);
        assert_eq!(Face::parse("x1+").unwrap(), Face { axis: 1, upper: true });
        assert_eq!(Face::parse("x12-").unwrap(), Face { axis: 12, upper: false });
        assert_eq!(Face::parse(&Face { axis: 2, upper: true }.to_string()).unwrap().axis, 2);
        assert!(Face::parse("x1").is_err());
        assert!(Face::parse("middle").is_err());
    }

    #[test]
    fn regions_are_validated() {
        let d = Domain::interval(PI).unwrap();
        assert!(d.clone().with_omega(Region::interval(0.0, PI / 2.0).unwrap()).is_ok());
        assert!(d.clone().with_omega(Region::interval(-0.1, 1.0).unwrap()).is_err());
        assert!(d.clone().with_omega_tilde(Region::interval(0.0, 1.0).unwrap()).is_err());
        assert!(d.clone().with_gamma(vec![Face { axis: 1, upper: false }]).is_err());
        assert!(d.clone().with_gamma(vec![Face::LEFT, Face::LEFT]).is_err());
        assert!(Region::interval(1.0, 1.0).is_err());
        assert!(Domain::interval(-1.0).is_err());
    }

    #[test]
    fn disjointness_uses_closures() {
        let d = Domain::interval(PI)
            .unwrap()
            .with_omega(Region::interval(0.0, PI / 2.0).unwrap())
            .unwrap()
            .with_omega_tilde(Region::interval(2.0, 2.8).unwrap())
            .unwrap();
        assert!(d.check_disjoint().is_ok());
        let touching = d.with_omega_tilde(Region::interval(PI / 2.0, 2.8).unwrap()).unwrap();
        assert!(touching.check_disjoint().is_err());
    }
}
