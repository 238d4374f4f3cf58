use serde::{Deserialize, Serialize};

use crate::beam::BeamMode;
use crate::error::{Error, Result};
use crate::kernel::CantileverShape;
use crate::model::{BoundaryCondition, CantileverProfile, DeviceGeometry};
use crate::spectrum::solve_uniform;

/// Fundamental (n = 1, k = 1) and first collective (n = 1, k = 2) modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoModeSelection {
    pub beam: BeamMode,
    /// γ₁,₁ and γ₁,₂.
    pub gamma: [f64; 2],
    /// ω₁ and ω₂ in rad/s.
    pub omega: [f64; 2],
    pub shapes: [CantileverShape; 2],
    pub cantilever_length: f64,
}

impl TwoModeSelection {
    pub fn beta(&self) -> f64 {
        self.beam.beta()
    }

    pub fn frequency_hz(&self) -> [f64; 2] {
        self.omega.map(|w| w / (2.0 * std::f64::consts::PI))
    }
}

/// Pick the two modes of a uniform array from its linear spectrum.
pub fn select_modes(
    geometry: &DeviceGeometry,
    profile: &CantileverProfile,
    bc: BoundaryCondition,
) -> Result<TwoModeSelection> {
    let CantileverProfile::Uniform { length } = profile else {
        return Err(Error::InvalidArgument(format!(
            "two-mode reduction needs a uniform profile, got {}",
            profile.kind()
        )));
    };
    if geometry.count_per_side == 0 {
        return Err(Error::InvalidArgument(
            "two-mode reduction needs cantilevers (count_per_side = 0 has no collective band)".into(),
        ));
    }
    let spectrum = solve_uniform(geometry, profile, bc, 1, 2)?;
    let level = |k| spectrum.level(1, k).ok_or(Error::MissingLevel { n: 1, k });
    let (l1, l2) = (level(1)?, level(2)?);
    Ok(TwoModeSelection {
        beam: BeamMode::of(bc, 1),
        gamma: [l1.gamma, l2.gamma],
        omega: [l1.omega, l2.omega],
        shapes: [CantileverShape::new(l1.gamma)?, CantileverShape::new(l2.gamma)?],
        cantilever_length: *length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::geometry;

    #[test]
    fn frequency_ratio_follows_gamma_ratio() {
        let g = geometry(20, 0.5);
        let s = select_modes(&g, &CantileverProfile::Uniform { length: 0.5e-6 }, BoundaryCondition::ClampedClamped)
            .unwrap();
        let want = (s.gamma[1] / s.gamma[0]).powi(2);
        assert!((s.omega[1] / s.omega[0] - want).abs() < 1e-12 * want);
        assert!(s.shapes[0].chi(0.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bare_beam() {
        let g = geometry(0, 0.5);
        let r = select_modes(&g, &CantileverProfile::Uniform { length: 0.5e-6 }, BoundaryCondition::ClampedClamped);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }
}
