use serde::{Deserialize, Serialize};

use super::integrals::OverlapIntegrals;
use super::modes::TwoModeSelection;
use crate::error::{Error, Result};
use crate::model::DeviceGeometry;

/// Constants of the reduced two-mode model. Arrays are indexed by mode
/// (0 = fundamental, 1 = collective).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    /// ω_j in rad/s.
    pub omega: [f64; 2],
    /// M_j in kg.
    pub mass: [f64; 2],
    /// μ_j in kg/s.
    pub damping: [f64; 2],
    /// C₁₁ and C₂₂.
    pub self_cubic: [f64; 2],
    /// C₁₂.
    pub cross_cubic: f64,
    /// ℱ_j / f_j = (L/2)Γ₄, in m.
    pub force_per_unit: f64,
    /// ℱ_j in N.
    pub force: [f64; 2],
}

impl EffectiveParams {
    /// Same device with other modal forces f₁, f₂ (N/m).
    pub fn with_forces(mut self, f1: f64, f2: f64) -> Self {
        self.force = [self.force_per_unit * f1, self.force_per_unit * f2];
        self
    }

    /// Same device with other viscosities.
    pub fn with_damping(mut self, damping: [f64; 2]) -> Self {
        self.damping = damping;
        self
    }
}

/// Effective masses, damping, cubic coefficients and forces.
///
/// `c_y` and `c_eta` are viscosities per unit length of beam and
/// cantilever; `f1`, `f2` are the modal force amplitudes per unit length.
pub fn effective_params(
    selection: &TwoModeSelection,
    ints: &OverlapIntegrals,
    geometry: &DeviceGeometry,
    c_y: f64,
    c_eta: f64,
    f1: f64,
    f2: f64,
) -> Result<EffectiveParams> {
    if !(c_y >= 0.0 && c_eta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "viscosities must be non-negative, got c_y = {c_y}, c_eta = {c_eta}"
        )));
    }
    if !(f1.is_finite() && f2.is_finite()) {
        return Err(Error::InvalidArgument("modal forces must be finite".into()));
    }
    let big_l = geometry.beam_length;
    let l = selection.cantilever_length;
    let n = geometry.count_per_side as f64;
    let m_b = geometry.beam_linear_density * big_l;
    let m_c = geometry.cantilever_linear_density * l;
    let e_b = geometry.beam_rigidity;
    let e_c = geometry.cantilever_rigidity;
    let g = ints.beam;
    let w = selection.omega;
    let k = |a: usize, b: usize, c: usize, d: usize| ints.k[a][b][c][d];

    let mass = [0, 1].map(|j| m_b + 2.0 * n * m_c * ints.l[j][j]);
    let damping = [0, 1].map(|j| 0.5 * (big_l * c_y + 2.0 * n * l * c_eta * ints.lambda[j][j]));
    let beam_part = |w2: f64, stiff: f64| g.gamma1 * m_b * w2 / big_l.powi(2) - stiff * g.gamma2 * e_b / big_l.powi(5);
    let arm = 2.0 * n * g.gamma3 / l.powi(2);
    let self_cubic = [0, 1].map(|j| {
        let w2 = w[j] * w[j];
        beam_part(w2, 3.0)
            + arm * (m_c * w2 * ints.i[j][j] - 3.0 * e_c / l.powi(3) * k(j, j, j, j))
    });
    let w2 = w[0] * w[0] + w[1] * w[1];
    let cross_cubic = beam_part(w2, 6.0)
        + arm * (m_c * w2 * ints.i[0][1] - e_c / l.powi(3) * (k(0, 0, 1, 1) + k(1, 1, 0, 0) + 4.0 * k(0, 1, 0, 1)));
    let force_per_unit = 0.5 * big_l * g.gamma4;
    Ok(EffectiveParams {
        omega: w,
        mass,
        damping,
        self_cubic,
        cross_cubic,
        force_per_unit,
        force: [force_per_unit * f1, force_per_unit * f2],
    })
}
