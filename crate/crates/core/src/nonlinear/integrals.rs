use serde::{Deserialize, Serialize};

use super::modes::TwoModeSelection;
use crate::beam::BeamMode;
use crate::error::{Error, Result};
use crate::kernel::CantileverShape;
use crate::quadrature::{composite, integrate_converged, nested_square};

/// Relative tolerance of the beam-mode quadratures.
pub const INTEGRAL_RTOL: f64 = 1e-12;
/// Panels of the 32-point rule used for cantilever integrals; the result is
/// checked against twice as many.
pub const CANTILEVER_PANELS: usize = 16;
/// Largest accepted relative change between the two panel counts.
///
/// For nearly rigid cantilevers the derivatives of h lose digits to
/// cancellation, so the check is looser than the rule's actual accuracy.
pub const CANTILEVER_GAP_LIMIT: f64 = 1e-6;

fn checked(coarse: f64, fine: f64, gap: &mut f64, what: &str) -> Result<f64> {
    let rel = if fine == 0.0 { coarse.abs() } else { ((fine - coarse) / fine).abs() };
    if rel > CANTILEVER_GAP_LIMIT {
        return Err(Error::Quadrature(format!(
            "{what}: {coarse} with {CANTILEVER_PANELS} panels vs {fine} with {} panels",
            2 * CANTILEVER_PANELS
        )));
    }
    *gap = gap.max(rel);
    Ok(fine)
}

/// Beam-mode integrals Γ₁..Γ₄.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamIntegrals {
    /// ∫₀¹∫₀ᵘ φ′² dν du. The outer square that often appears in print
    /// is inconsistent with the closed form and with the tabulated cubic
    /// coefficients, so it is left out.
    pub gamma1: f64,
    /// ∫(φ′φ″)² du
    pub gamma2: f64,
    /// ∫φ⁴ du
    pub gamma3: f64,
    /// ∫φ du
    pub gamma4: f64,
}

impl BeamIntegrals {
    pub fn by_quadrature(mode: &BeamMode) -> Result<Self> {
        let d = |u: f64, k| mode.value(u, k);
        Ok(Self {
            // ∫₀¹∫₀ᵘ f = ∫₀¹ (1 − u) f
            gamma1: integrate_converged(0.0, 1.0, INTEGRAL_RTOL, 0.0, |u| (1.0 - u) * d(u, 1).powi(2))?,
            gamma2: integrate_converged(0.0, 1.0, INTEGRAL_RTOL, 0.0, |u| (d(u, 1) * d(u, 2)).powi(2))?,
            gamma3: integrate_converged(0.0, 1.0, INTEGRAL_RTOL, 0.0, |u| d(u, 0).powi(4))?,
            gamma4: integrate_converged(0.0, 1.0, INTEGRAL_RTOL, 0.0, |u| d(u, 0))?,
        })
    }
}

/// Γ₁..Γ₄ in closed form, t = tan(β/2).
///
/// Exact for the symmetric clamped-clamped modes (odd n) with the sign
/// convention of [`BeamMode`].
pub fn gamma_closed_form(beta: f64) -> BeamIntegrals {
    let t = (beta / 2.0).tan();
    let bt = beta * t;
    BeamIntegrals {
        gamma1: bt / 2.0 * (bt + 2.0),
        gamma2: beta.powi(4) * bt / 10.0 * (5.0 * bt + 11.0),
        gamma3: 0.75 * (3.0 - t.powi(4) - 2.0 * t.powi(3) / beta),
        gamma4: 4.0 * t / beta,
    }
}

/// Overlap integrals of the two selected modes. Indices are 0-based:
/// `l[0][1]` is L₁₂.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapIntegrals {
    pub beam: BeamIntegrals,
    /// Closed-form Γ for comparison with the quadrature.
    pub beam_closed_form: BeamIntegrals,
    /// ∫h_i h_j dv
    pub l: [[f64; 2]; 2],
    /// ∫h_i (h_j − 1) dv
    pub lambda: [[f64; 2]; 2],
    /// ∫(∫₀ᵛ h_i′h_j′)² dv
    pub i: [[f64; 2]; 2],
    /// ∫h_i′h_j′h_k″h_l″ dv, indexed `k[i][j][k][l]`.
    pub k: [[[[f64; 2]; 2]; 2]; 2],
    /// Largest relative change of a cantilever integral when the panel
    /// count is doubled.
    pub quadrature_gap: f64,
}

impl OverlapIntegrals {
    /// Largest relative gap between quadrature and closed-form Γ.
    pub fn closed_form_gap(&self) -> f64 {
        let (a, b) = (self.beam, self.beam_closed_form);
        [
            (a.gamma1, b.gamma1),
            (a.gamma2, b.gamma2),
            (a.gamma3, b.gamma3),
            (a.gamma4, b.gamma4),
        ]
        .iter()
        .map(|(x, y)| ((x - y) / y).abs())
        .fold(0.0, f64::max)
    }

    /// K with 1-based indices as printed, e.g. `k_entry(1, 2, 1, 2)`.
    pub fn k_entry(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.k[i - 1][j - 1][k - 1][l - 1]
    }
}

pub fn overlap_integrals(selection: &TwoModeSelection) -> Result<OverlapIntegrals> {
    let beam = BeamIntegrals::by_quadrature(&selection.beam)?;
    let sh: &[CantileverShape; 2] = &selection.shapes;
    let h = |i: usize, v: f64, d: usize| {
        if d == 0 {
            sh[i].h(v)
        } else {
            sh[i].value(v, d)
        }
    };
    let n = CANTILEVER_PANELS;
    let mut gap = 0.0;
    let q = |f: &dyn Fn(f64) -> f64, gap: &mut f64, what: &str| {
        checked(composite(0.0, 1.0, n, f), composite(0.0, 1.0, 2 * n, f), gap, what)
    };
    let mut out = OverlapIntegrals {
        beam,
        beam_closed_form: gamma_closed_form(selection.beta()),
        l: [[0.0; 2]; 2],
        lambda: [[0.0; 2]; 2],
        i: [[0.0; 2]; 2],
        k: [[[[0.0; 2]; 2]; 2]; 2],
        quadrature_gap: 0.0,
    };
    for a in 0..2 {
        for b in 0..2 {
            out.l[a][b] = q(&|v| h(a, v, 0) * h(b, v, 0), &mut gap, "L")?;
            out.lambda[a][b] = q(&|v| h(a, v, 0) * sh[b].chi(v), &mut gap, "Lambda")?;
            for c in 0..2 {
                for d in 0..2 {
                    out.k[a][b][c][d] = q(&|v| h(a, v, 1) * h(b, v, 1) * h(c, v, 2) * h(d, v, 2), &mut gap, "K")?;
                }
            }
            let f = |v: f64| h(a, v, 1) * h(b, v, 1);
            out.i[a][b] = checked(nested_square(0.0, 1.0, n, f), nested_square(0.0, 1.0, 2 * n, f), &mut gap, "I")?;
        }
    }
    out.quadrature_gap = gap;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BoundaryCondition;

    #[test]
    fn closed_forms_match_quadrature_for_symmetric_modes() {
        for n in (1..40).step_by(2) {
            let m = BeamMode::of(BoundaryCondition::ClampedClamped, n);
            let q = BeamIntegrals::by_quadrature(&m).unwrap();
            let c = gamma_closed_form(m.beta());
            for (a, b) in [(q.gamma1, c.gamma1), (q.gamma2, c.gamma2), (q.gamma3, c.gamma3), (q.gamma4, c.gamma4)] {
                assert!(((a - b) / b).abs() < 1e-7, "n = {n}: {a} vs {b}");
            }
        }
    }
}
