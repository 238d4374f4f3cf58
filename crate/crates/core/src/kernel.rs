//! Cantilever response: coefficients A₁±, A₂± of the shape ratio χ(v), the
//! shear kernel T(γ) = 2A₂⁺(γ) and the potential V(α; x) felt by the beam.
//!
//! Everything is written in cosh-scaled form (numerator and denominator of
//! every coefficient divided by cosh γ), so evaluation never overflows.
//! T has simple poles at the band edges γ_∞,k, the roots of
//! 1 + cos γ cosh γ = 0.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::beam::beam_root;
use crate::error::{Error, Result};
use crate::model::{BoundaryCondition, CantileverProfile, DeviceGeometry};
use crate::profile::ProfileField;
use crate::roots::sech;

/// Absolute distance in γ below which a band edge counts as hit.
pub const POLE_TOLERANCE: f64 = 1e-12;

const EDGE_TABLE: usize = 512;

fn edge_table() -> &'static [f64] {
    static EDGES: OnceLock<Vec<f64>> = OnceLock::new();
    EDGES.get_or_init(|| {
        (1..=EDGE_TABLE)
            .map(|k| beam_root(BoundaryCondition::ClampedFree, k))
            .collect()
    })
}

/// k-th root γ_∞,k of 1 + cos γ cosh γ = 0 (k ≥ 1).
pub fn band_edge(k: usize) -> f64 {
    assert!(k >= 1, "band edges are numbered from 1");
    if k <= EDGE_TABLE {
        edge_table()[k - 1]
    } else {
        // sech γ underflows long before this
        (k as f64 - 0.5) * PI
    }
}

/// All band edges in (0, gamma_max).
pub fn band_edges_below(gamma_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 1;
    loop {
        let e = band_edge(k);
        if e >= gamma_max {
            return out;
        }
        out.push(e);
        k += 1;
    }
}

/// Band edge nearest to γ, as (k, γ_∞,k).
pub fn nearest_band_edge(gamma: f64) -> (usize, f64) {
    let guess = (gamma.abs() / PI + 0.5).round().max(1.0) as usize;
    let lo = guess.saturating_sub(1).max(1);
    (lo..=guess + 1)
        .map(|k| (k, band_edge(k)))
        .min_by(|a, b| (a.1 - gamma).abs().total_cmp(&(b.1 - gamma).abs()))
        .unwrap()
}

fn check_pole(gamma: f64) -> Result<()> {
    let (k, edge) = nearest_band_edge(gamma);
    if (gamma - edge).abs() < POLE_TOLERANCE {
        Err(Error::PoleProximity { gamma, k })
    } else {
        Ok(())
    }
}

/// Coefficients of χ(v) = A₁⁺cos γv + A₂⁺sin γv + A₁⁻cosh γv + A₂⁻sinh γv − 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantileverCoeffs {
    pub gamma: f64,
    pub a1_plus: f64,
    pub a1_minus: f64,
    pub a2_plus: f64,
    pub a2_minus: f64,
}

/// Response coefficients at γ = α·l.
pub fn coeffs(gamma: f64) -> Result<CantileverCoeffs> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma must be >= 0, got {gamma}")));
    }
    check_pole(gamma)?;
    Ok(coeffs_unchecked(gamma))
}

pub(crate) fn coeffs_unchecked(gamma: f64) -> CantileverCoeffs {
    let (s, c) = gamma.sin_cos();
    let den = sech(gamma) + c;
    let th = gamma.tanh();
    let a2 = 0.5 * (c * th + s) / den;
    let a1 = 0.5 * s * th / den;
    CantileverCoeffs {
        gamma,
        a1_plus: 0.5 - a1,
        a1_minus: 0.5 + a1,
        a2_plus: a2,
        a2_minus: -a2,
    }
}

/// T(γ) = (cos γ sinh γ + sin γ cosh γ)/(1 + cos γ cosh γ) = 2A₂⁺(γ).
///
/// The beam feels the shear −2α³A₂⁺(αl)·Y from each attached cantilever.
pub fn shear_kernel(gamma: f64) -> Result<f64> {
    check_pole(gamma)?;
    Ok(shear_kernel_unchecked(gamma))
}

pub(crate) fn shear_kernel_unchecked(gamma: f64) -> f64 {
    let (s, c) = gamma.sin_cos();
    (c * gamma.tanh() + s) / (sech(gamma) + c)
}

/// Shape ratio χ(v) of a cantilever driven at its root by the beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantileverShape {
    pub coeffs: CantileverCoeffs,
    // the hyperbolic part as P e^{γ(v−1)} + Q e^{−γv}
    p_grow: f64,
    p_decay: f64,
}

impl CantileverShape {
    pub fn new(gamma: f64) -> Result<Self> {
        let coeffs = coeffs(gamma)?;
        let (s, c) = gamma.sin_cos();
        let e = (-gamma).exp();
        let den = 2.0 * (1.0 + e * e) * (sech(gamma) + c);
        Ok(Self {
            coeffs,
            p_grow: (1.0 + (c - s) * e) / den,
            p_decay: (e + c + s) / den,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.coeffs.gamma
    }

    /// χ, χ' or χ'' at v ∈ [0, 1].
    pub fn eval(&self, v: f64, derivative_order: usize) -> Result<f64> {
        if derivative_order > 2 {
            return Err(Error::DerivativeOrder(derivative_order));
        }
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfDomain(v));
        }
        Ok(self.value(v, derivative_order))
    }

    /// Any order up to 4, no checks.
    pub(crate) fn value(&self, v: f64, order: usize) -> f64 {
        let g = self.coeffs.gamma;
        let x = g * v;
        let (s, c) = x.sin_cos();
        let (dc, ds) = match order % 4 {
            0 => (c, s),
            1 => (-s, c),
            2 => (-c, -s),
            _ => (s, -c),
        };
        let alt = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
        let trig = self.coeffs.a1_plus * dc + self.coeffs.a2_plus * ds;
        let hyp = self.p_grow * (g * (v - 1.0)).exp() + alt * self.p_decay * (-x).exp();
        let shift = if order == 0 { -1.0 } else { 0.0 };
        g.powi(order as i32) * (trig + hyp) + shift
    }

    pub fn chi(&self, v: f64) -> f64 {
        self.value(v, 0)
    }

    /// h(v) = χ(v) + 1, the absolute deflection per unit beam deflection.
    pub fn h(&self, v: f64) -> f64 {
        self.value(v, 0) + 1.0
    }
}

/// One evaluation of the beam potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSample {
    /// Wavenumber α (1/m).
    pub alpha: f64,
    /// Position along the beam (m).
    pub x: f64,
    /// V(α; x) in 1/m⁴.
    pub value: f64,
}

/// V(α; x) = (w_c/w_b)·ρ(x)·α³·T(α·l(x)), summed over cantilever families.
///
/// Point (discrete) profiles have no pointwise potential; use the Galerkin
/// assembly for those.
pub fn potential(
    alpha: f64,
    x: f64,
    geometry: &DeviceGeometry,
    profile: &CantileverProfile,
) -> Result<PotentialSample> {
    let field = ProfileField::new(geometry, profile)?;
    Ok(PotentialSample {
        alpha,
        x,
        value: field.potential(alpha, x)?,
    })
}
