//! Domain types shared by all solvers: device geometry, beam boundary
//! conditions, cantilever profiles and the dimensionless groups of the
//! constant-length problem.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};

/// Relative tolerance of the equal-thickness ratio check.
pub const EQUAL_THICKNESS_RTOL: f64 = 1e-9;

/// A violated physical invariant, naming the offending field.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field}: {message}")]
pub struct ValidationError {
    pub field: String,
    pub message: String,
}

impl ValidationError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

fn positive(field: &str, v: f64) -> std::result::Result<(), ValidationError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ValidationError::new(field, format!("must be strictly positive, got {v}")))
    }
}

/// Beam and cantilever dimensions and material constants (SI units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceGeometry {
    /// Beam length L (m).
    pub beam_length: f64,
    /// Beam width w_b (m).
    pub beam_width: f64,
    /// Beam bending rigidity E·I (N·m²).
    pub beam_rigidity: f64,
    /// Beam mass per unit length (kg/m).
    pub beam_linear_density: f64,
    /// Cantilever width w_c (m).
    pub cantilever_width: f64,
    /// Cantilever bending rigidity (N·m²).
    pub cantilever_rigidity: f64,
    /// Cantilever mass per unit length (kg/m).
    pub cantilever_linear_density: f64,
    /// Cantilevers on one side of the beam.
    pub count_per_side: u32,
    /// When set, rigidities, densities and widths must share one ratio.
    #[serde(default)]
    pub equal_thickness: bool,
}

impl DeviceGeometry {
    pub fn validate(&self) -> std::result::Result<(), ValidationError> {
        positive("geometry.beam_length", self.beam_length)?;
        positive("geometry.beam_width", self.beam_width)?;
        positive("geometry.beam_rigidity", self.beam_rigidity)?;
        positive("geometry.beam_linear_density", self.beam_linear_density)?;
        positive("geometry.cantilever_width", self.cantilever_width)?;
        positive("geometry.cantilever_rigidity", self.cantilever_rigidity)?;
        positive("geometry.cantilever_linear_density", self.cantilever_linear_density)?;
        if self.equal_thickness {
            let w = self.beam_width / self.cantilever_width;
            let e = self.beam_rigidity / self.cantilever_rigidity;
            let m = self.beam_linear_density / self.cantilever_linear_density;
            if ((e - w) / w).abs() > EQUAL_THICKNESS_RTOL {
                return Err(ValidationError::new(
                    "geometry.cantilever_rigidity",
                    format!("equal thickness requires E_b/E_c = w_b/w_c ({e} vs {w})"),
                ));
            }
            if ((m - w) / w).abs() > EQUAL_THICKNESS_RTOL {
                return Err(ValidationError::new(
                    "geometry.cantilever_linear_density",
                    format!("equal thickness requires mu_b/mu_c = w_b/w_c ({m} vs {w})"),
                ));
            }
        }
        Ok(())
    }

    /// Cantilever-to-beam width ratio w_c/w_b.
    pub fn width_ratio(&self) -> f64 {
        self.cantilever_width / self.beam_width
    }

    /// sqrt(E_b/mu_b) in m²/s.
    pub fn beam_wave_speed(&self) -> f64 {
        (self.beam_rigidity / self.beam_linear_density).sqrt()
    }

    /// sqrt(E_c/mu_c) in m²/s.
    pub fn cantilever_wave_speed(&self) -> f64 {
        (self.cantilever_rigidity / self.cantilever_linear_density).sqrt()
    }

    /// Relative mismatch between the beam and cantilever flexural wave
    /// speeds. The cantilever-array model assumes this is zero.
    pub fn wave_speed_mismatch(&self) -> f64 {
        let b = self.beam_rigidity / self.beam_linear_density;
        let c = self.cantilever_rigidity / self.cantilever_linear_density;
        ((b - c) / b).abs()
    }

    pub fn beam_mass(&self) -> f64 {
        self.beam_linear_density * self.beam_length
    }

    /// Bending wavenumber α (1/m) of the beam at angular frequency ω.
    pub fn alpha_of_omega(&self, omega: f64) -> f64 {
        (self.beam_linear_density / self.beam_rigidity * omega * omega).powf(0.25)
    }

    /// Inverse of [`DeviceGeometry::alpha_of_omega`].
    pub fn omega_of_alpha(&self, alpha: f64) -> f64 {
        self.beam_wave_speed() * alpha * alpha
    }
}

/// Supports at the beam ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryCondition {
    #[default]
    ClampedClamped,
    ClampedFree,
}

impl BoundaryCondition {
    /// Right-hand side of cos β cosh β = ±1.
    pub fn sign(self) -> f64 {
        match self {
            BoundaryCondition::ClampedClamped => 1.0,
            BoundaryCondition::ClampedFree => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundaryCondition::ClampedClamped => "clamped-clamped",
            BoundaryCondition::ClampedFree => "clamped-free",
        }
    }
}

/// One sample of a tabulated profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSample {
    /// Position along the beam (m).
    pub x: f64,
    /// Cantilever length at x (m).
    pub length: f64,
    /// Cantilever density at x, both sides counted (1/m).
    pub density: f64,
}

/// Distribution of cantilever lengths and density along the beam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CantileverProfile {
    /// N equal cantilevers of length `length` per side, smeared uniformly.
    Uniform { length: f64 },
    /// Two interleaved families: `count_long` cantilevers of length
    /// `length_long` and width `width_long`, and `count_short` of the short
    /// kind, per side.
    Alternating {
        length_long: f64,
        length_short: f64,
        width_long: f64,
        width_short: f64,
        count_long: u32,
        count_short: u32,
    },
    /// Arbitrary smooth profile, interpolated between samples.
    Tabulated { samples: Vec<ProfileSample> },
    /// Individual symmetric cantilever pairs at `positions` (density
    /// 2·Σ δ(x − x_j)).
    Discrete { positions: Vec<f64>, lengths: Vec<f64> },
}

impl CantileverProfile {
    pub fn kind(&self) -> &'static str {
        match self {
            CantileverProfile::Uniform { .. } => "uniform",
            CantileverProfile::Alternating { .. } => "alternating",
            CantileverProfile::Tabulated { .. } => "tabulated",
            CantileverProfile::Discrete { .. } => "discrete",
        }
    }

    pub fn validate(&self, beam_length: f64) -> std::result::Result<(), ValidationError> {
        match self {
            CantileverProfile::Uniform { length } => positive("profile.length", *length),
            CantileverProfile::Alternating {
                length_long,
                length_short,
                width_long,
                width_short,
                ..
            } => {
                positive("profile.length_long", *length_long)?;
                positive("profile.length_short", *length_short)?;
                positive("profile.width_long", *width_long)?;
                positive("profile.width_short", *width_short)?;
                if length_short > length_long {
                    return Err(ValidationError::new(
                        "profile.length_short",
                        format!(
                            "alternating lengths out of order: short {length_short} > long {length_long}"
                        ),
                    ));
                }
                Ok(())
            }
            CantileverProfile::Tabulated { samples } => {
                if samples.len() < 2 {
                    return Err(ValidationError::new(
                        "profile.samples",
                        "at least two samples are required",
                    ));
                }
                for (i, s) in samples.iter().enumerate() {
                    if !(0.0..=beam_length).contains(&s.x) {
                        return Err(ValidationError::new(
                            format!("profile.samples[{i}].x"),
                            format!("{} lies outside [0, {beam_length}]", s.x),
                        ));
                    }
                    positive(&format!("profile.samples[{i}].length"), s.length)?;
                    if !(s.density >= 0.0 && s.density.is_finite()) {
                        return Err(ValidationError::new(
                            format!("profile.samples[{i}].density"),
                            format!("must be non-negative, got {}", s.density),
                        ));
                    }
                    if i > 0 && s.x <= samples[i - 1].x {
                        return Err(ValidationError::new(
                            format!("profile.samples[{i}].x"),
                            "sample positions must be strictly increasing",
                        ));
                    }
                }
                Ok(())
            }
            CantileverProfile::Discrete { positions, lengths } => {
                if positions.len() != lengths.len() {
                    return Err(ValidationError::new(
                        "profile.lengths",
                        format!(
                            "{} lengths given for {} positions",
                            lengths.len(),
                            positions.len()
                        ),
                    ));
                }
                for (i, (&x, &l)) in positions.iter().zip(lengths).enumerate() {
                    if !(x > 0.0 && x < beam_length) {
                        return Err(ValidationError::new(
                            format!("profile.positions[{i}]"),
                            format!("{x} must lie strictly inside (0, {beam_length})"),
                        ));
                    }
                    positive(&format!("profile.lengths[{i}]"), l)?;
                }
                Ok(())
            }
        }
    }
}

/// Mode label: beam mode `n` in band `k`, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub n: usize,
    pub k: usize,
}

impl ModeIndex {
    pub fn new(n: usize, k: usize) -> Self {
        Self { n, k }
    }

    /// The continuum picture needs many cantilevers per beam-mode node.
    pub fn is_valid_for(&self, count_per_side: u32) -> bool {
        self.n < count_per_side as usize
    }
}

/// λ = l/L and ν = 2N·w_c/w_b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    pub lambda: f64,
    pub nu: f64,
}

impl DimensionlessParams {
    pub fn new(lambda: f64, nu: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be > 0, got {lambda}")));
        }
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("nu must be >= 0, got {nu}")));
        }
        Ok(Self { lambda, nu })
    }

    /// Cantilever-to-beam mass ratio 2N·m_c/m_b (equal thickness).
    pub fn mass_ratio(&self) -> f64 {
        self.nu * self.lambda
    }
}

/// Dimensionless groups of a uniform device.
pub fn dimensionless(geometry: &DeviceGeometry, profile: &CantileverProfile) -> Result<DimensionlessParams> {
    match profile {
        CantileverProfile::Uniform { length } => DimensionlessParams::new(
            length / geometry.beam_length,
            2.0 * geometry.count_per_side as f64 * geometry.width_ratio(),
        ),
        other => Err(Error::InvalidArgument(format!(
            "dimensionless parameters need a uniform profile, got {}",
            other.kind()
        ))),
    }
}
