//! JSON run configuration and named device presets.
//!
//! Geometry is given either directly as rigidities and linear densities or
//! through a material block (Young's modulus, mass density, thickness) from
//! which ℰ = E·w·h³/12 and μ = ρ·w·h are computed. Both land in the same
//! [`DeviceGeometry`]. A `preset` supplies every section that the document
//! leaves out.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::galerkin::GalerkinOptions;
use crate::model::{BoundaryCondition, CantileverProfile, DeviceGeometry, ValidationError};
use crate::nonlinear::Elimination;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("malformed configuration: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Validation(#[from] ValidationError),
    #[error("unknown preset {0:?} (known: {known})", known = PRESETS.join(", "))]
    UnknownPreset(String),
}

pub const PRESETS: &[&str] = &["jap1-calibrated", "uniform-demo"];

/// Rectangular cross-section of one material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    /// Pa
    pub youngs_modulus: f64,
    /// kg/m³
    pub density: f64,
    /// m
    pub thickness: f64,
}

impl Material {
    /// (ℰ, μ) of a strip of width `w`.
    pub fn section(&self, w: f64) -> (f64, f64) {
        let h = self.thickness;
        (self.youngs_modulus * w * h.powi(3) / 12.0, self.density * w * h)
    }
}

/// Geometry as written in a document, before material resolution.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryInput {
    pub beam_length: Option<f64>,
    pub beam_width: Option<f64>,
    pub cantilever_width: Option<f64>,
    pub count_per_side: Option<u32>,
    pub beam_rigidity: Option<f64>,
    pub beam_linear_density: Option<f64>,
    pub cantilever_rigidity: Option<f64>,
    pub cantilever_linear_density: Option<f64>,
    /// Shared by beam and cantilevers unless `cantilever_material` is set.
    pub material: Option<Material>,
    pub cantilever_material: Option<Material>,
    pub equal_thickness: Option<bool>,
}

fn required<T>(v: Option<T>, field: &str) -> Result<T, ValidationError> {
    v.ok_or_else(|| ValidationError::new(field, "missing"))
}

fn section_value(
    direct: Option<f64>,
    from_material: Option<f64>,
    field: &str,
) -> Result<f64, ValidationError> {
    match (direct, from_material) {
        (Some(_), Some(_)) => Err(ValidationError::new(
            field,
            "given both directly and through a material block",
        )),
        (Some(v), None) | (None, Some(v)) => Ok(v),
        (None, None) => Err(ValidationError::new(field, "missing (give it directly or via geometry.material)")),
    }
}

impl GeometryInput {
    pub fn resolve(&self) -> Result<DeviceGeometry, ValidationError> {
        let wb = required(self.beam_width, "geometry.beam_width")?;
        let wc = required(self.cantilever_width, "geometry.cantilever_width")?;
        let beam = self.material.map(|m| m.section(wb));
        let cant = self.cantilever_material.or(self.material).map(|m| m.section(wc));
        let g = DeviceGeometry {
            beam_length: required(self.beam_length, "geometry.beam_length")?,
            beam_width: wb,
            beam_rigidity: section_value(self.beam_rigidity, beam.map(|s| s.0), "geometry.beam_rigidity")?,
            beam_linear_density: section_value(
                self.beam_linear_density,
                beam.map(|s| s.1),
                "geometry.beam_linear_density",
            )?,
            cantilever_width: wc,
            cantilever_rigidity: section_value(
                self.cantilever_rigidity,
                cant.map(|s| s.0),
                "geometry.cantilever_rigidity",
            )?,
            cantilever_linear_density: section_value(
                self.cantilever_linear_density,
                cant.map(|s| s.1),
                "geometry.cantilever_linear_density",
            )?,
            count_per_side: required(self.count_per_side, "geometry.count_per_side")?,
            equal_thickness: self.equal_thickness.unwrap_or(false),
        };
        g.validate()?;
        Ok(g)
    }
}

impl From<&DeviceGeometry> for GeometryInput {
    fn from(g: &DeviceGeometry) -> Self {
        Self {
            beam_length: Some(g.beam_length),
            beam_width: Some(g.beam_width),
            cantilever_width: Some(g.cantilever_width),
            count_per_side: Some(g.count_per_side),
            beam_rigidity: Some(g.beam_rigidity),
            beam_linear_density: Some(g.beam_linear_density),
            cantilever_rigidity: Some(g.cantilever_rigidity),
            cantilever_linear_density: Some(g.cantilever_linear_density),
            material: None,
            cantilever_material: None,
            equal_thickness: Some(g.equal_thickness),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub n_max: usize,
    pub k_max: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { n_max: 8, k_max: 4 }
    }
}

/// Evenly spaced values from `from` to `to` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Range {
    pub fn single(v: f64) -> Self {
        Self { from: v, to: v, points: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.from],
            n => (0..n)
                .map(|i| self.from + (self.to - self.from) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonlinearConfig {
    /// Beam viscosity per unit length (kg/(m·s)); unset means symbolic.
    pub c_y: Option<f64>,
    /// Cantilever viscosity per unit length.
    pub c_eta: Option<f64>,
    /// Modal force amplitudes per unit length (N/m).
    pub f1: f64,
    pub f2: f64,
    /// Detuning sweeps (rad/s); a missing sweep means 0.
    pub sigma1: Option<Range>,
    pub sigma2: Option<Range>,
    pub elimination: Elimination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub format: OutputFormat,
    pub path: Option<PathBuf>,
}

/// Where a geometry came from, for output metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub preset: String,
    /// True when the dimensions are a reconstruction, not measured values.
    pub reconstructed: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<String>,
    geometry: Option<GeometryInput>,
    boundary: Option<BoundaryCondition>,
    profile: Option<CantileverProfile>,
    #[serde(default)]
    spectrum: SpectrumConfig,
    #[serde(default)]
    galerkin: GalerkinOptions,
    nonlinear: Option<NonlinearConfig>,
    #[serde(default)]
    output: OutputConfig,
}

/// A fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub preset: Option<String>,
    pub geometry: DeviceGeometry,
    pub boundary: BoundaryCondition,
    pub profile: CantileverProfile,
    pub spectrum: SpectrumConfig,
    pub galerkin: GalerkinOptions,
    pub nonlinear: NonlinearConfig,
    pub output: OutputConfig,
}

/// Device of the fabricated antenna whose nonlinear constants are tabulated
/// in the literature, reconstructed from the published frequencies.
///
/// L follows from ℱ/f = (L/2)Γ₄ = −4.44e-6 m. Beam and cantilevers share
/// one thickness; the cantilever length and the beam wave speed are chosen
/// so that the fundamental and collective modes sit at 24.7 MHz and
/// 2.94 GHz, and the cantilever width so that the fundamental's mass
/// loading reproduces M₁ = 1.74e-14 kg.
pub fn jap1_calibrated() -> (DeviceGeometry, CantileverProfile) {
    let ratio = 0.500_265_368_349_701_7;
    let mu_b = 8.414_875_352_819_815e-10;
    let e_b = 1.019_513_908_553_496e-15;
    let g = DeviceGeometry {
        beam_length: 1.068_770_156_220_385_1e-5,
        beam_width: 4e-7,
        beam_rigidity: e_b,
        beam_linear_density: mu_b,
        cantilever_width: 4e-7 * ratio,
        cantilever_rigidity: ratio * e_b,
        cantilever_linear_density: ratio * mu_b,
        count_per_side: 20,
        equal_thickness: true,
    };
    (g, CantileverProfile::Uniform { length: 4.991_719_017_922_557e-7 })
}

/// A 10 µm silicon-like beam with 20 cantilevers of equal width and
/// l/L = 0.05.
pub fn uniform_demo() -> (DeviceGeometry, CantileverProfile) {
    let m = Material { youngs_modulus: 169e9, density: 2330.0, thickness: 2e-7 };
    let w = 4e-7;
    let (e, mu) = m.section(w);
    let g = DeviceGeometry {
        beam_length: 1e-5,
        beam_width: w,
        beam_rigidity: e,
        beam_linear_density: mu,
        cantilever_width: w,
        cantilever_rigidity: e,
        cantilever_linear_density: mu,
        count_per_side: 20,
        equal_thickness: true,
    };
    (g, CantileverProfile::Uniform { length: 5e-7 })
}

pub fn preset(name: &str) -> Result<(DeviceGeometry, CantileverProfile), ConfigError> {
    match name {
        "jap1-calibrated" => Ok(jap1_calibrated()),
        "uniform-demo" => Ok(uniform_demo()),
        other => Err(ConfigError::UnknownPreset(other.into())),
    }
}

impl Config {
    pub fn from_preset(name: &str) -> Result<Self, ConfigError> {
        let (geometry, profile) = preset(name)?;
        Ok(Self {
            preset: Some(name.into()),
            geometry,
            boundary: BoundaryCondition::ClampedClamped,
            profile,
            spectrum: SpectrumConfig::default(),
            galerkin: GalerkinOptions::default(),
            nonlinear: NonlinearConfig::default(),
            output: OutputConfig::default(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let base = raw.preset.as_deref().map(preset).transpose()?;
        let geometry = match (&raw.geometry, &base) {
            (Some(g), _) => g.resolve()?,
            (None, Some((g, _))) => g.clone(),
            (None, None) => return Err(ValidationError::new("geometry", "missing (and no preset given)").into()),
        };
        let profile = match (raw.profile, base) {
            (Some(p), _) => p,
            (None, Some((_, p))) => p,
            (None, None) => return Err(ValidationError::new("profile", "missing (and no preset given)").into()),
        };
        profile.validate(geometry.beam_length)?;
        if raw.spectrum.n_max == 0 {
            return Err(ValidationError::new("spectrum.n_max", "must be at least 1").into());
        }
        if raw.spectrum.k_max == 0 {
            return Err(ValidationError::new("spectrum.k_max", "must be at least 1").into());
        }
        if raw.galerkin.basis_size == 0 {
            return Err(ValidationError::new("galerkin.basis_size", "must be at least 1").into());
        }
        let nonlinear = raw.nonlinear.unwrap_or_default();
        for (name, v) in [("nonlinear.c_y", nonlinear.c_y), ("nonlinear.c_eta", nonlinear.c_eta)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(ValidationError::new(name, format!("must be a non-negative number, got {v}")).into());
                }
            }
        }
        for (name, v) in [("nonlinear.f1", nonlinear.f1), ("nonlinear.f2", nonlinear.f2)] {
            if !v.is_finite() {
                return Err(ValidationError::new(name, "must be finite").into());
            }
        }
        Ok(Self {
            preset: raw.preset,
            geometry,
            boundary: raw.boundary.unwrap_or_default(),
            profile,
            spectrum: raw.spectrum,
            galerkin: raw.galerkin,
            nonlinear,
            output: raw.output,
        })
    }

    /// Canonical JSON (sorted keys) that loads back to the same config.
    pub fn to_json(&self) -> String {
        let raw = RawConfig {
            preset: self.preset.clone(),
            geometry: Some(GeometryInput::from(&self.geometry)),
            boundary: Some(self.boundary),
            profile: Some(self.profile.clone()),
            spectrum: self.spectrum,
            galerkin: self.galerkin,
            nonlinear: Some(self.nonlinear.clone()),
            output: self.output.clone(),
        };
        let value = serde_json::to_value(&raw).expect("config serializes");
        serde_json::to_string_pretty(&value).expect("value serializes")
    }

    pub fn provenance(&self) -> Option<Provenance> {
        match self.preset.as_deref()? {
            "jap1-calibrated" => Some(Provenance {
                preset: "jap1-calibrated".into(),
                reconstructed: true,
                note: "dimensions reconstructed from the published mode frequencies (24.7 MHz, 2.94 GHz), \
                       force factor and fundamental modal mass; not the measured device"
                    .into(),
            }),
            name => Some(Provenance {
                preset: name.into(),
                reconstructed: false,
                note: "illustrative device".into(),
            }),
        }
    }
}

pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Config::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn material_path_matches_direct_values() {
        let text = r#"{
            "geometry": {
                "beam_length": 1e-5, "beam_width": 4e-7, "cantilever_width": 2e-7,
                "count_per_side": 10,
                "material": {"youngs_modulus": 169e9, "density": 2330, "thickness": 2e-7}
            },
            "profile": {"kind": "uniform", "length": 5e-7}
        }"#;
        let c = Config::from_json(text).unwrap();
        let h: f64 = 2e-7;
        assert!((c.geometry.beam_rigidity - 169e9 * 4e-7 * h.powi(3) / 12.0).abs() < 1e-30);
        assert!((c.geometry.cantilever_linear_density - 2330.0 * 2e-7 * h).abs() < 1e-22);
        assert!(c.geometry.wave_speed_mismatch() < 1e-15);
    }

    #[test]
    fn missing_field_is_named() {
        let text = r#"{"geometry": {"beam_length": 1e-5, "beam_width": 4e-7, "cantilever_width": 2e-7,
            "count_per_side": 10, "beam_rigidity": 1e-15, "beam_linear_density": 1e-9,
            "cantilever_rigidity": 5e-16}, "profile": {"kind": "uniform", "length": 5e-7}}"#;
        match Config::from_json(text) {
            Err(ConfigError::Validation(e)) => assert_eq!(e.field, "geometry.cantilever_linear_density"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let r = Config::from_json(r#"{"preset": "jap1-calibrated", "geometri": {}}"#);
        assert!(matches!(r, Err(ConfigError::Parse(_))));
    }

    #[test]
    fn preset_round_trips_exactly() {
        let c = Config::from_json(r#"{"preset": "jap1-calibrated"}"#).unwrap();
        let back = Config::from_json(&c.to_json()).unwrap();
        assert_eq!(c, back);
        assert!(c.provenance().unwrap().reconstructed);
    }
}
