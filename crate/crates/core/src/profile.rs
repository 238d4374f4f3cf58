//! Cantilever profiles resolved into the quantities the beam equation
//! needs: per-family width ratio, length l(x) and density ρ(x), or
//! individual cantilever pairs for point profiles.

use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::kernel::{nearest_band_edge, shear_kernel_unchecked, POLE_TOLERANCE};
use crate::model::{CantileverProfile, DeviceGeometry};

/// A function of x: constant or monotone-cubic interpolated.
#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    Constant(f64),
    Table(Pchip),
}

impl Law {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Law::Constant(v) => *v,
            Law::Table(p) => p.eval(x),
        }
    }
}

/// Continuum of cantilevers sharing one width.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    /// w_c/w_b for this family.
    pub width_ratio: f64,
    /// l(x) in m.
    pub length: Law,
    /// ρ(x) in 1/m, both sides of the beam counted.
    pub density: Law,
    /// Density is zero outside this x range.
    pub support: (f64, f64),
}

impl Family {
    pub fn is_constant(&self) -> bool {
        matches!((&self.length, &self.density), (Law::Constant(_), Law::Constant(_)))
    }

    /// (w_c/w_b)·ρ(x) and l(x); zero weight outside the support.
    pub fn weight_and_length(&self, x: f64) -> (f64, f64) {
        if x < self.support.0 || x > self.support.1 {
            return (0.0, self.length.eval(x));
        }
        (self.width_ratio * self.density.eval(x), self.length.eval(x))
    }
}

/// Symmetric cantilever pairs at given positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Comb {
    pub width_ratio: f64,
    pub positions: Vec<f64>,
    pub lengths: Vec<f64>,
}

/// A profile in solver-ready form.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileField {
    pub beam_length: f64,
    pub families: Vec<Family>,
    pub combs: Vec<Comb>,
}

impl ProfileField {
    pub fn new(geometry: &DeviceGeometry, profile: &CantileverProfile) -> Result<Self> {
        let big_l = geometry.beam_length;
        profile
            .validate(big_l)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let wb = geometry.beam_width;
        let constant = |ratio: f64, length: f64, count: u32| Family {
            width_ratio: ratio,
            length: Law::Constant(length),
            density: Law::Constant(2.0 * count as f64 / big_l),
            support: (0.0, big_l),
        };
        let mut families = Vec::new();
        let mut combs = Vec::new();
        match profile {
            CantileverProfile::Uniform { length } => {
                if geometry.count_per_side > 0 {
                    families.push(constant(geometry.width_ratio(), *length, geometry.count_per_side));
                }
            }
            CantileverProfile::Alternating {
                length_long,
                length_short,
                width_long,
                width_short,
                count_long,
                count_short,
            } => {
                if *count_long > 0 {
                    families.push(constant(width_long / wb, *length_long, *count_long));
                }
                if *count_short > 0 {
                    families.push(constant(width_short / wb, *length_short, *count_short));
                }
            }
            CantileverProfile::Tabulated { samples } => {
                let xs: Vec<f64> = samples.iter().map(|s| s.x).collect();
                let (length, density) = if samples.len() == 1 {
                    (Law::Constant(samples[0].length), Law::Constant(samples[0].density))
                } else {
                    (
                        Law::Table(Pchip::new(xs.clone(), samples.iter().map(|s| s.length).collect())?),
                        Law::Table(Pchip::new(xs.clone(), samples.iter().map(|s| s.density).collect())?),
                    )
                };
                families.push(Family {
                    width_ratio: geometry.width_ratio(),
                    length,
                    density,
                    support: (xs[0], *xs.last().unwrap()),
                });
            }
            CantileverProfile::Discrete { positions, lengths } => {
                combs.push(Comb {
                    width_ratio: geometry.width_ratio(),
                    positions: positions.clone(),
                    lengths: lengths.clone(),
                });
            }
        }
        Ok(Self { beam_length: big_l, families, combs })
    }

    /// True when the profile is x-independent (uniform or alternating).
    pub fn is_constant(&self) -> bool {
        self.combs.is_empty() && self.families.iter().all(Family::is_constant)
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty() && self.combs.iter().all(|c| c.positions.is_empty())
    }

    /// V(α; x) in 1/m⁴ for continuum profiles.
    pub fn potential(&self, alpha: f64, x: f64) -> Result<f64> {
        if !(0.0..=self.beam_length).contains(&x) {
            return Err(Error::ProfileUndefined(x));
        }
        if !self.combs.is_empty() {
            return Err(Error::InvalidArgument(
                "discrete profiles have no pointwise potential".into(),
            ));
        }
        let mut v = 0.0;
        for f in &self.families {
            let (w, l) = f.weight_and_length(x);
            if w == 0.0 {
                continue;
            }
            v += w * alpha.powi(3) * kernel_at(alpha * l, x)?;
        }
        Ok(v)
    }
}

/// T(γ) with the pole error located at x.
pub(crate) fn kernel_at(gamma: f64, x: f64) -> Result<f64> {
    let (k, edge) = nearest_band_edge(gamma);
    if (gamma - edge).abs() < POLE_TOLERANCE {
        return Err(Error::PoleAt { x, gamma, k });
    }
    Ok(shear_kernel_unchecked(gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::geometry;
    use crate::model::ProfileSample;

    #[test]
    fn alternating_splits_into_two_families() {
        let g = geometry(20, 1.0);
        let p = CantileverProfile::Alternating {
            length_long: 0.5e-6,
            length_short: 0.4e-6,
            width_long: 4e-7,
            width_short: 2e-7,
            count_long: 10,
            count_short: 10,
        };
        let f = ProfileField::new(&g, &p).unwrap();
        assert_eq!(f.families.len(), 2);
        assert!(f.is_constant());
        assert!((f.families[1].width_ratio - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tabulated_density_vanishes_outside_samples() {
        let g = geometry(20, 1.0);
        let samples = vec![
            ProfileSample { x: 2e-6, length: 0.5e-6, density: 1e6 },
            ProfileSample { x: 4e-6, length: 0.6e-6, density: 1e6 },
        ];
        let f = ProfileField::new(&g, &CantileverProfile::Tabulated { samples }).unwrap();
        assert_eq!(f.potential(1e6, 1e-6).unwrap(), 0.0);
        assert!(f.potential(1e6, 3e-6).unwrap() > 0.0);
        assert!(matches!(f.potential(1e6, 20e-6), Err(Error::ProfileUndefined(_))));
    }

    #[test]
    fn pole_reports_position() {
        let g = geometry(20, 1.0);
        let l = 0.5e-6;
        let f = ProfileField::new(&g, &CantileverProfile::Uniform { length: l }).unwrap();
        let alpha = crate::kernel::band_edge(1) / l;
        match f.potential(alpha, 3e-6) {
            Err(Error::PoleAt { x, k, .. }) => {
                assert_eq!(x, 3e-6);
                assert_eq!(k, 1);
            }
            other => panic!("expected pole error, got {other:?}"),
        }
    }
}
