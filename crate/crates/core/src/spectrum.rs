//! Closed-form spectra of constant-length and alternating-length arrays.
//!
//! The secular equation of a structure with cantilever families i (weight
//! a_i, relative length s_i) is
//!
//! ```text
//! F(γ) = γ⁴ + Σ_i a_i γ^p T(s_i γ) − c = 0,    c = (l β_n / L)⁴,  p = 3
//! ```
//!
//! with γ = α·l of the longest family. Writing T = N/D in cosh-scaled form
//! (N = cos·tanh + sin, D = sech + cos) and multiplying through by Π D_i
//! gives a smooth function with the same roots and no poles. Roots are
//! bracketed between consecutive poles of F, where the cleared function is
//! finite, so levels arbitrarily close to a band edge are resolved without
//! special treatment.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::beam_root;
use crate::error::{Error, Result};
use crate::kernel::{band_edge, shear_kernel};
use crate::model::{BoundaryCondition, CantileverProfile, DeviceGeometry, DimensionlessParams, ModeIndex};
use crate::roots::{bracketed_newton, Dual};

/// Converts a dimensionless root γ into an angular frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyScale {
    /// Length that γ is measured against (m).
    pub length: f64,
    /// sqrt(E/μ) of the cantilevers (m²/s).
    pub wave_speed: f64,
}

impl FrequencyScale {
    /// ω = γ² in units where l = 1 and sqrt(E/μ) = 1.
    pub const UNIT: FrequencyScale = FrequencyScale { length: 1.0, wave_speed: 1.0 };

    pub fn new(geometry: &DeviceGeometry, length: f64) -> Self {
        Self {
            length,
            wave_speed: geometry.cantilever_wave_speed(),
        }
    }

    pub fn omega(&self, gamma: f64) -> f64 {
        self.wave_speed * (gamma / self.length).powi(2)
    }

    pub fn gamma(&self, omega: f64) -> f64 {
        self.length * (omega / self.wave_speed).sqrt()
    }
}

/// One cantilever family in the secular equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub weight: f64,
    /// Length relative to the reference length.
    pub scale: f64,
}

/// Secular equation of one structure, independent of the beam mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecularProblem {
    pub families: Vec<Family>,
    /// Reference length over beam length, l/L.
    pub lambda: f64,
    /// Power of γ multiplying each kernel term.
    pub power: i32,
}

impl SecularProblem {
    /// Constant-length array: one family of weight νλ.
    pub fn uniform(params: DimensionlessParams) -> Self {
        Self::new(vec![Family { weight: params.mass_ratio(), scale: 1.0 }], params.lambda)
    }

    /// Alternating array with γ = α·l₁.
    pub fn alternating(geometry: &DeviceGeometry, profile: &CantileverProfile) -> Result<Self> {
        let CantileverProfile::Alternating {
            length_long,
            length_short,
            width_long,
            width_short,
            count_long,
            count_short,
        } = profile
        else {
            return Err(Error::InvalidArgument(format!(
                "alternating spectrum needs an alternating profile, got {}",
                profile.kind()
            )));
        };
        profile
            .validate(geometry.beam_length)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let big_l = geometry.beam_length;
        let wb = geometry.beam_width;
        let weight = |w: f64, n: u32| w * length_long * (2.0 * n as f64 / big_l) / wb;
        Ok(Self::new(
            vec![
                Family { weight: weight(*width_long, *count_long), scale: 1.0 },
                Family { weight: weight(*width_short, *count_short), scale: length_short / length_long },
            ],
            length_long / big_l,
        ))
    }

    /// Drops empty families and merges families of equal length.
    pub fn new(families: Vec<Family>, lambda: f64) -> Self {
        let mut merged: Vec<Family> = Vec::new();
        for f in families.into_iter().filter(|f| f.weight != 0.0) {
            match merged.iter_mut().find(|m| m.scale == f.scale) {
                Some(m) => m.weight += f.weight,
                None => merged.push(f),
            }
        }
        Self { families: merged, lambda, power: 3 }
    }

    /// Same structure with the kernel terms carrying no γ³ factor.
    pub fn without_gamma_cubed(mut self) -> Self {
        self.power = 0;
        self
    }

    /// F(γ) for beam eigenvalue β. Fails on a pole of any family.
    pub fn eval(&self, gamma: f64, beta: f64) -> Result<f64> {
        let mut v = gamma.powi(4) - (self.lambda * beta).powi(4);
        for f in &self.families {
            v += f.weight * gamma.powi(self.power) * shear_kernel(f.scale * gamma)?;
        }
        Ok(v)
    }

    /// Pole-cleared form F(γ)·Π D(s_i γ), with derivative.
    pub fn cleared(&self, gamma: Dual, beta: f64) -> Dual {
        let c = (self.lambda * beta).powi(4);
        let mut dens = Vec::with_capacity(self.families.len());
        let mut nums = Vec::with_capacity(self.families.len());
        for f in &self.families {
            let x = gamma.scale(f.scale);
            dens.push(x.sech() + x.cos());
            nums.push(x.cos() * x.tanh() + x.sin());
        }
        let prod = |skip: Option<usize>| {
            dens.iter()
                .enumerate()
                .filter(|(j, _)| Some(*j) != skip)
                .fold(Dual::cst(1.0), |acc, (_, d)| acc * *d)
        };
        let mut v = (gamma.powi(4) - Dual::cst(c)) * prod(None);
        let gp = gamma.powi(self.power);
        for (i, f) in self.families.iter().enumerate() {
            v = v + (gp * nums[i] * prod(Some(i))).scale(f.weight);
        }
        v
    }

    /// The first `count` poles of F in increasing order.
    pub fn poles(&self, count: usize) -> Vec<f64> {
        let mut p: Vec<f64> = self
            .families
            .iter()
            .flat_map(|f| (1..=count).map(move |k| band_edge(k) / f.scale))
            .collect();
        p.sort_by(f64::total_cmp);
        p.dedup();
        p.truncate(count);
        p
    }

    /// Roots for beam eigenvalue β, one vector entry per band 1..=k_max.
    ///
    /// Without cantilevers there is a single root γ = λβ in band 1.
    pub fn roots(&self, beta: f64, k_max: usize) -> Vec<Root> {
        if self.families.is_empty() {
            let g = self.lambda * beta;
            return vec![Root { k: 1, gamma: g, lower: 0.0, upper: f64::INFINITY }];
        }
        let poles = self.poles(k_max);
        let mut out = Vec::with_capacity(k_max);
        let mut lower = 0.0;
        for (i, &upper) in poles.iter().enumerate() {
            for gamma in self.roots_between(beta, lower, upper) {
                out.push(Root { k: i + 1, gamma, lower, upper });
            }
            lower = upper;
        }
        out
    }

    fn roots_between(&self, beta: f64, a: f64, b: f64) -> Vec<f64> {
        const SAMPLES: usize = 32;
        let f = |x: f64| self.cleared(Dual::var(x), beta);
        let mut roots = Vec::new();
        let mut x0 = a;
        let mut f0 = f(a).v;
        for i in 1..=SAMPLES {
            let x1 = if i == SAMPLES { b } else { a + (b - a) * i as f64 / SAMPLES as f64 };
            let f1 = f(x1).v;
            if f0 == 0.0 && x0 > a {
                roots.push(x0);
            } else if f0 * f1 < 0.0 {
                if let Some(r) = bracketed_newton(f, x0, x1, 1e-16) {
                    roots.push(r);
                }
            }
            x0 = x1;
            f0 = f1;
        }
        roots
    }
}

/// A root of the secular equation inside the band (lower, upper).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub k: usize,
    pub gamma: f64,
    pub lower: f64,
    pub upper: f64,
}

/// One level (n, k) of the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLevel {
    pub mode: ModeIndex,
    pub gamma: f64,
    /// rad/s
    pub omega: f64,
    pub freq_hz: f64,
    /// ω over the lowest computed level.
    pub omega_normalized: f64,
    /// Band limits in γ; the upper limit is infinite without cantilevers.
    pub band_edge_lower: f64,
    pub band_edge_upper: f64,
    /// The continuum picture holds (n < N).
    pub valid: bool,
}

/// Solved spectrum with the data needed to post-process it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub problem: SecularProblem,
    pub bc: BoundaryCondition,
    pub scale: FrequencyScale,
    pub levels: Vec<SpectrumLevel>,
}

impl Spectrum {
    pub fn level(&self, n: usize, k: usize) -> Option<&SpectrumLevel> {
        self.levels.iter().find(|l| l.mode.n == n && l.mode.k == k)
    }
}

/// F(γ) = νλγ³T(γ) + γ⁴ − (λβ)⁴.
pub fn secular_uniform(gamma: f64, params: DimensionlessParams, beta: f64) -> Result<f64> {
    SecularProblem::uniform(params).eval(gamma, beta)
}

/// Solve any secular problem for n ≤ n_max, k ≤ k_max.
///
/// Beam modes are solved in parallel; the result is sorted by ω.
pub fn solve(
    problem: &SecularProblem,
    bc: BoundaryCondition,
    scale: FrequencyScale,
    count_per_side: u32,
    n_max: usize,
    k_max: usize,
) -> Result<Spectrum> {
    if n_max == 0 || k_max == 0 {
        return Err(Error::InvalidArgument("n_max and k_max must be at least 1".into()));
    }
    let per_mode: Vec<Vec<Root>> = (1..=n_max)
        .into_par_iter()
        .map(|n| problem.roots(beam_root(bc, n), k_max))
        .collect();
    let mut levels: Vec<SpectrumLevel> = per_mode
        .into_iter()
        .enumerate()
        .flat_map(|(i, roots)| {
            let n = i + 1;
            roots.into_iter().map(move |r| {
                let omega = scale.omega(r.gamma);
                let mode = ModeIndex::new(n, r.k);
                SpectrumLevel {
                    mode,
                    gamma: r.gamma,
                    omega,
                    freq_hz: omega / (2.0 * PI),
                    omega_normalized: f64::NAN,
                    band_edge_lower: r.lower,
                    band_edge_upper: r.upper,
                    valid: mode.is_valid_for(count_per_side),
                }
            })
        })
        .collect();
    levels.sort_by(|a, b| a.omega.total_cmp(&b.omega).then(a.mode.cmp(&b.mode)));
    if let Some(w0) = levels.first().map(|l| l.omega) {
        for l in &mut levels {
            l.omega_normalized = l.omega / w0;
        }
    }
    Ok(Spectrum {
        problem: problem.clone(),
        bc,
        scale,
        levels,
    })
}

/// Dimensionless spectrum (ω = γ²) of a constant-length array.
pub fn solve_uniform_dimensionless(
    params: DimensionlessParams,
    bc: BoundaryCondition,
    n_max: usize,
    k_max: usize,
) -> Result<Spectrum> {
    solve(&SecularProblem::uniform(params), bc, FrequencyScale::UNIT, u32::MAX, n_max, k_max)
}

/// Spectrum of a device with a uniform profile.
pub fn solve_uniform(
    geometry: &DeviceGeometry,
    profile: &CantileverProfile,
    bc: BoundaryCondition,
    n_max: usize,
    k_max: usize,
) -> Result<Spectrum> {
    let params = crate::model::dimensionless(geometry, profile)?;
    let CantileverProfile::Uniform { length } = profile else {
        unreachable!("dimensionless() accepts only uniform profiles")
    };
    solve(
        &SecularProblem::uniform(params),
        bc,
        FrequencyScale::new(geometry, *length),
        geometry.count_per_side,
        n_max,
        k_max,
    )
}

/// Spectrum of a device with an alternating profile.
pub fn solve_alternating(
    geometry: &DeviceGeometry,
    profile: &CantileverProfile,
    bc: BoundaryCondition,
    n_max: usize,
    k_max: usize,
) -> Result<Spectrum> {
    let problem = SecularProblem::alternating(geometry, profile)?;
    let CantileverProfile::Alternating { length_long, count_long, count_short, .. } = profile else {
        unreachable!()
    };
    solve(
        &problem,
        bc,
        FrequencyScale::new(geometry, *length_long),
        count_long + count_short,
        n_max,
        k_max,
    )
}

/// Alternating secular function at γ = α·l₁.
pub fn secular_alternating(
    gamma: f64,
    geometry: &DeviceGeometry,
    profile: &CantileverProfile,
    beta: f64,
) -> Result<f64> {
    SecularProblem::alternating(geometry, profile)?.eval(gamma, beta)
}

/// The alternating secular function with the kernel terms lacking the γ³
/// factor. Kept for comparison; it does not reduce to the constant-length
/// equation when both lengths coincide.
pub fn secular_alternating_as_printed(
    gamma: f64,
    geometry: &DeviceGeometry,
    profile: &CantileverProfile,
    beta: f64,
) -> Result<f64> {
    SecularProblem::alternating(geometry, profile)?
        .without_gamma_cubed()
        .eval(gamma, beta)
}

/// Band edge k with its frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandEdge {
    pub k: usize,
    pub gamma: f64,
    pub omega: f64,
}

pub fn band_edges(k_max: usize, scale: FrequencyScale) -> Vec<BandEdge> {
    (1..=k_max)
        .map(|k| {
            let gamma = band_edge(k);
            BandEdge { k, gamma, omega: scale.omega(gamma) }
        })
        .collect()
}

/// (t + th)/(t − th) at γ, computed without forming tan γ.
fn edge_ratio(gamma: f64) -> f64 {
    let r = gamma.tanh() * gamma.cos() / gamma.sin();
    (1.0 + r) / (1.0 - r)
}

/// First-order offset of a level from band edge k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeOffset {
    pub delta: f64,
    /// Band the offset level belongs to: k below the edge, k + 1 above.
    pub k_tilde: usize,
}

/// Δ_{n,k} ≈ (λν/γ_∞,k)·(t + th)/(t − th)·[1 − (λβ_n/γ_∞,k)⁴]⁻¹.
pub fn delta_asymptotic(
    n: usize,
    k: usize,
    params: DimensionlessParams,
    bc: BoundaryCondition,
) -> Result<EdgeOffset> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidArgument("n and k start at 1".into()));
    }
    let edge = band_edge(k);
    let ratio = params.lambda * beam_root(bc, n) / edge;
    if (ratio - 1.0).abs() < 1e-9 {
        return Err(Error::BlowUp { ratio });
    }
    let delta = params.lambda * params.nu / edge * edge_ratio(edge) / (1.0 - ratio.powi(4));
    Ok(EdgeOffset {
        delta,
        k_tilde: if delta < 0.0 { k } else { k + 1 },
    })
}

/// Gap above band k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandGap {
    pub k: usize,
    /// ω_{1,k+1} − ω_∞,k (rad/s).
    pub exact: f64,
    /// 2ω_∞,k Δ_{1,k}/γ_∞,k.
    pub estimate: f64,
    /// estimate / exact.
    pub ratio: f64,
}

/// Gaps of a constant-length spectrum for every k whose upper level
/// (1, k+1) was computed. Empty without cantilevers.
pub fn band_gaps(spectrum: &Spectrum, params: DimensionlessParams) -> Result<Vec<BandGap>> {
    if spectrum.problem.families.is_empty() {
        return Ok(Vec::new());
    }
    let k_top = spectrum
        .levels
        .iter()
        .filter(|l| l.mode.n == 1)
        .map(|l| l.mode.k)
        .max()
        .ok_or(Error::MissingLevel { n: 1, k: 2 })?;
    if k_top < 2 {
        return Err(Error::MissingLevel { n: 1, k: 2 });
    }
    (1..k_top)
        .map(|k| {
            let upper = spectrum.level(1, k + 1).ok_or(Error::MissingLevel { n: 1, k: k + 1 })?;
            let edge = band_edge(k);
            let w_edge = spectrum.scale.omega(edge);
            let exact = upper.omega - w_edge;
            let d = delta_asymptotic(1, k, params, spectrum.bc)?.delta;
            let estimate = 2.0 * w_edge * d / edge;
            Ok(BandGap { k, exact, estimate, ratio: estimate / exact })
        })
        .collect()
}

/// Length ratio at which level (n, k) does not depend on the cantilever
/// count, and the level's frequency there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub lambda: f64,
    pub gamma: f64,
    /// Bare-beam frequency sqrt(E_b/μ_b)(β_n/L)² (rad/s).
    pub omega: f64,
}

/// λ*_{n,k} = β^cc_{2k−3}/(2β_n).
///
/// At this ratio γ = λβ_n = β^cc_{2k−3}/2 is a zero of T, so the
/// cantilever term drops out of the secular equation whatever their number.
pub fn crossing_ratio(n: usize, k: usize, bc: BoundaryCondition, geometry: &DeviceGeometry) -> Result<Crossing> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("crossing ratio needs k >= 2, got {k}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n starts at 1".into()));
    }
    let beta_n = beam_root(bc, n);
    let gamma = 0.5 * beam_root(BoundaryCondition::ClampedClamped, 2 * k - 3);
    Ok(Crossing {
        lambda: gamma / beta_n,
        gamma,
        omega: geometry.beam_wave_speed() * (beta_n / geometry.beam_length).powi(2),
    })
}

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    /// l/L (l₁/L for alternating arrays, keeping l₂/l₁).
    Lambda,
    /// ν = 2N w_c/w_b (uniform only).
    Nu,
    /// N per side; for alternating arrays both counts.
    Count,
    /// l₂/l₁ (alternating only).
    Epsilon,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(Self::Lambda),
            "nu" => Ok(Self::Nu),
            "N" | "n" | "count" => Ok(Self::Count),
            "epsilon" | "eps" => Ok(Self::Epsilon),
            other => Err(Error::InvalidArgument(format!("unknown sweep parameter {other}"))),
        }
    }
}

/// One root of a swept spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub n: usize,
    pub k: usize,
    pub gamma: f64,
}

/// Roots γ_{n,k} as one parameter of the device varies.
pub fn sweep(
    geometry: &DeviceGeometry,
    profile: &CantileverProfile,
    bc: BoundaryCondition,
    param: SweepParam,
    values: &[f64],
    n_max: usize,
    k_max: usize,
) -> Result<Vec<SweepRow>> {
    let problems: Vec<SecularProblem> = values
        .iter()
        .map(|&v| swept_problem(geometry, profile, param, v))
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<SweepRow>> = problems
        .par_iter()
        .zip(values.par_iter())
        .map(|(p, &value)| {
            (1..=n_max)
                .flat_map(|n| {
                    p.roots(beam_root(bc, n), k_max)
                        .into_iter()
                        .map(move |r| SweepRow { value, n, k: r.k, gamma: r.gamma })
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

fn swept_problem(
    geometry: &DeviceGeometry,
    profile: &CantileverProfile,
    param: SweepParam,
    value: f64,
) -> Result<SecularProblem> {
    let big_l = geometry.beam_length;
    match profile {
        CantileverProfile::Uniform { length } => {
            let base = crate::model::dimensionless(geometry, profile)?;
            let params = match param {
                SweepParam::Lambda => DimensionlessParams::new(value, base.nu)?,
                SweepParam::Nu => DimensionlessParams::new(length / big_l, value)?,
                SweepParam::Count => {
                    DimensionlessParams::new(length / big_l, 2.0 * value * geometry.width_ratio())?
                }
                SweepParam::Epsilon => {
                    return Err(Error::InvalidArgument(
                        "epsilon sweeps need an alternating profile".into(),
                    ))
                }
            };
            Ok(SecularProblem::uniform(params))
        }
        CantileverProfile::Alternating {
            length_long,
            length_short,
            width_long,
            width_short,
            count_long,
            count_short,
        } => {
            let (mut l1, mut l2, mut n1, mut n2) = (*length_long, *length_short, *count_long, *count_short);
            match param {
                SweepParam::Lambda => {
                    let eps = l2 / l1;
                    l1 = value * big_l;
                    l2 = eps * l1;
                }
                SweepParam::Epsilon => l2 = value * l1,
                SweepParam::Count => {
                    n1 = value.round() as u32;
                    n2 = n1;
                }
                SweepParam::Nu => {
                    return Err(Error::InvalidArgument(
                        "nu sweeps need a uniform profile".into(),
                    ))
                }
            }
            let p = CantileverProfile::Alternating {
                length_long: l1,
                length_short: l2,
                width_long: *width_long,
                width_short: *width_short,
                count_long: n1,
                count_short: n2,
            };
            SecularProblem::alternating(geometry, &p)
        }
        other => Err(Error::InvalidArgument(format!(
            "sweeps need a uniform or alternating profile, got {}",
            other.kind()
        ))),
    }
}
