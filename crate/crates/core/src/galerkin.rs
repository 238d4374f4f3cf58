//! Spectra of arbitrary profiles by projection onto the bare-beam modes.
//!
//! With Y(x) = Σ c_m φ_m(x/L) the reduced beam equation becomes D(α)c = 0,
//!
//! ```text
//! D_mn(α) = (β_m⁴ − (αL)⁴) δ_mn − L⁴ ∫₀¹ V(α; uL) φ_m(u) φ_n(u) du,
//! ```
//!
//! and for point profiles the integral turns into a sum over cantilever
//! pairs. Roots of det D are located by counting negative eigenvalues of
//! the symmetric matrix along a grid cut at every pole of D, then bisecting
//! wherever the count changes.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::BeamMode;
use crate::error::{Error, Result};
use crate::kernel::{band_edge, band_edges_below, nearest_band_edge, shear_kernel_unchecked};
use crate::model::{BoundaryCondition, CantileverProfile, DeviceGeometry};
use crate::profile::{kernel_at, Comb, Family, Law, ProfileField};
use crate::quadrature::{adaptive_vec, composite};

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GalerkinOptions {
    /// Number of beam modes M.
    pub basis_size: usize,
    /// Half-width in γ of the x-window dropped around a cantilever pole.
    pub pole_window: f64,
    /// Relative tolerance of the x-quadrature.
    pub quadrature_rtol: f64,
    /// Grid points per pole-free α interval.
    pub scan_points: usize,
}

impl Default for GalerkinOptions {
    fn default() -> Self {
        Self {
            basis_size: 8,
            pole_window: 1e-8,
            quadrature_rtol: 1e-12,
            scan_points: 96,
        }
    }
}

/// One root of det D(α).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalerkinLevel {
    /// Wavenumber (1/m).
    pub alpha: f64,
    /// rad/s
    pub omega: f64,
    /// 1-based index of the largest participation component.
    pub dominant_n: usize,
    /// Unit null vector of D(α), sign fixed so the dominant entry is positive.
    pub participation: Vec<f64>,
    /// |smallest eigenvalue| / ‖D‖ at the root.
    pub residual: f64,
}

impl GalerkinLevel {
    pub fn dominant_weight(&self) -> f64 {
        self.participation[self.dominant_n - 1].abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalerkinSolution {
    pub levels: Vec<GalerkinLevel>,
    pub warnings: Vec<String>,
}

/// A projected system ready for assembly at any α.
pub struct GalerkinSystem {
    basis: Vec<BeamMode>,
    field: ProfileField,
    beam_length: f64,
    beam_wave_speed: f64,
    options: GalerkinOptions,
    // ∫ φ_m φ_n over each constant family's support
    grams: Vec<DMatrix<f64>>,
    // φ_m(x_j/L) for each comb
    comb_modes: Vec<DMatrix<f64>>,
}

fn packed(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect()
}

impl GalerkinSystem {
    pub fn new(
        geometry: &DeviceGeometry,
        profile: &CantileverProfile,
        bc: BoundaryCondition,
        options: GalerkinOptions,
    ) -> Result<Self> {
        if options.basis_size == 0 {
            return Err(Error::InvalidArgument("basis size must be at least 1".into()));
        }
        let field = ProfileField::new(geometry, profile)?;
        let basis = BeamMode::basis(bc, options.basis_size);
        let big_l = geometry.beam_length;
        let m = basis.len();
        let pairs = packed(m);
        let grams = field
            .families
            .iter()
            .filter(|f| f.is_constant())
            .map(|f| {
                let (a, b) = (f.support.0 / big_l, f.support.1 / big_l);
                let mut g = DMatrix::zeros(m, m);
                for &(i, j) in &pairs {
                    let v = composite(a, b, 16, |u| basis[i].phi(u) * basis[j].phi(u));
                    g[(i, j)] = v;
                    g[(j, i)] = v;
                }
                g
            })
            .collect();
        let comb_modes = field
            .combs
            .iter()
            .map(|c| DMatrix::from_fn(m, c.positions.len(), |i, j| basis[i].phi(c.positions[j] / big_l)))
            .collect();
        Ok(Self {
            basis,
            field,
            beam_length: big_l,
            beam_wave_speed: geometry.beam_wave_speed(),
            options,
            grams,
            comb_modes,
        })
    }

    pub fn basis(&self) -> &[BeamMode] {
        &self.basis
    }

    pub fn omega(&self, alpha: f64) -> f64 {
        self.beam_wave_speed * alpha * alpha
    }

    /// D(α). Fails when a cantilever of a point profile or a constant
    /// family sits on a pole.
    pub fn assemble(&self, alpha: f64) -> Result<DMatrix<f64>> {
        self.assemble_reporting(alpha).map(|(d, _)| d)
    }

    /// D(α) and the x-ranges dropped around cantilever poles.
    pub fn assemble_reporting(&self, alpha: f64) -> Result<(DMatrix<f64>, Vec<(f64, f64)>)> {
        let m = self.basis.len();
        let big_l = self.beam_length;
        let l4 = big_l.powi(4);
        let a3 = alpha.powi(3);
        let mut d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(m, |i, _| {
            self.basis[i].beta().powi(4) - (alpha * big_l).powi(4)
        }));
        let mut excluded = Vec::new();
        let mut gram_idx = 0;
        for fam in &self.field.families {
            if fam.is_constant() {
                let (w, l) = fam.weight_and_length(0.5 * (fam.support.0 + fam.support.1));
                let t = kernel_at(alpha * l, fam.support.0)?;
                d -= &self.grams[gram_idx] * (l4 * w * a3 * t);
                gram_idx += 1;
            } else {
                let (v, ex) = self.varying_family(fam, alpha)?;
                d -= v * (l4 * a3);
                excluded.extend(ex);
            }
        }
        for (comb, modes) in self.field.combs.iter().zip(&self.comb_modes) {
            let mut t = nalgebra::DVector::zeros(comb.positions.len());
            for (j, (&x, &l)) in comb.positions.iter().zip(&comb.lengths).enumerate() {
                t[j] = kernel_at(alpha * l, x)?;
            }
            let scaled = DMatrix::from_fn(m, t.len(), |i, j| modes[(i, j)] * t[j]);
            let v = &scaled * modes.transpose();
            d -= v * (l4 * comb.width_ratio * 2.0 / big_l * a3);
        }
        // exact symmetry
        for i in 0..m {
            for j in i + 1..m {
                let s = 0.5 * (d[(i, j)] + d[(j, i)]);
                d[(i, j)] = s;
                d[(j, i)] = s;
            }
        }
        Ok((d, excluded))
    }

    /// ∫ w(x) T(α l(x)) φ_m φ_n du over the family support, with pole
    /// windows removed.
    fn varying_family(&self, fam: &Family, alpha: f64) -> Result<(DMatrix<f64>, Vec<(f64, f64)>)> {
        let big_l = self.beam_length;
        let excluded = pole_windows(fam, alpha, self.options.pole_window);
        let segments = complement(fam.support, &excluded);
        let m = self.basis.len();
        let pairs = packed(m);
        let mut phis = vec![0.0; m];
        let mut acc = vec![0.0; pairs.len()];
        for (a, b) in segments {
            if b <= a {
                continue;
            }
            let mut f = |u: f64, out: &mut [f64]| {
                let x = u * big_l;
                let (w, l) = fam.weight_and_length(x);
                let wt = w * shear_kernel_unchecked(alpha * l);
                for (i, p) in phis.iter_mut().enumerate() {
                    *p = self.basis[i].phi(u);
                }
                for (o, &(i, j)) in out.iter_mut().zip(&pairs) {
                    *o = wt * phis[i] * phis[j];
                }
            };
            let part = adaptive_vec(a / big_l, b / big_l, pairs.len(), self.options.quadrature_rtol, 48, &mut f);
            for (s, p) in acc.iter_mut().zip(part) {
                *s += p;
            }
        }
        let mut v = DMatrix::zeros(m, m);
        for (&(i, j), s) in pairs.iter().zip(acc) {
            v[(i, j)] = s;
            v[(j, i)] = s;
        }
        Ok((v, excluded))
    }

    /// α values where D is singular or not smooth: poles of constant
    /// families and combs, and γ_∞,k over every knot length of varying
    /// families.
    pub fn break_points(&self, alpha_max: f64) -> Vec<f64> {
        let mut lengths: Vec<f64> = Vec::new();
        for fam in &self.field.families {
            match &fam.length {
                Law::Constant(l) => lengths.push(*l),
                Law::Table(p) => lengths.extend_from_slice(p.values()),
            }
        }
        for c in &self.field.combs {
            lengths.extend_from_slice(&c.lengths);
        }
        lengths.sort_by(f64::total_cmp);
        lengths.dedup();
        let mut pts: Vec<f64> = lengths
            .iter()
            .filter(|l| **l > 0.0)
            .flat_map(|l| band_edges_below(alpha_max * l).into_iter().map(move |g| g / l))
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn inertia(&self, alpha: f64) -> Result<usize> {
        let d = self.assemble(alpha)?;
        let e = SymmetricEigen::new(d);
        Ok(e.eigenvalues.iter().filter(|v| **v < 0.0).count())
    }

    /// All roots with α in (alpha_min, alpha_max), ascending.
    pub fn solve(&self, alpha_min: f64, alpha_max: f64) -> Result<GalerkinSolution> {
        if !(alpha_min >= 0.0 && alpha_max > alpha_min) {
            return Err(Error::InvalidArgument(format!(
                "bad search range [{alpha_min}, {alpha_max}]"
            )));
        }
        let mut cuts = vec![alpha_min];
        cuts.extend(self.break_points(alpha_max).into_iter().filter(|p| *p > alpha_min));
        cuts.push(alpha_max);
        let gap = |x: f64| 1e-9 * x.max(f64::MIN_POSITIVE);
        let mut grid: Vec<Vec<f64>> = Vec::new();
        for w in cuts.windows(2) {
            let a = if w[0] == alpha_min && alpha_min > 0.0 { w[0] } else { w[0] + gap(w[0]) };
            let a = if a == 0.0 { gap(w[1]) } else { a };
            let b = if w[1] == alpha_max { w[1] } else { w[1] - gap(w[1]) };
            if b <= a {
                continue;
            }
            let n = self.options.scan_points.max(2);
            grid.push((0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect());
        }
        let counts: Vec<Vec<Result<usize>>> = grid
            .par_iter()
            .map(|pts| pts.iter().map(|&x| self.inertia(x)).collect())
            .collect();
        let mut roots = Vec::new();
        for (pts, cs) in grid.iter().zip(counts) {
            let cs: Vec<usize> = cs.into_iter().collect::<Result<_>>()?;
            for i in 0..pts.len() - 1 {
                self.bisect_counts(pts[i], cs[i], pts[i + 1], cs[i + 1], &mut roots)?;
            }
        }
        let mut warnings = Vec::new();
        let mut levels = Vec::new();
        for alpha in roots {
            let (d, excluded) = self.assemble_reporting(alpha)?;
            for (a, b) in &excluded {
                warnings.push(format!(
                    "alpha = {alpha:.10e}: dropped x in [{a:.6e}, {b:.6e}] around a cantilever pole"
                ));
            }
            let norm = d.norm();
            let e = SymmetricEigen::new(d);
            let (idx, lam) = e
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|(i, v)| (i, *v))
                .unwrap();
            let residual = lam.abs() / norm;
            if residual > 1e-8 {
                warnings.push(format!(
                    "alpha = {alpha:.10e}: count change without a null vector (|lambda|/|D| = {residual:.2e}), skipped"
                ));
                continue;
            }
            let mut p: Vec<f64> = e.eigenvectors.column(idx).iter().copied().collect();
            let (dom, dv) = p
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|(i, v)| (i, *v))
                .unwrap();
            if dv < 0.0 {
                p.iter_mut().for_each(|v| *v = -*v);
            }
            if self.field.is_constant() && dv.abs() < 0.9 {
                warnings.push(format!(
                    "alpha = {alpha:.10e}: dominant participation {:.3} < 0.9, basis too small",
                    dv.abs()
                ));
            }
            levels.push(GalerkinLevel {
                alpha,
                omega: self.omega(alpha),
                dominant_n: dom + 1,
                participation: p,
                residual,
            });
        }
        Ok(GalerkinSolution { levels, warnings })
    }

    fn bisect_counts(&self, a: f64, ca: usize, b: f64, cb: usize, out: &mut Vec<f64>) -> Result<()> {
        if ca == cb {
            return Ok(());
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b || (b - a) <= 4.0 * f64::EPSILON * b.abs() {
            // one root per unit of count change
            for _ in 0..ca.abs_diff(cb) {
                out.push(mid);
            }
            return Ok(());
        }
        let cm = self.inertia(mid)?;
        self.bisect_counts(a, ca, mid, cm, out)?;
        self.bisect_counts(mid, cm, b, cb, out)
    }
}

/// x-ranges where α·l(x) is within `window` of a band edge.
fn pole_windows(fam: &Family, alpha: f64, window: f64) -> Vec<(f64, f64)> {
    let knots: Vec<f64> = match &fam.length {
        Law::Constant(_) => vec![fam.support.0, fam.support.1],
        Law::Table(p) => {
            let mut k: Vec<f64> = p
                .knots()
                .iter()
                .copied()
                .filter(|x| *x > fam.support.0 && *x < fam.support.1)
                .collect();
            k.insert(0, fam.support.0);
            k.push(fam.support.1);
            k
        }
    };
    let g = |x: f64| alpha * fam.length.eval(x);
    let mut out = Vec::new();
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ga, gb) = (g(a), g(b));
        let (lo, hi) = (ga.min(gb), ga.max(gb));
        let (k0, _) = nearest_band_edge(lo);
        for k in k0.saturating_sub(1).max(1).. {
            let e = band_edge(k);
            if e - window > hi {
                break;
            }
            if e + window < lo {
                continue;
            }
            if ga == gb {
                out.push((a, b));
                continue;
            }
            let x1 = level_crossing(&g, a, b, e - window);
            let x2 = level_crossing(&g, a, b, e + window);
            out.push((x1.min(x2), x1.max(x2)));
        }
    }
    merge(out)
}

// x in [a, b] with g(x) = level for monotone g, clamped to the ends.
fn level_crossing<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, level: f64) -> f64 {
    let (ga, gb) = (g(a) - level, g(b) - level);
    if ga == 0.0 {
        return a;
    }
    if gb == 0.0 {
        return b;
    }
    if ga.signum() == gb.signum() {
        return if ga.abs() < gb.abs() { a } else { b };
    }
    crate::roots::bisect(|x| g(x) - level, a, b).unwrap_or(a)
}

fn merge(mut r: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    r.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (a, b) in r {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn complement(support: (f64, f64), excluded: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start = support.0;
    for &(a, b) in excluded {
        if a > start {
            out.push((start, a.min(support.1)));
        }
        start = start.max(b);
    }
    if start < support.1 {
        out.push((start, support.1));
    }
    out
}

/// Highest α that reaches band `k_max` for the longest cantilever.
pub fn alpha_limit(field: &ProfileField, k_max: usize) -> f64 {
    let shortest = field
        .families
        .iter()
        .flat_map(|f| match &f.length {
            Law::Constant(l) => vec![*l],
            Law::Table(p) => p.values().to_vec(),
        })
        .chain(field.combs.iter().flat_map(|c: &Comb| c.lengths.clone()))
        .fold(f64::INFINITY, f64::min);
    if shortest.is_finite() {
        band_edge(k_max) / shortest * (1.0 - 1e-6)
    } else {
        f64::INFINITY
    }
}

/// Convenience wrapper: build the system and solve over a range.
pub fn solve(
    geometry: &DeviceGeometry,
    profile: &CantileverProfile,
    bc: BoundaryCondition,
    options: GalerkinOptions,
    alpha_min: f64,
    alpha_max: f64,
) -> Result<GalerkinSolution> {
    GalerkinSystem::new(geometry, profile, bc, options)?.solve(alpha_min, alpha_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::geometry;
    use crate::model::ProfileSample;

    const CC: BoundaryCondition = BoundaryCondition::ClampedClamped;

    #[test]
    fn empty_profile_gives_bare_diagonal() {
        let geo = geometry(0, 1.0);
        let sys = GalerkinSystem::new(&geo, &CantileverProfile::Uniform { length: 0.5e-6 }, CC, GalerkinOptions::default()).unwrap();
        let alpha = 3.0 / geo.beam_length;
        let d = sys.assemble(alpha).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { sys.basis()[i].beta().powi(4) - 81.0 } else { 0.0 };
                assert!((d[(i, j)] - want).abs() < 1e-9 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn uniform_matrix_is_diagonal() {
        let geo = geometry(20, 1.0);
        let sys = GalerkinSystem::new(&geo, &CantileverProfile::Uniform { length: 0.5e-6 }, CC, GalerkinOptions::default()).unwrap();
        let d = sys.assemble(1.0e6).unwrap();
        let norm = d.norm();
        for i in 0..8 {
            for j in 0..8 {
                if i != j {
                    assert!(d[(i, j)].abs() < 1e-10 * norm);
                }
            }
        }
    }

    #[test]
    fn constant_table_matches_uniform_matrix() {
        let geo = geometry(20, 1.0);
        let l = 0.5e-6;
        let rho = 40.0 / geo.beam_length;
        let samples = vec![
            ProfileSample { x: 0.0, length: l, density: rho },
            ProfileSample { x: geo.beam_length, length: l, density: rho },
        ];
        let opts = GalerkinOptions::default();
        let tab = GalerkinSystem::new(&geo, &CantileverProfile::Tabulated { samples }, CC, opts).unwrap();
        let uni = GalerkinSystem::new(&geo, &CantileverProfile::Uniform { length: l }, CC, opts).unwrap();
        let alpha = 1.3e6;
        let a = tab.assemble(alpha).unwrap();
        let b = uni.assemble(alpha).unwrap();
        assert!((a - &b).norm() < 1e-10 * b.norm());
    }

    #[test]
    fn windows_and_complement() {
        let r = merge(vec![(0.3, 0.5), (0.1, 0.2), (0.45, 0.6)]);
        assert_eq!(r, vec![(0.1, 0.2), (0.3, 0.6)]);
        let c = complement((0.0, 1.0), &r);
        assert_eq!(c, vec![(0.0, 0.1), (0.2, 0.3), (0.6, 1.0)]);
    }

    #[test]
    fn taper_pole_window_is_found() {
        let geo = geometry(20, 1.0);
        let big_l = geo.beam_length;
        let l0 = 0.5e-6;
        let samples = vec![
            ProfileSample { x: 0.0, length: l0, density: 40.0 / big_l },
            ProfileSample { x: big_l, length: 2.0 * l0, density: 40.0 / big_l },
        ];
        let field = ProfileField::new(&geo, &CantileverProfile::Tabulated { samples }).unwrap();
        let alpha = 1.5 * band_edge(1) / (2.0 * l0) * 1.0;
        let w = pole_windows(&field.families[0], alpha, 1e-8);
        assert_eq!(w.len(), 1);
        let x = 0.5 * (w[0].0 + w[0].1);
        let l = field.families[0].length.eval(x);
        assert!((alpha * l - band_edge(1)).abs() < 1e-7);
    }
}
