//! Steady states of the modulation equations.
//!
//! Each mode j obeys
//!   a_j²[(ω_jM_jσ_j − (C_jj a_j² + C₁₂a_o²)/4)² + (ω_jμ_j)²] = ℱ_j²,
//! which is the squared form of the two backbone branches. In the scaled
//! unknown q_j = a_j²/(a_j^max)² it reads
//!   q_j[(S_j − K_j q_j − D_j q_o)² + 1] = 1,
//! and every q_j of a solution lies in (0, 1].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::modes::TwoModeSelection;
use super::params::EffectiveParams;
use crate::beam::BeamMode;
use crate::error::{Error, Result};
use crate::kernel::CantileverShape;
use crate::roots::{bisect, polynomial_real_roots, real_cubic_roots};

/// Solutions whose scaled residual exceeds this are discarded.
pub const ACCEPT_RESIDUAL: f64 = 1e-12;
/// Newton iterations per candidate before it is reported as unconverged.
pub const MAX_ITERATIONS: usize = 200;
const DEDUP_RTOL: f64 = 1e-10;
const SCAN_POINTS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// σ_j above the backbone.
    #[serde(rename = "+")]
    Upper,
    #[serde(rename = "-")]
    Lower,
}

impl Branch {
    pub fn symbol(self) -> &'static str {
        match self {
            Branch::Upper => "+",
            Branch::Lower => "-",
        }
    }
}

/// Steady-state amplitude and phase of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponsePoint {
    /// 1 or 2.
    pub mode: usize,
    /// rad/s
    pub sigma: f64,
    /// m
    pub amplitude: f64,
    /// rad; NaN when the amplitude is zero.
    pub phase: f64,
    pub branch: Branch,
    /// Relative residual of the steady-state relation.
    pub residual: f64,
}

/// Which mode is parametrised when the pair is reduced to one unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Elimination {
    #[default]
    FirstMode,
    SecondMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledSolution {
    /// Distinct solutions, ordered by a₁ then a₂.
    pub pairs: Vec<[ResponsePoint; 2]>,
    /// Candidates whose refinement did not converge.
    pub unconverged: usize,
}

fn index(j: usize) -> Result<(usize, usize)> {
    match j {
        1 => Ok((0, 1)),
        2 => Ok((1, 0)),
        _ => Err(Error::InvalidArgument(format!("mode index must be 1 or 2, got {j}"))),
    }
}

/// a_j^max = |ℱ_j/(μ_jω_j)|, the peak of the resonance curve.
pub fn peak_amplitude(j: usize, p: &EffectiveParams) -> Result<f64> {
    let (i, _) = index(j)?;
    if p.damping[i] <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "mode {j} has no damping, its linear response is unbounded"
        )));
    }
    Ok((p.force[i] / (p.damping[i] * p.omega[i])).abs())
}

fn centre(i: usize, a: f64, a_other: f64, p: &EffectiveParams) -> f64 {
    (p.self_cubic[i] * a * a + p.cross_cubic * a_other * a_other) / (4.0 * p.mass[i] * p.omega[i])
}

/// The two detunings (σ⁺, σ⁻) at which mode j has amplitude a_j, or None
/// when a_j exceeds the reachable amplitude.
pub fn backbone(j: usize, a: f64, a_other: f64, p: &EffectiveParams) -> Result<Option<(f64, f64)>> {
    let (i, _) = index(j)?;
    if !(a > 0.0) {
        return Err(Error::InvalidArgument("backbone needs a positive amplitude".into()));
    }
    let m = p.mass[i];
    let rad = (p.force[i] / (m * p.omega[i] * a)).powi(2) - (p.damping[i] / m).powi(2);
    if rad < 0.0 {
        // tolerate rounding at the peak itself
        let scale = (p.damping[i] / m).powi(2);
        if rad < -1e-13 * scale {
            return Ok(None);
        }
    }
    let c = centre(i, a, a_other, p);
    let s = rad.max(0.0).sqrt();
    Ok(Some((c + s, c - s)))
}

/// θ_j with the quadrant fixed by sin θ = ωμa/ℱ and the real part of the
/// modulation equation.
pub fn phase(j: usize, sigma: f64, a: f64, a_other: f64, p: &EffectiveParams) -> Result<f64> {
    let (i, _) = index(j)?;
    if a == 0.0 || p.force[i] == 0.0 {
        return Ok(f64::NAN);
    }
    let (w, f) = (p.omega[i], p.force[i]);
    let sin = w * p.damping[i] * a / f;
    let cos = (a * (p.self_cubic[i] * a * a + p.cross_cubic * a_other * a_other) / 4.0 - w * sigma * p.mass[i] * a) / f;
    Ok(sin.atan2(cos))
}

/// Relative residual of the squared steady-state relation of mode j.
pub fn residual(j: usize, sigma: f64, a: f64, a_other: f64, p: &EffectiveParams) -> Result<f64> {
    let (i, _) = index(j)?;
    let w = p.omega[i];
    let detune = w * p.mass[i] * sigma - (p.self_cubic[i] * a * a + p.cross_cubic * a_other * a_other) / 4.0;
    let damp = w * p.damping[i];
    let lhs = a * a * (detune * detune + damp * damp);
    let f2 = p.force[i] * p.force[i];
    let scale = if f2 > 0.0 { f2 } else { lhs.max(f64::MIN_POSITIVE) };
    Ok((lhs - f2).abs() / scale)
}

fn point(j: usize, sigma: f64, a: f64, a_other: f64, p: &EffectiveParams) -> Result<ResponsePoint> {
    let (i, _) = index(j)?;
    let branch = if sigma >= centre(i, a, a_other, p) { Branch::Upper } else { Branch::Lower };
    Ok(ResponsePoint {
        mode: j,
        sigma,
        amplitude: a,
        phase: phase(j, sigma, a, a_other, p)?,
        branch,
        residual: if a == 0.0 && p.force[i] == 0.0 { 0.0 } else { residual(j, sigma, a, a_other, p)? },
    })
}

/// Scaled coefficients of one mode's steady-state relation.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    /// (a^max)²
    p: f64,
    s: f64,
    k: f64,
    /// coupling to the other mode's q
    d: f64,
}

fn scaled(p: &EffectiveParams, sigma: [f64; 2]) -> Result<[Scaled; 2]> {
    let pk = [peak_amplitude(1, p)?.powi(2), peak_amplitude(2, p)?.powi(2)];
    Ok([0, 1].map(|i| {
        let m = p.omega[i] * p.damping[i];
        Scaled {
            p: pk[i],
            s: p.omega[i] * p.mass[i] * sigma[i] / m,
            k: p.self_cubic[i] / 4.0 * pk[i] / m,
            d: p.cross_cubic / 4.0 * pk[1 - i] / m,
        }
    }))
}

impl Scaled {
    fn f(&self, q: f64, q_other: f64) -> f64 {
        let e = self.s - self.k * q - self.d * q_other;
        q * (e * e + 1.0) - 1.0
    }

    /// Roots q ∈ (0, 1] with the other mode held at q_other.
    fn cubic_roots(&self, q_other: f64) -> Vec<f64> {
        let s = self.s - self.d * q_other;
        let k = self.k;
        real_cubic_roots(k * k, -2.0 * s * k, s * s + 1.0, -1.0)
            .into_iter()
            .map(|q| polish1(|x| self.f(x, q_other), |x| {
                let e = s - k * x;
                e * e + 1.0 - 2.0 * x * e * k
            }, q))
            .filter(|&q| q > 0.0 && q <= 1.0 + 1e-12)
            .collect()
    }
}

fn polish1(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, mut x: f64) -> f64 {
    for _ in 0..8 {
        let d = df(x);
        if d == 0.0 {
            break;
        }
        let step = f(x) / d;
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.abs() <= 4.0 * f64::EPSILON * x.abs() {
            break;
        }
    }
    x
}

fn dedup(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= DEDUP_RTOL * a.abs().max(b.abs()));
    xs
}

/// Single-mode response of mode j with the other amplitude held fixed.
pub fn single_mode_response(j: usize, sigma: f64, a_other: f64, p: &EffectiveParams) -> Result<Vec<ResponsePoint>> {
    let (i, _) = index(j)?;
    if p.force[i] == 0.0 {
        return Ok(vec![point(j, sigma, 0.0, a_other, p)?]);
    }
    let pk = peak_amplitude(j, p)?.powi(2);
    let m = p.omega[i] * p.damping[i];
    let sc = Scaled {
        p: pk,
        s: (p.omega[i] * p.mass[i] * sigma - p.cross_cubic * a_other * a_other / 4.0) / m,
        k: p.self_cubic[i] / 4.0 * pk / m,
        d: 0.0,
    };
    dedup(sc.cubic_roots(0.0))
        .into_iter()
        .map(|q| point(j, sigma, (q * sc.p).sqrt(), a_other, p))
        .collect()
}

/// All steady states of the coupled pair at detunings (σ₁, σ₂).
pub fn coupled_steady_state(sigma1: f64, sigma2: f64, p: &EffectiveParams) -> Result<CoupledSolution> {
    coupled_steady_state_ordered(sigma1, sigma2, p, Elimination::FirstMode)
}

/// As [`coupled_steady_state`], choosing which mode is parametrised.
///
/// The parametrised mode's relation is solved exactly by
/// q = 1/(1 + z²), z = S − Kq − Dq_o; the other relation then becomes a
/// degree-9 polynomial in z. Its real roots, plus sign changes found on a
/// dense z grid, seed a two-dimensional Newton refinement.
pub fn coupled_steady_state_ordered(
    sigma1: f64,
    sigma2: f64,
    p: &EffectiveParams,
    order: Elimination,
) -> Result<CoupledSolution> {
    let sigma = [sigma1, sigma2];
    for j in 1..=2 {
        peak_amplitude(j, p)?;
    }
    let build = |q: [f64; 2]| -> Result<[ResponsePoint; 2]> {
        let a = [q[0].max(0.0).sqrt(), q[1].max(0.0).sqrt()];
        let pk = [peak_amplitude(1, p)?, peak_amplitude(2, p)?];
        let amp = [a[0] * pk[0], a[1] * pk[1]];
        Ok([point(1, sigma[0], amp[0], amp[1], p)?, point(2, sigma[1], amp[1], amp[0], p)?])
    };
    let forced = [p.force[0] != 0.0, p.force[1] != 0.0];
    let mut unconverged = 0;
    let mut qs: Vec<[f64; 2]> = Vec::new();
    match forced {
        [false, false] => qs.push([0.0, 0.0]),
        [true, false] | [false, true] => {
            let i = if forced[0] { 0 } else { 1 };
            let sc = scaled_single(p, sigma, i)?;
            for q in dedup(sc.cubic_roots(0.0)) {
                let mut pair = [0.0; 2];
                pair[i] = q;
                qs.push(pair);
            }
        }
        [true, true] => {
            let sc = scaled(p, sigma)?;
            if p.cross_cubic == 0.0 {
                for q1 in dedup(sc[0].cubic_roots(0.0)) {
                    for q2 in dedup(sc[1].cubic_roots(0.0)) {
                        qs.push([q1, q2]);
                    }
                }
            } else {
                let e = match order {
                    Elimination::FirstMode => 0,
                    Elimination::SecondMode => 1,
                };
                for z in candidates(&sc[e], &sc[1 - e]) {
                    let qe = 1.0 / (1.0 + z * z);
                    let qo = (sc[e].s - sc[e].k * qe - z) / sc[e].d;
                    if !(qo > 0.0) {
                        continue;
                    }
                    let mut q = [0.0; 2];
                    q[e] = qe;
                    q[1 - e] = qo;
                    match newton2(&sc, q) {
                        Some(q) => qs.push(q),
                        None => unconverged += 1,
                    }
                }
            }
        }
    }
    qs.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    qs.dedup_by(|a, b| {
        let n = a[0].abs().max(b[0].abs()) + a[1].abs().max(b[1].abs());
        (a[0] - b[0]).abs() + (a[1] - b[1]).abs() <= DEDUP_RTOL * n
    });
    let pairs = qs.into_iter().map(build).collect::<Result<Vec<_>>>()?;
    Ok(CoupledSolution { pairs, unconverged })
}

fn scaled_single(p: &EffectiveParams, sigma: [f64; 2], i: usize) -> Result<Scaled> {
    let pk = peak_amplitude(i + 1, p)?.powi(2);
    let m = p.omega[i] * p.damping[i];
    Ok(Scaled {
        p: pk,
        s: p.omega[i] * p.mass[i] * sigma[i] / m,
        k: p.self_cubic[i] / 4.0 * pk / m,
        d: 0.0,
    })
}

type Poly = Vec<f64>;

fn pmul(a: &[f64], b: &[f64]) -> Poly {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn padd(a: &[f64], b: &[f64]) -> Poly {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] += x;
    }
    out
}

fn pscale(a: &[f64], s: f64) -> Poly {
    a.iter().map(|x| x * s).collect()
}

/// Candidate z values for the parametrised mode `e`, other mode `o`.
fn candidates(e: &Scaled, o: &Scaled) -> Vec<f64> {
    let one_z2 = [1.0, 0.0, 1.0];
    // N(z) = S_e(1+z²) − K_e − z(1+z²), so q_o = N/(D_e(1+z²))
    let n = padd(&padd(&pscale(&one_z2, e.s), &[-e.k]), &[0.0, -1.0, 0.0, -1.0]);
    // R(z) = S_o D_e(1+z²) − K_o N − D_o D_e
    let r = padd(&padd(&pscale(&one_z2, o.s * e.d), &pscale(&n, -o.k)), &[-o.d * e.d]);
    let one_z2_sq = pmul(&one_z2, &one_z2);
    let lhs = pmul(&n, &padd(&pmul(&r, &r), &pscale(&one_z2_sq, e.d * e.d)));
    let rhs = pscale(&pmul(&one_z2_sq, &one_z2), e.d.powi(3));
    let poly = padd(&lhs, &pscale(&rhs, -1.0));
    let mut zs = polynomial_real_roots(&poly);

    // q_e, q_o ∈ (0, 1] bound |z|
    let bound = e.s.abs() + e.k.abs() + e.d.abs() + 1.0;
    let g = |z: f64| {
        let qe = 1.0 / (1.0 + z * z);
        let qo = (e.s - e.k * qe - z) / e.d;
        o.f(qo, qe)
    };
    let t_max = bound.asinh();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=SCAN_POINTS {
        let z = (t_max * (2.0 * i as f64 / SCAN_POINTS as f64 - 1.0)).sinh();
        let v = g(z);
        if let Some((z0, v0)) = prev {
            if v0 * v < 0.0 {
                if let Some(r) = bisect(g, z0, z) {
                    zs.push(r);
                }
            }
        }
        prev = Some((z, v));
    }
    zs.sort_by(f64::total_cmp);
    zs
}

/// Joint Newton refinement of (q₁, q₂); None when it fails to settle.
fn newton2(sc: &[Scaled; 2], mut q: [f64; 2]) -> Option<[f64; 2]> {
    let res = |q: [f64; 2]| [sc[0].f(q[0], q[1]), sc[1].f(q[1], q[0])];
    for _ in 0..MAX_ITERATIONS {
        let f = res(q);
        let norm = f[0].abs().max(f[1].abs());
        let e = [
            sc[0].s - sc[0].k * q[0] - sc[0].d * q[1],
            sc[1].s - sc[1].k * q[1] - sc[1].d * q[0],
        ];
        let j = [
            [e[0] * e[0] + 1.0 - 2.0 * q[0] * e[0] * sc[0].k, -2.0 * q[0] * e[0] * sc[0].d],
            [-2.0 * q[1] * e[1] * sc[1].d, e[1] * e[1] + 1.0 - 2.0 * q[1] * e[1] * sc[1].k],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return (norm < ACCEPT_RESIDUAL).then_some(q);
        }
        let dq = [
            (f[0] * j[1][1] - f[1] * j[0][1]) / det,
            (j[0][0] * f[1] - j[1][0] * f[0]) / det,
        ];
        let next = [q[0] - dq[0], q[1] - dq[1]];
        let small = dq[0].abs() <= 4.0 * f64::EPSILON * q[0].abs() && dq[1].abs() <= 4.0 * f64::EPSILON * q[1].abs();
        let fnext = res(next);
        if fnext[0].abs().max(fnext[1].abs()) <= norm || norm > ACCEPT_RESIDUAL {
            q = next;
        }
        if small || norm == 0.0 {
            break;
        }
    }
    let f = res(q);
    (f[0].abs().max(f[1].abs()) < ACCEPT_RESIDUAL && q[0] > 0.0 && q[1] > 0.0).then_some(q)
}

/// Coupled steady states on a list of (σ₁, σ₂) points, in parallel.
pub fn scan(points: &[(f64, f64)], p: &EffectiveParams, order: Elimination) -> Vec<Result<CoupledSolution>> {
    points
        .par_iter()
        .map(|&(s1, s2)| coupled_steady_state_ordered(s1, s2, p, order))
        .collect()
}

/// Peak shift of the fundamental when the collective mode is driven on
/// its linear resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyShift {
    pub a1: f64,
    pub a2: f64,
    /// rad/s
    pub sigma1: f64,
    /// Relative residuals of the two steady-state relations.
    pub residual: [f64; 2],
}

/// σ₁ at the fundamental peak a₁ = a₁^max for each admissible amplitude of
/// the collective mode driven at σ₂ = 0.
pub fn shift_of_fundamental(p: &EffectiveParams) -> Result<Vec<FrequencyShift>> {
    let a1 = peak_amplitude(1, p)?;
    let roots = single_mode_response(2, 0.0, a1, p)?;
    if roots.is_empty() {
        return Err(Error::NoRoot(
            "no non-negative amplitude of the collective mode at sigma2 = 0".into(),
        ));
    }
    roots
        .into_iter()
        .map(|r| {
            let a2 = r.amplitude;
            let sigma1 = centre(0, a1, a2, p);
            Ok(FrequencyShift {
                a1,
                a2,
                sigma1,
                residual: [residual(1, sigma1, a1, a2, p)?, r.residual],
            })
        })
        .collect()
}

/// Displacement fields of a steady state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateField {
    pub beam: BeamMode,
    pub shapes: [CantileverShape; 2],
    pub beam_length: f64,
    pub cantilever_length: f64,
    pub amplitude: [f64; 2],
    /// Phases; an undefined phase is taken as zero.
    pub phase: [f64; 2],
    /// Drive frequencies Ω = ω₁ + σ₁ and ω = ω₂ + σ₂ (rad/s).
    pub drive: [f64; 2],
}

impl SteadyStateField {
    fn carrier(&self, j: usize, t: f64) -> f64 {
        self.amplitude[j] * (self.drive[j] * t - self.phase[j]).cos()
    }

    /// Beam deflection y(x, t).
    pub fn beam(&self, x: f64, t: f64) -> f64 {
        self.beam.phi(x / self.beam_length) * (self.carrier(0, t) + self.carrier(1, t))
    }

    /// Deflection η(x, ξ, t) of the cantilever at x, relative to the beam,
    /// at distance ξ from its root.
    pub fn cantilever(&self, x: f64, xi: f64, t: f64) -> f64 {
        let v = xi / self.cantilever_length;
        self.beam.phi(x / self.beam_length)
            * (self.shapes[0].chi(v) * self.carrier(0, t) + self.shapes[1].chi(v) * self.carrier(1, t))
    }
}

pub fn reconstruct_solution(
    pair: &[ResponsePoint; 2],
    selection: &TwoModeSelection,
    beam_length: f64,
) -> SteadyStateField {
    let ph = |p: &ResponsePoint| if p.phase.is_nan() { 0.0 } else { p.phase };
    SteadyStateField {
        beam: selection.beam.clone(),
        shapes: selection.shapes,
        beam_length,
        cantilever_length: selection.cantilever_length,
        amplitude: [pair[0].amplitude, pair[1].amplitude],
        phase: [ph(&pair[0]), ph(&pair[1])],
        drive: [selection.omega[0] + pair[0].sigma, selection.omega[1] + pair[1].sigma],
    }
}
