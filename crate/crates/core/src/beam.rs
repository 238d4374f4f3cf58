//! Bare-beam eigenvalues β_n and orthonormal mode shapes φ_n(u) on [0, 1].
//!
//! Roots of cos β cosh β = ±1 are found in the form cos β ∓ sech β = 0,
//! one per interval of width π centred on the asymptote. Mode shapes are
//! stored as
//!
//! ```text
//! φ(u) = C [ P e^{β(u-1)} + Q e^{-βu} - cos βu + σ sin βu ]
//! ```
//!
//! which is the classic `cosh - cos - σ(sinh - sin)` form with the growing
//! exponential rescaled so that nothing overflows or cancels for large β.
//!
//! Sign convention: C < 0, so φ_n''(0) < 0 and, for the clamped-clamped
//! fundamental, ∫φ_1 du = 4 tan(β_1/2)/β_1 ≈ -0.8309.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BoundaryCondition;
use crate::quadrature;
use crate::roots::{bracketed_newton, sech, Dual};

/// Root β_n of the beam frequency equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamEigenvalue {
    pub n: usize,
    pub beta: f64,
    pub bc: BoundaryCondition,
}

impl BeamEigenvalue {
    /// |cos β − (±1)/cosh β|.
    pub fn residual(&self) -> f64 {
        (self.beta.cos() - self.bc.sign() * sech(self.beta)).abs()
    }
}

fn frequency_equation(bc: BoundaryCondition, beta: Dual) -> Dual {
    beta.cos() - beta.sech().scale(bc.sign())
}

/// n-th positive root of cos β cosh β = ±1 (n ≥ 1).
pub fn beam_root(bc: BoundaryCondition, n: usize) -> f64 {
    assert!(n >= 1, "beam mode index starts at 1");
    let centre = match bc {
        BoundaryCondition::ClampedClamped => (n as f64 + 0.5) * PI,
        BoundaryCondition::ClampedFree => (n as f64 - 0.5) * PI,
    };
    let (a, b) = (centre - 0.5 * PI, centre + 0.5 * PI);
    bracketed_newton(|x| frequency_equation(bc, Dual::var(x)), a, b, 1e-16)
        .expect("beam frequency equation changes sign on every asymptotic bracket")
}

/// First `n_max` beam eigenvalues, ascending.
pub fn beam_roots(bc: BoundaryCondition, n_max: usize) -> Vec<BeamEigenvalue> {
    (1..=n_max)
        .map(|n| BeamEigenvalue { n, beta: beam_root(bc, n), bc })
        .collect()
}

/// Orthonormal bare-beam mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamMode {
    pub eigenvalue: BeamEigenvalue,
    sigma: f64,
    p: f64,
    q: f64,
    scale: f64,
}

impl BeamMode {
    pub fn new(eigenvalue: BeamEigenvalue) -> Self {
        let b = eigenvalue.beta;
        let e = (-b).exp();
        let e2 = e * e;
        let (c, s) = (b.cos(), b.sin());
        let (sigma, p) = match eigenvalue.bc {
            BoundaryCondition::ClampedClamped => {
                let den = 1.0 - e2 - 2.0 * s * e;
                ((1.0 + e2 - 2.0 * c * e) / den, (c - s - e) / den)
            }
            BoundaryCondition::ClampedFree => {
                let den = 1.0 + e2 + 2.0 * c * e;
                ((1.0 - e2 - 2.0 * s * e) / den, (e + c + s) / den)
            }
        };
        let mut mode = Self {
            eigenvalue,
            sigma,
            p,
            q: 0.5 * (1.0 + sigma),
            scale: 1.0,
        };
        let norm2 = quadrature::integrate_converged(0.0, 1.0, 1e-15, 1e-300, |u| {
            let v = mode.raw(u, 0);
            v * v
        })
        .expect("mode norm integral converges");
        mode.scale = -1.0 / norm2.sqrt();
        mode
    }

    /// Mode `n` for the given supports.
    pub fn of(bc: BoundaryCondition, n: usize) -> Self {
        Self::new(BeamEigenvalue { n, beta: beam_root(bc, n), bc })
    }

    /// First `n_max` modes.
    pub fn basis(bc: BoundaryCondition, n_max: usize) -> Vec<BeamMode> {
        beam_roots(bc, n_max).into_iter().map(BeamMode::new).collect()
    }

    pub fn beta(&self) -> f64 {
        self.eigenvalue.beta
    }

    pub fn n(&self) -> usize {
        self.eigenvalue.n
    }

    fn raw(&self, u: f64, order: usize) -> f64 {
        let b = self.eigenvalue.beta;
        let x = b * u;
        let grow = self.p * (b * (u - 1.0)).exp();
        let decay = self.q * (-x).exp();
        let (c, s) = (x.cos(), x.sin());
        let (dc, ds) = match order % 4 {
            0 => (c, s),
            1 => (-s, c),
            2 => (-c, -s),
            _ => (s, -c),
        };
        let alt = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
        b.powi(order as i32) * (grow + alt * decay - dc + self.sigma * ds)
    }

    /// φ_n, φ_n' or φ_n'' at u ∈ [0, 1].
    pub fn eval(&self, u: f64, derivative_order: usize) -> Result<f64> {
        if derivative_order > 2 {
            return Err(Error::DerivativeOrder(derivative_order));
        }
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::OutOfDomain(u));
        }
        Ok(self.value(u, derivative_order))
    }

    /// Any derivative order, no domain check.
    pub(crate) fn value(&self, u: f64, order: usize) -> f64 {
        self.scale * self.raw(u, order)
    }

    pub fn phi(&self, u: f64) -> f64 {
        self.value(u, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::composite;

    // independent oracle: plain bisection on the raw product form
    fn oracle_root(sign: f64, a: f64, b: f64) -> f64 {
        let f = |x: f64| x.cos() * x.cosh() - sign;
        let (mut lo, mut hi) = (a, b);
        let flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn first_roots_match_bisection_oracle() {
        let cc = beam_root(BoundaryCondition::ClampedClamped, 1);
        let cf = beam_root(BoundaryCondition::ClampedFree, 1);
        let cc_oracle = oracle_root(1.0, 4.0, 5.0);
        let cf_oracle = oracle_root(-1.0, 1.0, 2.5);
        assert!((cc - cc_oracle).abs() < 1e-12);
        assert!((cf - cf_oracle).abs() < 1e-12);
        assert!((cc - 4.7300407449).abs() < 1e-9);
        assert!((cf - 1.8751040687).abs() < 1e-9);
    }

    #[test]
    fn roots_increase_and_have_small_residual() {
        for bc in [BoundaryCondition::ClampedClamped, BoundaryCondition::ClampedFree] {
            let roots = beam_roots(bc, 60);
            for w in roots.windows(2) {
                assert!(w[1].beta > w[0].beta);
            }
            for r in &roots {
                assert!(r.residual() < 1e-12, "{bc:?} n={} residual {}", r.n, r.residual());
            }
        }
    }

    #[test]
    fn clamped_roots_approach_asymptote() {
        let r = beam_root(BoundaryCondition::ClampedClamped, 12);
        assert!((r - 12.5 * PI).abs() < 1e-9);
        let r = beam_root(BoundaryCondition::ClampedFree, 12);
        assert!((r - 11.5 * PI).abs() < 1e-9);
    }

    #[test]
    fn clamped_boundary_values() {
        let m = BeamMode::of(BoundaryCondition::ClampedClamped, 1);
        assert!(m.eval(0.0, 0).unwrap().abs() < 1e-12);
        assert!(m.eval(0.0, 1).unwrap().abs() < 1e-12);
        assert!(m.eval(1.0, 0).unwrap().abs() < 1e-12);
        assert!(m.eval(1.0, 1).unwrap().abs() < 1e-10);
        assert!(m.eval(0.0, 2).unwrap() < 0.0);
    }

    #[test]
    fn free_end_conditions() {
        for n in 1..=10 {
            let m = BeamMode::of(BoundaryCondition::ClampedFree, n);
            let b = m.beta();
            assert!(m.value(0.0, 0).abs() < 1e-8);
            assert!(m.value(0.0, 1).abs() < 1e-8 * b);
            assert!(m.value(1.0, 2).abs() < 1e-8 * b * b, "n={n}");
            assert!(m.value(1.0, 3).abs() < 1e-8 * b.powi(3), "n={n}");
        }
    }

    #[test]
    fn boundary_conditions_hold_for_large_n() {
        for n in [10, 20, 40] {
            let m = BeamMode::of(BoundaryCondition::ClampedClamped, n);
            let b = m.beta();
            for u in [0.0, 1.0] {
                assert!(m.value(u, 0).abs() < 1e-8, "n={n} u={u}");
                assert!(m.value(u, 1).abs() < 1e-8 * b, "n={n} u={u}");
            }
        }
    }

    #[test]
    fn orthonormality_of_first_ten() {
        for bc in [BoundaryCondition::ClampedClamped, BoundaryCondition::ClampedFree] {
            let modes = BeamMode::basis(bc, 10);
            for i in 0..10 {
                for j in 0..10 {
                    // 8 panels x 32 nodes = 256 nodes
                    let v = composite(0.0, 1.0, 8, |u| modes[i].phi(u) * modes[j].phi(u));
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-8, "{bc:?} ({i},{j}) -> {v}");
                }
            }
        }
    }

    #[test]
    fn fundamental_is_symmetric() {
        let m = BeamMode::of(BoundaryCondition::ClampedClamped, 1);
        for i in 0..=50 {
            let u = i as f64 / 50.0;
            assert!((m.phi(u) - m.phi(1.0 - u)).abs() < 1e-9);
        }
    }

    #[test]
    fn sign_convention_gives_negative_mean() {
        let m = BeamMode::of(BoundaryCondition::ClampedClamped, 1);
        let mean = composite(0.0, 1.0, 8, |u| m.phi(u));
        assert!(mean < 0.0);
        let t = (m.beta() / 2.0).tan();
        assert!((mean - 4.0 * t / m.beta()).abs() < 1e-12);
    }

    #[test]
    fn fourth_derivative_by_finite_differences() {
        // 7-point O(h^4) stencil for the fourth derivative
        let m = BeamMode::of(BoundaryCondition::ClampedClamped, 1);
        let b4 = m.beta().powi(4);
        let h = 0.01;
        let coef = [-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0];
        let mut worst: f64 = 0.0;
        for i in 0..=40 {
            let u = 0.05 + 0.9 * i as f64 / 40.0;
            let d4: f64 = coef
                .iter()
                .enumerate()
                .map(|(k, c)| c * m.phi(u + (k as f64 - 3.0) * h))
                .sum::<f64>()
                / (6.0 * h.powi(4));
            worst = worst.max((d4 - b4 * m.phi(u)).abs() / (b4 * 1.6));
        }
        assert!(worst < 1e-6, "worst relative error {worst}");
    }

    #[test]
    fn stable_form_matches_naive_form_for_small_beta() {
        for n in 1..=4 {
            let m = BeamMode::of(BoundaryCondition::ClampedClamped, n);
            let b = m.beta();
            let sigma = (b.cosh() - b.cos()) / (b.sinh() - b.sin());
            let naive = |u: f64| {
                (b * u).cosh() - (b * u).cos() - sigma * ((b * u).sinh() - (b * u).sin())
            };
            let norm = composite(0.0, 1.0, 16, |u| naive(u).powi(2)).sqrt();
            for i in 0..=20 {
                let u = i as f64 / 20.0;
                let want = -naive(u) / norm;
                assert!((m.phi(u) - want).abs() < 1e-9, "n={n} u={u}");
            }
        }
    }

    #[test]
    fn derivative_order_checked() {
        let m = BeamMode::of(BoundaryCondition::ClampedClamped, 1);
        assert_eq!(m.eval(0.5, 3), Err(Error::DerivativeOrder(3)));
        assert!(m.eval(1.5, 0).is_err());
    }
}
