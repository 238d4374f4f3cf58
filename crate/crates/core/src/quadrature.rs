//! Gauss–Legendre quadrature: fixed rules, composite panels, adaptive
//! bisection and a cumulative variant for nested integrals.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// The shared 32-point rule used for all panels.
    pub fn order32() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(PANEL_ORDER))
    }

    /// Integrate `f` over [a, b] with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }

    /// Mapped nodes and weights for [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }
}

/// Order of every panel rule.
pub const PANEL_ORDER: usize = 32;

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, dp)
}

/// Composite rule with `panels` equal panels of the 32-point rule.
pub fn composite<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let rule = GaussLegendre::order32();
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * h;
            rule.integrate(lo, lo + h, &mut f)
        })
        .sum()
}

/// Composite integration with panel doubling until two successive estimates
/// agree to `rtol` (relative) or `atol` (absolute).
pub fn integrate_converged<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    rtol: f64,
    atol: f64,
    mut f: F,
) -> Result<f64> {
    let mut panels = 4;
    let mut prev = composite(a, b, panels, &mut f);
    while panels <= 4096 {
        panels *= 2;
        let cur = composite(a, b, panels, &mut f);
        if (cur - prev).abs() <= rtol * cur.abs().max(atol) || (cur - prev).abs() <= atol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!(
        "composite rule on [{a}, {b}] not converged at {panels} panels"
    )))
}

/// Adaptive bisection of [a, b] for a vector-valued integrand of length
/// `dim`. Each panel uses the 32-point rule; a panel is accepted once the
/// sum over its two halves agrees with the whole to `rtol` relative to
/// `scale` (or the running max-norm of the result when `scale` is 0).
pub fn adaptive_vec<F>(a: f64, b: f64, dim: usize, rtol: f64, max_depth: usize, f: &mut F) -> Vec<f64>
where
    F: FnMut(f64, &mut [f64]),
{
    let rule = GaussLegendre::order32();
    let mut buf = vec![0.0; dim];
    let mut panel = |lo: f64, hi: f64, out: &mut [f64], buf: &mut [f64]| {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (x, w) in rule.mapped(lo, hi) {
            f(x, buf);
            for (o, v) in out.iter_mut().zip(buf.iter()) {
                *o += w * v;
            }
        }
    };
    let mut total = vec![0.0; dim];
    let mut whole = vec![0.0; dim];
    panel(a, b, &mut whole, &mut buf);
    let scale = whole.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut stack = vec![(a, b, whole, 0usize)];
    let mut left = vec![0.0; dim];
    let mut right = vec![0.0; dim];
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        panel(lo, mid, &mut left, &mut buf);
        panel(mid, hi, &mut right, &mut buf);
        let err = est
            .iter()
            .zip(left.iter().zip(&right))
            .fold(0.0f64, |m, (e, (l, r))| m.max((e - l - r).abs()));
        if err <= rtol * scale || depth >= max_depth {
            for (t, (l, r)) in total.iter_mut().zip(left.iter().zip(&right)) {
                *t += l + r;
            }
        } else {
            stack.push((lo, mid, left.clone(), depth + 1));
            stack.push((mid, hi, right.clone(), depth + 1));
        }
    }
    total
}

/// Running antiderivative of a function sampled through the 32-point rule.
///
/// The interval [a, b] is cut into `panels` equal panels. `eval(x)` returns
/// F(x) = ∫_a^x f exactly up to the rule's accuracy: the full panels to the
/// left are summed, the partial panel is integrated with its own mapped rule.
pub struct Cumulative<F> {
    a: f64,
    h: f64,
    prefix: Vec<f64>,
    f: F,
}

impl<F: Fn(f64) -> f64> Cumulative<F> {
    pub fn new(a: f64, b: f64, panels: usize, f: F) -> Self {
        let rule = GaussLegendre::order32();
        let h = (b - a) / panels as f64;
        let mut prefix = Vec::with_capacity(panels + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            acc += rule.integrate(lo, lo + h, &f);
            prefix.push(acc);
        }
        Self { a, h, prefix, f }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let rel = ((x - self.a) / self.h).max(0.0);
        let p = (rel.floor() as usize).min(self.prefix.len() - 2);
        let lo = self.a + p as f64 * self.h;
        if x <= lo {
            return self.prefix[p];
        }
        self.prefix[p] + GaussLegendre::order32().integrate(lo, x, &self.f)
    }

    pub fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }
}

/// ∫_a^b (∫_a^u f)^2 du by composite rules on `panels` panels.
pub fn nested_square<F: Fn(f64) -> f64>(a: f64, b: f64, panels: usize, f: F) -> f64 {
    let inner = Cumulative::new(a, b, panels, f);
    composite(a, b, panels, |u| {
        let v = inner.eval(u);
        v * v
    })
}

/// Nested integral with panel doubling until agreement to `rtol`.
pub fn nested_square_converged<F: Fn(f64) -> f64>(
    a: f64,
    b: f64,
    rtol: f64,
    atol: f64,
    f: F,
) -> Result<f64> {
    let mut panels = 4;
    let mut prev = nested_square(a, b, panels, &f);
    while panels <= 2048 {
        panels *= 2;
        let cur = nested_square(a, b, panels, &f);
        if (cur - prev).abs() <= rtol * cur.abs() || (cur - prev).abs() <= atol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!(
        "nested rule on [{a}, {b}] not converged at {panels} panels"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(32);
        let s: f64 = rule.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 63 is the limit of exactness
        let v = rule.integrate(0.0, 1.0, |x| x.powi(62));
        assert!((v - 1.0 / 63.0).abs() < 1e-14);
    }

    #[test]
    fn small_rules_match_known_nodes() {
        let r = GaussLegendre::new(2);
        assert!((r.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let r = GaussLegendre::new(3);
        assert!(r.nodes[1].abs() < 1e-15);
        assert!((r.weights[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn converged_integral_of_oscillatory_function() {
        let v = integrate_converged(0.0, 1.0, 1e-13, 0.0, |x| (40.0 * x).cos()).unwrap();
        assert!((v - (40f64).sin() / 40.0).abs() < 1e-14);
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let c = Cumulative::new(0.0, 2.0, 8, |x: f64| x.exp());
        for &x in &[0.0, 0.1, 0.25, 1.3, 2.0] {
            assert!((c.eval(x) - (x.exp() - 1.0)).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn nested_square_of_constant() {
        // ∫_0^1 (∫_0^u 1)^2 du = 1/3
        let v = nested_square(0.0, 1.0, 4, |_| 1.0);
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_log_singularity_near_end() {
        let mut f = |x: f64, out: &mut [f64]| out[0] = 1.0 / (x + 1e-6);
        let v = adaptive_vec(0.0, 1.0, 1, 1e-12, 60, &mut f);
        let exact = ((1.0 + 1e-6) / 1e-6f64).ln();
        assert!((v[0] - exact).abs() < 1e-9 * exact);
    }
}
