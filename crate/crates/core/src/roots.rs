//! Scalar root finding: a value/derivative pair for forward-mode
//! differentiation, a bracketed Newton–bisection hybrid and a closed-form
//! real cubic solver.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value together with its first derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub const fn new(v: f64, d: f64) -> Self {
        Self { v, d }
    }
    pub const fn var(x: f64) -> Self {
        Self { v: x, d: 1.0 }
    }
    pub const fn cst(x: f64) -> Self {
        Self { v: x, d: 0.0 }
    }
    pub fn sin(self) -> Self {
        Self::new(self.v.sin(), self.d * self.v.cos())
    }
    pub fn cos(self) -> Self {
        Self::new(self.v.cos(), -self.d * self.v.sin())
    }
    pub fn tanh(self) -> Self {
        let t = self.v.tanh();
        Self::new(t, self.d * (1.0 - t * t))
    }
    /// 1/cosh, safe for any argument.
    pub fn sech(self) -> Self {
        let s = sech(self.v);
        Self::new(s, -self.d * s * self.v.tanh())
    }
    pub fn powi(self, n: i32) -> Self {
        Self::new(self.v.powi(n), self.d * n as f64 * self.v.powi(n - 1))
    }
    pub fn scale(self, s: f64) -> Self {
        Self::new(self.v * s, self.d * s)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}
impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}
impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}
impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual::new(self.v / o.v, (self.d * o.v - self.v * o.d) / (o.v * o.v))
    }
}
impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.d)
    }
}

/// Overflow-free hyperbolic secant.
pub fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Locate the root of `f` in [a, b], which must bracket a sign change.
///
/// Newton steps are taken from the current iterate when they stay inside
/// the bracket and shrink it quickly enough; otherwise the step bisects.
/// Terminates when the bracket collapses to adjacent floats or the Newton
/// step falls below `xtol`.
pub fn bracketed_newton<F>(mut f: F, a: f64, b: f64, xtol: f64) -> Option<f64>
where
    F: FnMut(f64) -> Dual,
{
    let (mut lo, mut hi) = if a < b { (a, b) } else { (b, a) };
    let flo = f(lo).v;
    let fhi = f(hi).v;
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return None;
    }
    let lo_sign = flo.signum();
    let mut x = 0.5 * (lo + hi);
    let mut dx_old = hi - lo;
    for _ in 0..300 {
        let fx = f(x);
        if fx.v == 0.0 {
            return Some(x);
        }
        if fx.v.signum() == lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx.v / fx.d;
        let ok = fx.d.is_finite()
            && fx.d != 0.0
            && newton > lo
            && newton < hi
            && (newton - x).abs() < 0.5 * dx_old.abs();
        let next = if ok { newton } else { 0.5 * (lo + hi) };
        dx_old = next - x;
        if next == x || hi - lo <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Some(x);
        }
        if ok && dx_old.abs() <= xtol * x.abs().max(1.0) {
            return Some(next);
        }
        x = next;
    }
    Some(x)
}

/// Plain bisection on a sign change, down to adjacent floats.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> Option<f64> {
    let (mut lo, mut hi) = if a < b { (a, b) } else { (b, a) };
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..2100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Real roots of `a x^3 + b x^2 + c x + d`, ascending.
///
/// The cubic is classified by its discriminant and solved in closed form
/// (trigonometric form for three real roots, Cardano otherwise); each root
/// then gets one Newton step on the original polynomial. Degenerate leading
/// coefficients fall through to the quadratic and linear cases.
pub fn real_cubic_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-14 * scale {
        return real_quadratic_roots(b, c, d);
    }
    let (p2, p1, p0) = (b / a, c / a, d / a);
    // depressed: x = t - p2/3, t^3 + p t + q = 0
    let shift = p2 / 3.0;
    let p = p1 - p2 * p2 / 3.0;
    let q = 2.0 * p2 * p2 * p2 / 27.0 - p2 * p1 / 3.0 + p0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let mut roots = Vec::with_capacity(3);
    if p == 0.0 && q == 0.0 {
        roots.push(-shift);
    } else if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-q / 2.0 + sq).cbrt();
        let v = (-q / 2.0 - sq).cbrt();
        roots.push(u + v - shift);
    } else if disc == 0.0 {
        let u = (-q / 2.0).cbrt();
        roots.push(2.0 * u - shift);
        roots.push(-u - shift);
    } else {
        let r = (-p / 3.0).sqrt();
        let phi = (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0).acos();
        for k in 0..3 {
            let t = 2.0 * r * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos();
            roots.push(t - shift);
        }
    }
    for x in roots.iter_mut() {
        let fx = ((a * *x + b) * *x + c) * *x + d;
        let dfx = (3.0 * a * *x + 2.0 * b) * *x + c;
        if dfx != 0.0 {
            let step = fx / dfx;
            if step.is_finite() {
                *x -= step;
            }
        }
    }
    roots.sort_by(|x, y| x.total_cmp(y));
    roots
}

/// Real roots of `a x^2 + b x + c`, ascending.
pub fn real_quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-14 * scale {
        if b == 0.0 {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    let qq = -0.5 * (b + b.signum() * sq);
    let mut r = if qq == 0.0 {
        vec![0.0, 0.0]
    } else {
        vec![qq / a, c / qq]
    };
    r.sort_by(|x, y| x.total_cmp(y));
    r
}


/// Candidate real roots of Σ c_i x^i (ascending coefficients).
///
/// Eigenvalues of the companion matrix whose imaginary part is small
/// relative to their modulus, each polished by Newton steps. Callers that
/// need certainty should check residuals of their own equations.
pub fn polynomial_real_roots(coeffs: &[f64]) -> Vec<f64> {
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let mut m = nalgebra::DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        m[(i, deg - 1)] = -c[i] / lead;
    }
    let eig = m.complex_eigenvalues();
    let eval = |x: f64| {
        let mut p = 0.0;
        let mut d = 0.0;
        for &a in c.iter().rev() {
            d = d * x + p;
            p = p * x + a;
        }
        (p, d)
    };
    let mut out = Vec::new();
    for z in eig.iter() {
        if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
            continue;
        }
        let mut x = z.re;
        for _ in 0..50 {
            let (p, d) = eval(x);
            if d == 0.0 || !p.is_finite() {
                break;
            }
            let step = p / d;
            x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1e-300) {
                break;
            }
        }
        if x.is_finite() {
            out.push(x);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_derivatives() {
        let x = Dual::var(0.7);
        let y = (x.cos() * x.tanh() + x.sin()) / (x.sech() + x.cos());
        let h = 1e-6;
        let g = |t: f64| (t.cos() * t.tanh() + t.sin()) / (sech(t) + t.cos());
        let fd = (g(0.7 + h) - g(0.7 - h)) / (2.0 * h);
        assert!((y.d - fd).abs() < 1e-8);
    }

    #[test]
    fn sech_does_not_overflow() {
        assert_eq!(sech(1000.0), 0.0);
        assert!((sech(1.0) - 1.0 / 1f64.cosh()).abs() < 1e-15);
    }

    #[test]
    fn newton_bracket_finds_sqrt2() {
        let r = bracketed_newton(|x| Dual::var(x).powi(2) - Dual::cst(2.0), 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn newton_bracket_rejects_non_bracket() {
        assert!(bracketed_newton(|x| Dual::var(x).powi(2) + Dual::cst(1.0), -1.0, 1.0, 1e-15).is_none());
    }

    #[test]
    fn cubic_three_roots() {
        // (x-1)(x-2)(x-3)
        let r = real_cubic_roots(1.0, -6.0, 11.0, -6.0);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn cubic_one_root() {
        // x^3 + x - 2 = (x-1)(x^2+x+2)
        let r = real_cubic_roots(1.0, 0.0, 1.0, -2.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn polynomial_roots_from_companion() {
        // (x-1)(x+2)(x-3)(x^2+1) = x^5 - 2x^4 - 4x^3 + 4x^2 - 5x + 6
        let r = polynomial_real_roots(&[6.0, -5.0, 4.0, -4.0, -2.0, 1.0]);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-2.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_degenerates_to_quadratic() {
        let r = real_cubic_roots(0.0, 1.0, -3.0, 2.0);
        assert_eq!(r.len(), 2);
        assert!((r[0] - 1.0).abs() < 1e-14 && (r[1] - 2.0).abs() < 1e-14);
    }
}
