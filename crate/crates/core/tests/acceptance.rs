//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::time::{Duration, Instant};

use antenna_core::beam::{beam_root, BeamMode};
use antenna_core::config::jap1_calibrated;
use antenna_core::galerkin::{GalerkinOptions, GalerkinSystem};
use antenna_core::kernel::band_edge;
use antenna_core::model::{BoundaryCondition, CantileverProfile, DeviceGeometry, DimensionlessParams};
use antenna_core::nonlinear::*;
use antenna_core::spectrum::{
    delta_asymptotic, solve_uniform, solve_uniform_dimensionless, SecularProblem,
};
use antenna_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CC: BoundaryCondition = BoundaryCondition::ClampedClamped;
const CF: BoundaryCondition = BoundaryCondition::ClampedFree;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn device(n: u32, width_ratio: f64) -> DeviceGeometry {
    let wb = 4e-7;
    DeviceGeometry {
        beam_length: 10e-6,
        beam_width: wb,
        beam_rigidity: 1e-15,
        beam_linear_density: 1e-9,
        cantilever_width: wb * width_ratio,
        cantilever_rigidity: 1e-15 * width_ratio,
        cantilever_linear_density: 1e-9 * width_ratio,
        count_per_side: n,
        equal_thickness: true,
    }
}

fn bisection(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    assert!(fa * f(b) < 0.0, "oracle bracket [{a}, {b}] does not change sign");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if f(m) * fa > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn roots() -> Outcome {
    let cc = |b: f64| b.cos() * b.cosh() - 1.0;
    let cf = |b: f64| b.cos() * b.cosh() + 1.0;
    let cases = [
        ("beta1_cc", beam_root(CC, 1), bisection(cc, 4.0, 5.0), 4.7300407449),
        ("beta1_cf", beam_root(CF, 1), bisection(cf, 1.5, 2.2), 1.8751040687),
        ("gamma_inf1", band_edge(1), bisection(cf, 1.5, 2.2), 1.8751040687),
        ("gamma_inf2", band_edge(2), bisection(cf, 4.0, 5.0), 4.6940911330),
        ("gamma_inf3", band_edge(3), bisection(cf, 7.5, 8.2), 7.8547574382),
    ];
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for (_, got, oracle, printed) in cases {
        worst = worst.max((got - oracle).abs());
        pass &= (got - oracle).abs() < 1e-9 && (got - printed).abs() < 1e-10;
    }
    outcome(pass, format!("max |root - bisection oracle| = {worst:.1e}"))
}

fn beam_integrals() -> Outcome {
    let mode = BeamMode::of(CC, 1);
    let quad = BeamIntegrals::by_quadrature(&mode).unwrap();
    let closed = gamma_closed_form(mode.beta());
    let printed = [6.1513, 2846.4975, 1.8519, -0.8308];
    let q = [quad.gamma1, quad.gamma2, quad.gamma3, quad.gamma4];
    let c = [closed.gamma1, closed.gamma2, closed.gamma3, closed.gamma4];
    let four_figures = |v: f64, p: f64| rel(v, p) < 5e-4;
    let mut pass = true;
    let mut gap: f64 = 0.0;
    for i in 0..4 {
        pass &= four_figures(q[i], printed[i]) && four_figures(c[i], printed[i]);
        gap = gap.max(rel(q[i], c[i]));
    }
    pass &= gap < 1e-7;
    outcome(
        pass,
        format!(
            "Gamma = {:.4}, {:.4}, {:.4}, {:.4}; quadrature vs closed form {gap:.1e}",
            q[0], q[1], q[2], q[3]
        ),
    )
}

fn device_integrals() -> Outcome {
    let (g, p) = jap1_calibrated();
    let s = select_modes(&g, &p, CC).unwrap();
    let i = overlap_integrals(&s).unwrap();
    let k2222 = i.k_entry(2, 2, 2, 2);
    let mut k_max_is_2222 = true;
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    if (a, b, c, d) != (1, 1, 1, 1) {
                        k_max_is_2222 &= i.k[a][b][c][d].abs() < k2222;
                    }
                }
            }
        }
    }
    let within = |v: f64, p: f64| rel(v, p) < 0.15;
    let pass = (1.0..=1.0002).contains(&i.l[0][0])
        && i.lambda[0][0] < 1e-4
        && i.i[0][0] < 1e-12
        && i.i[0][0] < 1e-6 * i.i[0][1]
        && i.i[0][1] < 1e-6 * i.i[1][1]
        && k_max_is_2222
        && within(i.l[1][1], 3.89887)
        && within(i.lambda[1][1], 4.9687)
        && within(i.i[1][1], 232.49)
        && within(k2222, 1.07e3);
    outcome(
        pass,
        format!(
            "L11 = {:.6}, Lambda11 = {:.3e}, I11 = {:.3e}, L22 = {:.5}, Lambda22 = {:.4}, I22 = {:.2}, K2222 = {:.1}",
            i.l[0][0], i.lambda[0][0], i.i[0][0], i.l[1][1], i.lambda[1][1], i.i[1][1], k2222
        ),
    )
}

fn crossing() -> Outcome {
    let mut gammas = Vec::new();
    let mut worst_omega: f64 = 0.0;
    let beta1 = beam_root(CC, 1);
    for n in [5, 10, 20, 50, 100, 500] {
        let g = device(n, 0.5);
        let p = CantileverProfile::Uniform { length: 0.5 * g.beam_length };
        let s = solve_uniform(&g, &p, CC, 1, 2).unwrap();
        let lev = s.level(1, 2).unwrap();
        gammas.push(lev.gamma);
        let bare = g.beam_wave_speed() * (beta1 / g.beam_length).powi(2);
        worst_omega = worst_omega.max(rel(lev.omega, bare));
    }
    let spread = gammas.iter().cloned().fold(f64::MIN, f64::max) - gammas.iter().cloned().fold(f64::MAX, f64::min);
    let off = gammas.iter().map(|g| (g - 0.5 * beta1).abs()).fold(0.0, f64::max);
    outcome(
        spread < 1e-9 && off < 1e-9 && worst_omega < 1e-9,
        format!("gamma_1,2 spread {spread:.1e}, |gamma - lambda*beta1| {off:.1e}, omega vs bare beam {worst_omega:.1e}"),
    )
}

fn random_grid() -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    (0..500).map(|_| (rng.gen_range(0.01..=2.0), rng.gen_range(0.0..=1000.0))).collect()
}

fn interlacing(grid: &[(f64, f64)]) -> Outcome {
    let mut violations = 0;
    let mut checked = 0;
    for &(lambda, nu) in grid {
        let s = solve_uniform_dimensionless(DimensionlessParams::new(lambda, nu).unwrap(), CC, 8, 6).unwrap();
        for k in 2..=6 {
            for n in 1..=8 {
                checked += 1;
                match s.level(n, k) {
                    Some(l) if l.gamma > band_edge(k - 1) && l.gamma < band_edge(k) => {}
                    _ => violations += 1,
                }
            }
        }
    }
    outcome(violations == 0, format!("{checked} levels, {violations} violations"))
}

fn edge_offsets(grid: &[(f64, f64)]) -> Outcome {
    let mut compared = 0;
    let mut failed = 0;
    let mut worst: (f64, f64, f64, usize, usize) = (0.0, 0.0, 0.0, 0, 0);
    for &(lambda, nu) in grid {
        let params = DimensionlessParams::new(lambda, nu).unwrap();
        let s = solve_uniform_dimensionless(params, CC, 8, 6).unwrap();
        for k in 1..=6 {
            for n in 1..=8 {
                let pred = match delta_asymptotic(n, k, params, CC) {
                    Ok(d) => d,
                    Err(Error::BlowUp { .. }) => continue,
                    Err(e) => panic!("{e}"),
                };
                if !(2..=6).contains(&pred.k_tilde) {
                    continue;
                }
                let Some(level) = s.level(n, pred.k_tilde) else { continue };
                let exact = level.gamma - band_edge(k);
                if exact.abs() >= 0.05 {
                    continue;
                }
                compared += 1;
                let e = rel(pred.delta, exact);
                if e > 0.05 {
                    failed += 1;
                }
                if e > worst.0 {
                    worst = (e, lambda, nu, n, k);
                }
            }
        }
    }
    outcome(
        failed == 0,
        format!(
            "{compared} offsets below 0.05, {failed} beyond 5%; worst {:.1}% at lambda = {:.3}, nu = {:.1}, n = {}, k = {}",
            100.0 * worst.0, worst.1, worst.2, worst.3, worst.4
        ),
    )
}

fn alternating() -> Outcome {
    let geo = device(20, 1.0);
    let l1 = 0.05 * geo.beam_length;
    let alt = |eps: f64| CantileverProfile::Alternating {
        length_long: l1,
        length_short: eps * l1,
        width_long: geo.beam_width,
        width_short: geo.beam_width,
        count_long: 10,
        count_short: 10,
    };
    // equal lengths
    let a = antenna_core::spectrum::solve_alternating(&geo, &alt(1.0), CC, 6, 5).unwrap();
    let u = solve_uniform(&geo, &CantileverProfile::Uniform { length: l1 }, CC, 6, 5).unwrap();
    let mut worst: f64 = 0.0;
    let same_count = a.levels.len() == u.levels.len();
    for (x, y) in a.levels.iter().zip(&u.levels) {
        worst = worst.max((x.gamma - y.gamma).abs());
    }

    // ε = 0.8: locate the poles of F(γ) directly from sign changes where
    // |F| blows up
    let problem = SecularProblem::alternating(&geo, &alt(0.8)).unwrap();
    let beta = beam_root(CC, 1);
    let f = |g: f64| problem.eval(g, beta);
    let top = band_edge(3) / 0.8 + 0.2;
    let steps = 200_000;
    let mut detected = Vec::new();
    let mut prev = (1e-3, f(1e-3).unwrap());
    for i in 1..=steps {
        let g = 1e-3 + (top - 1e-3) * i as f64 / steps as f64;
        let Ok(v) = f(g) else {
            detected.push(g);
            continue;
        };
        if v * prev.1 < 0.0 {
            let (mut lo, mut hi) = (prev.0, g);
            let s_lo = prev.1.signum();
            let mut blew_up = false;
            for _ in 0..200 {
                let m = 0.5 * (lo + hi);
                if m == lo || m == hi {
                    break;
                }
                match f(m) {
                    Ok(fm) if fm.signum() == s_lo => lo = m,
                    Ok(_) => hi = m,
                    Err(_) => {
                        blew_up = true;
                        lo = m;
                        hi = m;
                        break;
                    }
                }
            }
            let mid = 0.5 * (lo + hi);
            let big = blew_up || f(mid).map(|v| v.abs() > 1e6).unwrap_or(true);
            if big {
                detected.push(mid);
            }
        }
        prev = (g, v);
    }
    let mut want: Vec<f64> = (1..=3).flat_map(|k| [band_edge(k), band_edge(k) / 0.8]).collect();
    want.sort_by(f64::total_cmp);
    want.retain(|&w| w < top);
    let poles_match = detected.len() == want.len()
        && detected.iter().zip(&want).all(|(d, w)| (d - w).abs() < 1e-10);
    let pole_err = detected.iter().zip(&want).map(|(d, w)| (d - w).abs()).fold(0.0, f64::max);
    outcome(
        same_count && worst < 1e-12 && poles_match,
        format!(
            "eps = 1 vs uniform {worst:.1e}; eps = 0.8 poles detected {} of {} expected, max offset {pole_err:.1e}",
            detected.len(),
            want.len()
        ),
    )
}

fn galerkin() -> Outcome {
    let geo = device(20, 1.0);
    let l = 0.05 * geo.beam_length;
    let profile = CantileverProfile::Uniform { length: l };
    let closed = solve_uniform(&geo, &profile, CC, 8, 4).unwrap();
    let sys = GalerkinSystem::new(&geo, &profile, CC, GalerkinOptions::default()).unwrap();
    let sol = sys.solve(0.0, band_edge(4) / l * (1.0 - 1e-9)).unwrap();
    let mut worst: f64 = 0.0;
    let mut weight: f64 = 1.0;
    let mut missing = 0;
    for c in closed.levels.iter().filter(|c| c.mode.n <= 4) {
        match sol
            .levels
            .iter()
            .filter(|lev| lev.dominant_n == c.mode.n)
            .min_by(|a, b| (a.alpha * l - c.gamma).abs().total_cmp(&(b.alpha * l - c.gamma).abs()))
        {
            Some(lev) => worst = worst.max(rel(lev.alpha * l, c.gamma)),
            None => missing += 1,
        }
    }
    for lev in &sol.levels {
        weight = weight.min(lev.dominant_weight());
    }

    // 200 cantilever pairs at equal spacing vs the smeared continuum
    let geo = device(200, 1.0);
    let big_l = geo.beam_length;
    let positions: Vec<f64> = (0..200).map(|j| big_l * (j as f64 + 0.5) / 200.0).collect();
    let comb = CantileverProfile::Discrete { lengths: vec![l; 200], positions };
    let smeared = solve_uniform(&geo, &CantileverProfile::Uniform { length: l }, CC, 4, 2).unwrap();
    let sys = GalerkinSystem::new(&geo, &comb, CC, GalerkinOptions::default()).unwrap();
    let sol = sys.solve(0.0, band_edge(2) / l * (1.0 - 1e-9)).unwrap();
    let mut comb_worst: f64 = 0.0;
    for c in &smeared.levels {
        let got = sol
            .levels
            .iter()
            .map(|lev| lev.alpha * l)
            .min_by(|a, b| (a - c.gamma).abs().total_cmp(&(b - c.gamma).abs()))
            .unwrap_or(f64::NAN);
        comb_worst = comb_worst.max(rel(got, c.gamma));
    }
    outcome(
        worst < 1e-6 && missing == 0 && weight >= 0.999 && comb_worst < 1e-3,
        format!("uniform max rel {worst:.1e}, min dominant weight {weight:.6}, comb vs continuum {comb_worst:.1e}"),
    )
}

fn nonlinear() -> Outcome {
    let (g, p) = jap1_calibrated();
    let s = select_modes(&g, &p, CC).unwrap();
    let ints = overlap_integrals(&s).unwrap();
    let base = effective_params(&s, &ints, &g, 0.0, 0.0, 0.0, 0.0).unwrap();
    let base = base.with_damping([0, 1].map(|j| base.mass[j] * base.omega[j] / 1000.0));
    let drive = |a1: f64, a2: f64| {
        let f = [a1, a2].iter().enumerate().map(|(j, a)| a * base.damping[j] * base.omega[j] / base.force_per_unit.abs()).collect::<Vec<_>>();
        base.with_forces(f[0], f[1])
    };

    // (a) peak amplitude
    let pa = drive(2e-7, 5e-9);
    let mut a_ok = true;
    for j in 1..=2 {
        let i = j - 1;
        let want = (pa.force[i] / (pa.damping[i] * pa.omega[i])).abs();
        a_ok &= rel(peak_amplitude(j, &pa).unwrap(), want) <= 1e-14;
    }

    // (b) unforced collective mode
    let pb = drive(5e-7, 0.0);
    let mut b_ok = true;
    let mut b_res: f64 = 0.0;
    for i in 0..200 {
        let s1 = -3e6 + 1.5e4 * i as f64;
        let sol = coupled_steady_state(s1, 0.0, &pb).unwrap();
        let single = single_mode_response(1, s1, 0.0, &pb).unwrap();
        b_ok &= sol.pairs.len() == single.len();
        for (pair, one) in sol.pairs.iter().zip(&single) {
            b_ok &= pair[1].amplitude == 0.0 && rel(pair[0].amplitude, one.amplitude) < 1e-12;
            b_res = b_res.max(pair[0].residual);
        }
    }
    b_ok &= b_res < 1e-10;

    // (c) peak shift against f2² over a decade
    let signs = base.self_cubic[0] < 0.0 && base.cross_cubic > 0.0;
    let pc = drive(2e-7, 2e-9);
    let f1 = pc.force[0] / pc.force_per_unit;
    let f2 = pc.force[1] / pc.force_per_unit;
    let mut prev = f64::NEG_INFINITY;
    let mut c_ok = signs;
    let mut shifts = Vec::new();
    for i in 0..=40 {
        let f2_sq = f2 * f2 * 10f64.powf(i as f64 / 40.0);
        let r = shift_of_fundamental(&pc.with_forces(f1, f2_sq.sqrt())).unwrap();
        c_ok &= r.len() == 1;
        let s1 = r.iter().map(|x| x.sigma1).fold(f64::NAN, f64::max);
        c_ok &= s1 > prev;
        prev = s1;
        shifts.push(s1);
    }

    // (d) coupled steady states
    let pd = drive(3e-7, 8e-9);
    let mut d_res: f64 = 0.0;
    let mut pairs = 0;
    let mut unconverged = 0;
    for i in 0..40 {
        for j in 0..10 {
            let s1 = -1.5e6 + 4e4 * i as f64;
            let s2 = -2e7 + 8e6 * j as f64;
            let sol = coupled_steady_state(s1, s2, &pd).unwrap();
            unconverged += sol.unconverged;
            for p in &sol.pairs {
                pairs += 1;
                let (a1, a2) = (p[0].amplitude, p[1].amplitude);
                d_res = d_res.max(residual(1, s1, a1, a2, &pd).unwrap());
                d_res = d_res.max(residual(2, s2, a2, a1, &pd).unwrap());
            }
        }
    }
    let d_ok = d_res < 1e-10 && pairs > 0 && unconverged == 0;
    outcome(
        a_ok && b_ok && c_ok && d_ok,
        format!(
            "(a) {} (b) {} max residual {b_res:.1e} (c) {} sigma1 {:.4e} -> {:.4e} rad/s (d) {} {pairs} pairs, max residual {d_res:.1e}",
            ok(a_ok), ok(b_ok), ok(c_ok), shifts[0], shifts[shifts.len() - 1], ok(d_ok)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn frequencies() -> Outcome {
    let (g, p) = jap1_calibrated();
    let s = select_modes(&g, &p, CC).unwrap();
    let [f1, f2] = s.frequency_hz();
    let pass = rel(f1, 24.7e6) < 0.02 && rel(f2, 2.94e9) < 0.02;
    outcome(pass, format!("fundamental {:.3} MHz, collective {:.4} GHz", f1 / 1e6, f2 / 1e9))
}

fn main() {
    let grid = random_grid();
    let criteria: Vec<(usize, &str, Duration, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "beam and band-edge roots", Duration::from_secs(1), Box::new(roots)),
        (2, "closed-form and quadrature Gamma", Duration::from_secs(5), Box::new(beam_integrals)),
        (3, "reconstructed-device overlap integrals", Duration::from_secs(10), Box::new(device_integrals)),
        (4, "count-independent crossing", Duration::from_secs(2), Box::new(crossing)),
        (5, "interlacing on 500 random arrays", Duration::from_secs(60), Box::new(|| interlacing(&grid))),
        (6, "asymptotic band-edge offsets", Duration::from_secs(60), Box::new(|| edge_offsets(&grid))),
        (7, "alternating-array reductions", Duration::from_secs(60), Box::new(alternating)),
        (8, "Galerkin oracle equivalence", Duration::from_secs(120), Box::new(galerkin)),
        (9, "nonlinear response", Duration::from_secs(30), Box::new(nonlinear)),
        (10, "frequency scale", Duration::from_secs(10), Box::new(frequencies)),
    ];
    let mut failures = 0;
    for (id, name, budget, run) in criteria {
        let t = Instant::now();
        let out = run();
        let took = t.elapsed();
        let in_time = took <= budget;
        let pass = out.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.2} s of {} s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
