use antenna_core::config::{jap1_calibrated, Config};
use antenna_core::kernel::{band_edge, coeffs, nearest_band_edge, shear_kernel, CantileverShape};
use antenna_core::model::{BoundaryCondition, DimensionlessParams};
use antenna_core::spectrum::solve_uniform_dimensionless;
use proptest::prelude::*;

const CC: BoundaryCondition = BoundaryCondition::ClampedClamped;

fn away_from_edges(g: f64) -> bool {
    (g - nearest_band_edge(g).1).abs() > 1e-6
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn root_coefficients_sum_to_one(g in 0.0f64..60.0) {
        prop_assume!(away_from_edges(g));
        let c = coeffs(g).unwrap();
        prop_assert!((c.a1_plus + c.a1_minus - 1.0).abs() < 1e-9 * c.a1_plus.abs().max(1.0));
        prop_assert_eq!(c.a2_plus, -c.a2_minus);
    }

    #[test]
    fn shape_is_clamped_at_the_root(g in 0.01f64..40.0) {
        prop_assume!(away_from_edges(g));
        let s = CantileverShape::new(g).unwrap();
        let scale = shear_kernel(g).unwrap().abs().max(1.0);
        prop_assert!(s.chi(0.0).abs() < 1e-12 * scale);
        prop_assert!(s.eval(0.0, 1).unwrap().abs() < 1e-12 * g * scale);
    }

    #[test]
    fn fundamental_drops_as_the_array_gets_heavier(lambda in 0.01f64..1.0, nu in 0.0f64..500.0, extra in 0.1f64..100.0) {
        let light = solve_uniform_dimensionless(DimensionlessParams::new(lambda, nu).unwrap(), CC, 1, 1).unwrap();
        let heavy = solve_uniform_dimensionless(DimensionlessParams::new(lambda, nu + extra).unwrap(), CC, 1, 1).unwrap();
        prop_assert!(heavy.levels[0].gamma < light.levels[0].gamma);
    }

    #[test]
    fn levels_interlace_with_band_edges(lambda in 0.01f64..2.0, nu in 0.0f64..1000.0) {
        let s = solve_uniform_dimensionless(DimensionlessParams::new(lambda, nu).unwrap(), CC, 4, 4).unwrap();
        for l in &s.levels {
            let k = l.mode.k;
            let lo = if k == 1 { 0.0 } else { band_edge(k - 1) };
            prop_assert!(l.gamma > lo && l.gamma < band_edge(k), "{:?} gamma {}", l.mode, l.gamma);
        }
    }

    #[test]
    fn config_round_trips(scale in 0.5f64..2.0, count in 0u32..500, ratio in 0.1f64..1.5) {
        let (mut g, p) = jap1_calibrated();
        g.beam_length *= scale;
        g.count_per_side = count;
        g.cantilever_width = g.beam_width * ratio;
        g.cantilever_rigidity = g.beam_rigidity * ratio;
        g.cantilever_linear_density = g.beam_linear_density * ratio;
        let mut c = Config::from_preset("jap1-calibrated").unwrap();
        c.geometry = g;
        c.profile = p;
        c.nonlinear.c_y = Some(scale * 1.234e-3);
        let back = Config::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(back, c);
    }
}
