use std::f64::consts::PI;

use proptest::prelude::*;

use singheat::constants::{compute_a_bounds, compute_nu_plus, homogeneous_bounds};
use singheat::decay::fit_rate;
use singheat::grid::{h1_norm, l2_norm, trapezoid_integral};
use singheat::lagrangian::initial_map;
use singheat::solver::{simulate, SimulationConfig};
use singheat::source::{project_mean_zero, AnalyticFamily, SourceTerm};
use singheat::steady::steady_from_forcing;
use singheat::Grid;

fn config(n: usize, nu: f64, eps: f64, amplitude: f64, t_end: f64, dt: f64) -> SimulationConfig {
    let grid = Grid::new(n).unwrap();
    let u0 = grid.sample(|x| 1.0 + eps * (PI * x).cos());
    let src = if amplitude == 0.0 {
        SourceTerm::zero()
    } else {
        SourceTerm::Analytic(AnalyticFamily::CosineStatic { amplitude })
    };
    let mut cfg = SimulationConfig::new(nu, u0, src, t_end);
    cfg.dt = dt;
    cfg.snapshot_stride = 10;
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trapezoid_exact_on_affine(a in -5.0..5.0f64, b in -5.0..5.0f64, n in 2usize..200) {
        let g = Grid::new(n).unwrap().sample(|x| a + b * x);
        prop_assert!((trapezoid_integral(&g) - (a + 0.5 * b)).abs() < 1e-12);
    }

    #[test]
    fn h1_dominates_l2(c in prop::collection::vec(-2.0..2.0f64, 3..6), n in 5usize..120) {
        let g = Grid::new(n).unwrap().sample(|x| {
            c.iter().enumerate().map(|(k, ck)| ck * (k as f64 * PI * x).cos()).sum()
        });
        prop_assert!(h1_norm(&g) >= l2_norm(&g));
    }

    #[test]
    fn projection_has_zero_mean(shift in -3.0..3.0f64, amp in -3.0..3.0f64, n in 3usize..150) {
        let g = Grid::new(n).unwrap().sample(|x| shift + amp * (7.0 * x).sin());
        let p = project_mean_zero(&g);
        prop_assert!(trapezoid_integral(&p).abs() < 1e-12);
    }

    #[test]
    fn inhomogeneous_bounds_reduce_without_tail(r0 in 0.0..0.9f64, p0 in 0.0..2.0f64, extra in 0.1..5.0f64) {
        let nu_plus = compute_nu_plus(r0, p0, 0.0).unwrap();
        prop_assert!((nu_plus - 2.0 * p0 / (1.0 - r0)).abs() <= 1e-12 * (1.0 + nu_plus));
        let nu = nu_plus + extra;
        let (am, ap) = compute_a_bounds(r0, p0, 0.0, nu).unwrap();
        let (lo, hi) = homogeneous_bounds(r0, p0, nu).unwrap();
        prop_assert!((am - lo).abs() < 1e-10 * lo);
        prop_assert!((ap - hi).abs() < 1e-10 * hi);
    }

    #[test]
    fn exponential_fit_is_exact(rate in 0.2..20.0f64, pre in 1e-3..1e3f64) {
        let times: Vec<f64> = (0..400).map(|k| k as f64 * 0.01).collect();
        let errors: Vec<f64> = times.iter().map(|t| pre * (-rate * t).exp()).collect();
        let fit = fit_rate(&times, &errors, 1e-300).unwrap();
        prop_assert!((fit.rate - rate).abs() < 1e-6 * rate);
        prop_assert!((fit.prefactor - pre).abs() < 1e-6 * pre);
    }

    #[test]
    fn steady_state_has_unit_mass(amp in -3.0..3.0f64, nu in 0.2..20.0f64, n in 21usize..400) {
        let grid = Grid::new(n).unwrap();
        let f = grid.sample(|x| amp * (PI * x).cos());
        let s = steady_from_forcing(&f, nu).unwrap();
        prop_assert!(s.mass_defect.abs() < 1e-10);
        prop_assert!(s.u_infinity.min() > 0.0);
    }

    #[test]
    fn initial_map_is_monotone(mean in 0.5..3.0f64, amp_frac in -0.6..0.6f64, n in 101usize..400) {
        let grid = Grid::new(n).unwrap();
        let h0 = grid.sample(|y| mean + amp_frac * mean * (PI * y).cos());
        let map = initial_map(&h0, mean).unwrap();
        let y = map.y_of_x.values();
        prop_assert!(y.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(y[0] == 0.0 && y[y.len() - 1] == 1.0);
        prop_assert!(map.u.min() > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn runs_conserve_mass(nu in 0.3..5.0f64, eps in -0.4..0.4f64, amp in -2.0..2.0f64) {
        let rec = simulate(&config(41, nu, eps, amp, 0.3, 1e-2)).unwrap();
        prop_assert!(rec.max_mass_defect() < 1e-12, "{}", rec.max_mass_defect());
    }

    #[test]
    fn unforced_energy_never_increases(nu in 0.3..5.0f64, eps in -0.5..0.5f64) {
        let rec = simulate(&config(41, nu, eps, 0.0, 0.5, 1e-2)).unwrap();
        for w in rec.diagnostics.windows(2) {
            prop_assert!(w[1].energy <= w[0].energy + 1e-13);
        }
    }

    #[test]
    fn reflection_commutes_with_evolution(nu in 0.3..5.0f64, eps in -0.4..0.4f64, amp in -2.0..2.0f64) {
        // x -> 1 - x sends cos(pi x) to -cos(pi x)
        let a = simulate(&config(41, nu, eps, amp, 0.2, 1e-2)).unwrap();
        let mut cfg = config(41, nu, eps, -amp, 0.2, 1e-2);
        cfg.u0 = cfg.u0.reflect();
        let b = simulate(&cfg).unwrap();
        let ua = &a.final_state().unwrap().u;
        let ub = &b.final_state().unwrap().u;
        prop_assert!(ua.max_abs_diff(&ub.reflect()).unwrap() < 1e-10);
    }
}
