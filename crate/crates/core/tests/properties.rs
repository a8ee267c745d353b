mod common;

use fiberlay::io::{read_fiber_path, write_fiber_path};
use fiberlay::{
    estimate_params, expected_occupation, grid_occupation, nelder_mead, occupancy_integrand,
    occupation_time_polyline, occupation_time_sampled, ou_mean_sd, simulate_path, BeltConfig,
    FiberPath, ModelParams, NelderMeadOptions, ObservationSet, OptimizerConfig, QuadratureConfig,
    Rect, TimeGrid,
};
use proptest::prelude::*;

fn quad() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn arb_params() -> impl Strategy<Value = ModelParams> {
    (0.2..3.0f64, 0.05..2.5f64, 0.05..2.5f64)
        .prop_map(|(l, s1, s2)| ModelParams::new(l, s1, s2).unwrap())
}

fn arb_belt() -> impl Strategy<Value = BeltConfig> {
    (0.0..2.5f64).prop_map(|k| BeltConfig::new(k).unwrap())
}

fn arb_rect() -> impl Strategy<Value = Rect> {
    (-3.0..10.0f64, 0.0..8.0f64, -3.0..2.0f64, 0.0..4.0f64)
        .prop_map(|(a1, w, a2, h)| Rect::new(a1, a1 + w, a2, a2 + h).unwrap())
}

/// A simulated path with a modest number of steps.
fn arb_path() -> impl Strategy<Value = FiberPath> {
    (arb_params(), arb_belt(), 1.0..12.0f64, any::<u64>()).prop_map(|(p, b, t, seed)| {
        simulate_path(&p, &b, &TimeGrid::with_rate(t, 100.0).unwrap(), seed).unwrap()
    })
}

/// Grows `r` by non-negative margins.
fn enlarge(r: &Rect, m: [f64; 4]) -> Rect {
    Rect::new(r.a1 - m[0], r.b1 + m[1], r.a2 - m[2], r.b2 + m[3]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn occupation_is_bounded_by_duration(path in arb_path(), r in arb_rect()) {
        let t = path.duration();
        for m in [occupation_time_sampled(&path, &r), occupation_time_polyline(&path, &r)] {
            prop_assert!((0.0..=t).contains(&m));
        }
    }

    #[test]
    fn occupation_grows_with_region(
        path in arb_path(),
        r in arb_rect(),
        m in prop::array::uniform4(0.0..2.0f64),
    ) {
        let big = enlarge(&r, m);
        prop_assert!(occupation_time_sampled(&path, &r) <= occupation_time_sampled(&path, &big));
        prop_assert!(
            occupation_time_polyline(&path, &r) <= occupation_time_polyline(&path, &big) + 1e-12
        );
    }

    #[test]
    fn grid_cells_partition_the_region(
        path in arb_path(),
        r in arb_rect(),
        nx in 1usize..25,
        ny in 1usize..25,
    ) {
        let g = grid_occupation(&path, &r, nx, ny).unwrap();
        let whole = occupation_time_polyline(&path, &r);
        prop_assert!((g.total() - whole).abs() <= 1e-10 * path.duration().max(1.0));
    }

    #[test]
    fn polyline_occupation_is_translation_invariant(
        path in arb_path(),
        r in arb_rect(),
        dx in -5.0..5.0f64,
        dy in -5.0..5.0f64,
    ) {
        let a = occupation_time_polyline(&path, &r);
        let b = occupation_time_polyline(&path.translated(dx, dy), &r.translated(dx, dy));
        prop_assert!((a - b).abs() <= 1e-9 * path.duration());
    }

    #[test]
    fn integrand_matches_reference_cdf(
        p in arb_params(),
        b in arb_belt(),
        r in arb_rect(),
        t in 1e-3..40.0f64,
    ) {
        let m = ou_mean_sd(&p, &b, t);
        let want = common::interval_prob(r.a1, r.b1, m.mean1, m.sd1)
            * common::interval_prob(r.a2, r.b2, m.mean2, m.sd2);
        prop_assert!((occupancy_integrand(&p, &b, &r, t) - want).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn expected_occupation_is_bounded_and_symmetric(
        p in arb_params(),
        b in arb_belt(),
        r in arb_rect(),
        t in 0.1..30.0f64,
    ) {
        let e = expected_occupation(&p, &b, &r, t, &quad()).unwrap();
        prop_assert!((0.0..=t).contains(&e));
        let m = expected_occupation(&p, &b, &r.mirrored(), t, &quad()).unwrap();
        prop_assert!((e - m).abs() <= 2e-8);
    }

    #[test]
    fn expected_occupation_is_additive_and_monotone(
        p in arb_params(),
        b in arb_belt(),
        r in arb_rect(),
        split in 0.0..1.0f64,
        m in prop::array::uniform4(0.0..2.0f64),
        t in 0.1..30.0f64,
    ) {
        let cut = r.a1 + split * (r.b1 - r.a1);
        let left = Rect::new(r.a1, cut, r.a2, r.b2).unwrap();
        let right = Rect::new(cut, r.b1, r.a2, r.b2).unwrap();
        let e = |reg: &Rect| expected_occupation(&p, &b, reg, t, &quad()).unwrap();
        let whole = e(&r);
        prop_assert!((e(&left) + e(&right) - whole).abs() <= 5e-8);
        prop_assert!(whole <= e(&enlarge(&r, m)) + 2e-8);
    }

    #[test]
    fn nelder_mead_finds_convex_quadratic_minimum(
        centre in prop::array::uniform3(-3.0..3.0f64),
        diag in prop::array::uniform3(0.5..5.0f64),
        off in -0.4..0.4f64,
    ) {
        // positive definite: diagonally dominant symmetric matrix
        let a = [
            [diag[0], off, 0.0],
            [off, diag[1], off],
            [0.0, off, diag[2]],
        ];
        let f = |x: &[f64]| {
            let d = [x[0] - centre[0], x[1] - centre[1], x[2] - centre[2]];
            (0..3).map(|i| (0..3).map(|j| d[i] * a[i][j] * d[j]).sum::<f64>()).sum::<f64>()
        };
        let res = nelder_mead(f, &[0.0, 0.0, 0.0], &NelderMeadOptions::default()).unwrap();
        prop_assert!(res.converged);
        for k in 0..3 {
            prop_assert!((res.x[k] - centre[k]).abs() < 1e-4, "{:?} vs {:?}", res.x, centre);
        }
    }
}

fn synthetic_observations(truth: &ModelParams, regions: Vec<Rect>) -> ObservationSet {
    let speeds = vec![1.0, 2.0];
    let horizon = 10.0;
    let values = regions
        .iter()
        .map(|r| {
            speeds
                .iter()
                .map(|k| {
                    expected_occupation(truth, &BeltConfig::new(*k).unwrap(), r, horizon, &quad())
                        .unwrap()
                })
                .collect()
        })
        .collect();
    ObservationSet::new(regions, speeds, horizon, values).unwrap()
}

fn regions() -> Vec<Rect> {
    vec![
        Rect::new(0.5, 1.5, 0.0, 1.0).unwrap(),
        Rect::new(1.0, 3.0, 0.0, 0.5).unwrap(),
        Rect::new(2.0, 5.0, -0.5, 0.5).unwrap(),
        Rect::new(4.0, 8.0, -1.0, 1.0).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn estimate_is_positive_and_order_independent(
        truth in (0.5..2.0f64, 0.5..1.5f64, 0.5..1.5f64)
            .prop_map(|(l, s1, s2)| ModelParams::new(l, s1, s2).unwrap()),
        perm in Just(regions()).prop_shuffle(),
    ) {
        let cfg = OptimizerConfig::default();
        let a = estimate_params(&synthetic_observations(&truth, regions()), &cfg, &quad()).unwrap();
        let b = estimate_params(&synthetic_observations(&truth, perm), &cfg, &quad()).unwrap();
        let (xa, xb) = (a.params.to_array(), b.params.to_array());
        for k in 0..3 {
            prop_assert!(xa[k] > 0.0);
            prop_assert!((xa[k] - xb[k]).abs() <= 1e-4 * xa[k], "{xa:?} vs {xb:?}");
        }
    }
}

#[test]
fn zero_noise_error_is_first_order_in_the_step() {
    let p = ModelParams::new(1.0, 0.0, 0.0).unwrap();
    let belt = BeltConfig::new(1.0).unwrap();
    let exact = 9.0 + (-10.0_f64).exp();
    let err = |k: usize| {
        let path = simulate_path(&p, &belt, &TimeGrid::new(10.0, k).unwrap(), 0).unwrap();
        (path.points()[k][0] - exact).abs()
    };
    for k in [1_000, 2_000, 4_000] {
        let order = (err(k) / err(2 * k)).log2();
        assert!((order - 1.0).abs() < 0.1, "k = {k}: order {order}");
    }
}

#[test]
fn cross_belt_variance_matches_stationary_value() {
    // kappa = 0, lambda = sigma = 1: Var Y2(T) = (1 - e^{-2T}) / 2
    let p = ModelParams::new(1.0, 1.0, 1.0).unwrap();
    let belt = BeltConfig::new(0.0).unwrap();
    let grid = TimeGrid::new(30.0, 6_000).unwrap();
    let n = 20_000;
    let finals: Vec<f64> = (0..n)
        .map(|s| simulate_path(&p, &belt, &grid, s).unwrap().points()[6_000][1])
        .collect();
    let mean = finals.iter().sum::<f64>() / n as f64;
    let var = finals.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let want = 0.5 * (1.0 - (-60.0_f64).exp());
    assert!((var - want).abs() <= 0.02 * want, "variance {var}");
    assert!(mean.abs() <= 4.0 * (want / n as f64).sqrt(), "mean {mean}");
}

#[test]
fn simulated_path_survives_csv_round_trip() {
    let p = ModelParams::new(1.3, 0.7, 0.4).unwrap();
    let belt = BeltConfig::new(0.8).unwrap();
    let path = simulate_path(&p, &belt, &TimeGrid::with_rate(5.0, 200.0).unwrap(), 7).unwrap();
    let mut buf = Vec::new();
    write_fiber_path(&mut buf, &path).unwrap();
    let back = read_fiber_path(buf.as_slice()).unwrap();
    assert_eq!(back, path);
    let r = Rect::new(0.0, 3.0, -0.5, 0.5).unwrap();
    assert_eq!(
        occupation_time_polyline(&back, &r),
        occupation_time_polyline(&path, &r)
    );
    assert_eq!(
        occupation_time_sampled(&back, &r),
        occupation_time_sampled(&path, &r)
    );
}
