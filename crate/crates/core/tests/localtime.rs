use std::f64::consts::PI;

use foult::fbm::{sample_fbm, FbmMethod, HurstParam, TimeGrid};
use foult::fou::{fou_from_fbm, ou_cov_classical, FouParams};
use foult::localtime::{
    cauchy_gap, cauchy_gap_sweep, existence_condition, existence_value, holder_condition,
    intersection_local_time_reg, local_time_reg, mc_second_moment, LocalTimeQuery, McSetup,
    PairEnsemble,
};
use foult::mollifier::{mollifier_deriv, Bandwidth, MollifierKernel, MultiIndex};
use foult::stats::MCEstimate;
use proptest::prelude::*;

fn hurst(h: f64) -> HurstParam {
    HurstParam::new(h).unwrap()
}

fn eps(e: f64) -> Bandwidth {
    Bandwidth::new(e).unwrap()
}

fn k1(order: usize) -> MultiIndex {
    MultiIndex::new(vec![order]).unwrap()
}

fn fou_path(h: f64, steps: usize, seed: u64) -> foult::SamplePath {
    let grid = TimeGrid::new(1.0, steps).unwrap();
    let b = sample_fbm(grid, hurst(h), 1, seed, FbmMethod::Circulant).unwrap();
    fou_from_fbm(&b, &FouParams::centered(hurst(h), 1.0, 1).unwrap()).unwrap()
}

fn x_range(paths: &[&foult::SamplePath], pad: f64) -> (f64, f64) {
    let vals = paths.iter().flat_map(|p| p.component(0).iter().copied());
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
        (l.min(v), h.max(v))
    });
    (lo - pad, hi + pad)
}

fn trapezoid_over_x(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let dx = (hi - lo) / n as f64;
    (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * f(lo + i as f64 * dx)
        })
        .sum::<f64>()
        * dx
}

#[test]
fn occupation_mass_single_path() {
    let path = fou_path(0.4, 512, 51);
    let e = 0.05;
    for t in [0.5, 1.0] {
        let q = LocalTimeQuery::new(vec![0.0], t, eps(e), k1(0)).unwrap();
        // α̃(x) integrates f_ε(X_s + x) over x, so the lattice covers −X ± 8√ε
        let (lo, hi) = x_range(&[&path], 8.0 * e.sqrt());
        let mass = trapezoid_over_x(-hi, -lo, 2000, |x| {
            local_time_reg(&path, &q.with_x(vec![x])).unwrap()
        });
        assert!((mass - t).abs() < 0.01 * t, "t={t}: {mass}");
    }
}

#[test]
fn occupation_mass_intersection() {
    let a = fou_path(0.5, 256, 52);
    let b = fou_path(0.5, 256, 53);
    let e = 0.05;
    let q = LocalTimeQuery::new(vec![0.0], 1.0, eps(e), k1(0)).unwrap();
    let (alo, ahi) = x_range(&[&a], 0.0);
    let (blo, bhi) = x_range(&[&b], 0.0);
    // X_u − X̃_s + x ranges over x + [alo − bhi, ahi − blo]
    let pad = 8.0 * e.sqrt();
    let (lo, hi) = (blo - ahi - pad, bhi - alo + pad);
    let mass = trapezoid_over_x(lo, hi, 800, |x| {
        intersection_local_time_reg(&a, &b, &q.with_x(vec![x])).unwrap()
    });
    assert!((mass - 1.0).abs() < 0.01, "{mass}");
}

#[test]
fn translation_covariance() {
    let path = fou_path(0.3, 256, 54);
    let c = 0.37;
    let shifted = path.shifted(&[c]).unwrap();
    for order in 0..=3 {
        let q = LocalTimeQuery::new(vec![0.1], 0.8, eps(0.02), k1(order)).unwrap();
        let a = local_time_reg(&path, &q).unwrap();
        let b = local_time_reg(&shifted, &q.with_x(vec![0.1 - c])).unwrap();
        assert!(
            (a - b).abs() <= 1e-12 * a.abs().max(1.0),
            "k={order}: {a} vs {b}"
        );
    }
}

#[test]
fn additive_over_grid_aligned_splits() {
    let path = fou_path(0.4, 200, 55);
    let grid = *path.grid();
    let (e, k) = (eps(0.03), k1(1));
    let q1 = LocalTimeQuery::new(vec![0.05], grid.time(80), e, k.clone()).unwrap();
    let q2 = LocalTimeQuery {
        t: grid.time(200),
        ..q1.clone()
    };
    let xs = path.component(0);
    let dt = grid.step();
    let tail: f64 = (80..=200)
        .map(|j| {
            let w = if j == 80 || j == 200 { 0.5 } else { 1.0 };
            w * mollifier_deriv(&[xs[j] + 0.05], e, &k).unwrap()
        })
        .sum::<f64>()
        * dt;
    let whole = local_time_reg(&path, &q2).unwrap();
    let parts = local_time_reg(&path, &q1).unwrap() + tail;
    assert!(
        (whole - parts).abs() <= 1e-12 * whole.abs().max(1.0),
        "{whole} vs {parts}"
    );
}

#[test]
fn spatial_derivative_raises_order() {
    let path = fou_path(0.4, 256, 56);
    let h = 1e-4;
    for order in 0..=2 {
        let q = LocalTimeQuery::new(vec![0.05], 1.0, eps(0.05), k1(order)).unwrap();
        let up = local_time_reg(&path, &q.with_x(vec![0.05 + h])).unwrap();
        let down = local_time_reg(&path, &q.with_x(vec![0.05 - h])).unwrap();
        let fd = (up - down) / (2.0 * h);
        let next = local_time_reg(
            &path,
            &LocalTimeQuery {
                k: k1(order + 1),
                ..q
            },
        )
        .unwrap();
        assert!(
            ((fd - next) / next).abs() < 1e-3,
            "k={order}: {fd} vs {next}"
        );
    }
}

#[test]
fn zero_path_values() {
    let grid = TimeGrid::new(2.0, 40).unwrap();
    let zero =
        foult::SamplePath::new(grid, vec![vec![0.0; 41]; 2], foult::ProcessLabel::Fbm).unwrap();
    let e = 0.3;
    let q = LocalTimeQuery::at_origin(2, 2.0, eps(e)).unwrap();
    let peak = 1.0 / (2.0 * PI * e);
    assert!((local_time_reg(&zero, &q).unwrap() - 2.0 * peak).abs() < 1e-12);
    assert!((intersection_local_time_reg(&zero, &zero, &q).unwrap() - 4.0 * peak).abs() < 1e-12);
}

/// Exact `E[α̂_a α̂_b]` for the trapezoid estimator with `H₁ = H₂ = ½`,
/// `x = 0`, `t = T`, `d = 1` and `k ∈ {0, 1}`: Gaussian integration of each
/// time quadruple with `M = Σ + diag(a, b)`.
fn exact_cross_moment(steps: usize, horizon: f64, a: f64, b: f64, order: usize) -> f64 {
    let dt = horizon / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|j| j as f64 * dt).collect();
    let w: Vec<f64> = (0..=steps)
        .map(|j| if j == 0 || j == steps { 0.5 * dt } else { dt })
        .collect();
    let n = steps + 1;
    let c: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| ou_cov_classical(times[i], times[j], 1.0).unwrap())
                .collect()
        })
        .collect();
    let mut total = 0.0;
    for u in 0..n {
        for s in 0..n {
            let v1 = c[u][u] + c[s][s] + a;
            let w1 = w[u] * w[s];
            let mut inner = 0.0;
            for u2 in 0..n {
                for s2 in 0..n {
                    let v2 = c[u2][u2] + c[s2][s2] + b;
                    let m12 = c[u][u2] + c[s][s2];
                    let det = v1 * v2 - m12 * m12;
                    let val = match order {
                        0 => 1.0 / (2.0 * PI * det.sqrt()),
                        _ => m12 / (2.0 * PI * det.powf(1.5)),
                    };
                    inner += w[u2] * w[s2] * val;
                }
            }
            total += w1 * inner;
        }
    }
    total
}

fn brownian_pair() -> (FouParams, FouParams) {
    let p = FouParams::centered(hurst(0.5), 1.0, 1).unwrap();
    (p.clone(), p)
}

#[test]
fn second_moment_matches_gaussian_oracle() {
    let (p1, p2) = brownian_pair();
    let grid = TimeGrid::new(1.0, 24).unwrap();
    for order in [0, 1] {
        let q = LocalTimeQuery::new(vec![0.0], 1.0, eps(0.1), k1(order)).unwrap();
        let est = mc_second_moment(&p1, &p2, &q, McSetup::new(grid, 4000, 61)).unwrap();
        let exact = exact_cross_moment(24, 1.0, 0.1, 0.1, order);
        assert!(est.within(exact, 3.0), "k={order}: {est:?} vs {exact}");
    }
}

#[test]
fn cauchy_gap_matches_gaussian_oracle() {
    let (p1, p2) = brownian_pair();
    let grid = TimeGrid::new(1.0, 24).unwrap();
    let (a, b) = (0.2, 0.1);
    let q = LocalTimeQuery::new(vec![0.0], 1.0, eps(a), k1(1)).unwrap();
    let est = cauchy_gap(&p1, &p2, &q, eps(b), McSetup::new(grid, 4000, 62)).unwrap();
    let exact = exact_cross_moment(24, 1.0, a, a, 1) - 2.0 * exact_cross_moment(24, 1.0, a, b, 1)
        + exact_cross_moment(24, 1.0, b, b, 1);
    assert!(est.within(exact, 3.0), "{est:?} vs {exact}");
}

#[test]
fn equal_bandwidths_give_zero_gap() {
    let (p1, p2) = brownian_pair();
    let q = LocalTimeQuery::new(vec![0.0], 1.0, eps(0.1), k1(1)).unwrap();
    let setup = McSetup::new(TimeGrid::new(1.0, 32).unwrap(), 10, 63);
    let gap = cauchy_gap(&p1, &p2, &q, eps(0.1), setup).unwrap();
    assert_eq!((gap.mean, gap.stderr), (0.0, 0.0));
}

#[test]
fn zero_order_mean_stabilizes_as_bandwidth_shrinks() {
    let (p1, p2) = brownian_pair();
    let setup = McSetup::new(TimeGrid::new(1.0, 128).unwrap(), 1000, 64);
    let bands = [0.1, 0.05, 0.025];
    let kernels: Vec<MollifierKernel> = bands
        .iter()
        .map(|&e| MollifierKernel::new(eps(e), k1(0)).unwrap())
        .collect();
    let rows = PairEnsemble::new(&p1, &p2, setup)
        .unwrap()
        .intersection_samples(&[0.0], 1.0, &kernels)
        .unwrap();
    let means: Vec<MCEstimate> = (0..bands.len())
        .map(|c| {
            MCEstimate::from_samples(&rows.iter().map(|r| r[c]).collect::<Vec<_>>(), 64).unwrap()
        })
        .collect();
    for w in means.windows(2) {
        let change = ((w[1].mean - w[0].mean) / w[0].mean).abs();
        assert!(change < 0.10, "{means:?}");
    }
    let second = mc_second_moment(
        &p1,
        &p2,
        &LocalTimeQuery::at_origin(1, 1.0, eps(0.05)).unwrap(),
        McSetup::new(TimeGrid::new(1.0, 64).unwrap(), 200, 65),
    )
    .unwrap();
    assert!(second.mean > 0.0);
}

#[test]
fn gap_sweep_shares_paths() {
    let (p1, p2) = brownian_pair();
    let q = LocalTimeQuery::new(vec![0.0], 1.0, eps(0.4), k1(1)).unwrap();
    let setup = McSetup::new(TimeGrid::new(1.0, 32).unwrap(), 50, 66);
    let sweep = cauchy_gap_sweep(
        &p1,
        &p2,
        &q,
        &[(eps(0.4), eps(0.2)), (eps(0.2), eps(0.1))],
        setup,
    )
    .unwrap();
    let single = cauchy_gap(&p1, &p2, &q.with_eps(eps(0.2)), eps(0.1), setup).unwrap();
    assert_eq!(sweep[1].estimate, single);
}

#[test]
fn moments_are_reproducible() {
    let (p1, p2) = brownian_pair();
    let q = LocalTimeQuery::at_origin(1, 1.0, eps(0.1)).unwrap();
    let setup = McSetup::new(TimeGrid::new(1.0, 32).unwrap(), 2, 67);
    assert_eq!(
        mc_second_moment(&p1, &p2, &q, setup).unwrap(),
        mc_second_moment(&p1, &p2, &q, setup).unwrap()
    );
}

#[test]
fn condition_arithmetic() {
    let one = MultiIndex::new(vec![1]).unwrap();
    assert!(existence_condition(hurst(0.5), hurst(0.5), &one, 1));
    assert!((existence_value(hurst(0.5), hurst(0.5), &one, 1) - 0.5).abs() < 1e-15);
    let k = MultiIndex::new(vec![1, 0]).unwrap();
    assert!(!existence_condition(hurst(0.75), hurst(0.75), &k, 2));
    assert!((existence_value(hurst(0.75), hurst(0.75), &k, 2) - 1.125).abs() < 1e-15);
    assert!(holder_condition(hurst(0.25), &k1(2), 1, None).unwrap());
    assert!(!holder_condition(hurst(0.4), &k1(2), 1, None).unwrap());
    assert!(holder_condition(hurst(0.2), &k1(0), 1, Some(&[0.5])).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn zero_order_local_times_nonnegative(
        seed in any::<u64>(),
        h in 0.1f64..0.9,
        x in -1.0f64..1.0,
        e in 0.001f64..1.0,
    ) {
        let a = fou_path(h, 64, seed);
        let b = fou_path(h, 64, seed.wrapping_add(1));
        let q = LocalTimeQuery::new(vec![x], 1.0, eps(e), k1(0)).unwrap();
        prop_assert!(local_time_reg(&a, &q).unwrap() >= 0.0);
        prop_assert!(intersection_local_time_reg(&a, &b, &q).unwrap() >= 0.0);
    }

    #[test]
    fn low_hurst_condition_always_holds_without_derivatives(a in 0.01f64..0.99, b in 0.01f64..0.99) {
        prop_assert!(existence_condition(hurst(a), hurst(b), &k1(0), 1));
    }
}
