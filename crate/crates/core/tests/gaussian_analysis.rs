use foult::fbm::{FbmMethod, HurstParam, TimeGrid};
use foult::fou::{ou_cov_classical, FouGenerator, FouParams, Generator};
use foult::gaussian_analysis::{
    build_q, det_bound_ratio, eigen_bound_ratio, fou_cov, lnd_ratio, min_eigenvalue, probe_bounds,
    probe_grids, PROBE_GRID_COUNT, PROBE_SEED,
};
use foult::linalg::{symmetric_eigenvalues, Matrix};
use foult::rng::{substream, Domain};
use foult::stats::MCEstimate;
use proptest::prelude::*;
use rand::Rng;

fn hurst(h: f64) -> HurstParam {
    HurstParam::new(h).unwrap()
}

/// Leibniz expansion of `det(A − λI)`.
fn char_poly(a: &[Vec<f64>], lambda: f64) -> f64 {
    fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
        if n == 1 {
            return vec![(vec![0], 1.0)];
        }
        let mut out = Vec::new();
        for (p, sign) in permutations(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                // inserting at `pos` adds n−1−pos inversions
                let s = if (n - 1 - pos).is_multiple_of(2) {
                    sign
                } else {
                    -sign
                };
                out.push((q, s));
            }
        }
        out
    }
    let n = a.len();
    permutations(n)
        .iter()
        .map(|(p, sign)| {
            sign * (0..n)
                .map(|i| a[i][p[i]] - if i == p[i] { lambda } else { 0.0 })
                .product::<f64>()
        })
        .sum()
}

/// Roots of the characteristic polynomial by sign-change scan and bisection.
fn brute_force_eigenvalues(a: &[Vec<f64>], lo: f64, hi: f64) -> Vec<f64> {
    let steps = 20_000;
    let mut roots = Vec::new();
    let mut prev = (lo, char_poly(a, lo));
    for i in 1..=steps {
        let x = lo + (hi - lo) * i as f64 / steps as f64;
        let fx = char_poly(a, x);
        if prev.1 == 0.0 {
            roots.push(prev.0);
        } else if prev.1 * fx < 0.0 {
            let (mut l, mut r, fl) = (prev.0, x, prev.1);
            for _ in 0..200 {
                let m = 0.5 * (l + r);
                if char_poly(a, m) * fl > 0.0 {
                    l = m;
                } else {
                    r = m;
                }
            }
            roots.push(0.5 * (l + r));
        }
        prev = (x, fx);
    }
    roots
}

#[test]
fn jacobi_matches_characteristic_polynomial_roots() {
    let mut rng = substream(404, Domain::Probe, 1, 0);
    for _ in 0..5 {
        let b: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..5).map(|_| rng.random::<f64>() - 0.5).collect())
            .collect();
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|i| {
                (0..5)
                    .map(|j| {
                        (0..5).map(|k| b[i][k] * b[j][k]).sum::<f64>()
                            + if i == j { 0.05 } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        let m = Matrix::from_rows(&rows).unwrap();
        let jacobi = symmetric_eigenvalues(&m).unwrap();
        let brute = brute_force_eigenvalues(&rows, -0.1, m.trace() + 0.1);
        assert_eq!(brute.len(), 5, "{brute:?}");
        for (x, y) in jacobi.iter().zip(&brute) {
            assert!((x - y).abs() < 1e-8, "{jacobi:?} vs {brute:?}");
        }
    }
}

#[test]
fn min_eigenvalue_small_q_matches_brute_force() {
    for h in [0.3, 0.7] {
        for times in [vec![0.4, 1.1], vec![0.2, 0.9, 1.7]] {
            let q = build_q(&times, hurst(h), 1.0).unwrap();
            let rows = q.entries().to_rows();
            let brute = brute_force_eigenvalues(&rows, -1e-3, q.entries().trace() + 0.1);
            let lam = min_eigenvalue(&q).unwrap();
            assert!(
                (lam - brute[0]).abs() < 1e-8,
                "H={h} {times:?}: {lam} vs {brute:?}"
            );
        }
    }
}

#[test]
fn covariance_matches_monte_carlo() {
    let paths = 100_000;
    let grid = TimeGrid::new(2.0, 64).unwrap();
    let pairs = [(16usize, 32usize), (32, 64), (64, 64)];
    for h in [0.3, 0.7] {
        let params = FouParams::centered(hurst(h), 1.0, 1).unwrap();
        let gen =
            FouGenerator::new(grid, params, Generator::FromFbm(FbmMethod::Circulant)).unwrap();
        let xs: Vec<Vec<f64>> = (0..paths as u64)
            .map(|i| {
                gen.path(31, Domain::ProcessA, i)
                    .unwrap()
                    .component(0)
                    .to_vec()
            })
            .collect();
        for (i, j) in pairs {
            let prods: Vec<f64> = xs.iter().map(|x| x[i] * x[j]).collect();
            let est = MCEstimate::from_samples(&prods, 31).unwrap();
            let exact = fou_cov(grid.time(i), grid.time(j), hurst(h), 1.0).unwrap();
            assert!(
                est.within(exact, 3.0),
                "H={h} ({i},{j}): {est:?} vs {exact}"
            );
        }
    }
}

#[test]
fn brownian_lattice_matches_classical() {
    let lattice = [0.2, 0.65, 1.1, 1.55, 2.0];
    for t in lattice {
        for s in lattice {
            let a = fou_cov(t, s, hurst(0.5), 1.0).unwrap();
            let b = ou_cov_classical(t, s, 1.0).unwrap();
            assert!((a - b).abs() < 1e-6);
        }
    }
}

#[test]
fn probe_ratios_have_positive_floor() {
    let grids = probe_grids(PROBE_SEED, PROBE_GRID_COUNT);
    for h in [0.3, 0.5, 0.7] {
        let probes = probe_bounds(&grids, hurst(h), 1.0).unwrap();
        let floor = probes
            .iter()
            .map(|p| p.min_ratio())
            .fold(f64::INFINITY, f64::min);
        assert!(floor >= 1e-6, "H={h}: floor {floor}");
    }
}

#[test]
fn single_time_ratios_are_variance_over_power() {
    for h in [0.3, 0.7] {
        let var = fou_cov(0.8, 0.8, hurst(h), 1.0).unwrap();
        let expected = var / 0.8f64.powf(2.0 * h);
        assert!((eigen_bound_ratio(&[0.8], hurst(h), 1.0).unwrap() - expected).abs() < 1e-12);
        assert!((det_bound_ratio(&[0.8], hurst(h), 1.0).unwrap() - expected).abs() < 1e-12);
    }
    assert!(eigen_bound_ratio(&[0.5, 1.0, 1.5], hurst(0.5), 1.0).unwrap() > 0.0);
}

#[test]
fn lnd_ratio_settles_for_small_increments() {
    for h in [0.3, 0.5, 0.7] {
        let r: Vec<f64> = [0.1, 0.01, 0.001]
            .iter()
            .map(|d| lnd_ratio(hurst(h), 1.0, 1.0 + d, 1.0).unwrap())
            .collect();
        assert!(r.iter().all(|x| *x > 0.0), "H={h}: {r:?}");
        // the increments of X behave like v·fBm increments at small lags
        let dev: Vec<f64> = r.iter().map(|x| (x - 1.0).abs()).collect();
        assert!(dev[2] < dev[1] && dev[1] < dev[0], "H={h}: {r:?}");
        assert!(dev[2] < 0.05, "H={h}: {r:?}");
    }
}

#[test]
fn lnd_ratio_degenerate_without_noise() {
    assert_eq!(lnd_ratio(hurst(0.4), 0.0, 1.0, 0.5).unwrap(), 0.0);
    assert!(lnd_ratio(hurst(0.4), 1.0, 0.5, 0.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn covariance_symmetric(t in 0.01f64..2.0, s in 0.01f64..2.0, h in 0.05f64..0.95) {
        let a = fou_cov(t, s, hurst(h), 1.0).unwrap();
        let b = fou_cov(s, t, hurst(h), 1.0).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn q_is_symmetric_psd(
        raw in prop::collection::btree_set(1u32..200, 2..=5),
        h in 0.1f64..0.9,
    ) {
        let times: Vec<f64> = raw.iter().map(|k| *k as f64 / 100.0).collect();
        let q = build_q(&times, hurst(h), 1.0).unwrap();
        prop_assert!(q.entries().is_symmetric());
        let lam = min_eigenvalue(&q).unwrap();
        prop_assert!(lam > 0.0);
    }
}
