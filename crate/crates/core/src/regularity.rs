//! Moment-scaling exponents of local-time increments in time and space,
//! and a pathwise Hölder-exponent regression.

use crate::error::{FoultError, Result};
use crate::fbm::SamplePath;
use crate::fou::{FouGenerator, FouParams};
use crate::localtime::{window_integral, LocalTimeQuery, McSetup};
use crate::mollifier::MollifierKernel;
use crate::rng::Domain;
use crate::stats::{fit_line, median, MCEstimate};

/// Points with `stderr / mean` above this are dropped from regressions.
pub const MAX_RELATIVE_ERROR: f64 = 0.5;

/// A log-log power-law fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub exponent_hat: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub theory_exponent: f64,
    /// `(scale, moment)` pairs used in the fit, scales decreasing.
    pub points: Vec<(f64, f64)>,
}

/// Least-squares slope of `log m` against `log h`. Requires three points
/// with positive scales and moments.
pub fn fit_power_law(points: &[(f64, f64)], theory_exponent: f64) -> Result<ScalingResult> {
    let mut points: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(h, m)| *h > 0.0 && *m > 0.0 && h.is_finite() && m.is_finite())
        .collect();
    if points.len() < 3 {
        return Err(FoultError::DegenerateRegression {
            surviving: points.len(),
        });
    }
    points.sort_by(|a, b| b.0.total_cmp(&a.0));
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    Ok(ScalingResult {
        exponent_hat: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        theory_exponent,
        points,
    })
}

/// `n − nHd − H|k|`.
pub fn moment_exponent(params: &FouParams, q: &LocalTimeQuery, n: u32) -> f64 {
    let (n, h) = (n as f64, params.hurst.value());
    n - n * h * params.dim() as f64 - h * q.k.total() as f64
}

struct Ensemble {
    generator: FouGenerator,
    setup: McSetup,
}

impl Ensemble {
    fn new(params: &FouParams, q: &LocalTimeQuery, setup: McSetup) -> Result<Self> {
        if setup.n_paths < 2 {
            return Err(FoultError::invalid("mc.paths", "need at least 2 paths"));
        }
        if params.dim() != q.dim() {
            return Err(FoultError::DimensionMismatch {
                expected: params.dim(),
                got: q.dim(),
            });
        }
        Ok(Ensemble {
            generator: FouGenerator::new(setup.grid, params.clone(), setup.generator)?,
            setup,
        })
    }

    fn path(&self, index: usize) -> Result<SamplePath> {
        self.generator
            .path(self.setup.seed, Domain::ProcessA, index as u64)
    }

    /// Per-path rows of `f(path)`, ordered by path index.
    fn rows<T: Send>(&self, f: impl Fn(&SamplePath) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
        crate::try_par_map(self.setup.n_paths, |i| f(&self.path(i)?))
    }

    fn summarize(&self, rows: &[Vec<f64>], col: usize) -> Result<MCEstimate> {
        let col: Vec<f64> = rows.iter().map(|r| r[col]).collect();
        MCEstimate::from_samples(&col, self.setup.seed)
    }
}

fn check_order(n: u32) -> Result<()> {
    if n == 0 {
        return Err(FoultError::invalid(
            "scaling.order",
            "moment order must be at least 1",
        ));
    }
    Ok(())
}

/// Grid index of `t` and step counts of each increment, checked against
/// the horizon.
fn increment_steps(setup: &McSetup, t: f64, hs: &[f64]) -> Result<(usize, Vec<usize>)> {
    let grid = setup.grid;
    let start = grid.snap(t)?;
    let steps = hs
        .iter()
        .map(|&h| {
            let m = grid.steps_in(h)?;
            if start + m > grid.steps() {
                return Err(FoultError::BeyondHorizon {
                    t: grid.time(start) + h,
                    horizon: grid.horizon(),
                });
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((start, steps))
}

/// `E|α̃_ε^{(k)}(x, t+h) − α̃_ε^{(k)}(x, t)|^n` for several `h` on one
/// common ensemble.
pub fn temporal_increment_moments(
    params: &FouParams,
    q: &LocalTimeQuery,
    n: u32,
    hs: &[f64],
    setup: McSetup,
) -> Result<Vec<MCEstimate>> {
    check_order(n)?;
    let ensemble = Ensemble::new(params, q, setup)?;
    let (start, steps) = increment_steps(&setup, q.t, hs)?;
    let kernel = q.kernel()?;
    let rows = ensemble.rows(|path| {
        Ok(steps
            .iter()
            .map(|&m| {
                window_integral(path, &q.x, &kernel, start, start + m)
                    .abs()
                    .powi(n as i32)
            })
            .collect::<Vec<f64>>())
    })?;
    (0..hs.len())
        .map(|c| ensemble.summarize(&rows, c))
        .collect()
}

pub fn temporal_increment_moment(
    params: &FouParams,
    q: &LocalTimeQuery,
    n: u32,
    h: f64,
    setup: McSetup,
) -> Result<MCEstimate> {
    Ok(temporal_increment_moments(params, q, n, &[h], setup)?[0])
}

fn check_sweep(hs: &[f64]) -> Result<()> {
    if hs.len() < 3 {
        return Err(FoultError::invalid(
            "sweep.values",
            "need at least 3 increments",
        ));
    }
    let lo = hs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = hs.iter().copied().fold(0.0, f64::max);
    if !(lo > 0.0 && hi >= 4.0 * lo) {
        return Err(FoultError::invalid(
            "sweep.values",
            "increments must be positive and span at least two octaves",
        ));
    }
    Ok(())
}

/// Keeps `(h, mean)` for estimates that are positive and resolved.
fn resolved_points(hs: &[f64], moments: &[MCEstimate]) -> Vec<(f64, f64)> {
    hs.iter()
        .zip(moments)
        .filter(|(_, m)| m.mean > 0.0 && m.relative_error() <= MAX_RELATIVE_ERROR)
        .map(|(h, m)| (*h, m.mean))
        .collect()
}

/// Temporal moments and their log-log fit.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalScaling {
    pub moments: Vec<MCEstimate>,
    pub fit: ScalingResult,
}

/// Fits the temporal moment exponent; theory value `n − nHd − H|k|`.
pub fn temporal_scaling(
    params: &FouParams,
    q: &LocalTimeQuery,
    n: u32,
    hs: &[f64],
    setup: McSetup,
) -> Result<TemporalScaling> {
    check_sweep(hs)?;
    let moments = temporal_increment_moments(params, q, n, hs, setup)?;
    let fit = fit_power_law(
        &resolved_points(hs, &moments),
        moment_exponent(params, q, n),
    )?;
    Ok(TemporalScaling { moments, fit })
}

pub fn temporal_scaling_exponent(
    params: &FouParams,
    q: &LocalTimeQuery,
    n: u32,
    hs: &[f64],
    setup: McSetup,
) -> Result<ScalingResult> {
    Ok(temporal_scaling(params, q, n, hs, setup)?.fit)
}

/// `E|α̃_ε^{(k)}(x, t) − α̃_ε^{(k)}(y, t)|^n` for several `(x, y)` on one
/// common ensemble.
pub fn spatial_increment_moments(
    params: &FouParams,
    q: &LocalTimeQuery,
    n: u32,
    pairs: &[(Vec<f64>, Vec<f64>)],
    setup: McSetup,
) -> Result<Vec<MCEstimate>> {
    check_order(n)?;
    for (x, y) in pairs {
        for p in [x, y] {
            if p.len() != q.dim() {
                return Err(FoultError::DimensionMismatch {
                    expected: q.dim(),
                    got: p.len(),
                });
            }
        }
    }
    let ensemble = Ensemble::new(params, q, setup)?;
    let end = setup.grid.snap(q.t)?;
    let kernel = q.kernel()?;
    let rows = ensemble.rows(|path| {
        Ok(pairs
            .iter()
            .map(|(x, y)| {
                if x == y {
                    return 0.0;
                }
                let a = window_integral(path, x, &kernel, 0, end);
                let b = window_integral(path, y, &kernel, 0, end);
                (a - b).abs().powi(n as i32)
            })
            .collect::<Vec<f64>>())
    })?;
    (0..pairs.len())
        .map(|c| ensemble.summarize(&rows, c))
        .collect()
}

pub fn spatial_increment_moment(
    params: &FouParams,
    q: &LocalTimeQuery,
    n: u32,
    x: &[f64],
    y: &[f64],
    setup: McSetup,
) -> Result<MCEstimate> {
    Ok(spatial_increment_moments(params, q, n, &[(x.to_vec(), y.to_vec())], setup)?[0])
}

/// Axis-aligned product lattice of spatial arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialLattice {
    axes: Vec<Vec<f64>>,
}

impl SpatialLattice {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() || axes.iter().any(|a| a.is_empty()) {
            return Err(FoultError::invalid(
                "lattice",
                "every axis needs at least one point",
            ));
        }
        let axes = axes
            .into_iter()
            .map(|mut a| {
                a.sort_by(f64::total_cmp);
                a
            })
            .collect();
        Ok(SpatialLattice { axes })
    }

    /// `[lo, hi]` on every axis with spacing at most `spacing`.
    pub fn uniform(lo: f64, hi: f64, spacing: f64, dim: usize) -> Result<Self> {
        if !(hi > lo && spacing > 0.0) {
            return Err(FoultError::invalid(
                "lattice",
                "need lo < hi and positive spacing",
            ));
        }
        let cells = ((hi - lo) / spacing).ceil() as usize;
        let axis: Vec<f64> = (0..=cells)
            .map(|i| lo + (hi - lo) * i as f64 / cells as f64)
            .collect();
        SpatialLattice::new(vec![axis; dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Every lattice point, first axis varying slowest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for axis in &self.axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        out
    }

    /// Checks that each axis spans `[-max X_i − margin, −min X_i + margin]`
    /// over the window and has spacing at most `max_spacing`.
    fn check_coverage(
        &self,
        path: &SamplePath,
        start: usize,
        end: usize,
        margin: f64,
        max_spacing: f64,
    ) -> Result<()> {
        for (i, axis) in self.axes.iter().enumerate() {
            let window = &path.component(i)[start..=end];
            let lo = window.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let (need_lo, need_hi) = (-hi - margin, -lo + margin);
            let coarse = axis
                .windows(2)
                .any(|w| w[1] - w[0] > max_spacing * (1.0 + 1e-12));
            if axis[0] > need_lo || *axis.last().unwrap() < need_hi || coarse {
                return Err(FoultError::LatticeCoverage {
                    need_lo,
                    need_hi,
                    max_spacing,
                });
            }
        }
        Ok(())
    }
}

/// Pathwise Hölder regression output.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderEstimate {
    /// Fit of the log ensemble-median sup increment against `log h`;
    /// `theory_exponent` is the `n = 1` moment exponent `1 − Hd − H|k|`.
    pub scaling: ScalingResult,
    pub hs: Vec<f64>,
    pub medians: Vec<f64>,
    pub means: Vec<f64>,
    /// `sups[path][h]`.
    pub sups: Vec<Vec<f64>>,
}

/// For each path and `h`, `sup_x [α̃_ε^{(k)}(x, t+h) − α̃_ε^{(k)}(x, t)]` over
/// the lattice; regresses the ensemble median against `h`.
pub fn pathwise_holder_estimate(
    params: &FouParams,
    q: &LocalTimeQuery,
    hs: &[f64],
    lattice: &SpatialLattice,
    setup: McSetup,
) -> Result<HolderEstimate> {
    check_sweep(hs)?;
    if lattice.dim() != q.dim() {
        return Err(FoultError::DimensionMismatch {
            expected: q.dim(),
            got: lattice.dim(),
        });
    }
    let ensemble = Ensemble::new(params, q, setup)?;
    let (start, steps) = increment_steps(&setup, q.t, hs)?;
    let widest = start + steps.iter().copied().max().unwrap_or(0);
    let kernel: MollifierKernel = q.kernel()?;
    let root_eps = q.eps.value().sqrt();
    let points = lattice.points();
    let sups = ensemble.rows(|path| {
        lattice.check_coverage(path, start, widest, 3.0 * root_eps, 0.5 * root_eps)?;
        Ok(steps
            .iter()
            .map(|&m| {
                points
                    .iter()
                    .map(|x| window_integral(path, x, &kernel, start, start + m))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect::<Vec<f64>>())
    })?;
    let column = |c: usize| sups.iter().map(|r| r[c]).collect::<Vec<f64>>();
    let medians: Vec<f64> = (0..hs.len()).map(|c| median(&column(c))).collect();
    let means: Vec<f64> = (0..hs.len())
        .map(|c| column(c).iter().sum::<f64>() / sups.len() as f64)
        .collect();
    let pts: Vec<(f64, f64)> = hs.iter().copied().zip(medians.iter().copied()).collect();
    let scaling = fit_power_law(&pts, moment_exponent(params, q, 1))?;
    Ok(HolderEstimate {
        scaling,
        hs: hs.to_vec(),
        medians,
        means,
        sups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{HurstParam, TimeGrid};
    use crate::mollifier::{Bandwidth, MultiIndex};

    fn h(v: f64) -> HurstParam {
        HurstParam::new(v).unwrap()
    }

    fn eps(e: f64) -> Bandwidth {
        Bandwidth::new(e).unwrap()
    }

    #[test]
    fn exact_power_law_recovered() {
        let pts: Vec<(f64, f64)> = [0.04, 0.08, 0.16, 0.32]
            .iter()
            .map(|&x: &f64| (x, 2.5 * x.powf(1.37)))
            .collect();
        let fit = fit_power_law(&pts, 1.2).unwrap();
        assert!((fit.exponent_hat - 1.37).abs() < 1e-10);
        assert!((fit.intercept - 2.5f64.ln()).abs() < 1e-10);
        assert!(fit.points.windows(2).all(|w| w[0].0 > w[1].0));
    }

    #[test]
    fn too_few_points_is_degenerate() {
        let r = fit_power_law(&[(0.1, 1.0), (0.2, 0.0), (0.4, 2.0)], 1.0);
        assert!(matches!(
            r,
            Err(FoultError::DegenerateRegression { surviving: 2 })
        ));
    }

    #[test]
    fn zero_increment_is_zero() {
        let p = FouParams::centered(h(0.4), 1.0, 1).unwrap();
        let q = LocalTimeQuery::at_origin(1, 0.5, eps(0.05)).unwrap();
        let setup = McSetup::new(TimeGrid::new(1.0, 64).unwrap(), 8, 3);
        let m = temporal_increment_moment(&p, &q, 2, 0.0, setup).unwrap();
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.stderr, 0.0);
    }

    #[test]
    fn increments_must_be_aligned_and_inside() {
        let p = FouParams::centered(h(0.4), 1.0, 1).unwrap();
        let q = LocalTimeQuery::at_origin(1, 0.5, eps(0.05)).unwrap();
        let setup = McSetup::new(TimeGrid::new(1.0, 64).unwrap(), 4, 3);
        assert!(matches!(
            temporal_increment_moment(&p, &q, 2, 0.01, setup),
            Err(FoultError::NotGridAligned { .. })
        ));
        assert!(matches!(
            temporal_increment_moment(&p, &q, 2, 0.75, setup),
            Err(FoultError::BeyondHorizon { .. })
        ));
    }

    #[test]
    fn degenerate_deterministic_path_is_reported() {
        // v = 0: the path is x0 e^{-t}, far from the query level.
        let p = FouParams::new(h(0.4), 0.0, vec![0.0]).unwrap();
        let q = LocalTimeQuery::new(vec![40.0], 0.1, eps(0.05), MultiIndex::zero(1)).unwrap();
        let setup = McSetup::new(TimeGrid::new(1.0, 64).unwrap(), 4, 3);
        let r = temporal_scaling_exponent(&p, &q, 2, &[0.125, 0.25, 0.5], setup);
        assert!(matches!(r, Err(FoultError::DegenerateRegression { .. })));
    }

    #[test]
    fn spatial_moment_symmetric_and_zero_on_diagonal() {
        let p = FouParams::centered(h(0.3), 1.0, 1).unwrap();
        let q = LocalTimeQuery::at_origin(1, 1.0, eps(0.05)).unwrap();
        let setup = McSetup::new(TimeGrid::new(1.0, 128).unwrap(), 16, 5);
        let same = spatial_increment_moment(&p, &q, 2, &[0.1], &[0.1], setup).unwrap();
        assert_eq!(same.mean, 0.0);
        let a = spatial_increment_moment(&p, &q, 2, &[0.1], &[0.3], setup).unwrap();
        let b = spatial_increment_moment(&p, &q, 2, &[0.3], &[0.1], setup).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lattice_points_and_coverage_error() {
        let l = SpatialLattice::uniform(-1.0, 1.0, 0.5, 2).unwrap();
        assert_eq!(l.len(), 25);
        assert_eq!(l.points()[1], vec![-1.0, -0.5]);
        let p = FouParams::centered(h(0.4), 1.0, 1).unwrap();
        let q = LocalTimeQuery::at_origin(1, 0.25, eps(0.05)).unwrap();
        let setup = McSetup::new(TimeGrid::new(1.0, 64).unwrap(), 4, 3);
        let narrow = SpatialLattice::uniform(-0.1, 0.1, 0.05, 1).unwrap();
        let r = pathwise_holder_estimate(&p, &q, &[0.125, 0.25, 0.5], &narrow, setup);
        assert!(matches!(r, Err(FoultError::LatticeCoverage { .. })));
    }

    #[test]
    fn sweep_must_span_two_octaves() {
        assert!(check_sweep(&[0.1, 0.2, 0.3]).is_err());
        assert!(check_sweep(&[0.1, 0.2]).is_err());
        assert!(check_sweep(&[0.1, 0.2, 0.4]).is_ok());
    }
}
