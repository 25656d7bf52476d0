//! Regularized derivative local times and intersection local times of
//! sampled paths, their Monte Carlo moments, and the existence and
//! regularity conditions on `(H, k, d)`.

use crate::error::{FoultError, Result};
use crate::fbm::{HurstParam, SamplePath, TimeGrid};
use crate::fou::{FouGenerator, FouParams, Generator};
use crate::mollifier::{Bandwidth, MollifierKernel, MultiIndex};
use crate::rng::Domain;
use crate::stats::{CompensatedSum, MCEstimate};

/// Arguments `(x, t, ε, k)` of a regularized local time.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeQuery {
    pub x: Vec<f64>,
    pub t: f64,
    pub eps: Bandwidth,
    pub k: MultiIndex,
}

impl LocalTimeQuery {
    pub fn new(x: Vec<f64>, t: f64, eps: Bandwidth, k: MultiIndex) -> Result<Self> {
        if x.len() != k.dim() {
            return Err(FoultError::DimensionMismatch {
                expected: k.dim(),
                got: x.len(),
            });
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(FoultError::invalid(
                "query.t",
                format!("{t} must be positive"),
            ));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(FoultError::invalid(
                "query.x",
                "spatial argument must be finite",
            ));
        }
        Ok(LocalTimeQuery { x, t, eps, k })
    }

    /// Query at the origin with `k = 0`.
    pub fn at_origin(dim: usize, t: f64, eps: Bandwidth) -> Result<Self> {
        LocalTimeQuery::new(vec![0.0; dim], t, eps, MultiIndex::zero(dim))
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn with_eps(&self, eps: Bandwidth) -> Self {
        LocalTimeQuery {
            eps,
            ..self.clone()
        }
    }

    pub fn with_x(&self, x: Vec<f64>) -> Self {
        LocalTimeQuery { x, ..self.clone() }
    }

    pub(crate) fn kernel(&self) -> Result<MollifierKernel> {
        MollifierKernel::new(self.eps, self.k.clone())
    }
}

fn check_dim(path: &SamplePath, dim: usize) -> Result<()> {
    if path.dim() != dim {
        return Err(FoultError::DimensionMismatch {
            expected: dim,
            got: path.dim(),
        });
    }
    Ok(())
}

/// Trapezoid over grid indices `start..=end` of `∂^k f_ε(X_s + x)`.
pub(crate) fn window_integral(
    path: &SamplePath,
    x: &[f64],
    kernel: &MollifierKernel,
    start: usize,
    end: usize,
) -> f64 {
    if end <= start {
        return 0.0;
    }
    let dt = path.grid().step();
    let mut acc = CompensatedSum::new();
    if path.dim() == 1 {
        let c = path.component(0);
        let shift = x[0];
        for j in start..=end {
            let w = if j == start || j == end { 0.5 } else { 1.0 };
            acc.add(w * kernel.eval1(c[j] + shift));
        }
    } else {
        let mut point = vec![0.0; path.dim()];
        for j in start..=end {
            for (i, p) in point.iter_mut().enumerate() {
                *p = path.component(i)[j] + x[i];
            }
            let w = if j == start || j == end { 0.5 } else { 1.0 };
            acc.add(w * kernel.eval(&point));
        }
    }
    dt * acc.value()
}

/// `α̃_ε^{(k)}(x, t) ≈ ∫_0^t ∂^k f_ε(X_s + x) ds` by the trapezoidal rule,
/// with `t` snapped to the nearest grid point.
pub fn local_time_reg(path: &SamplePath, q: &LocalTimeQuery) -> Result<f64> {
    check_dim(path, q.dim())?;
    let end = path.grid().snap(q.t)?;
    Ok(window_integral(path, &q.x, &q.kernel()?, 0, end))
}

/// `α̂_ε^{(k)}(x, t) ≈ ∫_0^t ∫_0^t ∂^k f_ε(X_u − X̃_s + x) du ds`.
pub fn intersection_local_time_reg(
    path_a: &SamplePath,
    path_b: &SamplePath,
    q: &LocalTimeQuery,
) -> Result<f64> {
    let kernel = q.kernel()?;
    Ok(intersection_local_times(path_a, path_b, &q.x, q.t, std::slice::from_ref(&kernel))?[0])
}

/// Intersection local times for several kernels, sharing the `O(N²)` pass
/// over time pairs.
pub fn intersection_local_times(
    path_a: &SamplePath,
    path_b: &SamplePath,
    x: &[f64],
    t: f64,
    kernels: &[MollifierKernel],
) -> Result<Vec<f64>> {
    let dim = x.len();
    check_dim(path_a, dim)?;
    check_dim(path_b, dim)?;
    if let Some(k) = kernels.iter().find(|k| k.dim() != dim) {
        return Err(FoultError::DimensionMismatch {
            expected: dim,
            got: k.dim(),
        });
    }
    if path_a.grid() != path_b.grid() {
        return Err(FoultError::invalid(
            "path",
            "both paths must share one time grid",
        ));
    }
    let grid = path_a.grid();
    let end = grid.snap(t)?;
    if end == 0 {
        return Ok(vec![0.0; kernels.len()]);
    }
    let weight = |j: usize| if j == 0 || j == end { 0.5 } else { 1.0 };
    let mut outer: Vec<CompensatedSum> = vec![CompensatedSum::new(); kernels.len()];
    let mut row = vec![0.0; kernels.len()];
    let mut point = vec![0.0; dim];
    for i in 0..=end {
        row.iter_mut().for_each(|r| *r = 0.0);
        if dim == 1 {
            let a = path_a.component(0)[i] + x[0];
            let b = path_b.component(0);
            for (j, bj) in b.iter().enumerate().take(end + 1) {
                let z = a - bj;
                let w = weight(j);
                for (r, kern) in row.iter_mut().zip(kernels) {
                    *r += w * kern.eval1(z);
                }
            }
        } else {
            for j in 0..=end {
                for (c, p) in point.iter_mut().enumerate() {
                    *p = path_a.component(c)[i] - path_b.component(c)[j] + x[c];
                }
                let w = weight(j);
                for (r, kern) in row.iter_mut().zip(kernels) {
                    *r += w * kern.eval(&point);
                }
            }
        }
        let w = weight(i);
        for (o, r) in outer.iter_mut().zip(&row) {
            o.add(w * r);
        }
    }
    let area = grid.step() * grid.step();
    Ok(outer.iter().map(|o| area * o.value()).collect())
}

/// `H₁H₂/(H₁+H₂) · (|k| + d)`.
pub fn existence_value(h1: HurstParam, h2: HurstParam, k: &MultiIndex, dim: usize) -> f64 {
    let (a, b) = (h1.value(), h2.value());
    a * b / (a + b) * (k.total() + dim) as f64
}

/// Sufficient condition for `α̂^{(k)}(0, t)` to exist in `L²`.
pub fn existence_condition(h1: HurstParam, h2: HurstParam, k: &MultiIndex, dim: usize) -> bool {
    existence_value(h1, h2, k, dim) <= 1.0
}

/// `H(|k| + d)`, or `H(|k+δ| + d)` with `|k+δ| = Σ (k_i + δ_i)`.
pub fn holder_value(
    hurst: HurstParam,
    k: &MultiIndex,
    dim: usize,
    delta: Option<&[f64]>,
) -> Result<f64> {
    let mut order = k.total() as f64;
    if let Some(delta) = delta {
        if delta.len() != k.dim() {
            return Err(FoultError::DimensionMismatch {
                expected: k.dim(),
                got: delta.len(),
            });
        }
        if let Some(bad) = delta.iter().find(|d| !(**d > 0.0 && **d <= 1.0)) {
            return Err(FoultError::invalid(
                "delta",
                format!("{bad} is outside (0, 1]"),
            ));
        }
        order += delta.iter().sum::<f64>();
    }
    Ok(hurst.value() * (order + dim as f64))
}

/// Condition of the temporal (no `δ`) or spatial (with `δ`) moment bound.
pub fn holder_condition(
    hurst: HurstParam,
    k: &MultiIndex,
    dim: usize,
    delta: Option<&[f64]>,
) -> Result<bool> {
    Ok(holder_value(hurst, k, dim, delta)? <= 1.0)
}

/// Grid, path construction route and ensemble size for Monte Carlo runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSetup {
    pub grid: TimeGrid,
    pub generator: Generator,
    pub n_paths: usize,
    pub seed: u64,
}

impl McSetup {
    pub fn new(grid: TimeGrid, n_paths: usize, seed: u64) -> Self {
        McSetup {
            grid,
            generator: Generator::default(),
            n_paths,
            seed,
        }
    }

    pub fn with_generator(self, generator: Generator) -> Self {
        McSetup { generator, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(FoultError::invalid("mc.paths", "need at least 2 paths"));
        }
        Ok(())
    }
}

/// Pairs of independent fOU paths `(X^{H₁}, X̃^{H₂})` for a setup.
pub struct PairEnsemble {
    first: FouGenerator,
    second: FouGenerator,
    setup: McSetup,
}

impl PairEnsemble {
    pub fn new(params1: &FouParams, params2: &FouParams, setup: McSetup) -> Result<Self> {
        setup.validate()?;
        if params1.dim() != params2.dim() {
            return Err(FoultError::DimensionMismatch {
                expected: params1.dim(),
                got: params2.dim(),
            });
        }
        Ok(PairEnsemble {
            first: FouGenerator::new(setup.grid, params1.clone(), setup.generator)?,
            second: FouGenerator::new(setup.grid, params2.clone(), setup.generator)?,
            setup,
        })
    }

    pub fn pair(&self, index: u64) -> Result<(SamplePath, SamplePath)> {
        Ok((
            self.first.path(self.setup.seed, Domain::ProcessA, index)?,
            self.second.path(self.setup.seed, Domain::ProcessB, index)?,
        ))
    }

    /// Intersection local times of every pair for each kernel; rows are
    /// ordered by pair index.
    pub fn intersection_samples(
        &self,
        x: &[f64],
        t: f64,
        kernels: &[MollifierKernel],
    ) -> Result<Vec<Vec<f64>>> {
        crate::try_par_map(self.setup.n_paths, |i| {
            let (a, b) = self.pair(i as u64)?;
            intersection_local_times(&a, &b, x, t, kernels)
        })
    }
}

/// Monte Carlo estimate of `E|α̂_ε^{(k)}(x, t)|²`.
pub fn mc_second_moment(
    params1: &FouParams,
    params2: &FouParams,
    q: &LocalTimeQuery,
    setup: McSetup,
) -> Result<MCEstimate> {
    let ensemble = PairEnsemble::new(params1, params2, setup)?;
    let rows = ensemble.intersection_samples(&q.x, q.t, &[q.kernel()?])?;
    let squares: Vec<f64> = rows.iter().map(|r| r[0] * r[0]).collect();
    MCEstimate::from_samples(&squares, setup.seed)
}

/// Monte Carlo estimate of `E|α̂_ε^{(k)} − α̂_θ^{(k)}|²` with both bandwidths
/// evaluated on the same path pairs.
pub fn cauchy_gap(
    params1: &FouParams,
    params2: &FouParams,
    q: &LocalTimeQuery,
    theta: Bandwidth,
    setup: McSetup,
) -> Result<MCEstimate> {
    let sweep = cauchy_gap_sweep(params1, params2, q, &[(q.eps, theta)], setup)?;
    Ok(sweep[0].estimate)
}

/// One row of a bandwidth sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapPoint {
    pub eps: Bandwidth,
    pub theta: Bandwidth,
    pub estimate: MCEstimate,
}

/// Cauchy gaps for several `(ε, θ)` pairs on one common ensemble.
pub fn cauchy_gap_sweep(
    params1: &FouParams,
    params2: &FouParams,
    q: &LocalTimeQuery,
    pairs: &[(Bandwidth, Bandwidth)],
    setup: McSetup,
) -> Result<Vec<GapPoint>> {
    let mut bandwidths: Vec<Bandwidth> = Vec::new();
    for &(e, th) in pairs {
        for b in [e, th] {
            if !bandwidths.contains(&b) {
                bandwidths.push(b);
            }
        }
    }
    let index_of = |b: Bandwidth| bandwidths.iter().position(|x| *x == b).unwrap();
    let kernels = bandwidths
        .iter()
        .map(|&b| MollifierKernel::new(b, q.k.clone()))
        .collect::<Result<Vec<_>>>()?;
    let ensemble = PairEnsemble::new(params1, params2, setup)?;
    let rows = ensemble.intersection_samples(&q.x, q.t, &kernels)?;
    pairs
        .iter()
        .map(|&(e, th)| {
            let (ie, it) = (index_of(e), index_of(th));
            let gaps: Vec<f64> = rows
                .iter()
                .map(|r| (r[ie] - r[it]) * (r[ie] - r[it]))
                .collect();
            Ok(GapPoint {
                eps: e,
                theta: th,
                estimate: MCEstimate::from_samples(&gaps, setup.seed)?,
            })
        })
        .collect()
}
