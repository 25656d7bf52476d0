//! Exact sampling of fractional Brownian motion on uniform grids.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{FoultError, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::rng::{substream, Domain};

/// Hurst index, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HurstParam(f64);

impl HurstParam {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.0 && h < 1.0 {
            Ok(HurstParam(h))
        } else {
            Err(FoultError::invalid(
                "hurst",
                format!("{h} is outside (0, 1)"),
            ))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Exactly one half: the Brownian case.
    pub fn is_brownian(self) -> bool {
        self.0 == 0.5
    }
}

impl fmt::Display for HurstParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Uniform grid `t_j = j T / N`, `j = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(FoultError::invalid(
                "grid.t",
                format!("horizon {horizon} must be positive"),
            ));
        }
        if steps == 0 {
            return Err(FoultError::invalid(
                "grid.n",
                "step count must be at least 1",
            ));
        }
        Ok(TimeGrid { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of grid points, `N + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        if j == self.steps {
            self.horizon
        } else {
            j as f64 * self.horizon / self.steps as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|j| self.time(j)).collect()
    }

    /// Index of the grid point nearest to `t`; rejects `t` beyond the
    /// horizon (up to half a step of rounding).
    pub fn snap(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0) {
            return Err(FoultError::invalid("t", format!("time {t} is negative")));
        }
        if t > self.horizon * (1.0 + 1e-12) {
            return Err(FoultError::BeyondHorizon {
                t,
                horizon: self.horizon,
            });
        }
        Ok(((t / self.step()).round() as usize).min(self.steps))
    }

    /// The multiple of the step closest to `h`.
    pub fn nearest_multiple(&self, h: f64) -> f64 {
        (h / self.step()).round() * self.step()
    }

    /// Number of steps spanned by `h`, which must be a multiple of the step.
    pub fn steps_in(&self, h: f64) -> Result<usize> {
        let ratio = h / self.step();
        let m = ratio.round();
        if !(h >= 0.0) || (ratio - m).abs() > 1e-9 * ratio.max(1.0) {
            return Err(FoultError::NotGridAligned {
                h,
                step: self.step(),
            });
        }
        Ok(m as usize)
    }
}

/// Which process a path realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessLabel {
    Fbm,
    FouFirst,
    FouSecond,
}

/// A `d`-dimensional path sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    grid: TimeGrid,
    values: Vec<Vec<f64>>,
    label: ProcessLabel,
}

impl SamplePath {
    pub fn new(grid: TimeGrid, values: Vec<Vec<f64>>, label: ProcessLabel) -> Result<Self> {
        if values.is_empty() {
            return Err(FoultError::invalid(
                "dim",
                "a path needs at least one component",
            ));
        }
        for comp in &values {
            if comp.len() != grid.len() {
                return Err(FoultError::DimensionMismatch {
                    expected: grid.len(),
                    got: comp.len(),
                });
            }
            if comp.iter().any(|v| !v.is_finite()) {
                return Err(FoultError::invalid("path", "non-finite sample value"));
            }
        }
        Ok(SamplePath {
            grid,
            values,
            label,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn label(&self) -> ProcessLabel {
        self.label
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// The `d`-vector at grid index `j`.
    pub fn point(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|c| c[j]).collect()
    }

    /// Same path with `shift[i]` added to component `i`.
    pub fn shifted(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim() {
            return Err(FoultError::DimensionMismatch {
                expected: self.dim(),
                got: shift.len(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(shift)
            .map(|(c, s)| c.iter().map(|v| v + s).collect())
            .collect();
        SamplePath::new(self.grid, values, self.label)
    }
}

/// Covariance `½(t^{2H} + s^{2H} − |t−s|^{2H})` of standard fBm.
pub fn fbm_cov(t: f64, s: f64, hurst: HurstParam) -> Result<f64> {
    if !(t >= 0.0 && s >= 0.0) {
        return Err(FoultError::invalid(
            "t",
            format!("negative time in ({t}, {s})"),
        ));
    }
    Ok(fbm_cov_unchecked(t, s, hurst.value()))
}

pub(crate) fn fbm_cov_unchecked(t: f64, s: f64, h: f64) -> f64 {
    if t == s {
        return t.powf(2.0 * h);
    }
    let two_h = 2.0 * h;
    0.5 * (t.powf(two_h) + s.powf(two_h) - (t - s).abs().powf(two_h))
}

/// Covariance of `(B_{t_1}, …, B_{t_N})`; `t_0 = 0` is excluded.
pub fn fbm_cov_matrix(grid: &TimeGrid, hurst: HurstParam) -> Matrix {
    let h = hurst.value();
    let mut m = Matrix::zeros(grid.steps());
    for i in 0..grid.steps() {
        for j in 0..=i {
            let v = fbm_cov_unchecked(grid.time(i + 1), grid.time(j + 1), h);
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FbmMethod {
    Cholesky,
    #[default]
    Circulant,
}

impl std::str::FromStr for FbmMethod {
    type Err = FoultError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cholesky" => Ok(FbmMethod::Cholesky),
            "circulant" => Ok(FbmMethod::Circulant),
            other => Err(FoultError::invalid(
                "fbm.method",
                format!("`{other}` is neither `cholesky` nor `circulant`"),
            )),
        }
    }
}

impl fmt::Display for FbmMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FbmMethod::Cholesky => "cholesky",
            FbmMethod::Circulant => "circulant",
        })
    }
}

/// Relative floor below which a circulant eigenvalue counts as negative.
pub const CIRCULANT_NEGATIVE_TOLERANCE: f64 = 1e-8;

enum Factor {
    Cholesky(Cholesky),
    Circulant {
        /// `sqrt(λ_k / M)` for the `M = 2N` circulant eigenvalues.
        scales: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
}

/// Precomputed factorization for repeated one-dimensional fBm draws on a
/// fixed grid.
pub struct FbmSampler {
    grid: TimeGrid,
    hurst: HurstParam,
    method: FbmMethod,
    factor: Factor,
}

impl fmt::Debug for FbmSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FbmSampler")
            .field("grid", &self.grid)
            .field("hurst", &self.hurst)
            .field("method", &self.method)
            .finish()
    }
}

impl FbmSampler {
    pub fn new(grid: TimeGrid, hurst: HurstParam, method: FbmMethod) -> Result<Self> {
        let factor = match method {
            FbmMethod::Cholesky => Factor::Cholesky(Cholesky::new(&fbm_cov_matrix(&grid, hurst))?),
            FbmMethod::Circulant => circulant_factor(&grid, hurst)?,
        };
        Ok(FbmSampler {
            grid,
            hurst,
            method,
            factor,
        })
    }

    /// Circulant embedding when admissible, Cholesky otherwise.
    pub fn with_fallback(grid: TimeGrid, hurst: HurstParam, method: FbmMethod) -> Result<Self> {
        match FbmSampler::new(grid, hurst, method) {
            Err(FoultError::CirculantNotPositive { .. }) => {
                FbmSampler::new(grid, hurst, FbmMethod::Cholesky)
            }
            other => other,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn hurst(&self) -> HurstParam {
        self.hurst
    }

    pub fn method(&self) -> FbmMethod {
        self.method
    }

    /// One scalar fBm path `B_{t_0} = 0, …, B_{t_N}`.
    pub fn sample_component<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.grid.steps();
        let mut out = vec![0.0; n + 1];
        match &self.factor {
            Factor::Cholesky(chol) => {
                let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                chol.mul_lower(&z, &mut out[1..]);
            }
            Factor::Circulant { scales, fft } => {
                let mut buf: Vec<Complex64> = scales
                    .iter()
                    .map(|s| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                let mut acc = 0.0;
                for j in 0..n {
                    acc += buf[j].re;
                    out[j + 1] = acc;
                }
            }
        }
        out
    }

    /// A `dim`-dimensional path whose component `c` is drawn from the
    /// substream `(seed, domain, path_index, c)`.
    pub fn sample(&self, dim: usize, seed: u64, domain: Domain, path_index: u64) -> SamplePath {
        let values = (0..dim)
            .map(|c| {
                let mut rng = substream(seed, domain, path_index, c as u64);
                self.sample_component(&mut rng)
            })
            .collect();
        SamplePath {
            grid: self.grid,
            values,
            label: ProcessLabel::Fbm,
        }
    }
}

fn circulant_factor(grid: &TimeGrid, hurst: HurstParam) -> Result<Factor> {
    let n = grid.steps();
    let m = 2 * n;
    let two_h = 2.0 * hurst.value();
    let scale = grid.step().powf(two_h);
    let fgn_cov = |k: usize| -> f64 {
        let k = k as f64;
        0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h)) * scale
    };
    let mut row: Vec<Complex64> = (0..m)
        .map(|j| {
            let lag = if j <= n { j } else { m - j };
            Complex64::new(fgn_cov(lag), 0.0)
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(m);
    fft.process(&mut row);
    let max = row.iter().map(|c| c.re).fold(f64::MIN, f64::max);
    let min = row.iter().map(|c| c.re).fold(f64::MAX, f64::min);
    if min < -CIRCULANT_NEGATIVE_TOLERANCE * max {
        return Err(FoultError::CirculantNotPositive { value: min, max });
    }
    let scales = row
        .iter()
        .map(|c| (c.re.max(0.0) / m as f64).sqrt())
        .collect();
    Ok(Factor::Circulant { scales, fft })
}

/// Draws a single `dim`-dimensional fBm path (path index 0).
pub fn sample_fbm(
    grid: TimeGrid,
    hurst: HurstParam,
    dim: usize,
    seed: u64,
    method: FbmMethod,
) -> Result<SamplePath> {
    if dim == 0 {
        return Err(FoultError::invalid("dim", "dimension must be at least 1"));
    }
    Ok(FbmSampler::new(grid, hurst, method)?.sample(dim, seed, Domain::ProcessA, 0))
}
