//! Fractional Ornstein-Uhlenbeck paths `dX = −X dt + v dB^H`, built either
//! from a sampled fBm path through the explicit solution or directly from
//! Brownian increments through the Volterra kernel `F(t, u)`.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{FoultError, Result};
use crate::fbm::{FbmMethod, FbmSampler, HurstParam, ProcessLabel, SamplePath, TimeGrid};
use crate::quadrature::{integrate, Tolerance};
use crate::rng::{substream, Domain};

/// Model parameters: Hurst index, diffusion coefficient and initial value.
#[derive(Debug, Clone, PartialEq)]
pub struct FouParams {
    pub hurst: HurstParam,
    pub v: f64,
    pub x0: Vec<f64>,
}

impl FouParams {
    pub fn new(hurst: HurstParam, v: f64, x0: Vec<f64>) -> Result<Self> {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(FoultError::invalid(
                "model.v",
                format!("{v} must be finite and nonnegative"),
            ));
        }
        if x0.is_empty() {
            return Err(FoultError::invalid(
                "model.x0",
                "dimension must be at least 1",
            ));
        }
        if x0.iter().any(|x| !x.is_finite()) {
            return Err(FoultError::invalid(
                "model.x0",
                "initial value must be finite",
            ));
        }
        Ok(FouParams { hurst, v, x0 })
    }

    /// Zero initial value in `dim` dimensions.
    pub fn centered(hurst: HurstParam, v: f64, dim: usize) -> Result<Self> {
        FouParams::new(hurst, v, vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }
}

/// `X_t = x0 e^{−t} + v (B_t − e^{−t} ∫_0^t e^s B_s ds)`, the Riemann
/// integral by the trapezoidal rule on the path's grid.
pub fn fou_from_fbm(fbm: &SamplePath, params: &FouParams) -> Result<SamplePath> {
    fou_from_fbm_labeled(fbm, params, ProcessLabel::FouFirst)
}

pub(crate) fn fou_from_fbm_labeled(
    fbm: &SamplePath,
    params: &FouParams,
    label: ProcessLabel,
) -> Result<SamplePath> {
    if fbm.dim() != params.dim() {
        return Err(FoultError::DimensionMismatch {
            expected: params.dim(),
            got: fbm.dim(),
        });
    }
    let grid = *fbm.grid();
    let times = grid.times();
    let decay: Vec<f64> = times.iter().map(|t| (-t).exp()).collect();
    let growth: Vec<f64> = times.iter().map(|t| t.exp()).collect();
    let half_step = 0.5 * grid.step();
    let values = fbm
        .components()
        .iter()
        .zip(&params.x0)
        .map(|(b, &x0)| {
            let mut x = Vec::with_capacity(b.len());
            x.push(x0);
            let mut integral = 0.0;
            for j in 1..b.len() {
                let deterministic = x0 * decay[j];
                if params.v == 0.0 {
                    x.push(deterministic);
                    continue;
                }
                integral += half_step * (growth[j - 1] * b[j - 1] + growth[j] * b[j]);
                x.push(deterministic + params.v * (b[j] - decay[j] * integral));
            }
            x
        })
        .collect();
    SamplePath::new(grid, values, label)
}

/// Covariance of the classical (H = ½) OU solution started at 0:
/// `v² e^{−(t+s)} (e^{2 min(t,s)} − 1) / 2`.
pub fn ou_cov_classical(t: f64, s: f64, v: f64) -> Result<f64> {
    if !(t >= 0.0 && s >= 0.0) {
        return Err(FoultError::invalid(
            "t",
            format!("negative time in ({t}, {s})"),
        ));
    }
    let m = t.min(s);
    Ok(v * v * 0.5 * ((2.0 * m - t - s).exp() - (-(t + s)).exp()))
}

/// Reading of the kernel normalization `K_H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KhReading {
    /// `[2H Γ(3/2−H) / (Γ(H+½) Γ(2−2H))]^{1/2}`, the constant for which the
    /// Volterra kernel reproduces the fBm covariance.
    #[default]
    Standard,
    /// `2H Γ(3/2−H) / (Γ(H+½) Γ(2−2H)^{1/2})`.
    Literal,
}

/// Coefficient of the `∫ (s−u)^{H−½} s^{H−3/2} e^s ds` term in the
/// `H < ½` kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LowHurstCoefficient {
    /// `½ − H`, as obtained by integrating the `H > ½` kernel by parts.
    #[default]
    IntegrationByParts,
    /// `2 / (1 − 2H)`. Does not reproduce the fOU variance; kept for
    /// comparison only.
    Reciprocal,
}

/// `K_H` under the chosen reading.
pub fn k_h_constant(hurst: HurstParam, reading: KhReading) -> f64 {
    let h = hurst.value();
    let num = 2.0 * h * libm::tgamma(1.5 - h);
    let g_mid = libm::tgamma(h + 0.5);
    let g_tail = libm::tgamma(2.0 - 2.0 * h);
    match reading {
        KhReading::Standard => (num / (g_mid * g_tail)).sqrt(),
        KhReading::Literal => num / (g_mid * g_tail.sqrt()),
    }
}

const KERNEL_TOLERANCE: Tolerance = Tolerance::new(1e-14, 1e-11);

/// The kernel `F(t, u)` with `X_t = x0 e^{−t} + v ∫_0^t F(t,u) dW_u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolterraKernel {
    hurst: HurstParam,
    k_h: f64,
    low_coefficient: f64,
}

impl VolterraKernel {
    pub fn new(hurst: HurstParam) -> Self {
        VolterraKernel::with_conventions(
            hurst,
            KhReading::Standard,
            LowHurstCoefficient::IntegrationByParts,
        )
    }

    pub fn with_conventions(
        hurst: HurstParam,
        reading: KhReading,
        low: LowHurstCoefficient,
    ) -> Self {
        let h = hurst.value();
        let low_coefficient = match low {
            LowHurstCoefficient::IntegrationByParts => 0.5 - h,
            LowHurstCoefficient::Reciprocal => 2.0 / (1.0 - 2.0 * h),
        };
        VolterraKernel {
            hurst,
            k_h: if hurst.is_brownian() {
                1.0
            } else {
                k_h_constant(hurst, reading)
            },
            low_coefficient,
        }
    }

    pub fn hurst(&self) -> HurstParam {
        self.hurst
    }

    /// Evaluates `F(t, u)` for `0 < u < t`.
    ///
    /// Endpoint singularities of the inner integrals are removed by the
    /// substitution `w = (s−u)^{H∓½}` before adaptive quadrature.
    pub fn eval(&self, t: f64, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < t && t.is_finite()) {
            return Err(FoultError::invalid(
                "u",
                format!("kernel needs 0 < u < t, got u = {u}, t = {t}"),
            ));
        }
        let h = self.hurst.value();
        if self.hurst.is_brownian() {
            return Ok((u - t).exp());
        }
        if h > 0.5 {
            // (H−½) ∫_u^t s^{H−½}(s−u)^{H−3/2} e^{s−t} ds, w = (s−u)^{H−½}
            let a = h - 0.5;
            let p = 1.0 / a;
            let upper = (t - u).powf(a);
            let inner = integrate(
                |w| {
                    let s = u + w.powf(p);
                    s.powf(a) * (s - t).exp()
                },
                0.0,
                upper,
                KERNEL_TOLERANCE,
            )?;
            Ok(self.k_h * u.powf(-a) * inner.value)
        } else {
            // w = (s−u)^{H+½} turns (s−u)^{H−½} ds into dw / (H+½)
            let q = h + 0.5;
            let p = 1.0 / q;
            let upper = (t - u).powf(q);
            let first = integrate(
                |w| {
                    let s = u + w.powf(p);
                    s.powf(h - 0.5) * (s - t).exp()
                },
                0.0,
                upper,
                KERNEL_TOLERANCE,
            )?;
            let second = integrate(
                |w| {
                    let s = u + w.powf(p);
                    s.powf(h - 1.5) * (s - t).exp()
                },
                0.0,
                upper,
                KERNEL_TOLERANCE,
            )?;
            let boundary = t.powf(h - 0.5) * (t - u).powf(h - 0.5);
            let bracket = -first.value / q + boundary + self.low_coefficient * second.value / q;
            Ok(self.k_h * u.powf(0.5 - h) * bracket)
        }
    }
}

/// Free-function form of [`VolterraKernel::eval`] with default conventions.
pub fn volterra_kernel(t: f64, u: f64, hurst: HurstParam) -> Result<f64> {
    VolterraKernel::new(hurst).eval(t, u)
}

/// Precomputed midpoint weights `F(t_j, t_{m+½})`, `m < j`, on a grid.
#[derive(Debug, Clone)]
pub struct VolterraSampler {
    grid: TimeGrid,
    params: FouParams,
    weights: Vec<Vec<f64>>,
}

impl VolterraSampler {
    pub fn new(grid: TimeGrid, params: FouParams) -> Result<Self> {
        VolterraSampler::with_kernel(grid, params.clone(), VolterraKernel::new(params.hurst))
    }

    pub fn with_kernel(grid: TimeGrid, params: FouParams, kernel: VolterraKernel) -> Result<Self> {
        let dt = grid.step();
        let rows = crate::try_par_map(grid.steps(), |j| -> Result<Vec<f64>> {
            let t = grid.time(j + 1);
            (0..=j)
                .map(|m| kernel.eval(t, (m as f64 + 0.5) * dt))
                .collect()
        })?;
        let mut weights = Vec::with_capacity(grid.len());
        weights.push(Vec::new());
        weights.extend(rows);
        Ok(VolterraSampler {
            grid,
            params,
            weights,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn component<R: Rng + ?Sized>(&self, x0: f64, rng: &mut R) -> Vec<f64> {
        let n = self.grid.steps();
        let sd = self.grid.step().sqrt();
        let dw: Vec<f64> = (0..n)
            .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let v = self.params.v;
        (0..=n)
            .map(|j| {
                let deterministic = x0 * (-self.grid.time(j)).exp();
                if j == 0 {
                    return x0;
                }
                if v == 0.0 {
                    return deterministic;
                }
                let noise: f64 = self.weights[j].iter().zip(&dw).map(|(w, z)| w * z).sum();
                deterministic + v * noise
            })
            .collect()
    }

    /// Path from the substreams `(seed, domain, path_index, component)`.
    pub fn sample(&self, seed: u64, domain: Domain, path_index: u64) -> SamplePath {
        let values = self
            .params
            .x0
            .iter()
            .enumerate()
            .map(|(c, &x0)| {
                let mut rng = substream(seed, domain, path_index, c as u64);
                self.component(x0, &mut rng)
            })
            .collect();
        SamplePath::new(self.grid, values, label_for(domain)).expect("kernel weights are finite")
    }
}

/// Single fOU path from the Volterra representation (path index 0).
pub fn sample_fou_volterra(grid: TimeGrid, params: &FouParams, seed: u64) -> Result<SamplePath> {
    Ok(VolterraSampler::new(grid, params.clone())?.sample(seed, Domain::Volterra, 0))
}

fn label_for(domain: Domain) -> ProcessLabel {
    match domain {
        Domain::ProcessB => ProcessLabel::FouSecond,
        _ => ProcessLabel::FouFirst,
    }
}

/// Path construction route for ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    /// Explicit solution driven by an exact fBm sample.
    FromFbm(FbmMethod),
    /// Volterra kernel driven by Brownian increments.
    Volterra,
}

impl Default for Generator {
    fn default() -> Self {
        Generator::FromFbm(FbmMethod::Circulant)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::FromFbm(m) => write!(f, "fbm-{m}"),
            Generator::Volterra => f.write_str("volterra"),
        }
    }
}

impl std::str::FromStr for Generator {
    type Err = FoultError;

    /// Parses the [`Display`](fmt::Display) form.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "volterra" => Ok(Generator::Volterra),
            other => match other.strip_prefix("fbm-") {
                Some(method) => Ok(Generator::FromFbm(method.parse()?)),
                None => Err(FoultError::invalid(
                    "generator",
                    format!("`{other}` is not one of fbm-circulant, fbm-cholesky, volterra"),
                )),
            },
        }
    }
}

enum Backend {
    Fbm(FbmSampler),
    Volterra(VolterraSampler),
}

/// Reusable fOU path source for Monte Carlo ensembles.
pub struct FouGenerator {
    params: FouParams,
    backend: Backend,
}

impl fmt::Debug for FouGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FouGenerator")
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl FouGenerator {
    /// The circulant method falls back to Cholesky when its embedding is
    /// not nonnegative definite.
    pub fn new(grid: TimeGrid, params: FouParams, generator: Generator) -> Result<Self> {
        let backend = match generator {
            Generator::FromFbm(method) => {
                Backend::Fbm(FbmSampler::with_fallback(grid, params.hurst, method)?)
            }
            Generator::Volterra => Backend::Volterra(VolterraSampler::new(grid, params.clone())?),
        };
        Ok(FouGenerator { params, backend })
    }

    pub fn params(&self) -> &FouParams {
        &self.params
    }

    pub fn grid(&self) -> &TimeGrid {
        match &self.backend {
            Backend::Fbm(s) => s.grid(),
            Backend::Volterra(s) => s.grid(),
        }
    }

    pub fn path(&self, seed: u64, domain: Domain, index: u64) -> Result<SamplePath> {
        match &self.backend {
            Backend::Fbm(s) => {
                let b = s.sample(self.params.dim(), seed, domain, index);
                fou_from_fbm_labeled(&b, &self.params, label_for(domain))
            }
            Backend::Volterra(s) => Ok(s.sample(seed, domain, index)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::sample_fbm;

    fn h(v: f64) -> HurstParam {
        HurstParam::new(v).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(FouParams::new(h(0.3), -1.0, vec![0.0]).is_err());
        assert!(FouParams::new(h(0.3), 1.0, vec![]).is_err());
        assert!(FouParams::new(h(0.3), 0.0, vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn generator_names_round_trip() {
        for g in [
            Generator::Volterra,
            Generator::FromFbm(FbmMethod::Cholesky),
            Generator::FromFbm(FbmMethod::Circulant),
        ] {
            assert_eq!(g.to_string().parse::<Generator>().unwrap(), g);
        }
        assert!("fbm-fft".parse::<Generator>().is_err());
    }

    #[test]
    fn zero_diffusion_is_exact_decay() {
        let grid = TimeGrid::new(2.0, 50).unwrap();
        let params = FouParams::new(h(0.7), 0.0, vec![1.5]).unwrap();
        let b = sample_fbm(grid, h(0.7), 1, 3, FbmMethod::Circulant).unwrap();
        let x = fou_from_fbm(&b, &params).unwrap();
        let y = sample_fou_volterra(grid, &params, 3).unwrap();
        for (j, t) in grid.times().iter().enumerate() {
            assert_eq!(x.component(0)[j], 1.5 * (-t).exp());
            assert_eq!(y.component(0)[j], 1.5 * (-t).exp());
        }
    }

    #[test]
    fn zero_fbm_path_is_exact_decay() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let zero = SamplePath::new(grid, vec![vec![0.0; 11]], ProcessLabel::Fbm).unwrap();
        let params = FouParams::new(h(0.4), 2.0, vec![-0.5]).unwrap();
        let x = fou_from_fbm(&zero, &params).unwrap();
        for (j, t) in grid.times().iter().enumerate() {
            assert_eq!(x.component(0)[j], -0.5 * (-t).exp());
        }
    }

    #[test]
    fn initial_value_exact() {
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let params = FouParams::new(h(0.3), 1.0, vec![0.25, -3.0]).unwrap();
        let b = sample_fbm(grid, h(0.3), 2, 9, FbmMethod::Cholesky).unwrap();
        let x = fou_from_fbm(&b, &params).unwrap();
        assert_eq!(x.point(0), vec![0.25, -3.0]);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let grid = TimeGrid::new(1.0, 8).unwrap();
        let b = sample_fbm(grid, h(0.3), 2, 9, FbmMethod::Cholesky).unwrap();
        let params = FouParams::centered(h(0.3), 1.0, 1).unwrap();
        assert!(matches!(
            fou_from_fbm(&b, &params),
            Err(FoultError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn classical_cov_examples() {
        assert_eq!(ou_cov_classical(0.0, 1.3, 1.0).unwrap(), 0.0);
        let e2 = 2f64.exp();
        let a = ou_cov_classical(1.0, 1.0, 1.0).unwrap();
        assert!((a - (-2f64).exp() * (e2 - 1.0) / 2.0).abs() < 1e-15);
        assert!((a - 0.432332).abs() < 1e-6);
        let b = ou_cov_classical(2.0, 1.0, 1.0).unwrap();
        assert!((b - (-3f64).exp() * (e2 - 1.0) / 2.0).abs() < 1e-15);
        assert!((b - 0.159046).abs() < 1e-6);
        assert!(ou_cov_classical(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn brownian_kernel_is_exponential() {
        for (t, u) in [(1.0, 0.5), (2.0, 0.1), (0.3, 0.29)] {
            assert_eq!(volterra_kernel(t, u, h(0.5)).unwrap(), (u - t).exp());
        }
    }

    #[test]
    fn kernel_domain_checked() {
        assert!(volterra_kernel(1.0, 1.0, h(0.7)).is_err());
        assert!(volterra_kernel(1.0, 0.0, h(0.7)).is_err());
        assert!(volterra_kernel(1.0, 1.5, h(0.3)).is_err());
    }

    #[test]
    fn k_h_values() {
        // Gamma(1) = 1 at H = 1/2 under both readings
        assert!((k_h_constant(h(0.5), KhReading::Standard) - 1.0).abs() < 1e-15);
        for eps in [1e-4, 1e-6] {
            assert!((k_h_constant(h(0.5 + eps), KhReading::Standard) - 1.0).abs() < 10.0 * eps);
            assert!((k_h_constant(h(0.5 - eps), KhReading::Standard) - 1.0).abs() < 10.0 * eps);
        }
        // Gamma(0.75) = 1.2254167024651776, Gamma(1.25) = 0.9064024770554771,
        // Gamma(0.5) = sqrt(pi)
        let g075 = 1.225_416_702_465_177;
        let g125 = 0.906_402_477_055_477;
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let expected = (1.5 * g075 / (g125 * sqrt_pi)).sqrt();
        assert!((k_h_constant(h(0.75), KhReading::Standard) - expected).abs() < 1e-12);
        assert!((expected - 1.069_645).abs() < 1e-6);
        let literal = 1.5 * g075 / (g125 * sqrt_pi.sqrt());
        assert!((k_h_constant(h(0.75), KhReading::Literal) - literal).abs() < 1e-12);
        // Gamma(1.25), Gamma(0.75), Gamma(1.5) = sqrt(pi)/2
        let low = (0.5 * g125 / (g075 * sqrt_pi / 2.0)).sqrt();
        assert!((k_h_constant(h(0.25), KhReading::Standard) - low).abs() < 1e-12);
    }

    #[test]
    fn generator_paths_are_labeled() {
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let params = FouParams::centered(h(0.3), 1.0, 1).unwrap();
        let g = FouGenerator::new(grid, params, Generator::default()).unwrap();
        assert_eq!(
            g.path(1, Domain::ProcessA, 0).unwrap().label(),
            ProcessLabel::FouFirst
        );
        assert_eq!(
            g.path(1, Domain::ProcessB, 0).unwrap().label(),
            ProcessLabel::FouSecond
        );
    }
}
