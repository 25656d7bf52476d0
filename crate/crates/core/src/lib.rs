//! Simulation of fractional Ornstein-Uhlenbeck processes and their
//! regularized higher-order derivative local times.
//!
//! The crate is organized bottom-up:
//!
//! * [`fbm`]: exact fractional Brownian motion sampling (Cholesky and
//!   circulant embedding) on uniform grids.
//! * [`fou`]: fOU paths from the explicit solution and from the Volterra
//!   kernel representation.
//! * [`mollifier`]: the Gaussian delta approximation and its derivatives.
//! * [`localtime`]: regularized (intersection) local times, Monte Carlo
//!   second moments and the bandwidth Cauchy gap.
//! * [`gaussian_analysis`]: exact covariance matrices and probes of their
//!   eigenvalue/determinant lower bounds.
//! * [`regularity`]: temporal and spatial moment-scaling regressions.
//!
//! All Monte Carlo drivers draw from counter-based substreams
//! ([`rng::substream`]) and return per-path results in index order, so
//! ensembles are identical for any number of worker threads.

pub mod error;
pub mod fbm;
pub mod fou;
pub mod gaussian_analysis;
pub mod linalg;
pub mod localtime;
pub mod mollifier;
pub mod quadrature;
pub mod regularity;
pub mod rng;
pub mod stats;

pub use error::{FoultError, Result};
pub use fbm::{
    fbm_cov, fbm_cov_matrix, sample_fbm, FbmMethod, FbmSampler, HurstParam, ProcessLabel,
    SamplePath, TimeGrid,
};
pub use fou::{
    fou_from_fbm, k_h_constant, ou_cov_classical, sample_fou_volterra, volterra_kernel,
    FouGenerator, FouParams, Generator, KhReading, LowHurstCoefficient, VolterraKernel,
    VolterraSampler,
};
pub use gaussian_analysis::{
    build_q, det_bound_ratio, eigen_bound_ratio, fou_cov, lnd_ratio, min_eigenvalue, CovMatrix,
};
pub use localtime::{
    cauchy_gap, existence_condition, holder_condition, intersection_local_time_reg, local_time_reg,
    mc_second_moment, LocalTimeQuery, McSetup,
};
pub use mollifier::{hermite_poly, mollifier, mollifier_deriv, Bandwidth, MultiIndex};
pub use regularity::{
    pathwise_holder_estimate, spatial_increment_moment, temporal_increment_moment,
    temporal_scaling_exponent, ScalingResult,
};
pub use stats::MCEstimate;

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on.
/// The output is always in index order.
#[cfg(feature = "parallel")]
pub(crate) fn try_par_map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn try_par_map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T>,
{
    (0..n).map(f).collect()
}
