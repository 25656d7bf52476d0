//! Exact fOU covariances and empirical probes of the eigenvalue,
//! determinant and local-nondeterminism lower bounds.
//!
//! With `x0 = 0`, integration by parts gives
//! `X_t = v (B_t − ∫_0^t e^{u−t} B_u du)`, hence
//!
//! ```text
//! Cov(X_t, X_s) / v² = R(t,s) − ∫_0^s e^{r−s} R(t,r) dr − ∫_0^t e^{u−t} R(u,s) du
//!                      + ∫_0^t ∫_0^s e^{u−t+r−s} R(u,r) dr du
//! ```
//!
//! where `R` is the fBm covariance. The separable parts of the double
//! integral factor into one-dimensional integrals, and the `|u−r|^{2H}`
//! part reduces to a single integral over the lag `w = |u−r|`. Every
//! remaining integrand is bounded, so the routine is valid for all H.

use rand::Rng;

use crate::error::{FoultError, Result};
use crate::fbm::{fbm_cov_unchecked, HurstParam};
use crate::linalg::{symmetric_eigenvalues, Matrix};
use crate::quadrature::{integrate_with_breaks, Tolerance};
use crate::rng::{substream, Domain};

const COV_TOLERANCE: Tolerance = Tolerance::new(1e-15, 1e-13);

/// Relative PSD tolerance on the smallest eigenvalue of `Q`.
pub const PSD_TOLERANCE: f64 = 1e-10;

fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, kinks: &[f64]) -> Result<f64> {
    let mut points = vec![a];
    points.extend(kinks.iter().copied().filter(|k| *k > a && *k < b));
    points.push(b);
    Ok(integrate_with_breaks(f, &points, COV_TOLERANCE)?.value)
}

/// `Cov(X_t, X_s)` of the fOU process (deterministic start).
pub fn fou_cov(t: f64, s: f64, hurst: HurstParam, v: f64) -> Result<f64> {
    if !(t >= 0.0 && s >= 0.0 && t.is_finite() && s.is_finite()) {
        return Err(FoultError::invalid(
            "t",
            format!("invalid time pair ({t}, {s})"),
        ));
    }
    if v == 0.0 || t == 0.0 || s == 0.0 {
        return Ok(0.0);
    }
    // Symmetric in (t, s); fix the argument order so both calls agree bitwise.
    let (t, s) = if t >= s { (t, s) } else { (s, t) };
    let h = hurst.value();
    let two_h = 2.0 * h;
    let r = |a: f64, b: f64| fbm_cov_unchecked(a, b, h);

    let cross_ts = quad(|x| (x - s).exp() * r(t, x), 0.0, s, &[])?;
    let cross_st = quad(|x| (x - t).exp() * r(x, s), 0.0, t, &[s])?;
    let damped_power = |a: f64| quad(|x| (x - a).exp() * x.powf(two_h), 0.0, a, &[]);
    let (pt, ps) = (damped_power(t)?, damped_power(s)?);

    // e^{−(t+s)} ∫∫ e^{u+r} |u−r|^{2H}, split by the sign of u − r.
    let lag_part = |outer: f64, inner: f64| {
        quad(
            |w| {
                let m = inner.min(outer - w);
                w.powf(two_h) * ((w + 2.0 * m - t - s).exp() - (w - t - s).exp())
            },
            0.0,
            outer,
            &[outer - inner],
        )
    };
    let lag = 0.5 * (lag_part(t, s)? + lag_part(s, t)?);
    let double = 0.5 * (pt * (1.0 - (-s).exp()) + ps * (1.0 - (-t).exp()) - lag);

    Ok(v * v * (r(t, s) - cross_ts - cross_st + double))
}

/// Covariance matrix `Q = (Cov(X_{s_j}, X_{s_k}))` on a time list.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    times: Vec<f64>,
    entries: Matrix,
}

impl CovMatrix {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn size(&self) -> usize {
        self.times.len()
    }
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(FoultError::invalid("times", "need at least one time"));
    }
    if !(times[0] > 0.0) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(FoultError::invalid(
            "times",
            "times must be positive and strictly increasing",
        ));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(FoultError::invalid("times", "times must be finite"));
    }
    Ok(())
}

/// Builds `Q` from [`fou_cov`] and checks positive semi-definiteness.
pub fn build_q(times: &[f64], hurst: HurstParam, v: f64) -> Result<CovMatrix> {
    validate_times(times)?;
    if !(v > 0.0) {
        return Err(FoultError::invalid(
            "model.v",
            "covariance is degenerate unless v > 0",
        ));
    }
    let n = times.len();
    let mut entries = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let c = fou_cov(times[i], times[j], hurst, v)?;
            entries.set(i, j, c);
            entries.set(j, i, c);
        }
    }
    let floor = -PSD_TOLERANCE * entries.trace();
    let smallest = symmetric_eigenvalues(&entries)?[0];
    if smallest < floor {
        return Err(FoultError::NotPositiveSemidefinite {
            eigenvalue: smallest,
            floor,
        });
    }
    Ok(CovMatrix {
        times: times.to_vec(),
        entries,
    })
}

/// Smallest eigenvalue `λ₁(Q)`.
pub fn min_eigenvalue(q: &CovMatrix) -> Result<f64> {
    Ok(symmetric_eigenvalues(&q.entries)?[0])
}

fn gaps(times: &[f64]) -> impl Iterator<Item = f64> + '_ {
    std::iter::once(times[0]).chain(times.windows(2).map(|w| w[1] - w[0]))
}

/// `λ₁(Q) / min_j (s_j − s_{j−1})^{2H}` with `s_0 = 0`.
pub fn eigen_bound_ratio(times: &[f64], hurst: HurstParam, v: f64) -> Result<f64> {
    let q = build_q(times, hurst, v)?;
    let two_h = 2.0 * hurst.value();
    let floor = gaps(times)
        .map(|g| g.powf(two_h))
        .fold(f64::INFINITY, f64::min);
    Ok(min_eigenvalue(&q)? / floor)
}

/// `(det Q / Π_j (s_j − s_{j−1})^{2H})^{1/n}`; zero if the computed
/// determinant is not positive.
pub fn det_bound_ratio(times: &[f64], hurst: HurstParam, v: f64) -> Result<f64> {
    let q = build_q(times, hurst, v)?;
    let eig = symmetric_eigenvalues(q.entries())?;
    if eig.iter().any(|l| *l <= 0.0) {
        return Ok(0.0);
    }
    let two_h = 2.0 * hurst.value();
    let log_det: f64 = eig.iter().map(|l| l.ln()).sum();
    let log_gaps: f64 = gaps(times).map(|g| two_h * g.ln()).sum();
    Ok(((log_det - log_gaps) / times.len() as f64).exp())
}

/// `Var(X_u − X_s) / (u − s)^{2H}` for `0 ≤ s < u`.
pub fn lnd_ratio(hurst: HurstParam, v: f64, u: f64, s: f64) -> Result<f64> {
    if !(s >= 0.0 && u > s) {
        return Err(FoultError::invalid(
            "s",
            format!("need 0 <= s < u, got s = {s}, u = {u}"),
        ));
    }
    let var = fou_cov(u, u, hurst, v)? + fou_cov(s, s, hurst, v)? - 2.0 * fou_cov(u, s, hurst, v)?;
    Ok(var / (u - s).powf(2.0 * hurst.value()))
}

/// Seed of the fixed probe-grid sample.
pub const PROBE_SEED: u64 = 0x5052_4f42_4553;
pub const PROBE_GRID_COUNT: usize = 100;
pub const PROBE_HORIZON: f64 = 2.0;

/// `count` grids with `n` uniform on `{2..6}` and sorted uniform times in
/// `(0, 2]`.
pub fn probe_grids(seed: u64, count: usize) -> Vec<Vec<f64>> {
    let mut rng = substream(seed, Domain::Probe, 0, 0);
    let mut grids = Vec::with_capacity(count);
    while grids.len() < count {
        let n = rng.random_range(2..=6usize);
        let mut times: Vec<f64> = (0..n)
            .map(|_| PROBE_HORIZON * (1.0 - rng.random::<f64>()))
            .collect();
        times.sort_by(f64::total_cmp);
        if times.windows(2).all(|w| w[1] > w[0]) {
            grids.push(times);
        }
    }
    grids
}

/// Bound ratios on one probe grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundProbe {
    pub times: Vec<f64>,
    pub eigen_ratio: f64,
    pub det_ratio: f64,
    /// Minimum of [`lnd_ratio`] over consecutive pairs, starting at `s_0 = 0`.
    pub lnd_ratio: f64,
}

impl BoundProbe {
    pub fn min_ratio(&self) -> f64 {
        self.eigen_ratio.min(self.det_ratio).min(self.lnd_ratio)
    }
}

pub fn probe_bounds(grids: &[Vec<f64>], hurst: HurstParam, v: f64) -> Result<Vec<BoundProbe>> {
    crate::try_par_map(grids.len(), |i| {
        let times = &grids[i];
        let mut lnd = lnd_ratio(hurst, v, times[0], 0.0)?;
        for w in times.windows(2) {
            lnd = lnd.min(lnd_ratio(hurst, v, w[1], w[0])?);
        }
        Ok(BoundProbe {
            times: times.clone(),
            eigen_ratio: eigen_bound_ratio(times, hurst, v)?,
            det_ratio: det_bound_ratio(times, hurst, v)?,
            lnd_ratio: lnd,
        })
    })
}
