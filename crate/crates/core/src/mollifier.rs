//! Gaussian approximation `f_ε` of the Dirac delta and its partial
//! derivatives, evaluated in real space through Hermite polynomials:
//!
//! ```text
//! ∂^k f_ε(x) = (2πε)^{−d/2} Π_i (−1)^{k_i} ε^{−k_i/2} He_{k_i}(x_i/√ε) e^{−x_i²/(2ε)}
//! ```

use std::f64::consts::PI;

use crate::error::{FoultError, Result};

/// Largest total derivative order accepted.
pub const MAX_ORDER: usize = 30;

/// Exponent beyond which the Gaussian factor is treated as exactly zero.
const UNDERFLOW_EXPONENT: f64 = 700.0;

/// Derivative orders `k = (k_1, …, k_d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(orders: Vec<usize>) -> Result<Self> {
        if orders.is_empty() {
            return Err(FoultError::invalid(
                "query.k",
                "multi-index needs at least one entry",
            ));
        }
        Ok(MultiIndex(orders))
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim.max(1)])
    }

    pub fn orders(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|k| = Σ k_i`.
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// `k + e_i`.
    pub fn raised(&self, i: usize) -> Self {
        let mut k = self.0.clone();
        k[i] += 1;
        MultiIndex(k)
    }
}

/// Mollifier variance `ε > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Bandwidth(f64);

impl Bandwidth {
    pub fn new(eps: f64) -> Result<Self> {
        if eps > 0.0 && eps.is_finite() {
            Ok(Bandwidth(eps))
        } else {
            Err(FoultError::invalid(
                "query.epsilon",
                format!("{eps} must be positive"),
            ))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Probabilists' Hermite polynomial `He_m(z)`.
pub fn hermite_poly(m: usize, z: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, z);
    match m {
        0 => 1.0,
        _ => {
            for n in 1..m {
                let next = z * cur - n as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// `f_ε(x) = (2πε)^{−d/2} exp(−|x|²/(2ε))`.
pub fn mollifier(x: &[f64], eps: Bandwidth) -> f64 {
    let e = eps.value();
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let exponent = r2 * (0.5 / e);
    if exponent > UNDERFLOW_EXPONENT {
        return 0.0;
    }
    (2.0 * PI * e).powf(-(x.len() as f64) / 2.0) * (-exponent).exp()
}

/// `∂^k f_ε(x)`.
pub fn mollifier_deriv(x: &[f64], eps: Bandwidth, k: &MultiIndex) -> Result<f64> {
    Ok(MollifierKernel::new(eps, k.clone())?.eval(x))
}

/// `∂^k f_ε` with its constants precomputed, for inner loops.
#[derive(Debug, Clone, PartialEq)]
pub struct MollifierKernel {
    eps: Bandwidth,
    k: MultiIndex,
    inv_sqrt_eps: f64,
    inv_two_eps: f64,
    /// `(2πε)^{−d/2} Π_i (−1)^{k_i} ε^{−k_i/2}`.
    prefactor: f64,
}

impl MollifierKernel {
    pub fn new(eps: Bandwidth, k: MultiIndex) -> Result<Self> {
        let order = k.total();
        if order > MAX_ORDER {
            return Err(FoultError::OrderTooLarge {
                order,
                cap: MAX_ORDER,
            });
        }
        let e = eps.value();
        let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
        let prefactor =
            sign * (2.0 * PI * e).powf(-(k.dim() as f64) / 2.0) * e.powf(-(order as f64) / 2.0);
        Ok(MollifierKernel {
            eps,
            k,
            inv_sqrt_eps: 1.0 / e.sqrt(),
            inv_two_eps: 0.5 / e,
            prefactor,
        })
    }

    pub fn bandwidth(&self) -> Bandwidth {
        self.eps
    }

    pub fn index(&self) -> &MultiIndex {
        &self.k
    }

    pub fn dim(&self) -> usize {
        self.k.dim()
    }

    /// Evaluates at `x`, whose length must equal the multi-index dimension.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.k.dim());
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let exponent = r2 * self.inv_two_eps;
        if exponent > UNDERFLOW_EXPONENT {
            return 0.0;
        }
        let mut poly = 1.0;
        for (xi, &ki) in x.iter().zip(self.k.orders()) {
            if ki > 0 {
                poly *= hermite_poly(ki, xi * self.inv_sqrt_eps);
            }
        }
        self.prefactor * poly * (-exponent).exp()
    }

    /// One-dimensional fast path.
    #[inline]
    pub fn eval1(&self, x: f64) -> f64 {
        let exponent = x * x * self.inv_two_eps;
        if exponent > UNDERFLOW_EXPONENT {
            return 0.0;
        }
        let k = self.k.orders()[0];
        let poly = if k == 0 {
            1.0
        } else {
            hermite_poly(k, x * self.inv_sqrt_eps)
        };
        self.prefactor * poly * (-exponent).exp()
    }
}
