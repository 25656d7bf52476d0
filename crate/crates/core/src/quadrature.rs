//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! Handles the integrable algebraic endpoint singularities that appear in
//! the fBm covariance integrals by repeated bisection of the worst interval.

use crate::error::{FoultError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

/// Requested accuracy: the run stops once the summed error estimate is
/// below `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }
}

/// A quadrature value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Integrates `f` over `[points[0], points[last]]`, seeding the adaptive
/// partition with the given breakpoints (kinks of the integrand).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    tol: Tolerance,
) -> Result<Integral> {
    let mut panels: Vec<Panel> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod(&f, w[0], w[1]))
        .collect();
    if panels.is_empty() {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
        });
    }
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = tol.abs.max(tol.rel * value.abs());
        if !(value.is_finite() && error.is_finite()) {
            return Err(FoultError::QuadratureFailure {
                error,
                tolerance: target,
            });
        }
        if error <= target {
            return Ok(Integral { value, error });
        }
        // Worst panel that can still be split meaningfully.
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                let mid = 0.5 * (p.a + p.b);
                mid > p.a && mid < p.b && (p.b - p.a) > 1e-14 * (p.a.abs() + p.b.abs())
            })
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);
        let Some(i) = worst else {
            return Err(FoultError::QuadratureFailure {
                error,
                tolerance: target,
            });
        };
        if panels.len() >= MAX_INTERVALS {
            return Err(FoultError::QuadratureFailure {
                error,
                tolerance: target,
            });
        }
        let p = panels.swap_remove(i);
        let mid = 0.5 * (p.a + p.b);
        panels.push(kronrod(&f, p.a, mid));
        panels.push(kronrod(&f, mid, p.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TIGHT: Tolerance = Tolerance::new(1e-13, 1e-13);

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, TIGHT).unwrap();
        assert!((r.value - 8.0).abs() < 1e-14);
    }

    #[test]
    fn exponential() {
        let r = integrate(f64::exp, 0.0, 1.0, TIGHT).unwrap();
        assert!((r.value - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn algebraic_endpoint_singularity() {
        // int_0^1 x^{-0.4} dx = 1/0.6
        let r = integrate(|x| x.powf(-0.4), 0.0, 1.0, Tolerance::new(1e-11, 1e-11)).unwrap();
        assert!((r.value - 1.0 / 0.6).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn kink_with_breakpoint() {
        let r = integrate_with_breaks(|x: f64| (x - 0.3).abs(), &[0.0, 0.3, 1.0], TIGHT).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn empty_interval_is_zero() {
        let r = integrate(f64::exp, 1.0, 1.0, TIGHT).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn non_integrable_reports_failure() {
        let r = integrate(|x: f64| 1.0 / x, 0.0, 1.0, TIGHT);
        assert!(matches!(r, Err(FoultError::QuadratureFailure { .. })));
    }
}
