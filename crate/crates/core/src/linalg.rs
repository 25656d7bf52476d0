//! Dense symmetric matrices: Cholesky factorization and a cyclic Jacobi
//! eigensolver. Sizes here are at most a few thousand, so plain row-major
//! storage is enough.

use crate::error::{FoultError, Result};

/// Square matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(FoultError::DimensionMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        Ok(Matrix::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }
}

/// Lower-triangular Cholesky factor, stored densely.
#[derive(Debug, Clone)]
pub struct Cholesky {
    lower: Matrix,
}

impl Cholesky {
    /// Factors `a`; on failure retries once with a diagonal jitter of
    /// `1e-12 * trace / n`.
    pub fn new(a: &Matrix) -> Result<Self> {
        match factor(a, 0.0) {
            Ok(lower) => Ok(Cholesky { lower }),
            Err(_) => {
                let jitter = 1e-12 * a.trace() / a.size().max(1) as f64;
                factor(a, jitter).map(|lower| Cholesky { lower })
            }
        }
    }

    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    /// `L z`, using only the lower triangle.
    pub fn mul_lower(&self, z: &[f64], out: &mut [f64]) {
        let n = self.lower.size();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let row = &self.lower.row(i)[..=i];
            *o = row.iter().zip(z).map(|(l, x)| l * x).sum();
        }
    }
}

fn factor(a: &Matrix, jitter: f64) -> Result<Matrix> {
    let n = a.size();
    let mut l = Matrix::zeros(n);
    for j in 0..n {
        let mut d = a.get(j, j) + jitter;
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(FoultError::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l.set(j, j, djj);
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            let (ri, rj) = (l.row(i), l.row(j));
            for k in 0..j {
                s -= ri[k] * rj[k];
            }
            l.set(i, j, s / djj);
        }
    }
    Ok(l)
}

/// Sweep cap of the Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, in
/// ascending order. Iterates until the off-diagonal Frobenius norm is at
/// most `1e-12 * |trace|` (or exactly zero).
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    let n = a.size();
    let mut m = a.clone();
    let scale = a.trace().abs().max(f64::MIN_POSITIVE);
    let threshold = 1e-12 * scale;
    let off_norm = |m: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m.get(i, j) * m.get(i, j);
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    loop {
        let off = off_norm(&m);
        if off <= threshold {
            break;
        }
        if sweeps >= JACOBI_MAX_SWEEPS {
            return Err(FoultError::EigenFailure {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (m.get(p, p), m.get(q, q));
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m.get(k, p), m.get(k, q));
                    m.set(k, p, c * akp - s * akq);
                    m.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let (apk, aqk) = (m.get(p, k), m.get(q, k));
                    m.set(p, k, c * apk - s * aqk);
                    m.set(q, k, s * apk + c * aqk);
                }
                m.set(p, q, 0.0);
                m.set(q, p, 0.0);
            }
        }
        sweeps += 1;
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}
