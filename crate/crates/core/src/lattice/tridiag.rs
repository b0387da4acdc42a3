//! Symmetric tridiagonal eigensolver (implicit QL with Wilkinson shifts).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleParticleSpectrum {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl SingleParticleSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `N × N`, column `α` is the orbital with energy `values[α]`.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Largest `|VᵀV − I|` entry.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.vectors.transpose() * &self.vectors;
        let n = self.dim();
        (g - DMatrix::<f64>::identity(n, n)).amax()
    }
}

/// Diagonalizes the symmetric tridiagonal matrix with diagonal `diag` and
/// first off-diagonal `off` (`off.len() == diag.len() − 1`).
///
/// Eigenvector signs are fixed so that the largest-magnitude component of
/// each column is positive.
pub fn eigh_tridiagonal(diag: &[f64], off: &[f64]) -> Result<SingleParticleSpectrum> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::DimensionMismatch(format!(
            "tridiagonal matrix with {} diagonal and {} off-diagonal entries",
            n,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = DMatrix::<f64>::identity(n, n);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::Eigensolver(l));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let f = z[(k, i + 1)];
                    z[(k, i + 1)] = s * z[(k, i)] + c * f;
                    z[(k, i)] = c * z[(k, i)] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut v = z.column(src).clone_owned();
        let pivot = v
            .iter()
            .cloned()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            v.neg_mut();
        }
        vectors.set_column(col, &v);
    }
    Ok(SingleParticleSpectrum { values, vectors })
}
