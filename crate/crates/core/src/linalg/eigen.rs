//! Hermitian eigendecomposition and spectral time evolution.
//!
//! The solver reduces the matrix to Hermitian tridiagonal form with complex
//! Householder reflectors, rotates the subdiagonal onto the real axis with a
//! diagonal phase transform, and finishes with implicit QL iterations on the
//! resulting real symmetric tridiagonal matrix. Eigenvectors from QL are
//! orthonormal even inside degenerate clusters.

use num_complex::Complex64;

use super::matrix::{inner, ComplexMatrix};
use crate::error::{Error, Result};

/// Relative Hermiticity tolerance, scaled by the max-entry norm.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

const MAX_QL_ITERATIONS: usize = 200;

/// Eigenvalues sorted ascending with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    values: Vec<f64>,
    /// Column `k` holds the eigenvector belonging to `values[k]`.
    vectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        (0..self.dim()).map(|i| self.vectors[(i, k)]).collect()
    }

    /// `sum_k f(lambda_k) |v_k><v_k|`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.dim();
        let weights: Vec<Complex64> = self.values.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| weights[k] * self.vectors[(i, k)] * self.vectors[(j, k)].conj())
                .sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| Complex64::new(l, 0.0))
    }

    /// Applies `exp(-i H t)` to `v` using the stored spectrum.
    pub fn propagate(&self, t: f64, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let overlap: Complex64 = (0..n).map(|i| self.vectors[(i, k)].conj() * v[i]).sum();
            *c = overlap * Complex64::from_polar(1.0, -self.values[k] * t);
        }
        Ok((0..n)
            .map(|i| self.vectors.row(i).iter().zip(&coeffs).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// Diagonalizes a Hermitian matrix.
pub fn hermitian_eigendecompose(m: &ComplexMatrix) -> Result<EigenSystem> {
    m.require_square()?;
    let n = m.rows();
    let tolerance = HERMITIAN_TOLERANCE * m.max_abs();
    let deviation = m.hermiticity_deviation()?;
    if deviation > tolerance {
        return Err(Error::NotHermitian { deviation, tolerance });
    }
    if n == 0 {
        return Ok(EigenSystem {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }

    let (mut diag, mut sub, mut vectors) = tridiagonalize(m);
    tridiagonal_ql(&mut diag, &mut sub, &mut vectors);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    let values = order.iter().map(|&k| diag[k]).collect();
    let sorted = ComplexMatrix::from_fn(n, n, |i, k| vectors[(i, order[k])]);
    Ok(EigenSystem {
        values,
        vectors: sorted,
    })
}

/// Computes `exp(-i H t) v` through the spectral decomposition of `h`.
pub fn unitary_evolve(h: &ComplexMatrix, t: f64, v: &[Complex64]) -> Result<Vec<Complex64>> {
    h.require_square()?;
    if v.len() != h.rows() {
        return Err(Error::DimensionMismatch {
            expected: h.rows(),
            found: v.len(),
        });
    }
    hermitian_eigendecompose(h)?.propagate(t, v)
}

/// Returns the real diagonal, the real (non-negative) subdiagonal and the
/// unitary `Q` with `M = Q T Q^H`.
fn tridiagonalize(m: &ComplexMatrix) -> (Vec<f64>, Vec<f64>, ComplexMatrix) {
    let n = m.rows();
    let zero = Complex64::new(0.0, 0.0);
    let mut a = m.clone();
    // Symmetrize so that rounding in the input does not leak into the reduction.
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    let mut q = ComplexMatrix::identity(n);
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];

    for k in 0..n.saturating_sub(2) {
        let tail_norm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if tail_norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        v.iter_mut().for_each(|z| *z = zero);
        v[k + 1] = x0 + phase * tail_norm;
        for i in k + 2..n {
            v[i] = a[(i, k)];
        }
        let v_norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if v_norm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= v_norm);

        // A <- (I - 2vv^H) A (I - 2vv^H) = A - 2 (v w^H + w v^H), w = Av - (v^H A v) v
        for (i, pi) in p.iter_mut().enumerate() {
            *pi = (k + 1..n).map(|j| a[(i, j)] * v[j]).sum();
        }
        let kappa = inner(&v, &p).re;
        let w: Vec<Complex64> = p.iter().zip(&v).map(|(&pi, &vi)| pi - kappa * vi).collect();
        for i in 0..n {
            for j in 0..n {
                let delta = v[i] * w[j].conj() + w[i] * v[j].conj();
                if delta != zero {
                    a[(i, j)] -= 2.0 * delta;
                }
            }
        }
        // Q <- Q (I - 2vv^H)
        for i in 0..n {
            let qv: Complex64 = (k + 1..n).map(|j| q[(i, j)] * v[j]).sum();
            for j in k + 1..n {
                q[(i, j)] -= 2.0 * qv * v[j].conj();
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut sub = vec![0.0; n];
    // Column phases D with D^H T D real: d_{i+1} = d_i e_i / |e_i|.
    let mut d = Complex64::new(1.0, 0.0);
    for i in 0..n {
        if i > 0 {
            let e = a[(i, i - 1)];
            let e_abs = e.norm();
            sub[i - 1] = e_abs;
            if e_abs > 0.0 {
                d *= e / e_abs;
            }
        }
        for r in 0..n {
            q[(r, i)] *= d;
        }
    }
    (diag, sub, q)
}

/// Implicit QL on a real symmetric tridiagonal matrix; `sub[i]` couples rows
/// `i` and `i + 1`. Rotations are accumulated into the columns of `z`.
fn tridiagonal_ql(diag: &mut [f64], sub: &mut [f64], z: &mut ComplexMatrix) {
    let n = diag.len();
    let eps = f64::EPSILON;
    let mut shift_total = 0.0;
    let mut scale = 0.0f64;
    for l in 0..n {
        scale = scale.max(diag[l].abs() + sub[l].abs());
        let mut m = l;
        while m < n - 1 && sub[m].abs() > eps * scale {
            m += 1;
        }
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                let g = diag[l];
                let mut p = (diag[l + 1] - g) / (2.0 * sub[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                diag[l] = sub[l] / (p + r);
                diag[l + 1] = sub[l] * (p + r);
                let dl1 = diag[l + 1];
                let mut h = g - diag[l];
                for d in diag.iter_mut().skip(l + 2) {
                    *d -= h;
                }
                shift_total += h;

                p = diag[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = sub[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * sub[i];
                    h = c * p;
                    r = p.hypot(sub[i]);
                    sub[i + 1] = s * r;
                    s = sub[i] / r;
                    c = p / r;
                    p = c * diag[i] - s * g;
                    diag[i + 1] = h + s * (c * g + s * diag[i]);
                    for k in 0..n {
                        let zk1 = z[(k, i + 1)];
                        let zk = z[(k, i)];
                        z[(k, i + 1)] = s * zk + c * zk1;
                        z[(k, i)] = c * zk - s * zk1;
                    }
                }
                p = -s * s2 * c3 * el1 * sub[l] / dl1;
                sub[l] = s * p;
                diag[l] = c * p;
                if sub[l].abs() <= eps * scale || iterations >= MAX_QL_ITERATIONS {
                    break;
                }
            }
        }
        diag[l] += shift_total;
        sub[l] = 0.0;
    }
}
