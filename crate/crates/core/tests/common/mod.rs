//! Test-only oracles, independent of the library's numerical paths.
#![allow(dead_code)]

use molring::linalg::{inner, ComplexMatrix};
use num_complex::Complex64;
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_complex_vector(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

pub fn normalized(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
    v
}

/// Random unitary from modified Gram-Schmidt on random complex columns.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = random_complex_vector(rng, n);
        for u in &cols {
            let proj = inner(u, &v);
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    ComplexMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// `U diag(spectrum) U^H` with a random unitary `U`.
pub fn hermitian_with_spectrum(rng: &mut impl Rng, spectrum: &[f64]) -> ComplexMatrix {
    let u = random_unitary(rng, spectrum.len());
    let d = ComplexMatrix::diagonal(spectrum);
    &(&u * &d) * &u.adjoint()
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    &(&a + &a.adjoint()) * 0.5
}

/// exp(A) by scaling and squaring with a fixed-order Taylor series.
pub fn taylor_expm(a: &ComplexMatrix, order: usize) -> ComplexMatrix {
    let n = a.rows();
    let norm = a.max_abs() * n as f64;
    let mut squarings = 0u32;
    while norm / 2f64.powi(squarings as i32) > 0.25 {
        squarings += 1;
    }
    let scaled = a * (1.0 / 2f64.powi(squarings as i32));
    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=order {
        term = &(&term * &scaled) * (1.0 / k as f64);
        result = &result + &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

pub fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
