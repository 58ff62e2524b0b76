//! Seeded random matrices. All generators draw from ChaCha8 so that a seed
//! determines the output bit-for-bit on every platform.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::{cr, CMatrix, Real};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_complex<T: Real>(rng: &mut impl Rng) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re), T::lit(im))
}

/// Complex Gaussian matrix with entries `N(0,1) + i·N(0,1)`.
pub fn gaussian_with<T: Real>(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix<T> {
    // Fill row-major so the draw order does not depend on storage layout.
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = gaussian_complex(rng);
        }
    }
    m
}

pub fn random_matrix<T: Real>(rows: usize, cols: usize, seed: u64) -> CMatrix<T> {
    gaussian_with(rows, cols, &mut rng(seed))
}

pub fn random_hermitian<T: Real>(n: usize, seed: u64) -> CMatrix<T> {
    let g = random_matrix::<T>(n, n, seed);
    crate::scalar::hermitian_part(&g)
}

/// Haar-like random unitary (QR of a Gaussian matrix with phase-fixed `R`).
pub fn unitary_with<T: Real>(n: usize, rng: &mut impl Rng) -> CMatrix<T> {
    let g = gaussian_with::<T>(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let mag = nalgebra::ComplexField::modulus(d);
        if mag > T::zero() {
            let phase = d / cr(mag);
            q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
        }
    }
    q
}

/// `U·diag(s)·Vᴴ` with singular values `s` drawn uniformly from `[lo, hi]`.
pub fn conditioned_with<T: Real>(n: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> CMatrix<T> {
    let u = unitary_with::<T>(n, rng);
    let v = unitary_with::<T>(n, rng);
    let s: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    let mut us = u;
    for (j, sj) in s.iter().enumerate() {
        let f = cr(T::lit(*sj));
        us.column_mut(j).iter_mut().for_each(|z| *z *= f);
    }
    us * v.adjoint()
}

/// Random HPD matrix `U·diag(λ)·Uᴴ` with eigenvalues in `[lo, hi]`.
pub fn hpd_with<T: Real>(n: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> CMatrix<T> {
    let u = unitary_with::<T>(n, rng);
    let lam: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    let mut ul = u.clone();
    for (j, l) in lam.iter().enumerate() {
        let f = cr(T::lit(*l));
        ul.column_mut(j).iter_mut().for_each(|z| *z *= f);
    }
    let h = ul * u.adjoint();
    crate::scalar::hermitian_part(&h)
}

pub fn random_hpd<T: Real>(n: usize, seed: u64) -> CMatrix<T> {
    hpd_with(n, 0.2, 5.0, &mut rng(seed))
}

/// Point drawn uniformly from the disk `|z − center| ≤ radius`.
pub fn disk_point(center: f64, radius: f64, rng: &mut impl Rng) -> Complex<f64> {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    Complex::new(center + r * theta.cos(), r * theta.sin())
}

/// Real Gaussian matrix, useful for real-valued test problems.
pub fn gaussian_real(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}
