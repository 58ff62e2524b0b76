//! Dense complex-matrix primitives: Hermitian eigendecomposition, general
//! spectra, HPD square roots, linear solves and subspace comparisons.
//!
//! The decompositions are backed by `nalgebra`. Every tolerance is relative
//! to the Frobenius norm of the input with an absolute floor of 1e-14.

use std::cmp::Ordering;

use log::{debug, warn};
use nalgebra::linalg::{Schur, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cr, fro, identity, is_finite, scale_of, CMatrix, Real};

const MAX_ITER: usize = 10_000;

/// Eigendecomposition `H = V·diag(λ)·Vᴴ` with ascending real eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    pub eigenvalues: Vec<T>,
    /// Unitary; column `i` belongs to `eigenvalues[i]`.
    pub eigenvectors: CMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn min(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> T {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    /// `V·diag(f(λ))·Vᴴ`.
    pub fn map(&self, f: impl Fn(T) -> T) -> CMatrix<T> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let s = cr(f(lam));
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= s);
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix<T> {
        self.map(|x| x)
    }
}

/// Eigenvalues of a general square matrix, counted with algebraic multiplicity
/// and ordered by (real part, imaginary part).
#[derive(Debug, Clone)]
pub struct Spectrum<T: Real> {
    pub values: Vec<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `max |λ|`.
    pub fn radius(&self) -> T {
        self.values
            .iter()
            .map(|z| nalgebra::ComplexField::modulus(*z))
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// Largest imaginary part in magnitude.
    pub fn max_imag(&self) -> T {
        self.values
            .iter()
            .map(|z| z.im.abs())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn real_parts(&self) -> Vec<T> {
        self.values.iter().map(|z| z.re).collect()
    }
}

fn cmp_complex<T: Real>(a: &Complex<T>, b: &Complex<T>) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

fn require_square<T: Real>(m: &CMatrix<T>) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::dims(
            "nonempty square matrix",
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    Ok(())
}

fn require_finite<T: Real>(m: &CMatrix<T>) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Relative Hermitian defect `‖H − Hᴴ‖_F / max(1e-14, ‖H‖_F)`.
pub fn hermitian_defect<T: Real>(h: &CMatrix<T>) -> T {
    fro(&(h - h.adjoint())) / scale_of(h)
}

pub fn hermitian_eig<T: Real>(h: &CMatrix<T>) -> Result<HermitianEigen<T>> {
    require_square(h)?;
    require_finite(h)?;
    let defect = hermitian_defect(h);
    if defect > T::tol(1e-10) {
        return Err(Error::NonHermitian {
            residual: defect.as_f64(),
        });
    }
    let sym = crate::scalar::hermitian_part(h);
    let eig = SymmetricEigen::try_new(sym, T::default_epsilon(), MAX_ITER)
        .ok_or(Error::ConvergenceFailure)?;
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(Ordering::Equal)
    });
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues of a Hermitian matrix only.
pub fn hermitian_eigenvalues<T: Real>(h: &CMatrix<T>) -> Result<Vec<T>> {
    hermitian_eig(h).map(|e| e.eigenvalues)
}

/// All eigenvalues of a general square matrix via the complex Schur form.
pub fn general_spectrum<T: Real>(m: &CMatrix<T>) -> Result<Spectrum<T>> {
    require_square(m)?;
    require_finite(m)?;
    let (_, t) = robust_schur(m)?;
    let mut values: Vec<Complex<T>> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    if values
        .iter()
        .any(|z| !(z.re.as_f64().is_finite() && z.im.as_f64().is_finite()))
    {
        return Err(Error::ConvergenceFailure);
    }
    values.sort_by(cmp_complex);
    Ok(Spectrum { values })
}

/// Complex Schur factorization `M = Q·T·Qᴴ`.
pub fn schur<T: Real>(m: &CMatrix<T>) -> Result<(CMatrix<T>, CMatrix<T>)> {
    require_square(m)?;
    require_finite(m)?;
    robust_schur(m)
}

/// The QR iteration can stall on near-scalar matrices and on large clusters
/// of equal eigenvalues, so failures are retried with deflation threshold
/// `max(4, n)·ε`, then on `(M − μI)/s` with `μ = tr(M)/n`, then under random
/// unitary similarities.
fn robust_schur<T: Real>(m: &CMatrix<T>) -> Result<(CMatrix<T>, CMatrix<T>)> {
    if let Some(s) = Schur::try_new(m.clone(), T::default_epsilon(), MAX_ITER) {
        return Ok(s.unpack());
    }
    let n = m.nrows();
    let loose = T::default_epsilon() * T::from_usize(n.max(4)).expect("size fits");
    if let Some(s) = Schur::try_new(m.clone(), loose, MAX_ITER) {
        debug!("Schur iteration converged with a loosened deflation threshold");
        return Ok(s.unpack());
    }
    let mu = m.trace() / cr(T::from_usize(n).expect("size fits"));
    let shifted = m - identity::<T>(n) * mu;
    let s = fro(&shifted);
    let i_n = identity::<T>(n);
    if s <= T::default_epsilon() * scale_of(m) {
        return Ok((i_n.clone(), i_n * mu));
    }
    let undo = |q: CMatrix<T>, t: CMatrix<T>| (q, t * cr(s) + &i_n * mu);
    let base = &shifted * cr(T::one() / s);
    if let Some(sc) = Schur::try_new(base.clone(), T::default_epsilon(), MAX_ITER) {
        let (q, t) = sc.unpack();
        return Ok(undo(q, t));
    }
    for seed in 0..4 {
        let u =
            crate::probgen::random::unitary_with::<T>(n, &mut crate::probgen::random::rng(seed));
        if let Some(sc) = Schur::try_new(u.adjoint() * &base * &u, T::default_epsilon(), MAX_ITER) {
            let (q, t) = sc.unpack();
            debug!("Schur iteration needed a randomized restart");
            return Ok(undo(u * q, t));
        }
    }
    Err(Error::ConvergenceFailure)
}

/// Principal square root and its inverse of an HPD matrix.
#[derive(Debug, Clone)]
pub struct HpdRoots<T: Real> {
    pub sqrt: CMatrix<T>,
    pub inv_sqrt: CMatrix<T>,
    pub inverse: CMatrix<T>,
    pub eig: HermitianEigen<T>,
}

pub fn hpd_roots<T: Real>(b: &CMatrix<T>) -> Result<HpdRoots<T>> {
    let eig = hermitian_eig(b)?;
    let top = eig.max();
    let threshold = T::tol(1e-12) * top;
    if top <= T::zero() || eig.min() <= threshold {
        return Err(Error::NotHpd {
            eigenvalue: eig.min().as_f64(),
        });
    }
    Ok(HpdRoots {
        sqrt: eig.map(|x| x.sqrt()),
        inv_sqrt: eig.map(|x| T::one() / x.sqrt()),
        inverse: eig.map(|x| T::one() / x),
        eig,
    })
}

pub fn hpd_sqrt<T: Real>(b: &CMatrix<T>) -> Result<CMatrix<T>> {
    hpd_roots(b).map(|r| r.sqrt)
}

/// `true` iff `h` is Hermitian with all eigenvalues above `1e-12·λ_max`.
pub fn is_hpd<T: Real>(h: &CMatrix<T>) -> bool {
    match hermitian_eig(h) {
        Ok(e) => e.max() > T::zero() && e.min() > T::tol(1e-12) * e.max(),
        Err(_) => false,
    }
}

/// Solve `C·Y = X` by LU with partial pivoting.
pub fn solve<T: Real>(cm: &CMatrix<T>, x: &CMatrix<T>) -> Result<CMatrix<T>> {
    require_square(cm)?;
    require_finite(cm)?;
    if x.nrows() != cm.nrows() {
        return Err(Error::dims(cm.nrows(), x.nrows()));
    }
    let lu = cm.clone().lu();
    let u = lu.u();
    let mut pmin = T::max_value().unwrap_or(T::one());
    let mut pmax = T::zero();
    for i in 0..u.nrows() {
        let p = nalgebra::ComplexField::modulus(u[(i, i)]);
        if p < pmin {
            pmin = p;
        }
        if p > pmax {
            pmax = p;
        }
    }
    if pmin <= T::tol(1e-14) * scale_of(cm) {
        return Err(Error::Singular {
            pivot: pmin.as_f64(),
        });
    }
    if pmax / pmin > T::lit(1e12) {
        warn!(
            "solve: pivot ratio {:e} suggests an ill-conditioned system",
            (pmax / pmin).as_f64()
        );
    }
    lu.solve(x).ok_or(Error::Singular {
        pivot: pmin.as_f64(),
    })
}

pub fn inverse<T: Real>(cm: &CMatrix<T>) -> Result<CMatrix<T>> {
    solve(cm, &identity(cm.nrows()))
}

/// Hermitian embedding `[[0, M], [Mᴴ, 0]]` whose eigenvalues are `±σᵢ`
/// plus `|m − n|` zeros. Used instead of a direct complex SVD, which loses
/// accuracy on rank-deficient inputs.
fn jordan_wielandt<T: Real>(m: &CMatrix<T>) -> Result<HermitianEigen<T>> {
    let (r, c) = (m.nrows(), m.ncols());
    let mut j = CMatrix::<T>::zeros(r + c, r + c);
    j.view_mut((0, r), (r, c)).copy_from(m);
    j.view_mut((r, 0), (c, r)).copy_from(&m.adjoint());
    hermitian_eig(&j)
}

/// Singular values in descending order.
pub fn singular_values<T: Real>(m: &CMatrix<T>) -> Result<Vec<T>> {
    require_finite(m)?;
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return Ok(Vec::new());
    }
    let eig = jordan_wielandt(m)?;
    Ok(eig
        .eigenvalues
        .iter()
        .rev()
        .take(k)
        .map(|&s| if s > T::zero() { s } else { T::zero() })
        .collect())
}

/// Largest singular value, `‖M‖₂`, from `λ_max` of the smaller Gram matrix.
pub fn spectral_norm<T: Real>(m: &CMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    let gram = if m.nrows() < m.ncols() {
        m * m.adjoint()
    } else {
        m.adjoint() * m
    };
    match hermitian_eig(&crate::scalar::hermitian_part(&gram)) {
        Ok(e) if e.max() > T::zero() => e.max().sqrt(),
        Ok(_) => T::zero(),
        Err(_) => fro(m),
    }
}

/// 2-norm condition number of a square matrix (`∞` when singular).
pub fn condition_number<T: Real>(m: &CMatrix<T>) -> Result<T> {
    let s = singular_values(m)?;
    let smin = *s.last().expect("nonempty");
    if smin <= T::zero() {
        return Ok(T::max_value().unwrap_or(T::lit(f64::MAX)));
    }
    Ok(s[0] / smin)
}

/// Ratio `σ_min / σ_max` of a (tall) matrix, zero when rank deficient.
pub fn column_rank_ratio<T: Real>(m: &CMatrix<T>) -> Result<T> {
    let s = singular_values(m)?;
    if s.is_empty() || s[0] <= T::zero() {
        return Ok(T::zero());
    }
    let k = m.ncols().min(m.nrows());
    if k < m.ncols() {
        return Ok(T::zero());
    }
    Ok(s[k - 1] / s[0])
}

/// Orthonormal basis (as columns) of the range of `m`, using the numerical
/// rank at `1e-10·σ_max`.
pub fn range_basis<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    require_finite(m)?;
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return Ok(CMatrix::zeros(rows, 0));
    }
    let eig = jordan_wielandt(m)?;
    let smax = eig.max();
    if smax <= T::zero() {
        return Ok(CMatrix::zeros(rows, 0));
    }
    let cols: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > T::tol(1e-10) * smax)
        .collect();
    // The upper blocks of eigenvectors for distinct positive eigenvalues
    // are orthogonal; QR restores unit length and cleans up clusters.
    let top = CMatrix::from_fn(rows, cols.len(), |r, c| eig.eigenvectors[(r, cols[c])]);
    Ok(top.qr().q().columns(0, cols.len()).into_owned())
}

/// Orthonormal basis of the null space `{x : m·x = 0}`, numerical rank at
/// `1e-10·σ_max`.
pub fn null_basis<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    require_finite(m)?;
    let n = m.ncols();
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let row_space = range_basis(&m.adjoint())?;
    let complement = identity::<T>(n) - &row_space * row_space.adjoint();
    let eig = hermitian_eig(&crate::scalar::hermitian_part(&complement))?;
    let half = T::lit(0.5);
    let cols: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > half).collect();
    Ok(CMatrix::from_fn(n, cols.len(), |r, c| {
        eig.eigenvectors[(r, cols[c])]
    }))
}

/// Sine of the largest principal angle from `R(x)` into `R(y)`, i.e.
/// `‖(I − Q_y Q_yᴴ) Q_x‖₂`. Zero iff `R(x) ⊆ R(y)`.
pub fn containment_gap<T: Real>(x: &CMatrix<T>, y: &CMatrix<T>) -> Result<T> {
    let qx = range_basis(x)?;
    let qy = range_basis(y)?;
    if qx.ncols() == 0 {
        return Ok(T::zero());
    }
    let resid = &qx - &qy * (qy.adjoint() * &qx);
    Ok(spectral_norm(&resid))
}

/// Largest principal angle (radians) between `R(x)` and `R(y)`; `π/2` when
/// the dimensions differ.
pub fn largest_principal_angle<T: Real>(x: &CMatrix<T>, y: &CMatrix<T>) -> Result<T> {
    let rx = range_basis(x)?.ncols();
    let ry = range_basis(y)?.ncols();
    if rx != ry {
        return Ok(T::frac_pi_2());
    }
    let gap = containment_gap(x, y)?;
    Ok(clamp_unit(gap).asin())
}

/// Largest principal angle for the containment `R(x) ⊆ R(y)`.
pub fn containment_angle<T: Real>(x: &CMatrix<T>, y: &CMatrix<T>) -> Result<T> {
    Ok(clamp_unit(containment_gap(x, y)?).asin())
}

fn clamp_unit<T: Real>(x: T) -> T {
    if x > T::one() {
        T::one()
    } else {
        x
    }
}

/// Multiset equality of two spectra: both sorted by real part, then matched
/// greedily within `tol`.
pub fn multiset_match<T: Real>(a: &[Complex<T>], b: &[Complex<T>], tol: T) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut a: Vec<Complex<T>> = a.to_vec();
    let mut b: Vec<Complex<T>> = b.to_vec();
    a.sort_by(cmp_complex);
    b.sort_by(cmp_complex);
    let mut used = vec![false; b.len()];
    for x in &a {
        let best = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, nalgebra::ComplexField::modulus(x - y)))
            .filter(|(_, d)| *d <= tol)
            .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap_or(Ordering::Equal));
        match best {
            Some((j, _)) => used[j] = true,
            None => return false,
        }
    }
    true
}

/// Remove the `count` entries closest to `target`; the rest keep their order.
pub fn remove_nearest<T: Real>(
    values: &[Complex<T>],
    target: Complex<T>,
    count: usize,
) -> Vec<Complex<T>> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| {
        nalgebra::ComplexField::modulus(values[i] - target)
            .partial_cmp(&nalgebra::ComplexField::modulus(values[j] - target))
            .unwrap_or(Ordering::Equal)
    });
    let drop: Vec<usize> = idx.into_iter().take(count).collect();
    values
        .iter()
        .enumerate()
        .filter(|(i, _)| !drop.contains(i))
        .map(|(_, z)| *z)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probgen::random::{random_hermitian, random_hpd, random_matrix};
    use crate::scalar::{c, from_real_rows, real_diag};

    #[test]
    fn clustered_spectrum_after_projection_shift() {
        // C·Π + I − Π with a rank-2 projection: 22 eigenvalues equal to one.
        for seed in 0..40u64 {
            let n = 24;
            let c = random_matrix::<f64>(n, n, seed);
            let p = random_matrix::<f64>(n, 2, seed + 100);
            let q = random_matrix::<f64>(n, 2, seed + 200);
            let pi = &p * solve(&(q.adjoint() * &p), &q.adjoint()).unwrap();
            let m = &c * &pi + identity::<f64>(n) - &pi;
            let s = general_spectrum(&m).unwrap();
            let ones = s
                .values
                .iter()
                .filter(|z| (**z - cr(1.0)).norm() < 1e-8)
                .count();
            assert!(ones >= n - 2, "seed {seed}: {ones}");
        }
    }

    #[test]
    fn rank_deficient_oblique_projection() {
        // Oblique projections with exact zero singular values; a direct complex
        // SVD misplaces the leading singular triplet on this input.
        let b = random_hpd::<f64>(9, 3);
        let p = random_matrix::<f64>(9, 3, 12);
        let pi = &p * inverse(&(p.adjoint() * &b * &p)).unwrap() * p.adjoint() * &b;
        let s = singular_values(&pi).unwrap();
        let sum_sq: f64 = s.iter().map(|x| x * x).sum();
        assert!((sum_sq - fro(&pi).powi(2)).abs() < 1e-10 * sum_sq);
        assert!((s[0] - spectral_norm(&pi)).abs() < 1e-12 * s[0]);
        let q = range_basis(&pi).unwrap();
        assert_eq!(q.ncols(), 3);
        assert!(largest_principal_angle(&q, &p).unwrap() < 1e-10);
        assert!(fro(&(&q * q.adjoint() * &pi - &pi)) < 1e-12 * fro(&pi));
        let nb = null_basis(&pi).unwrap();
        assert_eq!(nb.ncols(), 6);
        assert!(fro(&(&pi * nb)) < 1e-12 * fro(&pi));
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let e = hermitian_eig(&identity::<f64>(3)).unwrap();
        assert_eq!(e.eigenvalues.len(), 3);
        for l in e.eigenvalues {
            assert!((l - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_eigenvalues_ascend() {
        let e = hermitian_eig(&real_diag::<f64>(&[3.0, 1.0, 2.0])).unwrap();
        let want = [1.0, 2.0, 3.0];
        for (l, w) in e.eigenvalues.iter().zip(want) {
            assert!((l - w).abs() < 1e-14);
        }
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let h = random_hermitian::<f64>(8, 11);
        let e = hermitian_eig(&h).unwrap();
        let n = 8.0;
        let v = &e.eigenvectors;
        assert!(fro(&(v.adjoint() * v - identity::<f64>(8))) <= 1e-10 * n);
        assert!(fro(&(e.reconstruct() - &h)) <= 1e-9 * fro(&h));
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = from_real_rows::<f64>(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(hermitian_eig(&m), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn nan_is_rejected() {
        let mut m = identity::<f64>(2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(hermitian_eig(&m), Err(Error::NonFinite)));
        assert!(matches!(general_spectrum(&m), Err(Error::NonFinite)));
    }

    #[test]
    fn spectrum_of_diagonal_example() {
        let s = general_spectrum(&real_diag::<f64>(&[0.25, 0.5, 0.75])).unwrap();
        let want = [0.25, 0.5, 0.75];
        for (z, w) in s.values.iter().zip(want) {
            assert!((z - c::<f64>(w, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn nilpotent_spectrum_is_zero() {
        let s = general_spectrum(&from_real_rows::<f64>(2, 2, &[0.0, 1.0, 0.0, 0.0])).unwrap();
        assert_eq!(s.len(), 2);
        for z in s.values {
            assert!(z.norm() < 1e-14);
        }
    }

    #[test]
    fn companion_matrix_roots() {
        // z² − 3z + 2 = (z − 1)(z − 2)
        let s = general_spectrum(&from_real_rows::<f64>(2, 2, &[0.0, -2.0, 1.0, 3.0])).unwrap();
        assert!((s.values[0] - c::<f64>(1.0, 0.0)).norm() < 1e-12);
        assert!((s.values[1] - c::<f64>(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rotation_has_complex_pair() {
        let s = general_spectrum(&from_real_rows::<f64>(2, 2, &[0.0, -1.0, 1.0, 0.0])).unwrap();
        assert!((s.values[0] - c::<f64>(0.0, -1.0)).norm() < 1e-12);
        assert!((s.values[1] - c::<f64>(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn hermitian_spectrum_routes_agree() {
        for seed in 0..10 {
            let h = random_hermitian::<f64>(7, seed);
            let a = hermitian_eig(&h).unwrap().eigenvalues;
            let b = general_spectrum(&h).unwrap();
            for (x, z) in a.iter().zip(&b.values) {
                assert!((z.re - x).abs() <= 1e-8 * fro(&h));
                assert!(z.im.abs() <= 1e-8 * fro(&h));
            }
        }
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        assert!(fro(&(hpd_sqrt(&identity::<f64>(4)).unwrap() - identity::<f64>(4))) < 1e-14);
        let s = hpd_sqrt(&real_diag::<f64>(&[4.0, 9.0])).unwrap();
        assert!(fro(&(s - real_diag::<f64>(&[2.0, 3.0]))) < 1e-14);
    }

    #[test]
    fn random_hpd_sqrt_squares_back_and_commutes() {
        let b = random_hpd::<f64>(6, 3);
        let s = hpd_sqrt(&b).unwrap();
        let nb = fro(&b);
        assert!(fro(&(&s * &s - &b)) <= 1e-9 * nb);
        assert!(fro(&(&s * &b - &b * &s)) <= 1e-9 * nb * nb);
        assert!(hermitian_defect(&s) < 1e-12);
        assert!(is_hpd(&s));
    }

    #[test]
    fn indefinite_is_not_hpd() {
        let err = hpd_sqrt(&real_diag::<f64>(&[1.0, -2.0])).unwrap_err();
        match err {
            Error::NotHpd { eigenvalue } => assert!((eigenvalue + 2.0).abs() < 1e-12),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn solve_trivial_and_random() {
        let x = random_matrix::<f64>(3, 2, 5);
        assert!(fro(&(solve(&identity::<f64>(3), &x).unwrap() - &x)) < 1e-14);
        let d = solve(&real_diag::<f64>(&[2.0, 4.0]), &identity::<f64>(2)).unwrap();
        assert!(fro(&(d - real_diag::<f64>(&[0.5, 0.25]))) < 1e-15);
        let a = random_matrix::<f64>(8, 8, 9);
        let rhs = random_matrix::<f64>(8, 3, 10);
        let y = solve(&a, &rhs).unwrap();
        assert!(fro(&(&a * &y - &rhs)) <= 1e-9 * fro(&rhs));
    }

    #[test]
    fn singular_solve_fails() {
        let m = from_real_rows::<f64>(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(
            solve(&m, &identity::<f64>(2)),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn principal_angles_detect_subspaces() {
        let x = random_matrix::<f64>(6, 2, 1);
        let g = random_matrix::<f64>(2, 2, 2);
        let y = &x * g;
        assert!(largest_principal_angle(&x, &y).unwrap() < 1e-10);
        let z = random_matrix::<f64>(6, 2, 3);
        assert!(largest_principal_angle(&x, &z).unwrap() > 1e-3);
        let mut big = CMatrix::<f64>::zeros(6, 3);
        big.view_mut((0, 0), (6, 2)).copy_from(&x);
        big.set_column(2, &random_matrix::<f64>(6, 1, 4).column(0));
        assert!(containment_angle(&x, &big).unwrap() < 1e-10);
        assert!(containment_angle(&big, &x).unwrap() > 1e-3);
    }

    #[test]
    fn null_basis_of_wide_matrix() {
        let m = random_matrix::<f64>(2, 5, 7);
        let nb = null_basis(&m).unwrap();
        assert_eq!(nb.ncols(), 3);
        assert!(fro(&(&m * &nb)) < 1e-12);
    }

    #[test]
    fn multiset_matching() {
        let a = vec![c::<f64>(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0)];
        let b = vec![c::<f64>(2.0, 1e-12), c(1.0, 0.0), c(2.0, 0.0)];
        assert!(multiset_match(&a, &b, 1e-10));
        let d = vec![c::<f64>(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
        assert!(!multiset_match(&a, &d, 1e-10));
    }
}
