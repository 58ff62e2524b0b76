//! The B-inner-product geometry.
//!
//! A [`BSpace`] wraps an HPD matrix `B` together with its principal square
//! root, so that every B-quantity can be evaluated through the similarity
//! `C ↦ B^{1/2}·C·B^{-1/2}`, which maps B-adjoints to Hermitian transposes.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{cr, fro, identity, max1, CMatrix, CVector, Real};
use crate::spectral::{self, HermitianEigen};

#[derive(Debug, Clone)]
pub struct BSpace<T: Real> {
    b: CMatrix<T>,
    sqrt_b: CMatrix<T>,
    inv_sqrt_b: CMatrix<T>,
    inv_b: CMatrix<T>,
    eig: HermitianEigen<T>,
}

/// Result of [`BSpace::classify`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BNormalityReport {
    pub is_b_normal: bool,
    /// `‖ÃÃᴴ − ÃᴴÃ‖_F / max(1, ‖Ã‖²_F)` with `Ã = B^{1/2}AB^{-1/2}`.
    pub commutator_residual: f64,
    pub is_b_orthogonal: bool,
    /// `‖Ã − Ãᴴ‖_F / max(1, ‖Ã‖_F)`.
    pub adjoint_residual: f64,
    pub is_b_unitary: bool,
    /// `‖AᴴBA − I‖_F / max(1, ‖Ã‖²_F)`.
    pub unitary_residual: f64,
}

/// `A = U·diag(d)·U⁻¹` with `UᴴBU = I`.
#[derive(Debug, Clone)]
pub struct BDiagonalization<T: Real> {
    pub u: CMatrix<T>,
    pub d: Vec<Complex<T>>,
}

impl<T: Real> BDiagonalization<T> {
    pub fn reconstruct(&self, space: &BSpace<T>) -> CMatrix<T> {
        let mut ud = self.u.clone();
        for (j, dj) in self.d.iter().enumerate() {
            ud.column_mut(j).iter_mut().for_each(|z| *z *= *dj);
        }
        // U⁻¹ = UᴴB for a B-unitary U.
        ud * self.u.adjoint() * space.b()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormRadius {
    pub norm: f64,
    pub rho: f64,
    pub equal: bool,
}

impl<T: Real> BSpace<T> {
    pub fn new(b: CMatrix<T>) -> Result<Self> {
        let roots = spectral::hpd_roots(&b)?;
        Ok(Self {
            b,
            sqrt_b: roots.sqrt,
            inv_sqrt_b: roots.inv_sqrt,
            inv_b: roots.inverse,
            eig: roots.eig,
        })
    }

    /// The Euclidean geometry `B = I`.
    pub fn euclidean(n: usize) -> Self {
        Self::new(identity(n)).expect("identity is HPD")
    }

    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    pub fn b(&self) -> &CMatrix<T> {
        &self.b
    }

    pub fn sqrt_b(&self) -> &CMatrix<T> {
        &self.sqrt_b
    }

    pub fn inv_sqrt_b(&self) -> &CMatrix<T> {
        &self.inv_sqrt_b
    }

    pub fn inv_b(&self) -> &CMatrix<T> {
        &self.inv_b
    }

    pub fn eig(&self) -> &HermitianEigen<T> {
        &self.eig
    }

    fn check_square(&self, a: &CMatrix<T>) -> Result<()> {
        let n = self.dim();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::dims(
                format!("{n}x{n}"),
                format!("{}x{}", a.nrows(), a.ncols()),
            ));
        }
        Ok(())
    }

    fn check_vec(&self, x: &CVector<T>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::dims(self.dim(), x.len()));
        }
        Ok(())
    }

    /// `⟨x, y⟩_B = yᴴBx`.
    pub fn inner(&self, x: &CVector<T>, y: &CVector<T>) -> Result<Complex<T>> {
        self.check_vec(x)?;
        self.check_vec(y)?;
        Ok((y.adjoint() * &self.b * x)[(0, 0)])
    }

    pub fn vec_norm(&self, x: &CVector<T>) -> Result<T> {
        let ip = self.inner(x, x)?;
        let re = if ip.re > T::zero() { ip.re } else { T::zero() };
        Ok(re.sqrt())
    }

    /// `B^{1/2}·C·B^{-1/2}`.
    pub fn transform(&self, c: &CMatrix<T>) -> CMatrix<T> {
        &self.sqrt_b * c * &self.inv_sqrt_b
    }

    /// Inverse of [`transform`](Self::transform).
    pub fn untransform(&self, c: &CMatrix<T>) -> CMatrix<T> {
        &self.inv_sqrt_b * c * &self.sqrt_b
    }

    /// `‖C‖_B = ‖B^{1/2}CB^{-1/2}‖₂`.
    pub fn op_norm(&self, c: &CMatrix<T>) -> Result<T> {
        self.check_square(c)?;
        Ok(spectral::spectral_norm(&self.transform(c)))
    }

    /// `A⁺ = B⁻¹AᴴB`.
    pub fn adjoint(&self, a: &CMatrix<T>) -> Result<CMatrix<T>> {
        self.check_square(a)?;
        Ok(&self.inv_b * a.adjoint() * &self.b)
    }

    /// `λ_max(A⁺A)` evaluated from the general spectrum of `A⁺A`; an
    /// independent route to `‖A‖²_B`.
    pub fn lambda_max_adjoint_product(&self, a: &CMatrix<T>) -> Result<T> {
        let prod = self.adjoint(a)? * a;
        let s = spectral::general_spectrum(&prod)?;
        Ok(s.values.last().map(|z| z.re).unwrap_or_else(T::zero))
    }

    pub fn classify(&self, a: &CMatrix<T>) -> Result<BNormalityReport> {
        self.check_square(a)?;
        let at = self.transform(a);
        let ath = at.adjoint();
        let na = fro(&at);
        let commutator = fro(&(&at * &ath - &ath * &at)) / max1(na * na);
        let adjoint = fro(&(&at - &ath)) / max1(na);
        let unitary = fro(&(a.adjoint() * &self.b * a - identity::<T>(self.dim()))) / max1(na * na);
        let tol = T::tol(1e-10);
        let is_b_orthogonal = adjoint <= tol;
        Ok(BNormalityReport {
            is_b_normal: commutator <= tol || is_b_orthogonal,
            commutator_residual: commutator.as_f64(),
            is_b_orthogonal,
            adjoint_residual: adjoint.as_f64(),
            is_b_unitary: unitary <= tol,
            unitary_residual: unitary.as_f64(),
        })
    }

    /// B-unitary diagonalization of a B-normal matrix.
    ///
    /// Hermitian `Ã` goes through the Hermitian eigensolver (real `D`);
    /// otherwise the complex Schur form of the normal matrix `Ã` is used,
    /// whose triangular factor is diagonal.
    pub fn b_unitary_diagonalization(&self, a: &CMatrix<T>) -> Result<BDiagonalization<T>> {
        let report = self.classify(a)?;
        if !report.is_b_normal {
            return Err(Error::NotBNormal {
                residual: report.commutator_residual,
            });
        }
        let at = self.transform(a);
        let (q, d) = if report.is_b_orthogonal {
            let e = spectral::hermitian_eig(&at)?;
            let d = e.eigenvalues.iter().map(|&x| cr(x)).collect();
            (e.eigenvectors, d)
        } else {
            let (q, t) = spectral::schur(&at)?;
            let d = (0..t.nrows()).map(|i| t[(i, i)]).collect();
            (q, d)
        };
        Ok(BDiagonalization {
            u: &self.inv_sqrt_b * q,
            d,
        })
    }

    pub fn check_norm_equals_spectral_radius(&self, a: &CMatrix<T>) -> Result<NormRadius> {
        let norm = self.op_norm(a)?;
        let rho = spectral::general_spectrum(a)?.radius();
        let equal = (norm - rho).abs() <= T::tol(1e-9) * max1(rho);
        Ok(NormRadius {
            norm: norm.as_f64(),
            rho: rho.as_f64(),
            equal,
        })
    }
}

/// Zero threshold `τ = 1e-10·max(1, λ_max)` for spectra that are real in
/// exact arithmetic.
pub fn zero_threshold<T: Real>(lambda_max: T) -> T {
    T::tol(1e-10) * max1(lambda_max)
}

/// Smallest strictly positive eigenvalue under the zero threshold `τ`.
///
/// Eigenvalues in `[−τ, τ]` count as zero. An eigenvalue below `−τ` is an
/// error, since callers only use this where nonnegativity is guaranteed.
/// Returns `None` when every eigenvalue is zero.
pub fn lambda_min_plus<T: Real>(eigenvalues: &[T]) -> Result<Option<T>> {
    let top = eigenvalues
        .iter()
        .copied()
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    let tau = zero_threshold(top);
    let mut best: Option<T> = None;
    for &l in eigenvalues {
        if l < -tau {
            return Err(Error::NotHpd {
                eigenvalue: l.as_f64(),
            });
        }
        if l > tau && best.is_none_or(|b| l < b) {
            best = Some(l);
        }
    }
    Ok(best)
}
