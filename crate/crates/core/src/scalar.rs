//! Scalar abstraction shared by every module.
//!
//! All matrices are complex-valued over a real field `T` (`f32` or `f64`).
//! Tolerances are written once as `f64` literals tuned for double precision
//! and mapped onto the working precision by [`Real::tol`].

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Complex dense matrix over the real field `T`.
pub type CMatrix<T> = DMatrix<Complex<T>>;
/// Complex dense column vector over the real field `T`.
pub type CVector<T> = DVector<Complex<T>>;

/// Real floating-point type the analysis is carried out in.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + std::fmt::Display + 'static
{
    /// Ratio `ln(eps_T) / ln(eps_f64)`; 1 for `f64`.
    const PRECISION_EXPONENT: f64;

    /// Map a tolerance calibrated for `f64` onto this precision.
    ///
    /// For `f64` this is the identity. For lower precisions the number of
    /// significant digits is scaled proportionally, so `1e-10` becomes
    /// roughly `4e-5` in `f32`.
    fn tol(base: f64) -> Self {
        let scaled = if Self::PRECISION_EXPONENT == 1.0 {
            base
        } else {
            base.powf(Self::PRECISION_EXPONENT)
        };
        Self::from_f64(scaled).expect("tolerance representable")
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f64 {
    const PRECISION_EXPONENT: f64 = 1.0;
}

impl Real for f32 {
    // ln(2^-23) / ln(2^-52)
    const PRECISION_EXPONENT: f64 = 23.0 / 52.0;
}

#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub fn cr<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Lift a real `f64` matrix into the complex working type.
pub fn from_real<T: Real>(m: &DMatrix<f64>) -> CMatrix<T> {
    m.map(|x| Complex::new(T::lit(x), T::zero()))
}

/// Build a complex matrix from row-major real entries.
pub fn from_real_rows<T: Real>(rows: usize, cols: usize, entries: &[f64]) -> CMatrix<T> {
    from_real(&DMatrix::from_row_slice(rows, cols, entries))
}

pub fn real_diag<T: Real>(d: &[f64]) -> CMatrix<T> {
    let n = d.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { c(d[i], 0.0) } else { c(0.0, 0.0) })
}

/// Frobenius norm.
pub fn fro<T: Real>(m: &CMatrix<T>) -> T {
    let mut acc = T::zero();
    for z in m.iter() {
        acc += z.re * z.re + z.im * z.im;
    }
    acc.sqrt()
}

/// Relative tolerance scale `max(floor, ‖M‖_F)` with the absolute floor 1e-14.
pub fn scale_of<T: Real>(m: &CMatrix<T>) -> T {
    let f = fro(m);
    let floor = T::tol(1e-14);
    if f > floor {
        f
    } else {
        floor
    }
}

pub fn max1<T: Real>(x: T) -> T {
    if x > T::one() {
        x
    } else {
        T::one()
    }
}

pub fn is_finite<T: Real>(m: &CMatrix<T>) -> bool {
    m.iter().all(|z| {
        let re = z.re.as_f64();
        let im = z.im.as_f64();
        re.is_finite() && im.is_finite()
    })
}

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::identity(n, n)
}

/// Integer power by repeated multiplication; `m^0 = I`.
pub fn power<T: Real>(m: &CMatrix<T>, k: usize) -> CMatrix<T> {
    let mut out = identity::<T>(m.nrows());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// Hermitian part `(M + Mᴴ)/2`.
pub fn hermitian_part<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let half = cr(T::lit(0.5));
    (m + m.adjoint()) * half
}

/// Convert a matrix between precisions.
pub fn cast<S: Real, T: Real>(m: &CMatrix<S>) -> CMatrix<T> {
    m.map(|z| Complex::new(T::lit(z.re.as_f64()), T::lit(z.im.as_f64())))
}
