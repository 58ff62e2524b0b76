//! Test-instance generation: model problems, random B-normal triples,
//! smoothers and coarsening operators.
//!
//! # Discretizations
//!
//! `convection_diffusion_1d` is the first-order upwind discretization of
//! `−ε u'' + u' = f` on `(0, 1)` with `h = 1/(n+1)`, multiplied through by
//! `h²`. Row `i` carries the stencil `(−ε − h, 2ε + h, −ε)` on
//! `(i−1, i, i+1)`.
//!
//! `convection_diffusion_2d` is the analogous five-point scheme for
//! `−εΔu + (1,1)·∇u` on an `m × m` grid (`n = m²`, lexicographic order):
//! centre `4ε + 2h`, west and south `−ε − h`, east and north `−ε`.
//!
//! `hpd_laplacian` is `tridiag(−1, 2, −1)`.

pub mod mtx;
pub mod random;

use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bspace::BSpace;
use crate::error::{Error, Result};
use crate::scalar::{c, cr, from_real_rows, hermitian_part, identity, real_diag, CMatrix, Real};
use crate::spectral;

use random::{conditioned_with, disk_point, gaussian_with, hpd_with, rng, unitary_with};

/// Which inner-product matrix accompanies a generated operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BChoice {
    #[default]
    Identity,
    /// `B = AᴴA`.
    NormalEquations,
    /// `B = A`; requires `A` HPD.
    Operator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemFamily {
    DiagonalExample {},
    #[serde(rename = "convection_diffusion_1d")]
    ConvectionDiffusion1d {
        #[serde(default = "default_epsilon")]
        epsilon: f64,
        #[serde(default)]
        b: BChoice,
    },
    #[serde(rename = "convection_diffusion_2d")]
    ConvectionDiffusion2d {
        #[serde(default = "default_epsilon")]
        epsilon: f64,
        #[serde(default)]
        b: BChoice,
    },
    HpdLaplacian {},
    RandomBNormal {
        /// Size of the equal-eigenvalue blocks; 1 gives a distinct spectrum.
        #[serde(default = "one")]
        multiplicity: usize,
        #[serde(default)]
        real_spectrum: bool,
        /// Eigenvalues of `M⁻¹A` are drawn from `|λ − 1| ≤ radius`, one of them on the boundary.
        #[serde(default = "default_radius")]
        radius: f64,
    },
    /// `M⁻¹A = I − B^{-1/2}NB^{1/2}` with a random non-normal `N`, so the
    /// smoothing iteration is generically not B-normal.
    RandomContractive {
        #[serde(default = "default_contraction")]
        contraction: f64,
    },
    CustomFile {
        a: PathBuf,
        #[serde(default)]
        b: Option<PathBuf>,
        #[serde(default)]
        minv: Option<PathBuf>,
    },
}

fn default_epsilon() -> f64 {
    0.1
}
fn one() -> usize {
    1
}
fn default_radius() -> f64 {
    0.95
}
fn default_contraction() -> f64 {
    0.9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub family: ProblemFamily,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    /// Overrides the family's default smoother.
    #[serde(default)]
    pub smoother: Option<SmootherKind>,
}

impl ProblemSpec {
    pub fn new(family: ProblemFamily, n: usize, seed: u64) -> Self {
        Self {
            family,
            n,
            seed,
            smoother: None,
        }
    }
}

/// Eigen-structure behind a random B-normal instance:
/// `B = (WDWᴴ)⁻¹`, `M⁻¹A = WΛW⁻¹`.
#[derive(Debug, Clone)]
pub struct BNormalRecipe<T: Real> {
    pub w: CMatrix<T>,
    pub lambda: Vec<Complex<T>>,
    pub d: CMatrix<T>,
    pub block_sizes: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Problem<T: Real> {
    pub a: CMatrix<T>,
    pub b: CMatrix<T>,
    pub minv: CMatrix<T>,
    pub recipe: Option<BNormalRecipe<T>>,
}

impl<T: Real> Problem<T> {
    pub fn space(&self) -> Result<BSpace<T>> {
        BSpace::new(self.b.clone())
    }

    pub fn ma(&self) -> CMatrix<T> {
        &self.minv * &self.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SmootherKind {
    Richardson {
        omega: f64,
    },
    Jacobi {
        omega: f64,
    },
    GaussSeidel,
    /// Richardson with `ω = λ_min(H(Ã)) / ‖Ã‖²`, `Ã = B^{1/2}AB^{-1/2}`,
    /// which satisfies the smoothing assumption whenever `H(Ã)` is HPD.
    AutoRichardson,
}

pub fn generate<T: Real>(spec: &ProblemSpec) -> Result<Problem<T>> {
    let n = spec.n;
    if n < 2 && !matches!(spec.family, ProblemFamily::CustomFile { .. }) {
        return Err(Error::InvalidSpec(format!("n must be at least 2, got {n}")));
    }
    let mut problem = match &spec.family {
        ProblemFamily::DiagonalExample {} => {
            if n != 3 {
                return Err(Error::InvalidSpec("diagonal_example has n = 3".into()));
            }
            Problem {
                a: real_diag(&[0.25, 0.5, 0.75]),
                b: identity(3),
                minv: identity(3),
                recipe: None,
            }
        }
        ProblemFamily::ConvectionDiffusion1d { epsilon, b } => {
            check_epsilon(*epsilon)?;
            let a = convection_diffusion_1d(n, *epsilon);
            pde_problem(a, *b, SmootherKind::AutoRichardson)?
        }
        ProblemFamily::ConvectionDiffusion2d { epsilon, b } => {
            check_epsilon(*epsilon)?;
            let m = (n as f64).sqrt().round() as usize;
            if m * m != n {
                return Err(Error::InvalidSpec(format!(
                    "convection_diffusion_2d needs a square n, got {n}"
                )));
            }
            let a = convection_diffusion_2d(m, *epsilon);
            pde_problem(a, *b, SmootherKind::AutoRichardson)?
        }
        ProblemFamily::HpdLaplacian {} => pde_problem(
            laplacian_1d(n),
            BChoice::Operator,
            SmootherKind::GaussSeidel,
        )?,
        ProblemFamily::RandomBNormal {
            multiplicity,
            real_spectrum,
            radius,
        } => random_b_normal(n, *multiplicity, *real_spectrum, *radius, spec.seed)?,
        ProblemFamily::RandomContractive { contraction } => {
            random_contractive(n, *contraction, spec.seed)?
        }
        ProblemFamily::CustomFile { a, b, minv } => {
            let a: CMatrix<T> = mtx::read_matrix(a)?;
            let b = match b {
                Some(p) => mtx::read_matrix(p)?,
                None => identity(a.nrows()),
            };
            let space = BSpace::new(b.clone())?;
            let minv = match minv {
                Some(p) => mtx::read_matrix(p)?,
                None => make_smoother_in(&space, &a, SmootherKind::AutoRichardson)?,
            };
            let n = a.nrows();
            if a.ncols() != n || b.nrows() != n || minv.nrows() != n || minv.ncols() != n {
                return Err(Error::InvalidSpec(
                    "custom matrices must be square and of equal size".into(),
                ));
            }
            Problem {
                a,
                b,
                minv,
                recipe: None,
            }
        }
    };
    if let Some(kind) = spec.smoother {
        let space = BSpace::new(problem.b.clone())?;
        problem.minv = make_smoother_in(&space, &problem.a, kind)?;
        problem.recipe = None;
    }
    Ok(problem)
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!(
            "epsilon must be positive, got {eps}"
        )))
    }
}

fn pde_problem<T: Real>(
    a: CMatrix<T>,
    b: BChoice,
    default_smoother: SmootherKind,
) -> Result<Problem<T>> {
    let b = match b {
        BChoice::Identity => identity(a.nrows()),
        BChoice::NormalEquations => hermitian_part(&(a.adjoint() * &a)),
        BChoice::Operator => {
            if !spectral::is_hpd(&a) {
                return Err(Error::InvalidSpec("B = A requires an HPD operator".into()));
            }
            a.clone()
        }
    };
    let space = BSpace::new(b.clone())?;
    let minv = make_smoother_in(&space, &a, default_smoother)?;
    Ok(Problem {
        a,
        b,
        minv,
        recipe: None,
    })
}

pub fn laplacian_1d<T: Real>(n: usize) -> CMatrix<T> {
    tridiagonal(n, -1.0, 2.0, -1.0)
}

pub fn convection_diffusion_1d<T: Real>(n: usize, epsilon: f64) -> CMatrix<T> {
    let h = 1.0 / (n as f64 + 1.0);
    tridiagonal(n, -epsilon - h, 2.0 * epsilon + h, -epsilon)
}

pub fn convection_diffusion_2d<T: Real>(m: usize, epsilon: f64) -> CMatrix<T> {
    let h = 1.0 / (m as f64 + 1.0);
    let n = m * m;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for iy in 0..m {
        for ix in 0..m {
            let row = iy * m + ix;
            a[(row, row)] = 4.0 * epsilon + 2.0 * h;
            if ix > 0 {
                a[(row, row - 1)] = -epsilon - h;
            }
            if ix + 1 < m {
                a[(row, row + 1)] = -epsilon;
            }
            if iy > 0 {
                a[(row, row - m)] = -epsilon - h;
            }
            if iy + 1 < m {
                a[(row, row + m)] = -epsilon;
            }
        }
    }
    crate::scalar::from_real(&a)
}

fn tridiagonal<T: Real>(n: usize, lower: f64, diag: f64, upper: f64) -> CMatrix<T> {
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = diag;
        if i > 0 {
            a[(i, i - 1)] = lower;
        }
        if i + 1 < n {
            a[(i, i + 1)] = upper;
        }
    }
    crate::scalar::from_real(&a)
}

fn random_b_normal<T: Real>(
    n: usize,
    multiplicity: usize,
    real_spectrum: bool,
    radius: f64,
    seed: u64,
) -> Result<Problem<T>> {
    if multiplicity == 0 || multiplicity > n {
        return Err(Error::InvalidSpec(format!(
            "multiplicity must be in 1..={n}"
        )));
    }
    if !(radius > 0.0 && radius < 2.0) {
        return Err(Error::InvalidSpec(format!(
            "radius must be in (0, 2), got {radius}"
        )));
    }
    let mut g = rng(seed);
    let mut block_sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = multiplicity.min(left);
        block_sizes.push(s);
        left -= s;
    }
    let mut lambda = Vec::with_capacity(n);
    // The first eigenvalue sits on the circle |λ − 1| = radius, so the
    // smoothing norm equals the radius. Values near 0 are redrawn to keep A
    // nonsingular when radius ≥ 1.
    for (k, &s) in block_sizes.iter().enumerate() {
        let z = loop {
            let z = match (real_spectrum, k == 0) {
                (true, true) => Complex::new(
                    if (1.0 - radius).abs() >= 0.05 && g.random::<bool>() {
                        1.0 - radius
                    } else {
                        1.0 + radius
                    },
                    0.0,
                ),
                (true, false) => Complex::new(1.0 + radius * (2.0 * g.random::<f64>() - 1.0), 0.0),
                (false, true) => {
                    Complex::new(1.0, 0.0)
                        + Complex::from_polar(
                            radius,
                            2.0 * std::f64::consts::PI * g.random::<f64>(),
                        )
                }
                (false, false) => disk_point(1.0, radius, &mut g),
            };
            if z.norm() >= 0.05 {
                break z;
            }
        };
        lambda.extend(std::iter::repeat_n(c::<T>(z.re, z.im), s));
    }
    let w = conditioned_with::<T>(n, 0.5, 2.0, &mut g);
    let mut d = CMatrix::<T>::zeros(n, n);
    let mut offset = 0;
    for &s in &block_sizes {
        let blk = hpd_with::<T>(s, 0.5, 2.0, &mut g);
        d.view_mut((offset, offset), (s, s)).copy_from(&blk);
        offset += s;
    }
    let c_mat = conditioned_with::<T>(n, 0.5, 2.0, &mut g);

    let b = hermitian_part(&spectral::inverse(&(&w * &d * w.adjoint()))?);
    let mut wl = w.clone();
    for (j, l) in lambda.iter().enumerate() {
        wl.column_mut(j).iter_mut().for_each(|z| *z *= *l);
    }
    let ma = spectral::solve(&w.transpose(), &wl.transpose())?.transpose();
    let a = spectral::solve(&c_mat, &ma)?;
    Ok(Problem {
        a,
        b,
        minv: c_mat,
        recipe: Some(BNormalRecipe {
            w,
            lambda,
            d,
            block_sizes,
        }),
    })
}

fn random_contractive<T: Real>(n: usize, contraction: f64, seed: u64) -> Result<Problem<T>> {
    if !(contraction > 0.0 && contraction < 2.0) {
        return Err(Error::InvalidSpec(format!(
            "contraction must be in (0, 2), got {contraction}"
        )));
    }
    let mut g = rng(seed);
    let b = hpd_with::<T>(n, 0.5, 4.0, &mut g);
    let space = BSpace::new(b.clone())?;
    // Upper-triangular part of a Gaussian plus a unitary rotation keeps N
    // nonsingular and far from normal.
    let mut nmat = gaussian_with::<T>(n, n, &mut g);
    for i in 0..n {
        for j in 0..i {
            nmat[(i, j)] = cr(T::zero());
        }
        nmat[(i, i)] += cr(T::lit(2.0));
    }
    let nmat = unitary_with::<T>(n, &mut g) * nmat;
    let scale = T::lit(contraction) / spectral::spectral_norm(&nmat);
    let nmat = nmat * cr(scale);
    let ma = identity::<T>(n) - space.untransform(&nmat);
    let minv = conditioned_with::<T>(n, 0.5, 2.0, &mut g);
    let a = spectral::solve(&minv, &ma)?;
    Ok(Problem {
        a,
        b,
        minv,
        recipe: None,
    })
}

/// Smoother `M⁻¹` for `A` in the Euclidean geometry.
pub fn make_smoother<T: Real>(a: &CMatrix<T>, kind: SmootherKind) -> Result<CMatrix<T>> {
    make_smoother_in(&BSpace::euclidean(a.nrows()), a, kind)
}

pub fn make_smoother_in<T: Real>(
    space: &BSpace<T>,
    a: &CMatrix<T>,
    kind: SmootherKind,
) -> Result<CMatrix<T>> {
    let n = a.nrows();
    if a.ncols() != n || space.dim() != n {
        return Err(Error::dims(
            format!("{}x{}", space.dim(), space.dim()),
            format!("{}x{}", n, a.ncols()),
        ));
    }
    let check_diag = || -> Result<()> {
        for i in 0..n {
            if nalgebra::ComplexField::modulus(a[(i, i)])
                <= T::tol(1e-14) * crate::scalar::scale_of(a)
            {
                return Err(Error::ZeroDiagonal { index: i });
            }
        }
        Ok(())
    };
    match kind {
        SmootherKind::Richardson { omega } => {
            if omega == 0.0 {
                return Err(Error::SingularSmoother);
            }
            Ok(identity::<T>(n) * c::<T>(omega, 0.0))
        }
        SmootherKind::Jacobi { omega } => {
            check_diag()?;
            if omega == 0.0 {
                return Err(Error::SingularSmoother);
            }
            let w = c::<T>(omega, 0.0);
            Ok(CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    w / a[(i, i)]
                } else {
                    cr(T::zero())
                }
            }))
        }
        SmootherKind::GaussSeidel => {
            check_diag()?;
            let lower =
                CMatrix::from_fn(n, n, |i, j| if j <= i { a[(i, j)] } else { cr(T::zero()) });
            // Forward substitution against the identity.
            let mut inv = CMatrix::<T>::zeros(n, n);
            for col in 0..n {
                for i in col..n {
                    let mut acc = if i == col {
                        cr(T::one())
                    } else {
                        cr(T::zero())
                    };
                    for k in col..i {
                        acc -= lower[(i, k)] * inv[(k, col)];
                    }
                    inv[(i, col)] = acc / lower[(i, i)];
                }
            }
            Ok(inv)
        }
        SmootherKind::AutoRichardson => {
            let at = space.transform(a);
            let h = hermitian_part(&at);
            let mu = spectral::hermitian_eig(&h)?.min();
            if mu <= T::zero() {
                return Err(Error::InvalidSpec(
                    "automatic Richardson needs a positive definite Hermitian part".into(),
                ));
            }
            let norm = spectral::spectral_norm(&at);
            Ok(identity::<T>(n) * cr(mu / (norm * norm)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CoarseningStrategy {
    #[default]
    EveryOther,
    Aggregation,
    RandomOrthonormal,
}

/// An `n × n_c` restriction of full column rank.
pub fn make_coarsening<T: Real>(
    n: usize,
    n_c: usize,
    strategy: CoarseningStrategy,
    seed: u64,
) -> Result<CMatrix<T>> {
    if n_c == 0 || n_c >= n {
        return Err(Error::InvalidSize(format!(
            "need 1 <= n_c < n, got n = {n}, n_c = {n_c}"
        )));
    }
    let one = cr(T::one());
    Ok(match strategy {
        CoarseningStrategy::EveryOther => {
            let mut r = CMatrix::zeros(n, n_c);
            for j in 0..n_c {
                let idx = (((j as f64 + 0.5) * n as f64) / n_c as f64).floor() as usize;
                r[(idx.min(n - 1), j)] = one;
            }
            r
        }
        CoarseningStrategy::Aggregation => {
            let mut r = CMatrix::zeros(n, n_c);
            for i in 0..n {
                r[(i, i * n_c / n)] = one;
            }
            r
        }
        CoarseningStrategy::RandomOrthonormal => {
            let g = gaussian_with::<T>(n, n_c, &mut rng(seed));
            let q = g.qr().q();
            q.columns(0, n_c).into_owned()
        }
    })
}

/// `[R | G]` with `extra` random columns, so that `R(R) ⊆ R([R | G])`.
pub fn extend_coarsening<T: Real>(r: &CMatrix<T>, extra: usize, seed: u64) -> Result<CMatrix<T>> {
    let n = r.nrows();
    if r.ncols() + extra >= n || extra == 0 {
        return Err(Error::InvalidSize(format!(
            "cannot extend {} columns by {extra} in dimension {n}",
            r.ncols()
        )));
    }
    let g = gaussian_with::<T>(n, extra, &mut rng(seed));
    let mut out = CMatrix::zeros(n, r.ncols() + extra);
    out.columns_mut(0, r.ncols()).copy_from(r);
    out.columns_mut(r.ncols(), extra).copy_from(&g);
    Ok(out)
}

/// The three-dimensional example with two nested, non-compatible transfer
/// pairs for which the two-grid norm grows when the coarse space grows.
#[derive(Debug, Clone)]
pub struct NestedCounterexample<T: Real> {
    pub a: CMatrix<T>,
    pub b: CMatrix<T>,
    pub minv: CMatrix<T>,
    pub p: CMatrix<T>,
    pub r: CMatrix<T>,
    pub p_big: CMatrix<T>,
    pub r_big: CMatrix<T>,
    /// `‖E^{1,1}(P, R)‖²` for the one-dimensional pair.
    pub expected_small: f64,
    /// `‖E^{1,1}(P̃, R̃)‖²` for the two-dimensional pair.
    pub expected_big: f64,
}

pub fn nested_counterexample<T: Real>() -> NestedCounterexample<T> {
    let p = from_real_rows(3, 1, &[1.0, 1.0, 0.0]);
    NestedCounterexample {
        a: real_diag(&[0.25, 0.5, 0.75]),
        b: identity(3),
        minv: identity(3),
        r: p.clone(),
        p,
        p_big: from_real_rows(3, 2, &[1.0, 2.0, 1.0, 1.0, 0.0, 0.0]),
        r_big: from_real_rows(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 1.0]),
        expected_small: 65.0 / 288.0,
        expected_big: 91.0 / 256.0,
    }
}
