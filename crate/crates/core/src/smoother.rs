//! Smoothing iterations and their symmetrizations.
//!
//! For `W = M⁻¹A·B⁻¹` the two Hermitian symmetrizations are
//! `M̃⁻¹ = W + Wᴴ − WᴴBW` and `M̂⁻¹ = W + Wᴴ − WBWᴴ`, so that
//! `I − M̃⁻¹B = (I − M⁻¹A)⁺(I − M⁻¹A)` and
//! `I − M̂⁻¹B = (I − M⁻¹A)(I − M⁻¹A)⁺`.

use num_complex::Complex;
use serde::Serialize;

use crate::bspace::BSpace;
use crate::error::{Error, Result};
use crate::scalar::{hermitian_part, identity, power, CMatrix, Real};
use crate::spectral;

/// Largest supported number of smoothing steps.
pub const MAX_STEPS: usize = 8;

#[derive(Debug, Clone)]
pub struct SmootherContext<T: Real> {
    pub minv: CMatrix<T>,
    /// `M⁻¹A`.
    pub ma: CMatrix<T>,
    /// `(M⁻¹A)⁺`.
    pub ma_adj: CMatrix<T>,
    pub tilde_minv: CMatrix<T>,
    pub hat_minv: CMatrix<T>,
    /// `M̃⁻¹B`.
    pub tilde_minv_b: CMatrix<T>,
    /// `M̂⁻¹B`.
    pub hat_minv_b: CMatrix<T>,
    pub b_normal: bool,
    pub commutator_residual: f64,
}

impl<T: Real> SmootherContext<T> {
    pub fn dim(&self) -> usize {
        self.ma.nrows()
    }

    /// `I − M⁻¹A`.
    pub fn error_operator(&self) -> CMatrix<T> {
        identity::<T>(self.dim()) - &self.ma
    }
}

/// `(W + Wᴴ − WᴴBW, W + Wᴴ − WBWᴴ)` for `W = Y·B⁻¹`.
pub fn symmetrizations<T: Real>(space: &BSpace<T>, y: &CMatrix<T>) -> (CMatrix<T>, CMatrix<T>) {
    let w = y * space.inv_b();
    let wh = w.adjoint();
    let sum = &w + &wh;
    let tilde = hermitian_part(&(&sum - &wh * space.b() * &w));
    let hat = hermitian_part(&(&sum - &w * space.b() * &wh));
    (tilde, hat)
}

pub fn build_smoother<T: Real>(
    space: &BSpace<T>,
    a: &CMatrix<T>,
    minv: &CMatrix<T>,
) -> Result<SmootherContext<T>> {
    let n = space.dim();
    for m in [a, minv] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::dims(
                format!("{n}x{n}"),
                format!("{}x{}", m.nrows(), m.ncols()),
            ));
        }
    }
    if !crate::scalar::is_finite(minv) {
        return Err(Error::NonFinite);
    }
    let sv = spectral::singular_values(minv)?;
    let (smax, smin) = (sv[0], sv[sv.len() - 1]);
    if smax <= T::zero() || smin <= T::tol(1e-14) * smax {
        return Err(Error::SingularSmoother);
    }
    let ma = minv * a;
    let ma_adj = space.adjoint(&ma)?;
    let (tilde_minv, hat_minv) = symmetrizations(space, &ma);
    let tilde_minv_b = &tilde_minv * space.b();
    let hat_minv_b = &hat_minv * space.b();
    let report = space.classify(&ma)?;
    Ok(SmootherContext {
        minv: minv.clone(),
        ma,
        ma_adj,
        tilde_minv,
        hat_minv,
        tilde_minv_b,
        hat_minv_b,
        b_normal: report.is_b_normal,
        commutator_residual: report.commutator_residual,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothingReport {
    /// `‖I − M⁻¹A‖_B`.
    pub b_norm_of_error: f64,
    pub assumption_holds: bool,
    pub tilde_hpd: bool,
    pub hat_hpd: bool,
    /// Ascending spectrum of `M̃⁻¹B`.
    pub spectrum_tilde: Vec<f64>,
    /// Ascending spectrum of `M̂⁻¹B`.
    pub spectrum_hat: Vec<f64>,
    pub tilde_spectrum_in_unit: bool,
    pub hat_spectrum_in_unit: bool,
    pub b_normal_ma: bool,
    /// `ρ(I − M⁻¹A)`.
    pub rho_error: f64,
    /// For B-normal `M⁻¹A`: `ρ(I − M⁻¹A) < 1`.
    pub rho_condition: Option<bool>,
    /// For B-normal `M⁻¹A`: `|λ − 1|² < 1` for every `λ ∈ σ(M⁻¹A)`.
    pub disk_condition: Option<bool>,
}

impl SmoothingReport {
    /// The five equivalent conditions, in the order norm, `M̃⁻¹` HPD,
    /// `σ(M̃⁻¹B) ⊆ (0,1]`, `M̂⁻¹` HPD, `σ(M̂⁻¹B) ⊆ (0,1]`.
    pub fn conditions(&self) -> [bool; 5] {
        [
            self.assumption_holds,
            self.tilde_hpd,
            self.tilde_spectrum_in_unit,
            self.hat_hpd,
            self.hat_spectrum_in_unit,
        ]
    }

    pub fn consistent(&self) -> bool {
        let c = self.conditions();
        let first = c[0];
        c.iter().all(|&x| x == first)
            && self.rho_condition.is_none_or(|x| x == first)
            && self.disk_condition.is_none_or(|x| x == first)
    }
}

fn hpd_flag<T: Real>(h: &CMatrix<T>) -> Result<bool> {
    let e = spectral::hermitian_eig(h)?;
    Ok(e.max() > T::zero() && e.min() > T::tol(1e-12) * e.max())
}

fn in_unit_interval<T: Real>(values: &[T]) -> bool {
    let top = values
        .iter()
        .copied()
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    top > T::zero()
        && values
            .iter()
            .all(|&l| l > T::tol(1e-12) * top && l <= T::one() + T::tol(1e-10))
}

pub fn smoothing_report<T: Real>(
    space: &BSpace<T>,
    ctx: &SmootherContext<T>,
) -> Result<SmoothingReport> {
    let err = ctx.error_operator();
    let norm = space.op_norm(&err)?;
    // Hermitian forms similar to M̃⁻¹B and M̂⁻¹B.
    let tilde_sym = hermitian_part(&(space.sqrt_b() * &ctx.tilde_minv * space.sqrt_b()));
    let hat_sym = hermitian_part(&(space.sqrt_b() * &ctx.hat_minv * space.sqrt_b()));
    let spectrum_tilde = spectral::hermitian_eigenvalues(&tilde_sym)?;
    let spectrum_hat = spectral::hermitian_eigenvalues(&hat_sym)?;
    let err_spec = spectral::general_spectrum(&err)?;
    let rho = err_spec.radius();
    let (rho_condition, disk_condition) = if ctx.b_normal {
        let ma_spec = spectral::general_spectrum(&ctx.ma)?;
        let one = Complex::new(T::one(), T::zero());
        let disk = ma_spec
            .values
            .iter()
            .all(|&l| (l - one).norm_sqr() < T::one());
        (Some(rho < T::one()), Some(disk))
    } else {
        (None, None)
    };
    Ok(SmoothingReport {
        b_norm_of_error: norm.as_f64(),
        assumption_holds: norm < T::one(),
        tilde_hpd: hpd_flag(&ctx.tilde_minv)?,
        hat_hpd: hpd_flag(&ctx.hat_minv)?,
        tilde_spectrum_in_unit: in_unit_interval(&spectrum_tilde),
        hat_spectrum_in_unit: in_unit_interval(&spectrum_hat),
        spectrum_tilde: spectrum_tilde.iter().map(|x| x.as_f64()).collect(),
        spectrum_hat: spectrum_hat.iter().map(|x| x.as_f64()).collect(),
        b_normal_ma: ctx.b_normal,
        rho_error: rho.as_f64(),
        rho_condition,
        disk_condition,
    })
}

/// `1 − |λ − 1|²`, the eigenvalue of `M̂⁻¹B` belonging to an eigenvalue `λ`
/// of a B-normal `M⁻¹A`.
pub fn eigen_map<T: Real>(lambda: Complex<T>) -> T {
    T::one() - (lambda - Complex::new(T::one(), T::zero())).norm_sqr()
}

/// `ν`-step smoothing expressed as a single step.
#[derive(Debug, Clone)]
pub struct StepReduction<T: Real> {
    /// `X̂⁻¹B = I − (I − M̂⁻¹B)^ν`.
    pub xhat_inv_b: CMatrix<T>,
    /// `X̂⁻¹`, Hermitian.
    pub xhat_inv: CMatrix<T>,
    /// `X⁻¹A = I − (I − M⁻¹A)^ν`.
    pub xinv_a: CMatrix<T>,
}

/// `I − (I − M̂⁻¹B)^ν`, valid without any hypothesis on `M⁻¹A`.
pub fn xhat_inv_b_unchecked<T: Real>(ctx: &SmootherContext<T>, nu: usize) -> CMatrix<T> {
    let n = ctx.dim();
    identity::<T>(n) - power(&(identity::<T>(n) - &ctx.hat_minv_b), nu)
}

pub fn reduce_steps<T: Real>(
    space: &BSpace<T>,
    ctx: &SmootherContext<T>,
    nu: usize,
) -> Result<StepReduction<T>> {
    if nu == 0 {
        return Err(Error::InvalidSize(
            "at least one smoothing step is required".into(),
        ));
    }
    if nu > MAX_STEPS {
        return Err(Error::TooManySmoothingSteps {
            max: MAX_STEPS,
            got: nu,
        });
    }
    if !ctx.b_normal {
        return Err(Error::NotBNormal {
            residual: ctx.commutator_residual,
        });
    }
    let err = ctx.error_operator();
    if spectral::condition_number(&err)? > T::lit(1e12) {
        return Err(Error::SingularErrorOperator);
    }
    let norm = space.op_norm(&err)?;
    if norm >= T::one() {
        return Err(Error::SmoothingAssumptionViolated {
            norm: norm.as_f64(),
            level: None,
        });
    }
    let n = ctx.dim();
    let xinv_a = identity::<T>(n) - power(&err, nu);
    let xhat_inv_b = xhat_inv_b_unchecked(ctx, nu);
    // X̂⁻¹ = YB⁻¹ + B⁻¹Yᴴ − YB⁻¹Yᴴ with Y = X⁻¹A, the hat-symmetrization of Y.
    let (_, xhat_inv) = symmetrizations(space, &xinv_a);
    Ok(StepReduction {
        xhat_inv_b,
        xhat_inv,
        xinv_a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probgen::random::{random_hpd, random_matrix};
    use crate::probgen::{generate, ProblemFamily, ProblemSpec};
    use crate::scalar::{c, cr, fro, real_diag};

    fn example() -> (BSpace<f64>, SmootherContext<f64>) {
        let space = BSpace::euclidean(3);
        let a = real_diag(&[0.25, 0.5, 0.75]);
        let ctx = build_smoother(&space, &a, &identity(3)).unwrap();
        (space, ctx)
    }

    #[test]
    fn example_hat_matches_printed_diagonal() {
        let (_, ctx) = example();
        let expected = real_diag::<f64>(&[7.0 / 16.0, 0.75, 15.0 / 16.0]);
        assert!(fro(&(&ctx.hat_minv_b - &expected)) <= 1e-14);
        let comp = identity::<f64>(3) - &ctx.hat_minv_b;
        assert!(fro(&(comp - real_diag::<f64>(&[9.0 / 16.0, 0.25, 1.0 / 16.0]))) <= 1e-14);
    }

    #[test]
    fn example_report() {
        let (space, ctx) = example();
        let r = smoothing_report(&space, &ctx).unwrap();
        assert!(r.assumption_holds && r.consistent());
        for (got, want) in r.spectrum_hat.iter().zip([7.0 / 16.0, 0.75, 15.0 / 16.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert_eq!(r.spectrum_tilde.len(), 3);
    }

    #[test]
    fn hpd_reference_tilde_expansion() {
        let a = random_hpd::<f64>(6, 1);
        let space = BSpace::new(a.clone()).unwrap();
        let m = random_matrix::<f64>(6, 6, 2) + identity::<f64>(6) * cr(6.0);
        let minv = spectral::inverse(&m).unwrap();
        let ctx = build_smoother(&space, &a, &minv).unwrap();
        let expected = minv.adjoint() * (&m + m.adjoint() - &a) * &minv;
        assert!(fro(&(&ctx.tilde_minv - &expected)) < 1e-10 * fro(&expected));
        let alt = &minv + minv.adjoint() - minv.adjoint() * &a * &minv;
        assert!(fro(&(&ctx.tilde_minv - alt)) < 1e-10 * fro(&expected));
    }

    #[test]
    fn scaled_inverse_smoothers() {
        let space = BSpace::new(random_hpd::<f64>(5, 3)).unwrap();
        let a = random_matrix::<f64>(5, 5, 4);
        let ainv = spectral::inverse(&a).unwrap();

        let ctx = build_smoother(&space, &a, &(&ainv * cr(0.5))).unwrap();
        let r = smoothing_report(&space, &ctx).unwrap();
        assert!(r.assumption_holds && r.consistent());
        assert!(r.spectrum_hat.iter().all(|&x| (x - 0.75).abs() < 1e-9));

        let ctx = build_smoother(&space, &a, &(&ainv * cr(2.5))).unwrap();
        let r = smoothing_report(&space, &ctx).unwrap();
        assert!(!r.assumption_holds && r.consistent());
        assert!((r.b_norm_of_error - 1.5).abs() < 1e-9);
    }

    #[test]
    fn singular_smoother_rejected() {
        let space = BSpace::<f64>::euclidean(2);
        let a = identity::<f64>(2);
        let minv = real_diag::<f64>(&[1.0, 0.0]);
        assert!(matches!(
            build_smoother(&space, &a, &minv),
            Err(Error::SingularSmoother)
        ));
    }

    #[test]
    fn eigen_map_values() {
        assert_eq!(eigen_map(c::<f64>(1.0, 0.0)), 1.0);
        assert_eq!(eigen_map(c::<f64>(0.5, 0.0)), 0.75);
        assert_eq!(eigen_map(c::<f64>(2.0, 0.0)), 0.0);
        assert!((eigen_map(c::<f64>(1.0, 0.5)) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn reduce_steps_examples() {
        let (space, ctx) = example();
        let one = reduce_steps(&space, &ctx, 1).unwrap();
        assert!(fro(&(&one.xhat_inv_b - &ctx.hat_minv_b)) < 1e-14);
        let two = reduce_steps(&space, &ctx, 2).unwrap();
        let comp = identity::<f64>(3) - &two.xhat_inv_b;
        let expected = real_diag::<f64>(&[81.0 / 256.0, 1.0 / 16.0, 1.0 / 256.0]);
        assert!(fro(&(comp - expected)) < 1e-14);
        // Corrected sign pattern: X̂⁻¹B from the closed formula equals the power form.
        assert!(fro(&(&two.xhat_inv * space.b() - &two.xhat_inv_b)) < 1e-14);

        let space = BSpace::<f64>::euclidean(1);
        let ctx = build_smoother(&space, &real_diag(&[0.5]), &identity(1)).unwrap();
        let three = reduce_steps(&space, &ctx, 3).unwrap();
        assert!((1.0 - three.xhat_inv_b[(0, 0)].re - 0.25f64.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn reduce_steps_errors() {
        let (space, ctx) = example();
        assert!(matches!(
            reduce_steps(&space, &ctx, 9),
            Err(Error::TooManySmoothingSteps { .. })
        ));
        let spec = ProblemSpec::new(ProblemFamily::RandomContractive { contraction: 0.8 }, 5, 1);
        let p = generate::<f64>(&spec).unwrap();
        let space = p.space().unwrap();
        let ctx = build_smoother(&space, &p.a, &p.minv).unwrap();
        assert!(matches!(
            reduce_steps(&space, &ctx, 2),
            Err(Error::NotBNormal { .. })
        ));
        let space1 = BSpace::<f64>::euclidean(2);
        let ctx = build_smoother(&space1, &real_diag(&[1.0, 0.5]), &identity(2)).unwrap();
        assert!(matches!(
            reduce_steps(&space1, &ctx, 2),
            Err(Error::SingularErrorOperator)
        ));
        let ctx = build_smoother(&space1, &real_diag(&[2.5, 0.5]), &identity(2)).unwrap();
        assert!(matches!(
            reduce_steps(&space1, &ctx, 2),
            Err(Error::SmoothingAssumptionViolated { .. })
        ));
    }

    #[test]
    fn b_normal_instances() {
        for seed in 0..5 {
            let spec = ProblemSpec::new(
                ProblemFamily::RandomBNormal {
                    multiplicity: 1,
                    real_spectrum: false,
                    radius: 0.95,
                },
                7,
                seed,
            );
            let p = generate::<f64>(&spec).unwrap();
            let space = p.space().unwrap();
            let ctx = build_smoother(&space, &p.a, &p.minv).unwrap();
            assert!(ctx.b_normal);
            assert!(fro(&(&ctx.tilde_minv - &ctx.hat_minv)) < 1e-10 * fro(&ctx.hat_minv));
            let diag = space.b_unitary_diagonalization(&ctx.ma).unwrap();
            for (j, &l) in diag.d.iter().enumerate() {
                let z = diag.u.column(j).into_owned();
                let lhs = &ctx.hat_minv_b * &z;
                let rhs = &z * cr(eigen_map(l));
                assert!((lhs - rhs).norm() < 1e-8 * z.norm());
            }
            let red = reduce_steps(&space, &ctx, 3).unwrap();
            let cls = space.classify(&red.xhat_inv_b).unwrap();
            assert!(cls.is_b_orthogonal);
            assert!(space.classify(&red.xinv_a).unwrap().is_b_normal);
            assert!(spectral::is_hpd(&red.xhat_inv));
            let expected = identity::<f64>(7) - power(&(identity::<f64>(7) - &ctx.hat_minv_b), 3);
            assert!(fro(&(&red.xhat_inv * space.b() - expected)) < 1e-9);
        }
    }
}
