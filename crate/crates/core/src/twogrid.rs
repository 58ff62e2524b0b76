//! Two-grid error propagators and their sharp B-norm characterizations.

use serde::{Deserialize, Serialize};

use crate::bspace::{lambda_min_plus, zero_threshold, BSpace};
use crate::error::{Error, Hypothesis, Result};
use crate::scalar::{hermitian_part, identity, power, CMatrix, Real};
use crate::smoother::{self, SmootherContext, MAX_STEPS};
use crate::spectral;
use crate::transfer::{build_correction, CoarseGridCorrection, TransferPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// `E₊ = (I − (M⁻¹A)⁺)^{ν₂}(I − Π)(I − M⁻¹A)^{ν₁}`.
    AdjointPost,
    /// `E = (I − M⁻¹A)^{ν₂}(I − Π)(I − M⁻¹A)^{ν₁}`.
    Plain,
}

#[derive(Debug, Clone)]
pub struct TwoGridOperator<T: Real> {
    pub kind: OperatorKind,
    pub nu1: usize,
    pub nu2: usize,
    pub matrix: CMatrix<T>,
    /// Pre-smoothing factor `(I − M⁻¹A)^{ν₁}`.
    pub pre: CMatrix<T>,
    /// Post-smoothing factor.
    pub post: CMatrix<T>,
    pub b_norm: T,
}

/// `(I − M⁻¹A)^{ν}` or `(I − (M⁻¹A)⁺)^{ν}`.
fn post_factor<T: Real>(ctx: &SmootherContext<T>, kind: OperatorKind, nu: usize) -> CMatrix<T> {
    let n = ctx.dim();
    match kind {
        OperatorKind::AdjointPost => power(&(identity::<T>(n) - &ctx.ma_adj), nu),
        OperatorKind::Plain => power(&(identity::<T>(n) - &ctx.ma), nu),
    }
}

pub fn assemble<T: Real>(
    kind: OperatorKind,
    space: &BSpace<T>,
    ctx: &SmootherContext<T>,
    cgc: &CoarseGridCorrection<T>,
    nu1: usize,
    nu2: usize,
) -> Result<TwoGridOperator<T>> {
    for nu in [nu1, nu2] {
        if nu > MAX_STEPS {
            return Err(Error::TooManySmoothingSteps {
                max: MAX_STEPS,
                got: nu,
            });
        }
    }
    let n = space.dim();
    if ctx.dim() != n || cgc.pi.nrows() != n {
        return Err(Error::dims(n, ctx.dim()));
    }
    let pre = power(&ctx.error_operator(), nu1);
    let post = post_factor(ctx, kind, nu2);
    let matrix = &post * &cgc.complement * &pre;
    let b_norm = space.op_norm(&matrix)?;
    Ok(TwoGridOperator {
        kind,
        nu1,
        nu2,
        matrix,
        pre,
        post,
        b_norm,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormCheck {
    pub norm: f64,
    /// `sqrt(λ_max(E⁺E))` from a general eigensolve.
    pub adjoint_product_root: f64,
    pub agree: bool,
}

/// The B-norm, cross-checked against `λ_max(E⁺E)`.
pub fn norm<T: Real>(space: &BSpace<T>, op: &TwoGridOperator<T>) -> Result<NormCheck> {
    let lm = space.lambda_max_adjoint_product(&op.matrix)?;
    let root = if lm > T::zero() { lm.sqrt() } else { T::zero() };
    let sq = op.b_norm * op.b_norm;
    Ok(NormCheck {
        norm: op.b_norm.as_f64(),
        adjoint_product_root: root.as_f64(),
        agree: (sq - lm).abs() <= T::tol(1e-8) * crate::scalar::max1(sq),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SharpBoundReport {
    pub kind: OperatorKind,
    pub nu: usize,
    /// `‖E^{ν,ν}‖_B`.
    pub b_norm_direct: f64,
    /// `‖E^{ν,0}‖²_B`.
    pub pre_norm_sq: f64,
    /// `‖E^{0,ν}‖²_B`.
    pub post_norm_sq: f64,
    /// `λ⁺_min(X̂⁻¹B(I − Π))`; `X̂⁻¹B = M̂⁻¹B` for `ν = 1`.
    pub lambda_min_plus: f64,
    pub one_minus_lmp: f64,
    /// `λ_max((I − M̂⁻¹B)^ν(I − Π))`.
    pub lambda_max_form: f64,
    /// `K_{X̂,B}(P)`.
    pub k_constant: f64,
    pub one_minus_inv_k: f64,
    /// `σ(X̂⁻¹B(I − Π)) ⊆ [−τ, 1)`.
    pub spectrum_in_unit_interval: bool,
    pub max_discrepancy: f64,
    pub agreement: bool,
}

impl SharpBoundReport {
    pub fn quantities(&self) -> [(&'static str, f64); 6] {
        [
            ("b_norm_direct", self.b_norm_direct),
            ("pre_norm_sq", self.pre_norm_sq),
            ("post_norm_sq", self.post_norm_sq),
            ("one_minus_lmp", self.one_minus_lmp),
            ("lambda_max_form", self.lambda_max_form),
            ("one_minus_inv_k", self.one_minus_inv_k),
        ]
    }
}

/// Check the hypotheses of the sharp characterization for `op`.
pub fn check_hypotheses<T: Real>(
    space: &BSpace<T>,
    ctx: &SmootherContext<T>,
    cgc: &CoarseGridCorrection<T>,
    kind: OperatorKind,
    nu1: usize,
    nu2: usize,
) -> Result<()> {
    let violated = |h| Err(Error::HypothesisViolated(h));
    if nu1 != nu2 {
        return violated(Hypothesis::SymmetricSmoothingSteps);
    }
    if kind == OperatorKind::AdjointPost && nu1 != 1 {
        return violated(Hypothesis::SingleSmoothingStep);
    }
    if !cgc.is_proper() {
        return violated(Hypothesis::ProperCoarseSpace);
    }
    if !cgc.b_orthogonal {
        return violated(Hypothesis::ProjectionBOrthogonal);
    }
    let err = ctx.error_operator();
    if space.op_norm(&err)? >= T::one() {
        return violated(Hypothesis::SmoothingAssumption);
    }
    match kind {
        OperatorKind::Plain => {
            if !ctx.b_normal {
                return violated(Hypothesis::SmootherBNormal);
            }
            if spectral::condition_number(&err)? > T::lit(1e12) {
                return violated(Hypothesis::ErrorOperatorNonsingular);
            }
        }
        OperatorKind::AdjointPost => {
            let comp = identity::<T>(space.dim()) - &ctx.hat_minv_b;
            if spectral::condition_number(&comp)? > T::lit(1e12) {
                return violated(Hypothesis::SymmetrizedComplementNonsingular);
            }
        }
    }
    Ok(())
}

/// Evaluate every characterization of `‖E^{ν,ν}‖_B` after checking the
/// hypotheses under which they are known to coincide.
pub fn sharp_report<T: Real>(
    space: &BSpace<T>,
    ctx: &SmootherContext<T>,
    cgc: &CoarseGridCorrection<T>,
    op: &TwoGridOperator<T>,
) -> Result<SharpBoundReport> {
    check_hypotheses(space, ctx, cgc, op.kind, op.nu1, op.nu2)?;
    evaluate_characterizations(space, ctx, cgc, op.kind, op.nu1)
}

/// The same quantities as [`sharp_report`] without hypothesis checks. Used
/// to collect empirical data outside the proven range (for example `E₊`
/// with `ν > 1`). Requires a B-orthogonal correction for the Hermitian
/// formulation of `λ⁺_min`.
pub fn evaluate_characterizations<T: Real>(
    space: &BSpace<T>,
    ctx: &SmootherContext<T>,
    cgc: &CoarseGridCorrection<T>,
    kind: OperatorKind,
    nu: usize,
) -> Result<SharpBoundReport> {
    if !cgc.b_orthogonal {
        return Err(Error::HypothesisViolated(Hypothesis::ProjectionBOrthogonal));
    }
    let full = assemble(kind, space, ctx, cgc, nu, nu)?;
    let pre = assemble(kind, space, ctx, cgc, nu, 0)?;
    let post = assemble(kind, space, ctx, cgc, 0, nu)?;

    let n = space.dim();
    let xhat_inv_b = smoother::xhat_inv_b_unchecked(ctx, nu);
    // Q̃ = B^{1/2}(I − Π)B^{-1/2} is an orthogonal projector; H̃ is similar
    // to X̂⁻¹B and Hermitian.
    let q = hermitian_part(&space.transform(&cgc.complement));
    let h = hermitian_part(&space.transform(&xhat_inv_b));
    let qhq = hermitian_part(&(&q * &h * &q));
    let eig = spectral::hermitian_eigenvalues(&qhq)?;
    let lmp =
        lambda_min_plus(&eig)?.ok_or(Error::HypothesisViolated(Hypothesis::ProperCoarseSpace))?;
    let top = eig.last().copied().unwrap_or_else(T::zero);
    let tau = zero_threshold(top);
    let spectrum_in_unit_interval = eig.iter().all(|&l| l >= -tau && l < T::one());

    let comp = hermitian_part(&(identity::<T>(n) - &h));
    let lam_max = spectral::hermitian_eig(&hermitian_part(&(&q * &comp * &q)))?.max();

    let basis = spectral::range_basis(&cgc.pi)?;
    let xhat = hermitian_part(&spectral::inverse(&hermitian_part(
        &(&xhat_inv_b * space.inv_b()),
    ))?);
    let k = k_constant(&xhat, space.b(), &basis)?;
    let one_minus_inv_k = T::one() - T::one() / k;

    let values = [
        full.b_norm,
        pre.b_norm * pre.b_norm,
        post.b_norm * post.b_norm,
        T::one() - lmp,
        lam_max,
        one_minus_inv_k,
    ];
    let mut max_discrepancy = T::zero();
    for (i, &x) in values.iter().enumerate() {
        for &y in &values[i + 1..] {
            let d = (x - y).abs();
            if d > max_discrepancy {
                max_discrepancy = d;
            }
        }
    }
    Ok(SharpBoundReport {
        kind,
        nu,
        b_norm_direct: full.b_norm.as_f64(),
        pre_norm_sq: values[1].as_f64(),
        post_norm_sq: values[2].as_f64(),
        lambda_min_plus: lmp.as_f64(),
        one_minus_lmp: values[3].as_f64(),
        lambda_max_form: lam_max.as_f64(),
        k_constant: k.as_f64(),
        one_minus_inv_k: one_minus_inv_k.as_f64(),
        spectrum_in_unit_interval,
        max_discrepancy: max_discrepancy.as_f64(),
        agreement: max_discrepancy <= T::tol(1e-8),
    })
}

/// `K_{G,C}(P) = max_v vᴴG(I − P(PᴴGP)⁻¹PᴴG)v / vᴴCv`, evaluated as
/// `λ_max(C^{-1/2}(G − GP(PᴴGP)⁻¹PᴴG)C^{-1/2})`.
pub fn k_constant<T: Real>(g: &CMatrix<T>, c: &CMatrix<T>, p: &CMatrix<T>) -> Result<T> {
    let n = g.nrows();
    if g.ncols() != n || c.nrows() != n || c.ncols() != n || p.nrows() != n {
        return Err(Error::dims(
            format!("{n}x{n}"),
            format!("{}x{}", c.nrows(), c.ncols()),
        ));
    }
    if !spectral::is_hpd(g) {
        return Err(Error::NotHpd {
            eigenvalue: spectral::hermitian_eig(&hermitian_part(g))?.min().as_f64(),
        });
    }
    let croots = spectral::hpd_roots(c)?;
    let ratio = spectral::column_rank_ratio(p)?;
    if p.ncols() == 0 || ratio <= T::tol(1e-10) {
        return Err(Error::RankDeficientTransfer {
            ratio: ratio.as_f64(),
        });
    }
    let gp = g * p;
    let coarse = p.adjoint() * &gp;
    let schur = g - &gp * spectral::solve(&coarse, &gp.adjoint())?;
    let m = hermitian_part(&(&croots.inv_sqrt * schur * &croots.inv_sqrt));
    let top = spectral::hermitian_eig(&m)?.max();
    Ok(if top > T::zero() { top } else { T::zero() })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonotonicityEntry {
    pub nu1: usize,
    pub nu2: usize,
    pub norm_small: f64,
    pub norm_big: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityVerdict {
    pub kind: OperatorKind,
    pub entries: Vec<MonotonicityEntry>,
    pub holds: bool,
    pub nesting_angle: f64,
}

/// Compare two-grid norms for nested coarse spaces. Both coarse-grid
/// projections must be B-orthogonal; `E` needs a B-normal smoother and `E₊`
/// a single smoothing step.
#[allow(clippy::too_many_arguments)]
pub fn compare_coarse_spaces<T: Real>(
    space: &BSpace<T>,
    a: &CMatrix<T>,
    ctx: &SmootherContext<T>,
    small: &TransferPair<T>,
    big: &TransferPair<T>,
    kind: OperatorKind,
    nu: usize,
) -> Result<MonotonicityVerdict> {
    let angle = nesting_angle(small, big)?;
    if angle > T::tol(1e-8) {
        return Err(Error::NestingViolated {
            angle: angle.as_f64(),
        });
    }
    let cs = build_correction(space, a, small)?;
    let cb = build_correction(space, a, big)?;
    if !cs.b_orthogonal || !cb.b_orthogonal {
        return Err(Error::HypothesisViolated(Hypothesis::ProjectionBOrthogonal));
    }
    match kind {
        OperatorKind::Plain if !ctx.b_normal => {
            return Err(Error::HypothesisViolated(Hypothesis::SmootherBNormal));
        }
        OperatorKind::AdjointPost if nu != 1 => {
            return Err(Error::HypothesisViolated(Hypothesis::SingleSmoothingStep));
        }
        _ => {}
    }
    evaluate_monotonicity(space, ctx, &cs, &cb, kind, nu, angle)
}

/// Smallest containment angle among `R(P) ⊆ R(P̃)` and `R(R) ⊆ R(R̃)`.
pub fn nesting_angle<T: Real>(small: &TransferPair<T>, big: &TransferPair<T>) -> Result<T> {
    let ap = spectral::containment_angle(&small.p, &big.p)?;
    let ar = spectral::containment_angle(&small.r, &big.r)?;
    Ok(if ap < ar { ap } else { ar })
}

/// Norms for `(ν,0)`, `(0,ν)` and `(ν,ν)` without hypothesis checks.
pub fn evaluate_monotonicity<T: Real>(
    space: &BSpace<T>,
    ctx: &SmootherContext<T>,
    small: &CoarseGridCorrection<T>,
    big: &CoarseGridCorrection<T>,
    kind: OperatorKind,
    nu: usize,
    nesting: T,
) -> Result<MonotonicityVerdict> {
    let mut entries = Vec::new();
    for (nu1, nu2) in [(nu, 0), (0, nu), (nu, nu)] {
        let s = assemble(kind, space, ctx, small, nu1, nu2)?.b_norm;
        let b = assemble(kind, space, ctx, big, nu1, nu2)?.b_norm;
        entries.push(MonotonicityEntry {
            nu1,
            nu2,
            norm_small: s.as_f64(),
            norm_big: b.as_f64(),
            holds: b <= s + T::tol(1e-10),
        });
    }
    Ok(MonotonicityVerdict {
        kind,
        holds: entries.iter().all(|e| e.holds),
        entries,
        nesting_angle: nesting.as_f64(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WeylReport {
    pub rank: usize,
    pub checked: usize,
    /// `max_i λ_i(H₁ + H₂) − λ_{i+r}(H₁)`; nonpositive when the inequality
    /// holds exactly.
    pub max_violation: f64,
    pub holds: bool,
}

/// `λ_i(H₁ + H₂) ≤ λ_{i+r}(H₁)` (ascending order) with `r = rank(H₂)`.
pub fn weyl_check<T: Real>(h1: &CMatrix<T>, h2: &CMatrix<T>) -> Result<WeylReport> {
    let n = h1.nrows();
    if h2.nrows() != n || h2.ncols() != n || h1.ncols() != n {
        return Err(Error::dims(
            format!("{n}x{n}"),
            format!("{}x{}", h2.nrows(), h2.ncols()),
        ));
    }
    let e2 = spectral::hermitian_eigenvalues(h2)?;
    let top = e2
        .iter()
        .fold(T::zero(), |m, &x| if x.abs() > m { x.abs() } else { m });
    let tau = zero_threshold(top);
    let rank = e2.iter().filter(|x| x.abs() > tau).count();
    let e1 = spectral::hermitian_eigenvalues(h1)?;
    let sum = spectral::hermitian_eigenvalues(&hermitian_part(&(h1 + h2)))?;
    let slack = T::tol(1e-9) * crate::scalar::max1(crate::scalar::fro(h1) + crate::scalar::fro(h2));
    let mut max_violation = T::min_value().unwrap_or(-T::one());
    let mut checked = 0;
    for i in 0..n.saturating_sub(rank) {
        let d = sum[i] - e1[i + rank];
        if d > max_violation {
            max_violation = d;
        }
        checked += 1;
    }
    let holds = checked == 0 || max_violation <= slack;
    Ok(WeylReport {
        rank,
        checked,
        max_violation: if checked == 0 {
            0.0
        } else {
            max_violation.as_f64()
        },
        holds,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftReport {
    pub kernel_dim: usize,
    pub holds: bool,
}

/// `σ(CΠ) = σ_r ∪ {0}^{n−r}` and `σ(CΠ + I − Π) = σ_r ∪ {1}^{n−r}` for a
/// projection `Π` of rank `r`; checked as multiset equalities in both
/// directions.
pub fn spectrum_shift_check<T: Real>(c: &CMatrix<T>, pi: &CMatrix<T>) -> Result<ShiftReport> {
    let n = c.nrows();
    if pi.nrows() != n || pi.ncols() != n || c.ncols() != n {
        return Err(Error::dims(
            format!("{n}x{n}"),
            format!("{}x{}", pi.nrows(), pi.ncols()),
        ));
    }
    let rank = spectral::range_basis(pi)?.ncols();
    let m = n - rank;
    let cp = c * pi;
    let shifted = &cp + identity::<T>(n) - pi;
    let s0 = spectral::general_spectrum(&cp)?.values;
    let s1 = spectral::general_spectrum(&shifted)?.values;
    let zero = num_complex::Complex::new(T::zero(), T::zero());
    let one = num_complex::Complex::new(T::one(), T::zero());
    let scale = s0.iter().chain(s1.iter()).fold(T::zero(), |a, z| {
        if nalgebra::ComplexField::modulus(*z) > a {
            nalgebra::ComplexField::modulus(*z)
        } else {
            a
        }
    });
    let tol = T::tol(1e-8) * (T::one() + scale);

    let mut forward = spectral::remove_nearest(&s0, zero, m);
    forward.extend(std::iter::repeat_n(one, m));
    let mut backward = spectral::remove_nearest(&s1, one, m);
    backward.extend(std::iter::repeat_n(zero, m));
    Ok(ShiftReport {
        kernel_dim: m,
        holds: spectral::multiset_match(&forward, &s1, tol)
            && spectral::multiset_match(&backward, &s0, tol),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probgen::random::{random_hermitian, random_hpd, random_matrix};
    use crate::probgen::{generate, nested_counterexample, ProblemFamily, ProblemSpec};
    use crate::scalar::{fro, from_real_rows, real_diag};
    use crate::smoother::build_smoother;
    use crate::transfer::complete_interpolation;

    struct Fixture {
        space: BSpace<f64>,
        a: CMatrix<f64>,
        ctx: SmootherContext<f64>,
    }

    fn counterexample_fixture() -> (Fixture, TransferPair<f64>, TransferPair<f64>) {
        let f = nested_counterexample::<f64>();
        let space = BSpace::new(f.b.clone()).unwrap();
        let ctx = build_smoother(&space, &f.a, &f.minv).unwrap();
        let small = TransferPair::new(&space, &f.a, f.p.clone(), f.r.clone()).unwrap();
        let big = TransferPair::new(&space, &f.a, f.p_big.clone(), f.r_big.clone()).unwrap();
        (Fixture { space, a: f.a, ctx }, small, big)
    }

    fn b_normal_fixture(n: usize, seed: u64) -> Fixture {
        let spec = ProblemSpec::new(
            ProblemFamily::RandomBNormal {
                multiplicity: 1,
                real_spectrum: false,
                radius: 0.95,
            },
            n,
            seed,
        );
        let p = generate::<f64>(&spec).unwrap();
        let space = p.space().unwrap();
        let ctx = build_smoother(&space, &p.a, &p.minv).unwrap();
        Fixture { space, a: p.a, ctx }
    }

    fn compatible(
        fx: &Fixture,
        nc: usize,
        seed: u64,
    ) -> (TransferPair<f64>, CoarseGridCorrection<f64>) {
        let r = random_matrix::<f64>(fx.space.dim(), nc, seed);
        let p = complete_interpolation(&fx.space, &fx.a, &r).unwrap();
        let pair = TransferPair::new(&fx.space, &fx.a, p, r).unwrap();
        let cgc = build_correction(&fx.space, &fx.a, &pair).unwrap();
        (pair, cgc)
    }

    #[test]
    fn counterexample_norms() {
        let (fx, small, big) = counterexample_fixture();
        let cs = build_correction(&fx.space, &fx.a, &small).unwrap();
        let cb = build_correction(&fx.space, &fx.a, &big).unwrap();
        let es = assemble(OperatorKind::Plain, &fx.space, &fx.ctx, &cs, 1, 1).unwrap();
        let eb = assemble(OperatorKind::Plain, &fx.space, &fx.ctx, &cb, 1, 1).unwrap();
        assert!((es.b_norm.powi(2) - 65.0 / 288.0).abs() < 1e-12);
        assert!((eb.b_norm.powi(2) - 91.0 / 256.0).abs() < 1e-12);
        assert!(norm(&fx.space, &eb).unwrap().agree);
        assert!(matches!(
            sharp_report(&fx.space, &fx.ctx, &cs, &es),
            Err(Error::HypothesisViolated(Hypothesis::ProjectionBOrthogonal))
        ));
        let v = evaluate_monotonicity(&fx.space, &fx.ctx, &cs, &cb, OperatorKind::Plain, 1, 0.0)
            .unwrap();
        assert!(!v.entries[2].holds);
        assert!(matches!(
            compare_coarse_spaces(
                &fx.space,
                &fx.a,
                &fx.ctx,
                &small,
                &big,
                OperatorKind::Plain,
                1
            ),
            Err(Error::HypothesisViolated(Hypothesis::ProjectionBOrthogonal))
        ));
    }

    #[test]
    fn trivial_assemblies() {
        let fx = b_normal_fixture(6, 1);
        let (_, cgc) = compatible(&fx, 2, 2);
        let e00 = assemble(OperatorKind::Plain, &fx.space, &fx.ctx, &cgc, 0, 0).unwrap();
        assert!(fro(&(&e00.matrix - &cgc.complement)) < 1e-14);
        let p10 = assemble(OperatorKind::AdjointPost, &fx.space, &fx.ctx, &cgc, 1, 0).unwrap();
        let e10 = assemble(OperatorKind::Plain, &fx.space, &fx.ctx, &cgc, 1, 0).unwrap();
        assert_eq!(p10.matrix, e10.matrix);
        let pair = TransferPair::new(&fx.space, &fx.a, identity(6), identity(6)).unwrap();
        let full = build_correction(&fx.space, &fx.a, &pair).unwrap();
        for nu in 0..3 {
            let e = assemble(OperatorKind::Plain, &fx.space, &fx.ctx, &full, nu, nu).unwrap();
            assert!(e.b_norm < 1e-10);
        }
        assert!(matches!(
            assemble(OperatorKind::Plain, &fx.space, &fx.ctx, &cgc, 9, 0),
            Err(Error::TooManySmoothingSteps { .. })
        ));
    }

    #[test]
    fn factorization_and_submultiplicativity() {
        let fx = b_normal_fixture(8, 3);
        let (_, cgc) = compatible(&fx, 3, 4);
        let err_norm = fx.space.op_norm(&fx.ctx.error_operator()).unwrap();
        for kind in [OperatorKind::Plain, OperatorKind::AdjointPost] {
            for (n1, n2) in [(1, 2), (2, 1), (3, 3)] {
                let e = assemble(kind, &fx.space, &fx.ctx, &cgc, n1, n2).unwrap();
                let pre = assemble(kind, &fx.space, &fx.ctx, &cgc, n1, 0).unwrap();
                let post = assemble(kind, &fx.space, &fx.ctx, &cgc, 0, n2).unwrap();
                assert!(fro(&(&post.matrix * &pre.matrix - &e.matrix)) < 1e-10);
                assert!(e.b_norm <= err_norm.powi((n1 + n2) as i32) + 1e-12);
                assert!(norm(&fx.space, &e).unwrap().agree);
            }
        }
    }

    #[test]
    fn sharp_report_agreement_b_normal() {
        for seed in 0..4 {
            let fx = b_normal_fixture(10, seed);
            let (_, cgc) = compatible(&fx, 4, seed + 50);
            for nu in 1..=3 {
                let op = assemble(OperatorKind::Plain, &fx.space, &fx.ctx, &cgc, nu, nu).unwrap();
                let r = sharp_report(&fx.space, &fx.ctx, &cgc, &op).unwrap();
                assert!(r.agreement, "{r:?}");
                assert!(r.spectrum_in_unit_interval);
                assert!(r.lambda_min_plus > 0.0 && r.lambda_min_plus < 1.0);
                let plus =
                    assemble(OperatorKind::AdjointPost, &fx.space, &fx.ctx, &cgc, nu, nu).unwrap();
                assert!((plus.b_norm - op.b_norm).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn sharp_report_adjoint_post_non_normal() {
        for seed in 0..4 {
            let spec = ProblemSpec::new(
                ProblemFamily::RandomContractive { contraction: 0.9 },
                9,
                seed,
            );
            let p = generate::<f64>(&spec).unwrap();
            let space = p.space().unwrap();
            let ctx = build_smoother(&space, &p.a, &p.minv).unwrap();
            let fx = Fixture { space, a: p.a, ctx };
            let (_, cgc) = compatible(&fx, 3, seed + 9);
            let op = assemble(OperatorKind::AdjointPost, &fx.space, &fx.ctx, &cgc, 1, 1).unwrap();
            let r = sharp_report(&fx.space, &fx.ctx, &cgc, &op).unwrap();
            assert!(r.agreement, "{r:?}");
            // E₊^{1,1} is B-orthogonal and (E₊^{1,0})⁺ = E₊^{0,1}.
            let adj = fx.space.adjoint(&op.matrix).unwrap();
            assert!(fro(&(&adj - &op.matrix)) < 1e-9 * fro(&op.matrix));
            let pre = assemble(OperatorKind::AdjointPost, &fx.space, &fx.ctx, &cgc, 1, 0).unwrap();
            let post = assemble(OperatorKind::AdjointPost, &fx.space, &fx.ctx, &cgc, 0, 1).unwrap();
            assert!(fro(&(fx.space.adjoint(&pre.matrix).unwrap() - &post.matrix)) < 1e-9);
            let plain = assemble(OperatorKind::Plain, &fx.space, &fx.ctx, &cgc, 1, 1).unwrap();
            assert!(matches!(
                sharp_report(&fx.space, &fx.ctx, &cgc, &plain),
                Err(Error::HypothesisViolated(Hypothesis::SmootherBNormal))
            ));
            let two = assemble(OperatorKind::AdjointPost, &fx.space, &fx.ctx, &cgc, 2, 2).unwrap();
            assert!(matches!(
                sharp_report(&fx.space, &fx.ctx, &cgc, &two),
                Err(Error::HypothesisViolated(Hypothesis::SingleSmoothingStep))
            ));
        }
    }

    #[test]
    fn scalar_two_dimensional_case() {
        // n = 2, n_c = 1, everything Hermitian: K = 1/λ⁺_min.
        let space = BSpace::<f64>::euclidean(2);
        let a = from_real_rows::<f64>(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let minv = real_diag::<f64>(&[0.4, 0.4]);
        let ctx = build_smoother(&space, &a, &minv).unwrap();
        let p = from_real_rows::<f64>(2, 1, &[1.0, 0.0]);
        let pair = TransferPair::new(
            &space,
            &a,
            complete_interpolation(&space, &a, &p).unwrap(),
            p,
        )
        .unwrap();
        let cgc = build_correction(&space, &a, &pair).unwrap();
        let op = assemble(OperatorKind::Plain, &space, &ctx, &cgc, 1, 1).unwrap();
        let r = sharp_report(&space, &ctx, &cgc, &op).unwrap();
        assert!((r.k_constant - 1.0 / r.lambda_min_plus).abs() < 1e-12);
        assert!(r.agreement);
    }

    #[test]
    fn k_constant_cases() {
        let g = random_hpd::<f64>(5, 1);
        let c = random_hpd::<f64>(5, 2);
        assert!(k_constant(&g, &c, &identity(5)).unwrap().abs() < 1e-10);
        let p = random_matrix::<f64>(5, 2, 3);
        assert!((k_constant(&g, &g, &p).unwrap() - 1.0).abs() < 1e-10);
        let k1 = k_constant(&g, &c, &p).unwrap();
        let s = random_matrix::<f64>(2, 2, 4);
        let k2 = k_constant(&g, &c, &(&p * s)).unwrap();
        assert!((k1 - k2).abs() < 1e-9 * k1);
        let not_hpd = real_diag::<f64>(&[1.0, -1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            k_constant(&not_hpd, &c, &p),
            Err(Error::NotHpd { .. })
        ));
        let rank_def =
            from_real_rows::<f64>(5, 2, &[1.0, 2.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            k_constant(&g, &c, &rank_def),
            Err(Error::RankDeficientTransfer { .. })
        ));
    }

    #[test]
    fn monotonicity_on_nested_compatible_pairs() {
        let fx = b_normal_fixture(9, 7);
        let r = random_matrix::<f64>(9, 2, 8);
        let r_big = crate::probgen::extend_coarsening(&r, 3, 9).unwrap();
        let mk = |r: CMatrix<f64>| {
            let p = complete_interpolation(&fx.space, &fx.a, &r).unwrap();
            TransferPair::new(&fx.space, &fx.a, p, r).unwrap()
        };
        let small = mk(r);
        let big = mk(r_big);
        for nu in 1..=3 {
            let v = compare_coarse_spaces(
                &fx.space,
                &fx.a,
                &fx.ctx,
                &small,
                &big,
                OperatorKind::Plain,
                nu,
            )
            .unwrap();
            assert!(v.holds, "{v:?}");
        }
        let v = compare_coarse_spaces(
            &fx.space,
            &fx.a,
            &fx.ctx,
            &small,
            &big,
            OperatorKind::AdjointPost,
            1,
        )
        .unwrap();
        assert!(v.holds);
        assert!(matches!(
            compare_coarse_spaces(
                &fx.space,
                &fx.a,
                &fx.ctx,
                &big,
                &small,
                OperatorKind::Plain,
                1
            ),
            Err(Error::NestingViolated { .. })
        ));
        let full = mk(identity(9));
        let v = compare_coarse_spaces(
            &fx.space,
            &fx.a,
            &fx.ctx,
            &small,
            &full,
            OperatorKind::Plain,
            1,
        )
        .unwrap();
        assert!(v.entries.iter().all(|e| e.norm_big < 1e-10));
    }

    #[test]
    fn weyl_examples() {
        let h1 = random_hermitian::<f64>(6, 1);
        let w = weyl_check(&h1, &CMatrix::zeros(6, 6)).unwrap();
        assert_eq!(w.rank, 0);
        assert!(w.holds && w.max_violation.abs() < 1e-12);
        let v = random_matrix::<f64>(6, 1, 2);
        let h2 = &v * v.adjoint();
        let w = weyl_check(&h1, &h2).unwrap();
        assert_eq!(w.rank, 1);
        assert!(w.holds);
        let w = weyl_check(&h1, &(-h2)).unwrap();
        assert!(w.holds);
        let d1 = real_diag::<f64>(&[1.0, 2.0, 3.0]);
        let d2 = real_diag::<f64>(&[0.0, 0.0, 10.0]);
        let w = weyl_check(&d1, &d2).unwrap();
        assert!(w.holds && w.rank == 1 && w.checked == 2);
    }

    #[test]
    fn spectrum_shift_examples() {
        let c = random_matrix::<f64>(6, 6, 11);
        let space = BSpace::<f64>::euclidean(6);
        let a = random_matrix::<f64>(6, 6, 12);
        let pair = TransferPair::new(&space, &a, random_matrix(6, 2, 13), random_matrix(6, 2, 14))
            .unwrap();
        let cgc = build_correction(&space, &a, &pair).unwrap();
        assert!(spectrum_shift_check(&c, &cgc.pi).unwrap().holds);
        assert!(spectrum_shift_check(&c, &cgc.complement).unwrap().holds);
    }
}
