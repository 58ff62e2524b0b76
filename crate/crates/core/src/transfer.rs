//! Coarse-grid corrections `Π_A(P,R) = P(RᴴAP)⁻¹RᴴA` and compatible
//! transfer operators.

use serde::Serialize;

use crate::bspace::BSpace;
use crate::error::{Error, Result};
use crate::scalar::{fro, identity, max1, CMatrix, Real};
use crate::spectral;

/// Interpolation `P` and restriction `R` (both `n × n_c`) with the derived
/// coarse matrices `A_c = RᴴAP` and `B_c = PᴴBP`.
#[derive(Debug, Clone)]
pub struct TransferPair<T: Real> {
    pub p: CMatrix<T>,
    pub r: CMatrix<T>,
    pub a_c: CMatrix<T>,
    pub b_c: CMatrix<T>,
    /// Change of basis with `P = B⁻¹AᴴR·S`, once computed.
    pub s: Option<CMatrix<T>>,
}

impl<T: Real> TransferPair<T> {
    pub fn new(space: &BSpace<T>, a: &CMatrix<T>, p: CMatrix<T>, r: CMatrix<T>) -> Result<Self> {
        let n = space.dim();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::dims(
                format!("{n}x{n}"),
                format!("{}x{}", a.nrows(), a.ncols()),
            ));
        }
        if p.nrows() != n || r.nrows() != n || p.ncols() != r.ncols() || p.ncols() == 0 {
            return Err(Error::dims(
                format!("P, R of shape {n}xn_c"),
                format!(
                    "P {}x{}, R {}x{}",
                    p.nrows(),
                    p.ncols(),
                    r.nrows(),
                    r.ncols()
                ),
            ));
        }
        for m in [&p, &r] {
            let ratio = spectral::column_rank_ratio(m)?;
            if ratio <= T::tol(1e-10) {
                return Err(Error::RankDeficientTransfer {
                    ratio: ratio.as_f64(),
                });
            }
        }
        let a_c = r.adjoint() * a * &p;
        let b_c = p.adjoint() * space.b() * &p;
        Ok(Self {
            p,
            r,
            a_c,
            b_c,
            s: None,
        })
    }

    pub fn coarse_dim(&self) -> usize {
        self.p.ncols()
    }
}

/// A coarse-grid correction and its complement.
#[derive(Debug, Clone)]
pub struct CoarseGridCorrection<T: Real> {
    pub pi: CMatrix<T>,
    pub complement: CMatrix<T>,
    pub b_orthogonal: bool,
    /// `‖Π⁺ − Π‖_F / max(1, ‖Π‖_F)`.
    pub orthogonality_residual: f64,
    pub range_dim: usize,
}

impl<T: Real> CoarseGridCorrection<T> {
    /// `Π ≠ 0` and `Π ≠ I`.
    pub fn is_proper(&self) -> bool {
        self.range_dim > 0 && self.range_dim < self.pi.nrows()
    }
}

/// `P(PᴴBP)⁻¹PᴴB`, the B-orthogonal projection onto `R(P)`.
pub fn b_orthogonal_projection<T: Real>(space: &BSpace<T>, p: &CMatrix<T>) -> Result<CMatrix<T>> {
    let pb = p.adjoint() * space.b();
    let gram = &pb * p;
    Ok(p * spectral::solve(&gram, &pb)?)
}

pub fn build_correction<T: Real>(
    space: &BSpace<T>,
    a: &CMatrix<T>,
    pair: &TransferPair<T>,
) -> Result<CoarseGridCorrection<T>> {
    let cond = spectral::condition_number(&pair.a_c)?;
    if cond > T::lit(1e12) {
        return Err(Error::SingularCoarseMatrix {
            condition: cond.as_f64(),
            level: None,
        });
    }
    let rha = pair.r.adjoint() * a;
    let pi = &pair.p * spectral::solve(&pair.a_c, &rha)?;
    let n = space.dim();
    let complement = identity::<T>(n) - &pi;
    let residual = fro(&(space.adjoint(&pi)? - &pi)) / max1(fro(&pi));
    Ok(CoarseGridCorrection {
        pi,
        complement,
        b_orthogonal: residual <= T::tol(1e-9),
        orthogonality_residual: residual.as_f64(),
        range_dim: pair.coarse_dim(),
    })
}

/// The seven equivalent characterizations of a B-orthogonal coarse-grid
/// correction, each evaluated independently.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrthogonalityReport {
    /// `Π` is the B-orthogonal projection onto `R(P)`.
    pub is_b_orthogonal_projection: bool,
    /// `Π⁺ = Π`.
    pub self_adjoint: bool,
    /// `R(Π) ⊥_B N(Π)`.
    pub range_kernel_orthogonal: bool,
    /// `‖Π‖_B = ‖I − Π‖_B = 1`.
    pub unit_norms: bool,
    /// `R(BP) = R(AᴴR)`.
    pub ranges_bp_ahr: bool,
    /// `R(P) = R(B⁻¹AᴴR)`.
    pub ranges_p_compatible: bool,
    /// `N(RᴴA) = N(PᴴB)`.
    pub kernels_match: bool,
    pub norm_pi: f64,
    pub norm_complement: f64,
}

impl OrthogonalityReport {
    pub fn flags(&self) -> [bool; 7] {
        [
            self.is_b_orthogonal_projection,
            self.self_adjoint,
            self.range_kernel_orthogonal,
            self.unit_norms,
            self.ranges_bp_ahr,
            self.ranges_p_compatible,
            self.kernels_match,
        ]
    }

    pub fn all(&self) -> bool {
        self.flags().iter().all(|&f| f)
    }

    pub fn none(&self) -> bool {
        self.flags().iter().all(|&f| !f)
    }

    /// All seven flags agree.
    pub fn consistent(&self) -> bool {
        self.all() || self.none()
    }
}

pub fn test_b_orthogonality<T: Real>(
    space: &BSpace<T>,
    a: &CMatrix<T>,
    pair: &TransferPair<T>,
) -> Result<OrthogonalityReport> {
    let cgc = build_correction(space, a, pair)?;
    let pi = &cgc.pi;
    let scale = max1(fro(pi));
    let angle_tol = T::tol(1e-8);

    let proj = b_orthogonal_projection(space, &pair.p)?;
    let is_b_orthogonal_projection = fro(&(pi - &proj)) <= T::tol(1e-9) * scale;
    let self_adjoint = fro(&(space.adjoint(pi)? - pi)) <= T::tol(1e-9) * scale;

    let rha = pair.r.adjoint() * a;
    let kernel = spectral::null_basis(&rha)?;
    let range_kernel_orthogonal = if kernel.ncols() == 0 {
        true
    } else {
        let u = spectral::range_basis(&(space.sqrt_b() * &pair.p))?;
        let w = spectral::range_basis(&(space.sqrt_b() * &kernel))?;
        spectral::spectral_norm(&(u.adjoint() * w)) <= angle_tol
    };

    let norm_pi = space.op_norm(pi)?;
    let norm_complement = space.op_norm(&cgc.complement)?;
    let unit_norms = (norm_pi - T::one()).abs() <= T::tol(1e-9)
        && (norm_complement - T::one()).abs() <= T::tol(1e-9);

    let bp = space.b() * &pair.p;
    let ahr = a.adjoint() * &pair.r;
    let ranges_bp_ahr = spectral::largest_principal_angle(&bp, &ahr)? <= angle_tol;
    let compatible = space.inv_b() * &ahr;
    let ranges_p_compatible = spectral::largest_principal_angle(&pair.p, &compatible)? <= angle_tol;

    let pb = pair.p.adjoint() * space.b();
    let kernel_pb = spectral::null_basis(&pb)?;
    let kernels_match = if kernel.ncols() == 0 && kernel_pb.ncols() == 0 {
        true
    } else if kernel.ncols() != kernel_pb.ncols() {
        false
    } else {
        spectral::largest_principal_angle(&kernel, &kernel_pb)? <= angle_tol
    };

    Ok(OrthogonalityReport {
        is_b_orthogonal_projection,
        self_adjoint,
        range_kernel_orthogonal,
        unit_norms,
        ranges_bp_ahr,
        ranges_p_compatible,
        kernels_match,
        norm_pi: norm_pi.as_f64(),
        norm_complement: norm_complement.as_f64(),
    })
}

fn check_transfer<T: Real>(m: &CMatrix<T>) -> Result<()> {
    let ratio = spectral::column_rank_ratio(m)?;
    if ratio <= T::tol(1e-10) {
        return Err(Error::RankDeficientTransfer {
            ratio: ratio.as_f64(),
        });
    }
    Ok(())
}

/// `P* = B⁻¹AᴴR`.
pub fn complete_interpolation<T: Real>(
    space: &BSpace<T>,
    a: &CMatrix<T>,
    r: &CMatrix<T>,
) -> Result<CMatrix<T>> {
    check_transfer(r)?;
    let p = space.inv_b() * a.adjoint() * r;
    check_transfer(&p)?;
    Ok(p)
}

/// `R* = A⁻ᴴBP`.
pub fn complete_restriction<T: Real>(
    space: &BSpace<T>,
    a: &CMatrix<T>,
    p: &CMatrix<T>,
) -> Result<CMatrix<T>> {
    check_transfer(p)?;
    let r = spectral::solve(&a.adjoint(), &(space.b() * p))?;
    check_transfer(&r)?;
    Ok(r)
}

/// The nonsingular `S` with `P = B⁻¹AᴴR·S`, recovered by least squares.
pub fn change_of_basis<T: Real>(
    space: &BSpace<T>,
    a: &CMatrix<T>,
    pair: &TransferPair<T>,
) -> Result<CMatrix<T>> {
    let cgc = build_correction(space, a, pair)?;
    if !cgc.b_orthogonal {
        return Err(Error::NotBOrthogonal {
            residual: cgc.orthogonality_residual,
        });
    }
    let y = space.inv_b() * a.adjoint() * &pair.r;
    let qr = y.clone().qr();
    let s = spectral::solve(&qr.r(), &(qr.q().adjoint() * &pair.p))?;
    let residual = fro(&(&y * &s - &pair.p));
    if residual > T::tol(1e-9) * fro(&pair.p) {
        return Err(Error::NotBOrthogonal {
            residual: (residual / fro(&pair.p)).as_f64(),
        });
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probgen::random::{random_hpd, random_matrix};
    use crate::scalar::{from_real_rows, real_diag};

    fn example() -> (BSpace<f64>, CMatrix<f64>) {
        (BSpace::euclidean(3), real_diag(&[0.25, 0.5, 0.75]))
    }

    #[test]
    fn full_coarse_space_gives_identity() {
        let space = BSpace::<f64>::euclidean(3);
        let a = random_matrix::<f64>(3, 3, 1);
        let pair = TransferPair::new(&space, &a, identity(3), identity(3)).unwrap();
        let cgc = build_correction(&space, &a, &pair).unwrap();
        assert!(fro(&(&cgc.pi - identity::<f64>(3))) < 1e-12);
        assert!(!cgc.is_proper());
    }

    #[test]
    fn example_correction_complement_matches_printed_matrix() {
        let (space, a) = example();
        let p = from_real_rows::<f64>(3, 1, &[1.0, 1.0, 0.0]);
        let pair = TransferPair::new(&space, &a, p.clone(), p).unwrap();
        let cgc = build_correction(&space, &a, &pair).unwrap();
        let printed = from_real_rows::<f64>(
            3,
            3,
            &[
                2.0 / 3.0,
                -2.0 / 3.0,
                0.0,
                -1.0 / 3.0,
                1.0 / 3.0,
                0.0,
                0.0,
                0.0,
                1.0,
            ],
        );
        assert!(fro(&(&cgc.complement - printed)) < 1e-14);
        let direct = from_real_rows::<f64>(
            3,
            3,
            &[
                1.0 / 3.0,
                2.0 / 3.0,
                0.0,
                1.0 / 3.0,
                2.0 / 3.0,
                0.0,
                0.0,
                0.0,
                0.0,
            ],
        );
        assert!(fro(&(&cgc.pi - direct)) < 1e-14);
        assert!(!cgc.b_orthogonal);
    }

    #[test]
    fn example_pairs_fail_all_seven_conditions() {
        let (space, a) = example();
        let p = from_real_rows::<f64>(3, 1, &[1.0, 1.0, 0.0]);
        let pair = TransferPair::new(&space, &a, p.clone(), p).unwrap();
        assert!(test_b_orthogonality(&space, &a, &pair).unwrap().none());
        let pt = from_real_rows::<f64>(3, 2, &[1.0, 2.0, 1.0, 1.0, 0.0, 0.0]);
        let rt = from_real_rows::<f64>(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        let pair = TransferPair::new(&space, &a, pt, rt).unwrap();
        let report = test_b_orthogonality(&space, &a, &pair).unwrap();
        assert!(report.none(), "{report:?}");
    }

    #[test]
    fn compatible_completion_is_b_orthogonal() {
        for seed in 0..5 {
            let b = random_hpd::<f64>(7, seed);
            let space = BSpace::new(b).unwrap();
            let a = random_matrix::<f64>(7, 7, seed + 100);
            let r = random_matrix::<f64>(7, 3, seed + 200);
            let p = complete_interpolation(&space, &a, &r).unwrap();
            let pair = TransferPair::new(&space, &a, p.clone(), r).unwrap();
            let report = test_b_orthogonality(&space, &a, &pair).unwrap();
            assert!(report.all(), "{report:?}");
            let cgc = build_correction(&space, &a, &pair).unwrap();
            assert!(cgc.b_orthogonal);
            assert!((space.op_norm(&cgc.pi).unwrap() - 1.0).abs() < 1e-9);
            let proj = b_orthogonal_projection(&space, &p).unwrap();
            assert!(fro(&(&cgc.pi - proj)) < 1e-9);
            // Π·P = P and RᴴA(I − Π) = 0
            assert!(fro(&(&cgc.pi * &pair.p - &pair.p)) < 1e-9 * fro(&pair.p));
            assert!(
                fro(&(pair.r.adjoint() * &a * &cgc.complement)) < 1e-9 * fro(&a) * fro(&pair.r)
            );
        }
    }

    #[test]
    fn restriction_completion_is_b_orthogonal() {
        let space = BSpace::new(random_hpd::<f64>(6, 3)).unwrap();
        let a = random_matrix::<f64>(6, 6, 4);
        let p = random_matrix::<f64>(6, 2, 5);
        let r = complete_restriction(&space, &a, &p).unwrap();
        let pair = TransferPair::new(&space, &a, p, r).unwrap();
        assert!(test_b_orthogonality(&space, &a, &pair).unwrap().all());
    }

    #[test]
    fn hpd_reference_completions_are_trivial() {
        let a = random_hpd::<f64>(5, 6);
        let space = BSpace::new(a.clone()).unwrap();
        let r = random_matrix::<f64>(5, 2, 7);
        let p = complete_interpolation(&space, &a, &r).unwrap();
        assert!(fro(&(&p - &r)) < 1e-10 * fro(&r));
        let r2 = complete_restriction(&space, &a, &r).unwrap();
        assert!(fro(&(&r2 - &r)) < 1e-10 * fro(&r));
        let pair = TransferPair::new(&space, &a, r.clone(), r).unwrap();
        assert!(test_b_orthogonality(&space, &a, &pair).unwrap().all());
    }

    #[test]
    fn euclidean_completions() {
        let space = BSpace::<f64>::euclidean(4);
        let a = random_matrix::<f64>(4, 4, 8);
        let r = random_matrix::<f64>(4, 2, 9);
        let p = complete_interpolation(&space, &a, &r).unwrap();
        assert!(fro(&(p - a.adjoint() * &r)) < 1e-12);
        let rs = complete_restriction(&space, &a, &r).unwrap();
        assert!(fro(&(a.adjoint() * rs - &r)) < 1e-10);
    }

    #[test]
    fn change_of_basis_recovery() {
        let space = BSpace::new(random_hpd::<f64>(6, 10)).unwrap();
        let a = random_matrix::<f64>(6, 6, 11);
        let r = random_matrix::<f64>(6, 2, 12);
        let pstar = complete_interpolation(&space, &a, &r).unwrap();

        let pair = TransferPair::new(&space, &a, pstar.clone(), r.clone()).unwrap();
        let s = change_of_basis(&space, &a, &pair).unwrap();
        assert!(fro(&(s - identity::<f64>(2))) < 1e-9);

        let two = crate::scalar::cr(2.0);
        let pair = TransferPair::new(&space, &a, &pstar * two, r.clone()).unwrap();
        let s = change_of_basis(&space, &a, &pair).unwrap();
        assert!(fro(&(s - identity::<f64>(2) * two)) < 1e-9);

        let g = random_matrix::<f64>(2, 2, 13);
        let pair = TransferPair::new(&space, &a, &pstar * &g, r).unwrap();
        let s = change_of_basis(&space, &a, &pair).unwrap();
        assert!(fro(&(&s - &g)) < 1e-9 * fro(&g));
        // A_c = S⁻ᴴ B_c
        let shinv = spectral::inverse(&s.adjoint()).unwrap();
        assert!(fro(&(&pair.a_c - shinv * &pair.b_c)) < 1e-9 * fro(&pair.a_c));
    }

    #[test]
    fn change_of_basis_rejects_incompatible_pair() {
        let (space, a) = example();
        let p = from_real_rows::<f64>(3, 1, &[1.0, 1.0, 0.0]);
        let pair = TransferPair::new(&space, &a, p.clone(), p).unwrap();
        assert!(matches!(
            change_of_basis(&space, &a, &pair),
            Err(Error::NotBOrthogonal { .. })
        ));
    }

    #[test]
    fn rank_deficient_transfer_is_rejected() {
        let space = BSpace::<f64>::euclidean(3);
        let a = identity::<f64>(3);
        let p = from_real_rows::<f64>(3, 2, &[1.0, 2.0, 1.0, 2.0, 0.0, 0.0]);
        assert!(matches!(
            TransferPair::new(&space, &a, p.clone(), p),
            Err(Error::RankDeficientTransfer { .. })
        ));
    }

    #[test]
    fn singular_coarse_matrix_is_rejected() {
        let space = BSpace::<f64>::euclidean(2);
        // Rᴴ A P = 0 for orthogonal P and R with A = I.
        let a = identity::<f64>(2);
        let p = from_real_rows::<f64>(2, 1, &[1.0, 0.0]);
        let r = from_real_rows::<f64>(2, 1, &[0.0, 1.0]);
        let pair = TransferPair::new(&space, &a, p, r).unwrap();
        assert!(matches!(
            build_correction(&space, &a, &pair),
            Err(Error::SingularCoarseMatrix { .. })
        ));
    }
}
