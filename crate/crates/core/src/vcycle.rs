//! Multilevel hierarchies with compatible transfers, level-wise V-cycle
//! error propagators and the McCormick-type bound.
//!
//! Level `k+1` is defined by `A_{k+1} = R_kᴴA_kP_k`, `B_{k+1} = P_kᴴB_kP_k`
//! with `P_k = B_k⁻¹A_kᴴR_kS_k`, which makes every `Π_{A_k}` a
//! `B_k`-orthogonal projection.

use serde::{Deserialize, Serialize};

use crate::bspace::BSpace;
use crate::error::{Error, Hypothesis, Result};
use crate::probgen::random::{gaussian_with, rng};
use crate::probgen::{make_coarsening, make_smoother_in, CoarseningStrategy, SmootherKind};
use crate::scalar::{cr, fro, hermitian_part, identity, max1, power, CMatrix, Real};
use crate::smoother::{build_smoother, SmootherContext};
use crate::spectral;
use crate::transfer::{build_correction, CoarseGridCorrection, TransferPair};
use crate::twogrid::{k_constant, OperatorKind};

/// The change of basis `S_k` in `P_k = B_k⁻¹A_kᴴR_kS_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BasisChange {
    #[default]
    Identity,
    /// `S_k = I + scale·G/‖G‖₂` with a Gaussian `G`; nonsingular for `scale < 1`.
    Random { scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoarseningSpec {
    #[serde(default)]
    pub strategy: CoarseningStrategy,
    /// Explicit coarse sizes `n_1 > n_2 > …`; halving when absent.
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub basis_change: BasisChange,
}

impl CoarseningSpec {
    pub fn new(strategy: CoarseningStrategy) -> Self {
        Self {
            strategy,
            sizes: None,
            seed: 0,
            basis_change: BasisChange::Identity,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Level<T: Real> {
    pub a: CMatrix<T>,
    pub space: BSpace<T>,
    /// Absent on the coarsest level, which is solved exactly.
    pub smoother: Option<SmootherContext<T>>,
}

impl<T: Real> Level<T> {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
}

#[derive(Debug, Clone)]
pub struct LevelTransfer<T: Real> {
    pub p: CMatrix<T>,
    pub r: CMatrix<T>,
    pub s: CMatrix<T>,
    pub cgc: CoarseGridCorrection<T>,
}

#[derive(Debug, Clone)]
pub struct VCycleHierarchy<T: Real> {
    pub levels: Vec<Level<T>>,
    pub transfers: Vec<LevelTransfer<T>>,
}

impl<T: Real> VCycleHierarchy<T> {
    /// Index of the coarsest level `L`.
    pub fn depth(&self) -> usize {
        self.transfers.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Level::n).collect()
    }
}

fn coarse_sizes(n: usize, spec: &CoarseningSpec, levels: usize) -> Result<Vec<usize>> {
    let sizes = match &spec.sizes {
        Some(s) => {
            if s.len() != levels {
                return Err(Error::InvalidSize(format!(
                    "{} coarse sizes given for {levels} levels",
                    s.len()
                )));
            }
            s.clone()
        }
        None => {
            let mut out = Vec::with_capacity(levels);
            let mut cur = n;
            for _ in 0..levels {
                cur /= 2;
                out.push(cur);
            }
            out
        }
    };
    let mut prev = n;
    for &s in &sizes {
        if s == 0 || s >= prev {
            return Err(Error::InvalidSize(format!(
                "coarse sizes must decrease strictly from {n}: {sizes:?}"
            )));
        }
        prev = s;
    }
    Ok(sizes)
}

fn basis_change<T: Real>(nc: usize, change: BasisChange, seed: u64) -> Result<CMatrix<T>> {
    match change {
        BasisChange::Identity => Ok(identity(nc)),
        BasisChange::Random { scale } => {
            if !(0.0..1.0).contains(&scale) {
                return Err(Error::InvalidSpec(format!(
                    "basis change scale must be in [0, 1), got {scale}"
                )));
            }
            let g = gaussian_with::<T>(nc, nc, &mut rng(seed));
            let f = T::lit(scale) / spectral::spectral_norm(&g);
            Ok(identity::<T>(nc) + g * cr(f))
        }
    }
}

fn level_smoother<T: Real>(
    space: &BSpace<T>,
    a: &CMatrix<T>,
    minv: &CMatrix<T>,
    k: usize,
) -> Result<SmootherContext<T>> {
    let ctx = build_smoother(space, a, minv)?;
    let norm = space.op_norm(&ctx.error_operator())?;
    if norm >= T::one() {
        return Err(Error::SmoothingAssumptionViolated {
            norm: norm.as_f64(),
            level: Some(k),
        });
    }
    Ok(ctx)
}

/// Build an `L`-level hierarchy (`L + 1` grids). The finest smoother is
/// `top_minv` when given, otherwise `smoother` is applied on every level.
pub fn build_hierarchy<T: Real>(
    space: &BSpace<T>,
    a: &CMatrix<T>,
    top_minv: Option<&CMatrix<T>>,
    coarsening: &CoarseningSpec,
    smoother: SmootherKind,
    levels: usize,
) -> Result<VCycleHierarchy<T>> {
    if levels == 0 {
        return Err(Error::InvalidSize(
            "at least one coarse level is required".into(),
        ));
    }
    let sizes = coarse_sizes(space.dim(), coarsening, levels)?;
    let mut level_list = Vec::with_capacity(levels + 1);
    let mut transfers = Vec::with_capacity(levels);
    let mut cur_space = space.clone();
    let mut cur_a = a.clone();
    for (k, &nc) in sizes.iter().enumerate() {
        let minv = match (k, top_minv) {
            (0, Some(m)) => m.clone(),
            _ => make_smoother_in(&cur_space, &cur_a, smoother)?,
        };
        let ctx = level_smoother(&cur_space, &cur_a, &minv, k)?;

        let seed = coarsening.seed.wrapping_add(k as u64);
        let r = make_coarsening::<T>(cur_space.dim(), nc, coarsening.strategy, seed)?;
        let s = basis_change::<T>(nc, coarsening.basis_change, seed.wrapping_add(1 << 32))?;
        let p = cur_space.inv_b() * cur_a.adjoint() * &r * &s;
        let pair = TransferPair::new(&cur_space, &cur_a, p, r).map_err(|e| e.at_level(k))?;
        let cgc = build_correction(&cur_space, &cur_a, &pair).map_err(|e| e.at_level(k))?;
        if !cgc.b_orthogonal {
            return Err(Error::NotBOrthogonal {
                residual: cgc.orthogonality_residual,
            });
        }
        let next_space = BSpace::new(hermitian_part(&pair.b_c)).map_err(|e| e.at_level(k + 1))?;
        let next_a = pair.a_c.clone();
        level_list.push(Level {
            a: cur_a,
            space: cur_space,
            smoother: Some(ctx),
        });
        transfers.push(LevelTransfer {
            p: pair.p,
            r: pair.r,
            s,
            cgc,
        });
        cur_space = next_space;
        cur_a = next_a;
    }
    level_list.push(Level {
        a: cur_a,
        space: cur_space,
        smoother: None,
    });
    Ok(VCycleHierarchy {
        levels: level_list,
        transfers,
    })
}

/// Residuals of the hierarchy invariants, maximised over levels.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HierarchyResiduals {
    /// `‖A_{k+1} − R_kᴴA_kP_k‖_F / ‖A_{k+1}‖_F`.
    pub galerkin: f64,
    /// `‖B_{k+1} − P_kᴴB_kP_k‖_F / ‖B_{k+1}‖_F`.
    pub b_galerkin: f64,
    /// Largest principal angle between `R(P_k)` and `R(B_k⁻¹A_kᴴR_k)`.
    pub compatibility_angle: f64,
    /// `‖A_{k+1} − S_k⁻ᴴB_{k+1}‖_F / ‖A_{k+1}‖_F`.
    pub basis_change: f64,
    /// `‖Π_{A_k} − Π_{B_k}(P_k,P_k)‖_F / ‖Π_{A_k}‖_F`.
    pub projection: f64,
}

pub fn hierarchy_residuals<T: Real>(h: &VCycleHierarchy<T>) -> Result<HierarchyResiduals> {
    let mut out = HierarchyResiduals {
        galerkin: 0.0,
        b_galerkin: 0.0,
        compatibility_angle: 0.0,
        basis_change: 0.0,
        projection: 0.0,
    };
    let upd = |slot: &mut f64, v: T| *slot = slot.max(v.as_f64());
    for (k, t) in h.transfers.iter().enumerate() {
        let fine = &h.levels[k];
        let coarse = &h.levels[k + 1];
        let ac = &coarse.a;
        let bc = coarse.space.b();
        upd(
            &mut out.galerkin,
            fro(&(ac - t.r.adjoint() * &fine.a * &t.p)) / max1(fro(ac)),
        );
        upd(
            &mut out.b_galerkin,
            fro(&(bc - t.p.adjoint() * fine.space.b() * &t.p)) / max1(fro(bc)),
        );
        let compat = fine.space.inv_b() * fine.a.adjoint() * &t.r;
        upd(
            &mut out.compatibility_angle,
            spectral::largest_principal_angle(&t.p, &compat)?,
        );
        let s_inv_h = spectral::inverse(&t.s.adjoint())?;
        upd(
            &mut out.basis_change,
            fro(&(ac - s_inv_h * bc)) / max1(fro(ac)),
        );
        let proj = crate::transfer::b_orthogonal_projection(&fine.space, &t.p)?;
        upd(
            &mut out.projection,
            fro(&(&t.cgc.pi - proj)) / max1(fro(&t.cgc.pi)),
        );
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct LevelPropagators<T: Real> {
    pub kind: OperatorKind,
    pub nu1: usize,
    pub nu2: usize,
    /// `E_{k}` (or `E_{k,+}`) for `k = 0..=L`.
    pub e: Vec<CMatrix<T>>,
    /// Coarse-to-fine factor `E_k/`.
    pub half_up: Vec<CMatrix<T>>,
    /// Fine-to-coarse factor `E_k\`.
    pub half_down: Vec<CMatrix<T>>,
    /// `‖E_k‖_{B_k}`.
    pub norms: Vec<T>,
}

pub fn assemble_level_propagators<T: Real>(
    h: &VCycleHierarchy<T>,
    nu1: usize,
    nu2: usize,
    kind: OperatorKind,
) -> Result<LevelPropagators<T>> {
    for nu in [nu1, nu2] {
        if nu > crate::smoother::MAX_STEPS {
            return Err(Error::TooManySmoothingSteps {
                max: crate::smoother::MAX_STEPS,
                got: nu,
            });
        }
    }
    let depth = h.depth();
    let nl = h.levels[depth].n();
    let mut e = vec![CMatrix::<T>::zeros(nl, nl)];
    let mut up = vec![CMatrix::<T>::zeros(nl, nl)];
    let mut down = vec![CMatrix::<T>::zeros(nl, nl)];
    for k in (0..depth).rev() {
        let lvl = &h.levels[k];
        let t = &h.transfers[k];
        let ctx = lvl
            .smoother
            .as_ref()
            .expect("smoother on every non-coarsest level");
        let n = lvl.n();
        let i_n = identity::<T>(n);
        let i_c = identity::<T>(h.levels[k + 1].n());
        let rha = t.r.adjoint() * &lvl.a;
        let coarse_op = spectral::solve(&h.levels[k + 1].a, &rha).map_err(|e| e.at_level(k + 1))?;
        let pre = power(&ctx.error_operator(), nu1);
        let post = match kind {
            OperatorKind::AdjointPost => power(&(&i_n - &ctx.ma_adj), nu2),
            OperatorKind::Plain => power(&(&i_n - &ctx.ma), nu2),
        };
        let middle = |inner: &CMatrix<T>| &i_n - &t.p * (&i_c - inner) * &coarse_op;
        let ek = &post * middle(e.last().unwrap()) * &pre;
        let upk = &post * middle(up.last().unwrap());
        let downk = middle(down.last().unwrap()) * &pre;
        e.push(ek);
        up.push(upk);
        down.push(downk);
    }
    e.reverse();
    up.reverse();
    down.reverse();
    let norms = e
        .iter()
        .zip(&h.levels)
        .map(|(m, l)| l.space.op_norm(m))
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelPropagators {
        kind,
        nu1,
        nu2,
        e,
        half_up: up,
        half_down: down,
        norms,
    })
}

/// Per-level residuals of the V-cycle factorization `E_k = (E_k/)(E_k\)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FactorizationResiduals {
    pub level: usize,
    /// `‖E_k − (E_k/)(E_k\)‖_F / max(1, ‖E_k‖_F)`.
    pub factorization: f64,
    /// `‖(E_k/)⁺ − E_k\‖_F / max(1, ‖E_k\‖_F)`; `None` unless `E₊` with `ν₁ = ν₂`.
    pub adjoint: Option<f64>,
    /// `|‖E_k‖ − ‖E_k/‖²|` and `|‖E_k‖ − ‖E_k\‖²|`, maximised.
    pub norm_square: Option<f64>,
}

pub fn factorization_residuals<T: Real>(
    h: &VCycleHierarchy<T>,
    props: &LevelPropagators<T>,
) -> Result<Vec<FactorizationResiduals>> {
    let symmetric = props.kind == OperatorKind::AdjointPost && props.nu1 == props.nu2;
    let mut out = Vec::with_capacity(h.levels.len());
    for (k, lvl) in h.levels.iter().enumerate() {
        let e = &props.e[k];
        let up = &props.half_up[k];
        let down = &props.half_down[k];
        let factorization = (fro(&(e - up * down)) / max1(fro(e))).as_f64();
        let (adjoint, norm_square) = if symmetric {
            let adj = fro(&(lvl.space.adjoint(up)? - down)) / max1(fro(down));
            let ne = props.norms[k];
            let nu = lvl.space.op_norm(up)?;
            let nd = lvl.space.op_norm(down)?;
            let d1 = (ne - nu * nu).abs();
            let d2 = (ne - nd * nd).abs();
            (
                Some(adj.as_f64()),
                Some((if d1 > d2 { d1 } else { d2 }).as_f64()),
            )
        } else {
            (None, None)
        };
        out.push(FactorizationResiduals {
            level: k,
            factorization,
            adjoint,
            norm_square,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct McCormickReport {
    /// Smallest `α_k` for which the level-`k` smoothing property holds,
    /// from the exact eigenvalue formulation of its defining supremum.
    pub alpha_k: Vec<f64>,
    pub alpha: f64,
    /// `1 / (1 − α)`.
    pub c_v: f64,
    /// `K_{M̂_k,B_k}(P_k)`.
    pub k_per_level: Vec<f64>,
    /// `1 − 1/K_{M̂_k,B_k}(P_k)`.
    pub alpha_k_from_k: Vec<f64>,
    /// `1 − 1/min_k K_k`.
    pub alpha_from_k: f64,
    /// Largest sampled value of the ratio defining `α_k`.
    pub alpha_k_sampled: Vec<f64>,
    /// `‖E_{k,+}‖_{B_k}` for `k = 0..=L`.
    pub level_norms: Vec<f64>,
    pub norm_e0: f64,
    /// `‖E_{0,+}‖_B ≤ α + 1e-8`.
    pub bound_holds: bool,
    /// `‖E_{k,+}‖_{B_k} ≤ α + 1e-8` on every level.
    pub all_levels_bounded: bool,
}

/// Evaluate the McCormick bound for `ν₁ = ν₂ = 1` and the `E₊` cycle.
pub fn mccormick_report<T: Real>(
    h: &VCycleHierarchy<T>,
    props: &LevelPropagators<T>,
    samples: usize,
    seed: u64,
) -> Result<McCormickReport> {
    if props.nu1 != 1 || props.nu2 != 1 || props.kind != OperatorKind::AdjointPost {
        return Err(Error::HypothesisViolated(Hypothesis::SingleSmoothingStep));
    }
    let mut g = rng(seed);
    let depth = h.depth();
    let mut alpha_k = Vec::with_capacity(depth);
    let mut k_per_level = Vec::with_capacity(depth);
    let mut alpha_k_from_k = Vec::with_capacity(depth);
    let mut sampled = Vec::with_capacity(depth);
    for k in 0..depth {
        let lvl = &h.levels[k];
        let ctx = lvl
            .smoother
            .as_ref()
            .expect("smoother on every non-coarsest level");
        let t = &h.transfers[k];
        let space = &lvl.space;
        let err_norm = space.op_norm(&ctx.error_operator())?;
        if err_norm >= T::one() {
            return Err(Error::SmoothingAssumptionViolated {
                norm: err_norm.as_f64(),
                level: Some(k),
            });
        }
        let q = hermitian_part(&space.transform(&t.cgc.complement));
        let htilde = hermitian_part(&(space.sqrt_b() * &ctx.hat_minv * space.sqrt_b()));
        let hinv = match spectral::inverse(&htilde) {
            Ok(m) => hermitian_part(&m),
            Err(_) => {
                return Err(Error::AlphaOutOfRange {
                    level: k,
                    alpha: f64::INFINITY,
                })
            }
        };
        let sup = spectral::hermitian_eig(&hermitian_part(&(&q * hinv * &q)))?.max();
        let ak = T::one() - T::one() / sup;
        if !(ak >= -T::tol(1e-12) && ak < T::one()) {
            return Err(Error::AlphaOutOfRange {
                level: k,
                alpha: ak.as_f64(),
            });
        }
        alpha_k.push(ak.as_f64());

        let mhat = hermitian_part(&spectral::inverse(&ctx.hat_minv)?);
        let kk = k_constant(&mhat, space.b(), &t.p)?;
        k_per_level.push(kk.as_f64());
        alpha_k_from_k.push((T::one() - T::one() / kk).as_f64());

        let n = lvl.n();
        let i_n = identity::<T>(n);
        let smooth = &i_n - &ctx.ma_adj;
        let mut best = f64::NEG_INFINITY;
        for _ in 0..samples {
            let e = gaussian_with::<T>(n, 1, &mut g);
            let se = (&smooth * &e).column(0).into_owned();
            let num_a = space.inner(&se, &se)?;
            let pe = (&t.cgc.pi * &e).column(0).into_owned();
            let ce = (&t.cgc.complement * &e).column(0).into_owned();
            let den = space.inner(&ce, &ce)?.re;
            if den
                <= T::tol(1e-14)
                    * space
                        .inner(&e.column(0).into_owned(), &e.column(0).into_owned())?
                        .re
            {
                continue;
            }
            let ratio = (num_a.re - space.inner(&pe, &pe)?.re) / den;
            best = best.max(ratio.as_f64());
        }
        sampled.push(best);
    }
    let alpha = alpha_k.iter().copied().fold(0.0, f64::max);
    let alpha_from_k = alpha_k_from_k.iter().copied().fold(0.0, f64::max);
    let level_norms: Vec<f64> = props.norms.iter().map(|x| x.as_f64()).collect();
    let norm_e0 = level_norms[0];
    Ok(McCormickReport {
        c_v: 1.0 / (1.0 - alpha),
        bound_holds: norm_e0 <= alpha + 1e-8,
        all_levels_bounded: level_norms.iter().all(|&x| x <= alpha + 1e-8),
        alpha_k,
        alpha,
        k_per_level,
        alpha_k_from_k,
        alpha_from_k,
        alpha_k_sampled: sampled,
        level_norms,
        norm_e0,
    })
}
