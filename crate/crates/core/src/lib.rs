//! Dense verification toolkit for nonsymmetric algebraic multigrid analysed
//! in a general B-inner product.
//!
//! Every routine is generic over the real scalar type (`f32` or `f64`); the
//! `*64` aliases fix the common double-precision case.
//!
//! ```
//! use nsamg::probgen::{generate, ProblemFamily, ProblemSpec};
//! use nsamg::BSpace64;
//!
//! let spec = ProblemSpec::new(
//!     ProblemFamily::RandomBNormal { multiplicity: 1, real_spectrum: false, radius: 0.9 },
//!     12,
//!     7,
//! );
//! let p = generate::<f64>(&spec)?;
//! let space = BSpace64::new(p.b.clone())?;
//! assert!(space.classify(&p.ma())?.is_b_normal);
//! # Ok::<(), nsamg::Error>(())
//! ```

pub mod bspace;
pub mod error;
pub mod probgen;
pub mod scalar;
pub mod smoother;
pub mod spectral;
pub mod transfer;
pub mod twogrid;
pub mod vcycle;

pub use bspace::{BNormalityReport, BSpace};
pub use error::{Error, Hypothesis, Result};
pub use scalar::{CMatrix, CVector, Real};
pub use smoother::{SmootherContext, SmoothingReport};
pub use transfer::{CoarseGridCorrection, TransferPair};
pub use twogrid::{OperatorKind, SharpBoundReport, TwoGridOperator};
pub use vcycle::{LevelPropagators, McCormickReport, VCycleHierarchy};

pub type CMatrix64 = CMatrix<f64>;
pub type CVector64 = CVector<f64>;
pub type BSpace64 = BSpace<f64>;
pub type TransferPair64 = TransferPair<f64>;
pub type SmootherContext64 = SmootherContext<f64>;
pub type TwoGridOperator64 = TwoGridOperator<f64>;
pub type VCycleHierarchy64 = VCycleHierarchy<f64>;
