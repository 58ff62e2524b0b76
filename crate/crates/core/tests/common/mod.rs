#![allow(dead_code)]

use nsamg::probgen::random::random_matrix;
use nsamg::probgen::{generate, ProblemFamily, ProblemSpec};
use nsamg::smoother::build_smoother;
use nsamg::transfer::{build_correction, complete_interpolation};
use nsamg::{BSpace, CMatrix, CoarseGridCorrection, SmootherContext, TransferPair};

pub struct Instance {
    pub space: BSpace<f64>,
    pub a: CMatrix<f64>,
    pub ctx: SmootherContext<f64>,
}

impl Instance {
    pub fn from_family(family: ProblemFamily, n: usize, seed: u64) -> Instance {
        let p = generate::<f64>(&ProblemSpec::new(family, n, seed)).expect("generation");
        let space = p.space().expect("HPD B");
        let ctx = build_smoother(&space, &p.a, &p.minv).expect("smoother");
        Instance { space, a: p.a, ctx }
    }

    /// `P = B⁻¹AᴴR` for a random `R`.
    pub fn compatible_pair(
        &self,
        r: CMatrix<f64>,
    ) -> (TransferPair<f64>, CoarseGridCorrection<f64>) {
        let p = complete_interpolation(&self.space, &self.a, &r).expect("completion");
        let pair = TransferPair::new(&self.space, &self.a, p, r).expect("pair");
        let cgc = build_correction(&self.space, &self.a, &pair).expect("correction");
        (pair, cgc)
    }

    pub fn random_compatible(
        &self,
        nc: usize,
        seed: u64,
    ) -> (TransferPair<f64>, CoarseGridCorrection<f64>) {
        self.compatible_pair(random_matrix(self.space.dim(), nc, seed))
    }
}

pub fn b_normal(radius: f64, multiplicity: usize, real_spectrum: bool) -> ProblemFamily {
    ProblemFamily::RandomBNormal {
        multiplicity,
        real_spectrum,
        radius,
    }
}
