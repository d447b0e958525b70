//! Seeded random streams and Gaussian matrix ensembles.
//!
//! Streams use xoshiro256++ seeded through SplitMix64. The root seed is
//! scrambled once before the trial index is XORed in, so different roots give
//! disjoint families of per-trial seeds.

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

use crate::linalg::{CMatrix, C64};

pub type StateRng = Xoshiro256PlusPlus;

pub fn seeded(seed: u64) -> StateRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Seed of trial `index`: the scrambled root XOR the index.
pub fn stream_seed(root: u64, index: u64) -> u64 {
    SplitMix64::seed_from_u64(root).next_u64() ^ index
}

pub fn stream(root: u64, index: u64) -> StateRng {
    seeded(stream_seed(root, index))
}

/// Standard complex Gaussian: real and imaginary parts i.i.d. N(0, 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows × cols` complex Ginibre matrix, filled row-major.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let data: Vec<C64> = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    DMatrix::from_row_slice(rows, cols, &data)
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix,
/// with the phases of R's diagonal absorbed into Q.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        let phase = if n > 0.0 { rjj / n } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix `(G + G†)/2`.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, d, rng);
    (&g + g.adjoint()).scale(0.5)
}
