#![allow(dead_code)]

use qtsallis_core::linalg::{CMatrix, HermitianOperator};
use qtsallis_core::rng::{haar_unitary, StateRng};
use qtsallis_core::states::{sample_density, DensityMatrix};
use rand::Rng;

/// Strictly positive operator with eigenvalues log-uniform in
/// `[scale/cond, scale]`.
pub fn random_pd(d: usize, cond: f64, scale: f64, rng: &mut StateRng) -> HermitianOperator {
    let values: Vec<f64> = (0..d)
        .map(|_| scale * cond.powf(-rng.random::<f64>()))
        .collect();
    HermitianOperator::from_spectral(values, haar_unitary(d, rng)).unwrap()
}

pub fn full_rank(d: usize, rng: &mut StateRng) -> DensityMatrix {
    sample_density(d, d, rng).unwrap()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
