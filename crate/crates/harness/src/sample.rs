//! Instance generators for the randomized suites.

use qtsallis_core::error::Result;
use qtsallis_core::linalg::HermitianOperator;
use qtsallis_core::rng::{haar_unitary, StateRng};
use qtsallis_core::states::{common_kernel_pair, density_with_spectrum, sample_density, DensityMatrix};
use rand::seq::IndexedRandom;
use rand::Rng;

pub fn pick_dim(dims: &[usize], rng: &mut StateRng) -> usize {
    *dims.choose(rng).expect("validated config has dimensions")
}

/// Uniform on `(lo, hi]`.
pub fn open_closed(lo: f64, hi: f64, rng: &mut StateRng) -> f64 {
    hi - (hi - lo) * rng.random::<f64>()
}

/// `q ∈ (lo, hi]`, hitting the integers in the range one time in ten.
pub fn sample_q(lo: f64, hi: f64, rng: &mut StateRng) -> f64 {
    if rng.random_bool(0.1) {
        let first = lo.floor() as i64 + 1;
        let last = hi.floor() as i64;
        if first <= last {
            return rng.random_range(first..=last) as f64;
        }
    }
    open_closed(lo, hi, rng)
}

fn spread_spectrum(d: usize, decades: f64, rng: &mut StateRng) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| 10f64.powf(-decades * rng.random::<f64>())).collect();
    let total: f64 = raw.iter().sum();
    let mut spec: Vec<f64> = raw.iter().map(|v| v / total).collect();
    // Put the rounding residue on the largest entry so the sum is 1 to the last bit.
    let residue = 1.0 - spec.iter().sum::<f64>();
    let imax = (0..d).max_by(|&i, &j| spec[i].total_cmp(&spec[j])).unwrap_or(0);
    spec[imax] += residue;
    spec
}

/// Full-rank state: Ginibre, or a spectrum spread over up to six decades.
pub fn full_rank_state(d: usize, rng: &mut StateRng) -> Result<DensityMatrix> {
    if rng.random_bool(0.5) {
        sample_density(d, d, rng)
    } else {
        let decades = rng.random_range(0.0..6.0);
        density_with_spectrum(&spread_spectrum(d, decades, rng), rng)
    }
}

/// A pair with an exact common kernel of random dimension `0..d`; σ is
/// sometimes maximally mixed on its support so that `b₀ = b₁`.
pub fn kernel_pair(d: usize, rng: &mut StateRng) -> Result<(DensityMatrix, DensityMatrix)> {
    let k = rng.random_range(1..=d);
    if rng.random_bool(0.15) {
        let rho_rank = rng.random_range(1..=k);
        let rho = sample_density(k, rho_rank, rng)?;
        let sigma = DensityMatrix::maximally_mixed(k)?;
        let u = haar_unitary(d, rng);
        let inner_u = haar_unitary(k, rng);
        let sigma = sigma.conjugate(&inner_u)?;
        return Ok((rho.embed(d, &u)?, sigma.embed(d, &u)?));
    }
    common_kernel_pair(d, k, rng)
}

/// Either two full-rank states or a common-kernel pair.
pub fn mixed_pair(d: usize, rng: &mut StateRng) -> Result<(DensityMatrix, DensityMatrix)> {
    if rng.random_bool(0.5) {
        Ok((full_rank_state(d, rng)?, full_rank_state(d, rng)?))
    } else {
        kernel_pair(d, rng)
    }
}

/// Strictly positive operator with eigenvalues log-uniform in `[scale/cond, scale]`.
pub fn pd_operator(d: usize, cond: f64, scale: f64, rng: &mut StateRng) -> Result<HermitianOperator> {
    let values: Vec<f64> = (0..d).map(|_| scale * cond.powf(-rng.random::<f64>())).collect();
    HermitianOperator::from_spectral(values, haar_unitary(d, rng))
}

/// `σ(b₀) = (1 - (d-1)b₀)|0⟩⟨0| + b₀(1 - |0⟩⟨0|)`.
pub fn sigma_family(d: usize, b0: f64) -> Result<DensityMatrix> {
    let mut diag = vec![b0; d];
    diag[0] = 1.0 - (d - 1) as f64 * b0;
    DensityMatrix::from_diagonal(&diag)
}
