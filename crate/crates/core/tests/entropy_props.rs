mod common;

use proptest::prelude::*;
use qtsallis_core::entropy::{
    classical_relative_q, overlap_weights, quantum_relative_q, quantum_relative_q_operator,
    relative_entropy_vn, ExtendedReal, ProbVector,
};
use qtsallis_core::rng::{haar_unitary, seeded};
use qtsallis_core::states::{
    common_kernel_pair, mix, partial_trace, sample_density, tensor, DensityMatrix, Keep,
};
use rand::Rng;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

fn dq(rho: &DensityMatrix, sigma: &DensityMatrix, q: f64) -> f64 {
    quantum_relative_q(rho, sigma, q).unwrap().value().expect("finite")
}

fn pair(seed: u64, d: usize, full: bool) -> (DensityMatrix, DensityMatrix) {
    let mut rng = seeded(seed);
    if full {
        (common::full_rank(d, &mut rng), common::full_rank(d, &mut rng))
    } else {
        let k = rng.random_range(1..=d);
        common_kernel_pair(d, k, &mut rng).unwrap()
    }
}

#[test]
fn pseudoadditivity_fixture() {
    let rho = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
    let sigma = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
    let joint = dq(&tensor(&rho, &rho).unwrap(), &tensor(&sigma, &sigma).unwrap(), 2.0);
    assert!((joint - 7.0 / 9.0).abs() <= 1e-9);
}

#[test]
fn unsupported_weight_gives_infinity() {
    let rho = DensityMatrix::from_diagonal(&[0.5, 0.5, 0.0]).unwrap();
    let sigma = DensityMatrix::from_diagonal(&[0.0, 0.5, 0.5]).unwrap();
    assert_eq!(quantum_relative_q(&rho, &sigma, 1.5).unwrap(), ExtendedReal::PositiveInfinity);
    assert_eq!(quantum_relative_q_operator(&rho, &sigma, 1.5).unwrap(), ExtendedReal::PositiveInfinity);
    assert_eq!(relative_entropy_vn(&rho, &sigma).unwrap(), ExtendedReal::PositiveInfinity);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn positive_and_zero_on_diagonal(seed in any::<u64>(), d in 2usize..9, full in any::<bool>(), q in 1.01f64..6.0) {
        let (rho, sigma) = pair(seed, d, full);
        // Rounding in 1 - tr is divided by q - 1.
        let cancellation = 4.0 * d as f64 * f64::EPSILON / (q - 1.0);
        prop_assert!(dq(&rho, &sigma, q) >= -1e-12 - cancellation);
        // Overlaps of order ε² between distinct eigenvectors get amplified by
        // b₀^{1-q}, so the floor on D(σ‖σ) scales with the spread of σ.
        for s in [&rho, &sigma] {
            let floor = 1e-12 + cancellation + 1e-29 * (s.max_eigenvalue() / s.min_nonzero_eigenvalue()).powf(q - 1.0);
            prop_assert!(dq(s, s, q).abs() <= floor);
        }
    }

    #[test]
    fn spectral_and_operator_routes_agree(seed in any::<u64>(), d in 2usize..9, full in any::<bool>(), q in 1.01f64..3.0) {
        let (rho, sigma) = pair(seed, d, full);
        let a = dq(&rho, &sigma, q);
        let b = quantum_relative_q_operator(&rho, &sigma, q).unwrap().value().unwrap();
        prop_assert!(close(a, b), "{a} vs {b}");
    }

    #[test]
    fn pseudoadditive(seed in any::<u64>(), d1 in 2usize..4, d2 in 2usize..4, q in 1.01f64..4.0) {
        let (r1, s1) = pair(seed, d1, true);
        let (r2, s2) = pair(seed.wrapping_add(1), d2, false);
        let (a, b) = (dq(&r1, &s1, q), dq(&r2, &s2, q));
        let joint = dq(&tensor(&r1, &r2).unwrap(), &tensor(&s1, &s2).unwrap(), q);
        prop_assert!(close(joint, a + b + (q - 1.0) * a * b), "{joint} vs {a}, {b}");
    }

    #[test]
    fn jointly_convex(seed in any::<u64>(), d in 2usize..6, q in 1.01f64..=2.0, lambda in 0.0f64..=1.0) {
        let (r1, s1) = pair(seed, d, true);
        let (r2, s2) = pair(seed.wrapping_add(1), d, true);
        let lhs = dq(&mix(lambda, &r1, &r2).unwrap(), &mix(lambda, &s1, &s2).unwrap(), q);
        let rhs = lambda * dq(&r1, &s1, q) + (1.0 - lambda) * dq(&r2, &s2, q);
        prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs), "{lhs} > {rhs}");
    }

    #[test]
    fn monotone_under_partial_trace(seed in any::<u64>(), da in 2usize..4, db in 2usize..4, q in 1.01f64..=2.0, full in any::<bool>()) {
        let (rho, sigma) = pair(seed, da * db, full);
        let whole = dq(&rho, &sigma, q);
        for keep in [Keep::A, Keep::B] {
            let (dim_a, dim_b) = (da, db);
            let part = dq(
                &partial_trace(&rho, dim_a, dim_b, keep).unwrap(),
                &partial_trace(&sigma, dim_a, dim_b, keep).unwrap(),
                q,
            );
            prop_assert!(part <= whole + 1e-9 * (1.0 + whole), "{part} > {whole}");
        }
    }

    #[test]
    fn unitarily_invariant(seed in any::<u64>(), d in 2usize..9, full in any::<bool>(), q in 1.01f64..5.0) {
        let (rho, sigma) = pair(seed, d, full);
        let u = haar_unitary(d, &mut seeded(!seed));
        let a = dq(&rho, &sigma, q);
        let b = dq(&rho.conjugate(&u).unwrap(), &sigma.conjugate(&u).unwrap(), q);
        prop_assert!(close(a, b));
    }

    #[test]
    fn nondecreasing_in_q(seed in any::<u64>(), d in 2usize..9, full in any::<bool>(), q in 1.01f64..4.0, dq_step in 0.0f64..2.0) {
        let (rho, sigma) = pair(seed, d, full);
        let d1 = relative_entropy_vn(&rho, &sigma).unwrap().value().unwrap();
        let lo = dq(&rho, &sigma, q);
        let hi = dq(&rho, &sigma, q + dq_step);
        prop_assert!(d1 <= lo + 1e-9 * (1.0 + lo));
        prop_assert!(lo <= hi + 1e-9 * (1.0 + hi));
    }

    #[test]
    fn classical_reduction(seed in any::<u64>(), d in 2usize..9, q in 1.01f64..5.0) {
        let mut rng = seeded(seed);
        let sigma_state = sample_density(d, d, &mut rng).unwrap();
        let mut b: Vec<f64> = sigma_state.spectrum().to_vec();
        let mut a: Vec<f64> = common::full_rank(d, &mut rng).spectrum().to_vec();
        let zeros = rng.random_range(0..d);
        for v in a.iter_mut().take(zeros) {
            *v = 0.0;
        }
        let total: f64 = a.iter().sum();
        a.iter_mut().for_each(|v| *v /= total);
        b.reverse();
        let rho = DensityMatrix::from_diagonal(&a).unwrap();
        let sigma = DensityMatrix::from_diagonal(&b).unwrap();
        let classical = classical_relative_q(&ProbVector::new(a).unwrap(), &ProbVector::new(b).unwrap(), q)
            .unwrap()
            .value()
            .unwrap();
        prop_assert!(close(dq(&rho, &sigma, q), classical));
    }

    /// `0 ≤ D_q - D₁ ≤ ((q-1)/2) Σ W a L² e^{(q-1) max L⁺}` with `L = ln(a/b)`.
    #[test]
    fn approaches_relative_entropy_as_q_decreases(seed in any::<u64>(), d in 2usize..7, full in any::<bool>(), e in 2i32..5) {
        let (rho, sigma) = pair(seed, d, full);
        let w = overlap_weights(&rho, &sigma).unwrap();
        let mut second = 0.0;
        let mut lmax: f64 = 0.0;
        for (i, &a) in rho.spectrum().iter().enumerate() {
            for (j, &b) in sigma.spectrum().iter().enumerate() {
                if a > 0.0 && b > 0.0 {
                    let l = (a / b).ln();
                    second += w[(i, j)] * a * l * l;
                    lmax = lmax.max(l);
                }
            }
        }
        let d1 = relative_entropy_vn(&rho, &sigma).unwrap().value().unwrap();
        let r = 10f64.powi(-e);
        let gap = dq(&rho, &sigma, 1.0 + r) - d1;
        let slack = d as f64 * 1e-14 / r * (1.0 + d1);
        prop_assert!(gap >= -slack - 1e-12, "gap {gap}");
        prop_assert!(gap <= 0.5 * r * second * (r * lmax).exp() + slack + 1e-12, "gap {gap}");
    }
}
