mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use qtsallis_core::linalg::{
    apply_function, eigh, psd_le, schatten_norm, CMatrix, HermitianOperator, SchattenIndex,
};
use qtsallis_core::rng::{ginibre, haar_unitary, random_hermitian, seeded};

const TOL: f64 = 1e-10;

fn p_index(p: f64) -> SchattenIndex {
    if p.is_infinite() {
        SchattenIndex::INF
    } else {
        SchattenIndex::new(p).unwrap()
    }
}

fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), Just(f64::INFINITY), 1.0f64..8.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn trace_holder(seed in any::<u64>(), d in 1usize..7, p in exponent()) {
        let mut rng = seeded(seed);
        let x = ginibre(d, d, &mut rng);
        let y = ginibre(d, d, &mut rng);
        let lhs = (&x * &y).trace().norm();
        let rhs = schatten_norm(&x, p_index(p)) * schatten_norm(&y, p_index(conjugate_exponent(p)));
        prop_assert!(lhs <= rhs * (1.0 + TOL), "{lhs} > {rhs}");
        prop_assert!(x.trace().norm() <= schatten_norm(&x, SchattenIndex::ONE) * (1.0 + TOL));
    }

    #[test]
    fn schatten_norms_decrease_in_p(seed in any::<u64>(), d in 1usize..7, p in 1.0f64..6.0, dp in 0.0f64..4.0) {
        let x = ginibre(d, d, &mut seeded(seed));
        let lo = schatten_norm(&x, p_index(p));
        let hi = schatten_norm(&x, p_index(p + dp));
        let inf = schatten_norm(&x, SchattenIndex::INF);
        prop_assert!(hi <= lo * (1.0 + TOL));
        prop_assert!(inf <= hi * (1.0 + TOL));
    }

    #[test]
    fn submultiplicative(seed in any::<u64>(), d in 1usize..7, p in exponent()) {
        let mut rng = seeded(seed);
        let x = ginibre(d, d, &mut rng);
        let y = ginibre(d, d, &mut rng);
        let idx = p_index(p);
        let lhs = schatten_norm(&(&x * &y), idx);
        prop_assert!(lhs <= schatten_norm(&x, idx) * schatten_norm(&y, idx) * (1.0 + TOL));
    }

    #[test]
    fn traceless_spectral_norm_is_half_trace_norm_at_most(seed in any::<u64>(), d in 2usize..9) {
        let mut rng = seeded(seed);
        let rho = common::full_rank(d, &mut rng);
        let sigma = common::full_rank(d, &mut rng);
        let delta = rho.op().sub(sigma.op()).unwrap();
        prop_assert!(delta.trace().abs() < 1e-12);
        prop_assert!(delta.spectral_norm().unwrap() <= 0.5 * delta.trace_norm().unwrap() + 1e-14);
    }

    #[test]
    fn spectral_calculus_commutes_with_unitaries(seed in any::<u64>(), d in 1usize..7) {
        let mut rng = seeded(seed);
        let h = HermitianOperator::new(random_hermitian(d, &mut rng)).unwrap();
        let u = haar_unitary(d, &mut rng);
        let f = |x: f64| x.exp() - 0.5 * x * x;
        let lhs = apply_function(&h.conjugate(&u).unwrap(), f, |_| true).unwrap();
        let rhs = apply_function(&h, f, |_| true).unwrap().conjugate(&u).unwrap();
        let scale = 1.0 + lhs.spectral_norm().unwrap();
        prop_assert!(common::max_abs_diff(lhs.matrix(), rhs.matrix()) < 1e-11 * scale);
    }

    #[test]
    fn spectral_calculus_is_multiplicative(seed in any::<u64>(), d in 1usize..7) {
        let h = HermitianOperator::new(random_hermitian(d, &mut seeded(seed))).unwrap();
        let square = apply_function(&h, |x| x * x, |_| true).unwrap();
        let direct = h.matrix() * h.matrix();
        let scale = 1.0 + square.spectral_norm().unwrap();
        prop_assert!(common::max_abs_diff(square.matrix(), &direct) < 1e-12 * scale);
    }

    #[test]
    fn eigh_reconstructs(seed in any::<u64>(), d in 1usize..9, scale in -3.0f64..3.0) {
        let m = random_hermitian(d, &mut seeded(seed)).scale(10f64.powf(scale));
        let h = HermitianOperator::new(m.clone()).unwrap();
        let (values, vectors) = eigh(&h).unwrap();
        prop_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        let back = &vectors * CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d, values.iter().map(|&v| Complex64::new(v, 0.0)))) * vectors.adjoint();
        let norm = h.spectral_norm().unwrap();
        prop_assert!(common::max_abs_diff(&back, &m) <= 1e-12 * norm.max(1.0));
        let gram = vectors.adjoint() * &vectors;
        prop_assert!(common::max_abs_diff(&gram, &CMatrix::identity(d, d)) <= 1e-12);
    }

    #[test]
    fn psd_order_of_ordered_pair(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = seeded(seed);
        let a = common::random_pd(d, 1e3, 1.0, &mut rng);
        let extra = common::random_pd(d, 1e3, 1.0, &mut rng);
        let b = a.add(&extra).unwrap();
        prop_assert!(psd_le(&a, &b).unwrap());
    }
}

/// Roots of the 2×2 and 3×3 characteristic polynomials by closed formulas.
fn characteristic_roots(m: &CMatrix) -> Vec<f64> {
    let d = m.nrows();
    let tr = m.trace().re;
    let mut roots = if d == 2 {
        let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        vec![tr / 2.0 - disc, tr / 2.0 + disc]
    } else {
        assert_eq!(d, 3);
        let shift = tr / 3.0;
        let b = m - CMatrix::identity(3, 3).scale(shift);
        let p = ((&b * &b).trace().re / 6.0).sqrt();
        let c = b.scale(1.0 / p);
        let half_det = (c.determinant().re / 2.0).clamp(-1.0, 1.0);
        let phi = half_det.acos() / 3.0;
        (0..3)
            .map(|k| shift + 2.0 * p * (phi + 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect()
    };
    roots.sort_by(f64::total_cmp);
    roots
}

#[test]
fn eigh_matches_characteristic_polynomial() {
    let mut rng = seeded(11);
    for d in [2usize, 3] {
        for _ in 0..200 {
            let m = random_hermitian(d, &mut rng);
            let (values, _) = eigh(&HermitianOperator::new(m.clone()).unwrap()).unwrap();
            let roots = characteristic_roots(&m);
            for (v, r) in values.iter().zip(&roots) {
                assert!((v - r).abs() < 1e-10 * (1.0 + r.abs()), "d={d}: {values:?} vs {roots:?}");
            }
        }
    }
}
