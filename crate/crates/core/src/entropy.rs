//! q-logarithm, Tsallis entropy and relative q-entropies.
//!
//! The quantum relative q-entropy for `q > 1` is
//!
//! ```text
//! D_q(ρ‖σ) = (1 - tr(ρ^q σ^{1-q})) / (1 - q)   if ker σ ⊂ ker ρ
//!          = +∞                                 otherwise
//! ```
//!
//! where the trace is the restricted double sum
//! `Σ_{a≠0} Σ_{b≠0} |⟨a|b⟩|² a^q b^{1-q}` over the eigenpairs of ρ and σ.

use std::fmt;

use nalgebra::DMatrix;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::apply_function;
use crate::states::{kernel_included, DensityMatrix, TOL_INCL};

/// Largest accepted q for the quantum relative q-entropy.
pub const Q_MAX: f64 = 40.0;

/// A value in `[−∞, ∞) ∪ {+∞}` without NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PositiveInfinity,
}

impl ExtendedReal {
    pub fn finite(v: f64) -> Result<Self> {
        if v.is_nan() {
            Err(Error::NonFinite("extended real"))
        } else if v == f64::INFINITY {
            Ok(ExtendedReal::PositiveInfinity)
        } else if v.is_finite() {
            Ok(ExtendedReal::Finite(v))
        } else {
            Err(Error::NonFinite("extended real"))
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(*v),
            ExtendedReal::PositiveInfinity => None,
        }
    }

    /// As an `f64`, with `+∞` for the infinite case.
    pub fn to_f64(&self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PositiveInfinity => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => s.serialize_f64(*v),
            ExtendedReal::PositiveInfinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtendedReal;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                ExtendedReal::finite(v).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                Ok(ExtendedReal::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                Ok(ExtendedReal::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                match v {
                    "inf" => Ok(ExtendedReal::PositiveInfinity),
                    other => Err(E::custom(format!("unexpected string {other:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// A probability vector: non-negative entries summing to one within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() || entries.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::BadSpectrum(format!("not a probability vector: {entries:?}")));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::BadSpectrum(format!("entries sum to {sum}")));
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn positive_x(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::DomainViolation(format!("q-logarithm argument {x} must be positive")))
    }
}

/// `ln_q x = (x^{1-q} - 1)/(1 - q)`; `q = 1` is rejected, see [`q_log_or_ln`].
pub fn q_log(x: f64, q: f64) -> Result<f64> {
    positive_x(x)?;
    if q == 1.0 {
        return Err(Error::DomainViolation(
            "q = 1 is the natural logarithm; use q_log_or_ln".into(),
        ));
    }
    let one_minus_q = 1.0 - q;
    if one_minus_q.abs() < 1e-6 {
        Ok((one_minus_q * x.ln()).exp_m1() / one_minus_q)
    } else {
        Ok((x.powf(one_minus_q) - 1.0) / one_minus_q)
    }
}

/// [`q_log`] extended to `q = 1` by the natural logarithm.
pub fn q_log_or_ln(x: f64, q: f64) -> Result<f64> {
    if q == 1.0 {
        positive_x(x)?;
        Ok(x.ln())
    } else {
        q_log(x, q)
    }
}

/// `S_q(p) = (Σ p_i^q - 1)/(1 - q)` with `0^q = 0`.
pub fn tsallis_entropy(p: &ProbVector, q: f64) -> Result<f64> {
    if q == 1.0 {
        return Err(Error::DomainViolation("Tsallis entropy needs q != 1".into()));
    }
    let sum: f64 = p.entries().iter().filter(|&&x| x > 0.0).map(|x| x.powf(q)).sum();
    Ok((sum - 1.0) / (1.0 - q))
}

fn check_q(q: f64) -> Result<()> {
    if q > 1.0 && q <= Q_MAX {
        Ok(())
    } else {
        Err(Error::QOutOfRange(q))
    }
}

fn finite_or_abort(v: f64, what: &'static str) -> Result<ExtendedReal> {
    if v.is_finite() {
        Ok(ExtendedReal::Finite(v))
    } else {
        Err(Error::NonFinite(what))
    }
}

/// `a^q b^{1-q}` computed in log space so large q does not overflow early.
fn weighted_power(a: f64, b: f64, q: f64) -> f64 {
    (q * a.ln() + (1.0 - q) * b.ln()).exp()
}

/// Classical `D_q(a‖b) = (1 - Σ_{a_i>0} a_i^q b_i^{1-q})/(1 - q)` for `q > 1`.
pub fn classical_relative_q(a: &ProbVector, b: &ProbVector, q: f64) -> Result<ExtendedReal> {
    check_q(q)?;
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    let mut sum = 0.0;
    for (&ai, &bi) in a.entries().iter().zip(b.entries()) {
        if ai > 0.0 {
            if bi == 0.0 {
                return Ok(ExtendedReal::PositiveInfinity);
            }
            sum += weighted_power(ai, bi, q);
        }
    }
    finite_or_abort((1.0 - sum) / (1.0 - q), "classical relative q-entropy")
}

/// Classical `D_p` for `0 ≤ p < 1`; always finite.
pub fn classical_relative_sub_unit(a: &ProbVector, b: &ProbVector, p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::DomainViolation(format!("p = {p} outside [0, 1)")));
    }
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    let sum: f64 = a
        .entries()
        .iter()
        .zip(b.entries())
        .filter(|(&ai, &bi)| ai > 0.0 && bi > 0.0)
        .map(|(&ai, &bi)| ai.powf(p) * bi.powf(1.0 - p))
        .sum();
    Ok((1.0 - sum) / (1.0 - p))
}

/// `|⟨a|b⟩|²` for every eigenvector pair, rows indexed by ρ's eigenvectors.
pub fn overlap_weights(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DMatrix<f64>> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let inner = rho.eigenvectors().adjoint() * sigma.eigenvectors();
    Ok(inner.map(|z| z.norm_sqr()))
}

/// Restricted double sum `Σ_{a≠0} Σ_{b≠0} |⟨a|b⟩|² f(a, b)`.
fn restricted_sum<F: Fn(f64, f64) -> f64>(rho: &DensityMatrix, sigma: &DensityMatrix, f: F) -> Result<f64> {
    let w = overlap_weights(rho, sigma)?;
    let mut total = 0.0;
    for (i, &a) in rho.spectrum().iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (j, &b) in sigma.spectrum().iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            total += w[(i, j)] * f(a, b);
        }
    }
    Ok(total)
}

/// `tr(ρ^q σ^{1-q})` as the restricted spectral double sum.
pub fn restricted_trace(rho: &DensityMatrix, sigma: &DensityMatrix, q: f64) -> Result<f64> {
    restricted_sum(rho, sigma, |a, b| weighted_power(a, b, q))
}

fn check_pair(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    Ok(())
}

/// Quantum relative q-entropy for `q ∈ (1, 40]` with the default kernel
/// tolerance.
pub fn quantum_relative_q(rho: &DensityMatrix, sigma: &DensityMatrix, q: f64) -> Result<ExtendedReal> {
    quantum_relative_q_with_tol(rho, sigma, q, TOL_INCL)
}

pub fn quantum_relative_q_with_tol(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    q: f64,
    tol_incl: f64,
) -> Result<ExtendedReal> {
    check_pair(rho, sigma)?;
    check_q(q)?;
    if !kernel_included(sigma, rho, tol_incl)? {
        return Ok(ExtendedReal::PositiveInfinity);
    }
    let trace = restricted_trace(rho, sigma, q)?;
    finite_or_abort((1.0 - trace) / (1.0 - q), "quantum relative q-entropy")
}

/// The same quantity through spectral calculus: `tr(ρ^q σ^{1-q})` with the
/// negative power of σ taken on its support only.
pub fn quantum_relative_q_operator(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    q: f64,
) -> Result<ExtendedReal> {
    check_pair(rho, sigma)?;
    check_q(q)?;
    if !kernel_included(sigma, rho, TOL_INCL)? {
        return Ok(ExtendedReal::PositiveInfinity);
    }
    let nonneg = |x: f64| x >= 0.0;
    let rho_q = apply_function(rho.op(), |x| if x > 0.0 { x.powf(q) } else { 0.0 }, nonneg)?;
    let sigma_pow = apply_function(
        sigma.op(),
        |x| if x > 0.0 { x.powf(1.0 - q) } else { 0.0 },
        nonneg,
    )?;
    let trace = (rho_q.matrix() * sigma_pow.matrix()).trace().re;
    finite_or_abort((1.0 - trace) / (1.0 - q), "operator-route relative q-entropy")
}

/// `D_p(ρ‖σ)` for `0 ≤ p < 1` by the double sum; finite for every pair.
pub fn quantum_relative_sub_unit(rho: &DensityMatrix, sigma: &DensityMatrix, p: f64) -> Result<f64> {
    check_pair(rho, sigma)?;
    if !(0.0..1.0).contains(&p) {
        return Err(Error::DomainViolation(format!("p = {p} outside [0, 1)")));
    }
    let sum = restricted_sum(rho, sigma, |a, b| a.powf(p) * b.powf(1.0 - p))?;
    let v = (1.0 - sum) / (1.0 - p);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("relative p-entropy"))
    }
}

/// Standard relative entropy `tr(ρ ln ρ - ρ ln σ)` by the restricted double
/// sum, `+∞` without kernel inclusion.
pub fn relative_entropy_vn(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ExtendedReal> {
    check_pair(rho, sigma)?;
    if !kernel_included(sigma, rho, TOL_INCL)? {
        return Ok(ExtendedReal::PositiveInfinity);
    }
    let v = restricted_sum(rho, sigma, |a, b| a * (a.ln() - b.ln()))?;
    finite_or_abort(v, "relative entropy")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn diag(v: &[f64]) -> DensityMatrix {
        DensityMatrix::from_diagonal(v).unwrap()
    }

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn q_log_examples() {
        assert_eq!(q_log(1.0, 2.0).unwrap(), 0.0);
        assert_eq!(q_log(1.0, 0.3).unwrap(), 0.0);
        assert_abs_diff_eq!(q_log(3.0, 2.0).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(q_log(e, 1.0 + 1e-9).unwrap(), 1.0, epsilon = 1e-7);
        assert!(q_log(0.0, 2.0).is_err());
        assert!(q_log(-1.0, 2.0).is_err());
        assert!(q_log(2.0, 1.0).is_err());
        assert_abs_diff_eq!(q_log_or_ln(e, 1.0).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn tsallis_entropy_examples() {
        assert_eq!(tsallis_entropy(&pv(&[1.0]), 2.5).unwrap(), 0.0);
        assert_abs_diff_eq!(tsallis_entropy(&pv(&[0.5, 0.5]), 2.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(tsallis_entropy(&pv(&[1.0, 0.0]), 2.0).unwrap(), 0.0);
        assert!(tsallis_entropy(&pv(&[1.0]), 1.0).is_err());
    }

    #[test]
    fn prob_vector_validation() {
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::new(vec![1.5, -0.5]).is_err());
        assert!(ProbVector::new(vec![]).is_err());
    }

    #[test]
    fn classical_examples() {
        let a = pv(&[0.5, 0.5]);
        assert_eq!(classical_relative_q(&a, &a, 2.0).unwrap(), ExtendedReal::Finite(0.0));
        let b = pv(&[0.75, 0.25]);
        let v = classical_relative_q(&a, &b, 2.0).unwrap().value().unwrap();
        assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(
            classical_relative_q(&a, &pv(&[1.0, 0.0]), 2.0).unwrap(),
            ExtendedReal::PositiveInfinity
        );
        assert!(matches!(classical_relative_q(&a, &b, 1.0), Err(Error::QOutOfRange(_))));
    }

    #[test]
    fn quantum_examples() {
        let sigma = diag(&[0.3, 0.7]);
        let v = quantum_relative_q(&sigma, &sigma, 1.7).unwrap().value().unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-10);

        let rho = diag(&[0.5, 0.5]);
        let sigma = diag(&[0.75, 0.25]);
        let v = quantum_relative_q(&rho, &sigma, 2.0).unwrap().value().unwrap();
        assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-15);

        let rho = diag(&[0.6, 0.4, 0.0]);
        let sigma = diag(&[0.5, 0.5, 0.0]);
        let v = quantum_relative_q(&rho, &sigma, 2.0).unwrap().value().unwrap();
        assert_abs_diff_eq!(v, 0.04, epsilon = 1e-15);

        let rho = diag(&[0.5, 0.5]);
        let sigma = diag(&[1.0, 0.0]);
        assert_eq!(
            quantum_relative_q(&rho, &sigma, 2.0).unwrap(),
            ExtendedReal::PositiveInfinity
        );
    }

    #[test]
    fn quantum_errors() {
        let a = diag(&[0.5, 0.5]);
        let b = diag(&[0.2, 0.3, 0.5]);
        assert!(matches!(quantum_relative_q(&a, &b, 2.0), Err(Error::DimensionMismatch(2, 3))));
        assert!(matches!(quantum_relative_q(&a, &a, 1.0), Err(Error::QOutOfRange(_))));
        assert!(matches!(quantum_relative_q(&a, &a, 41.0), Err(Error::QOutOfRange(_))));
    }

    #[test]
    fn operator_route_handles_singular_sigma() {
        let rho = diag(&[0.6, 0.4, 0.0]);
        let sigma = diag(&[0.5, 0.5, 0.0]);
        let v = quantum_relative_q_operator(&rho, &sigma, 2.0).unwrap().value().unwrap();
        assert_abs_diff_eq!(v, 0.04, epsilon = 1e-14);
    }

    #[test]
    fn von_neumann_examples() {
        let rho = diag(&[0.5, 0.5]);
        assert_eq!(relative_entropy_vn(&rho, &rho).unwrap(), ExtendedReal::Finite(0.0));
        let sigma = diag(&[0.75, 0.25]);
        let v = relative_entropy_vn(&rho, &sigma).unwrap().value().unwrap();
        assert_abs_diff_eq!(v, 0.5 * (4.0f64 / 3.0).ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.143841, epsilon = 1e-6);
        assert_eq!(
            relative_entropy_vn(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])).unwrap(),
            ExtendedReal::PositiveInfinity
        );
    }

    #[test]
    fn sub_unit_half_is_bhattacharyya_form() {
        let rho = diag(&[0.5, 0.5]);
        let sigma = diag(&[0.75, 0.25]);
        let v = quantum_relative_sub_unit(&rho, &sigma, 0.5).unwrap();
        let expect = 2.0 * (1.0 - ((0.5f64 * 0.75).sqrt() + (0.5f64 * 0.25).sqrt()));
        assert_abs_diff_eq!(v, expect, epsilon = 1e-15);
        let p0 = quantum_relative_sub_unit(&diag(&[1.0, 0.0]), &sigma, 0.0).unwrap();
        assert_abs_diff_eq!(p0, 0.25, epsilon = 1e-15);
        assert!(quantum_relative_sub_unit(&rho, &sigma, 1.0).is_err());
    }

    #[test]
    fn extended_real_serde() {
        let s = serde_json::to_string(&[ExtendedReal::Finite(0.5), ExtendedReal::PositiveInfinity]).unwrap();
        assert_eq!(s, "[0.5,\"inf\"]");
        let back: Vec<ExtendedReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![ExtendedReal::Finite(0.5), ExtendedReal::PositiveInfinity]);
        assert!(ExtendedReal::finite(f64::NAN).is_err());
    }
}
