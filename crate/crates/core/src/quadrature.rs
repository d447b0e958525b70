//! Fractional powers by numerical integration over the half line.
//!
//! For `0 < r < 1` and `a > 0`,
//!
//! ```text
//! a^r = (sin rπ / π) ∫₀^∞ x^{r-1} a / (a + x) dx
//!     = (sin rπ / π) ∫₀^∞ y^{-r} 1 / (y + 1/a) dy
//! ```
//!
//! The same integrands with `a` replaced by a positive definite matrix give
//! `A^r` through resolvents, which are evaluated here with Cholesky solves
//! only. This module never calls an eigensolver on its operator arguments,
//! so its results are an independent check on spectral calculus.
//!
//! The half line is cut into panels at geometric breakpoints spanning the
//! range of pole locations of the integrand. The first panel `(0, s₀]` carries
//! the algebraic endpoint weight `y^β` and uses a Gauss–Jacobi rule; the
//! interior panels use Gauss–Legendre; the tail `(S, ∞)` is mapped to `(0, 1]`
//! by `y = S/u`, which turns the algebraic decay into another Gauss–Jacobi
//! endpoint weight.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{row_sum_norm, CMatrix, HermitianOperator};

pub const DEFAULT_NODES_PER_PANEL: usize = 64;
pub const DEFAULT_PANEL_RATIO: f64 = 8.0;

/// Nodes and weights of an n-point Gauss–Jacobi rule for the weight
/// `(1 - t)^alpha (1 + t)^beta` on `[-1, 1]`, nodes ascending.
///
/// Computed with the Golub–Welsch eigenvalue method.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidRule("zero nodes".into()));
    }
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(Error::InvalidRule(format!(
            "Jacobi exponents must exceed -1 (alpha={alpha}, beta={beta})"
        )));
    }
    let ab = alpha + beta;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let diag = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            let kf = k as f64;
            (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        jac[(k, k)] = diag;
        if k + 1 < n {
            let kf = (k + 1) as f64;
            let b = if k == 0 {
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                let s = 2.0 * kf + ab;
                4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            let off = b.sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::try_new(jac, f64::EPSILON, 100 * n)
        .ok_or(Error::ConvergenceFailure { dim: n })?;
    let log_mu0 = (ab + 1.0) * 2f64.ln() + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
        - ln_gamma(ab + 2.0);
    let mu0 = log_mu0.exp();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// Gauss–Jacobi rule for the one-sided weight `(1 + t)^exponent`.
#[derive(Debug, Clone)]
struct EndpointRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// The two shapes of the fractional-power integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralForm {
    /// `x^{r-1} A (A + x)^{-1}`
    First,
    /// `y^{-r} (y + A^{-1})^{-1}`
    Second,
}

/// Panel layout and node count for half-line integrals.
///
/// Endpoint rules are built on first use for each weight exponent and cached,
/// so one rule can be shared across threads and exponents.
#[derive(Debug)]
pub struct QuadratureRule {
    nodes_per_panel: usize,
    panel_ratio: f64,
    cache: Mutex<BTreeMap<u64, Arc<EndpointRule>>>,
}

impl Clone for QuadratureRule {
    fn clone(&self) -> Self {
        Self {
            nodes_per_panel: self.nodes_per_panel,
            panel_ratio: self.panel_ratio,
            cache: Mutex::new(self.cache.lock().expect("rule cache").clone()),
        }
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::new(DEFAULT_NODES_PER_PANEL).expect("default rule")
    }
}

/// Weighted sample points `(y, w)` on the half line.
pub type HalfLineNodes = Vec<(f64, f64)>;

fn check_exponent(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::DomainViolation(format!(
            "fractional exponent r = {r} outside (0, 1)"
        )))
    }
}

impl QuadratureRule {
    pub fn new(nodes_per_panel: usize) -> Result<Self> {
        Self::with_panel_ratio(nodes_per_panel, DEFAULT_PANEL_RATIO)
    }

    pub fn with_panel_ratio(nodes_per_panel: usize, panel_ratio: f64) -> Result<Self> {
        if nodes_per_panel < 4 {
            return Err(Error::InvalidRule(format!(
                "nodes_per_panel = {nodes_per_panel} < 4"
            )));
        }
        if !(panel_ratio > 1.0 && panel_ratio.is_finite()) {
            return Err(Error::InvalidRule(format!("panel ratio {panel_ratio} <= 1")));
        }
        Ok(Self {
            nodes_per_panel,
            panel_ratio,
            cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.nodes_per_panel
    }

    pub fn panel_ratio(&self) -> f64 {
        self.panel_ratio
    }

    fn endpoint_rule(&self, exponent: f64) -> Result<Arc<EndpointRule>> {
        let key = exponent.to_bits();
        let mut cache = self.cache.lock().expect("rule cache");
        if let Some(rule) = cache.get(&key) {
            return Ok(Arc::clone(rule));
        }
        let (nodes, weights) = gauss_jacobi(self.nodes_per_panel, 0.0, exponent)?;
        let rule = Arc::new(EndpointRule { nodes, weights });
        cache.insert(key, Arc::clone(&rule));
        Ok(rule)
    }

    /// Panel breakpoints covering pole locations in `[lo, hi]`.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let ratio = hi / lo;
        if ratio <= self.panel_ratio {
            return vec![(lo * hi).sqrt()];
        }
        let k = (ratio.ln() / self.panel_ratio.ln()).ceil() as usize;
        let step = ratio.powf(1.0 / k as f64);
        let mut pts: Vec<f64> = (0..k).map(|i| lo * step.powi(i as i32)).collect();
        pts.push(hi);
        pts
    }

    /// Points and weights approximating `∫₀^∞ y^beta f(y) dy` for integrands
    /// whose poles lie on the negative axis at distances in `[lo, hi]` and
    /// which decay like `y^{-decay}`. Requires `beta > -1` and
    /// `beta < decay - 1`.
    pub fn half_line(&self, beta: f64, decay: u32, lo: f64, hi: f64) -> Result<HalfLineNodes> {
        if !(lo > 0.0 && hi > 0.0 && lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidRule(format!(
                "pole range [{lo}, {hi}] must be positive and finite"
            )));
        }
        let gamma = decay as f64 - beta - 2.0;
        if !(beta > -1.0 && gamma > -1.0) {
            return Err(Error::InvalidRule(format!(
                "integral diverges for beta = {beta}, decay = {decay}"
            )));
        }
        let pts = self.breakpoints(lo, hi);
        let mut out = Vec::with_capacity((pts.len() + 1) * self.nodes_per_panel);

        let head = self.endpoint_rule(beta)?;
        let s0 = pts[0];
        let head_scale = (0.5 * s0).powf(beta + 1.0);
        for (t, w) in head.nodes.iter().zip(&head.weights) {
            out.push((0.5 * s0 * (1.0 + t), w * head_scale));
        }

        if pts.len() > 1 {
            let legendre = self.endpoint_rule(0.0)?;
            for pair in pts.windows(2) {
                let mid = 0.5 * (pair[0] + pair[1]);
                let half = 0.5 * (pair[1] - pair[0]);
                for (t, w) in legendre.nodes.iter().zip(&legendre.weights) {
                    let y = mid + half * t;
                    out.push((y, w * half * y.powf(beta)));
                }
            }
        }

        let tail = self.endpoint_rule(gamma)?;
        let big = *pts.last().expect("at least one breakpoint");
        let tail_scale = big.powf(beta + 1.0) * 2f64.powf(-gamma - 1.0);
        for (t, w) in tail.nodes.iter().zip(&tail.weights) {
            let u = 0.5 * (1.0 + t);
            out.push((big / u, w * tail_scale * u.powi(-(decay as i32))));
        }
        Ok(out)
    }

    /// Aborts-worthy check used at harness start: quadrature of `4^{1/2}`.
    pub fn self_test(&self) -> Result<f64> {
        let err = (frac_power_scalar(4.0, 0.5, self)? - 2.0).abs();
        if err > 1e-9 {
            return Err(Error::InvalidRule(format!(
                "self-test error {err:e} exceeds 1e-9"
            )));
        }
        Ok(err)
    }
}

fn prefactor(r: f64) -> f64 {
    (r * PI).sin() / PI
}

/// `a^r` from `(sin rπ/π) ∫₀^∞ x^{r-1} a/(a + x) dx`.
pub fn frac_power_scalar(a: f64, r: f64, rule: &QuadratureRule) -> Result<f64> {
    check_exponent(r)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::DomainViolation(format!("base a = {a} must be positive")));
    }
    let nodes = rule.half_line(r - 1.0, 1, a, a)?;
    let sum: f64 = nodes.iter().map(|&(x, w)| w * a / (a + x)).sum();
    Ok(prefactor(r) * sum)
}

/// `(sin rπ/π) ∫₀^∞ y^{-r} / ((y + b0)(y + a0)) dy` by quadrature.
pub fn resolvent_pair_integral(a0: f64, b0: f64, r: f64, rule: &QuadratureRule) -> Result<f64> {
    check_exponent(r)?;
    if !(a0 > 0.0 && b0 > 0.0) {
        return Err(Error::DomainViolation(format!(
            "a0 = {a0}, b0 = {b0} must be positive"
        )));
    }
    let nodes = rule.half_line(-r, 2, a0.min(b0), a0.max(b0))?;
    let sum: f64 = nodes
        .iter()
        .map(|&(y, w)| w / ((y + b0) * (y + a0)))
        .sum();
    Ok(prefactor(r) * sum)
}

/// Closed form of [`resolvent_pair_integral`]: `(b0^{-r} - a0^{-r})/(a0 - b0)`,
/// and its limit `r b0^{-r-1}` when `a0 = b0`.
pub fn resolvent_pair_closed_form(a0: f64, b0: f64, r: f64) -> Result<f64> {
    check_exponent(r)?;
    if !(a0 > 0.0 && b0 > 0.0) {
        return Err(Error::DomainViolation(format!(
            "a0 = {a0}, b0 = {b0} must be positive"
        )));
    }
    if a0 == b0 {
        return Ok(r * b0.powf(-r - 1.0));
    }
    // x^{-r} difference quotient via expm1 keeps precision for close a0, b0.
    let ln_ratio = ((a0 - b0) / b0).ln_1p();
    let num = -b0.powf(-r) * (-r * ln_ratio).exp_m1();
    Ok(num / (a0 - b0))
}

struct Factored {
    lo: f64,
    hi: f64,
}

/// Spectral range enclosure of a positive definite matrix without an
/// eigensolver: `[1/||A⁻¹||, ||A||]` in the max-row-sum norm.
fn positive_range(a: &CMatrix) -> Result<Factored> {
    let chol = a.clone().cholesky().ok_or_else(|| {
        Error::DomainViolation("operator is not strictly positive".into())
    })?;
    let inv = chol.inverse();
    let lo = 1.0 / row_sum_norm(&inv);
    let hi = row_sum_norm(a);
    if !(lo > 0.0 && lo.is_finite()) {
        return Err(Error::DomainViolation("operator is singular".into()));
    }
    Ok(Factored { lo, hi })
}

fn solve_shifted(a: &CMatrix, scale: f64, shift: f64, rhs: &CMatrix) -> Result<CMatrix> {
    let d = a.nrows();
    let m = a.scale(scale) + CMatrix::identity(d, d).scale(shift);
    let chol = m.cholesky().ok_or(Error::NotPositiveDefinite)?;
    Ok(chol.solve(rhs))
}

fn finish(sum: CMatrix, r: f64) -> Result<HermitianOperator> {
    HermitianOperator::new(sum.map(|z| z * prefactor(r)))
}

/// `A^r` for strictly positive `A` by either integral form.
pub fn frac_power_operator(
    a: &HermitianOperator,
    r: f64,
    rule: &QuadratureRule,
    form: IntegralForm,
) -> Result<HermitianOperator> {
    check_exponent(r)?;
    let m = a.matrix();
    let d = a.dim();
    let range = positive_range(m)?;
    let mut sum = CMatrix::zeros(d, d);
    match form {
        IntegralForm::First => {
            for (x, w) in rule.half_line(r - 1.0, 1, range.lo, range.hi)? {
                let term = solve_shifted(m, 1.0, x, m)?;
                sum += term.map(|z| z * w);
            }
        }
        IntegralForm::Second => {
            // (y + A^{-1})^{-1} = (yA + 1)^{-1} A; poles sit at -1/a.
            for (y, w) in rule.half_line(-r, 1, 1.0 / range.hi, 1.0 / range.lo)? {
                let term = solve_shifted(m, y, 1.0, m)?;
                sum += term.map(|z| z * w);
            }
        }
    }
    finish(sum, r)
}

/// `(sin rπ/π) ∫₀^∞ y^{-r} (y + A)^{-1} D (y + A)^{-1} dy`.
pub fn frechet_integral_rhs(
    a: &HermitianOperator,
    direction: &HermitianOperator,
    r: f64,
    rule: &QuadratureRule,
) -> Result<HermitianOperator> {
    check_exponent(r)?;
    if a.dim() != direction.dim() {
        return Err(Error::DimensionMismatch(a.dim(), direction.dim()));
    }
    let m = a.matrix();
    let d = a.dim();
    let range = positive_range(m)?;
    let mut sum = CMatrix::zeros(d, d);
    for (y, w) in rule.half_line(-r, 2, range.lo, range.hi)? {
        let shifted = m + CMatrix::identity(d, d).scale(y);
        let chol = shifted.cholesky().ok_or(Error::NotPositiveDefinite)?;
        let left = chol.solve(direction.matrix());
        let both = chol.solve(&left.adjoint());
        sum += both.map(|z| z * w);
    }
    finish(sum, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn jacobi_rule_integrates_monomials() {
        // ∫_{-1}^{1} t^k (1+t)^beta dt by the binomial expansion of t = (1+t) - 1.
        for &beta in &[-0.9, -0.5, 0.0, 0.3, 0.9] {
            let (x, w) = gauss_jacobi(16, 0.0, beta).unwrap();
            for k in 0..10u32 {
                let quad: f64 = x.iter().zip(&w).map(|(t, w)| w * t.powi(k as i32)).sum();
                let mut exact = 0.0;
                for j in 0..=k {
                    let binom = (0..j).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64);
                    let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                    let e = j as f64 + beta + 1.0;
                    exact += binom * sign * 2f64.powf(e) / e;
                }
                assert!((quad - exact).abs() < 1e-12 * (1.0 + exact.abs()), "beta={beta} k={k}");
            }
        }
    }

    #[test]
    fn legendre_weights_sum_to_two() {
        let (x, w) = gauss_jacobi(64, 0.0, 0.0).unwrap();
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn rejects_bad_rules() {
        assert!(QuadratureRule::new(3).is_err());
        assert!(gauss_jacobi(8, -1.0, 0.0).is_err());
        let rule = QuadratureRule::default();
        assert!(rule.half_line(-0.5, 0, 1.0, 1.0).is_err());
        assert!(rule.half_line(-0.5, 1, 0.0, 1.0).is_err());
    }

    #[test]
    fn scalar_examples() {
        let rule = QuadratureRule::default();
        assert!((frac_power_scalar(4.0, 0.5, &rule).unwrap() - 2.0).abs() < 1e-10);
        assert!((frac_power_scalar(8.0, 1.0 / 3.0, &rule).unwrap() - 2.0).abs() < 1e-10);
        for &r in &[0.05, 0.3, 0.5, 0.77, 0.95] {
            assert!((frac_power_scalar(1.0, r, &rule).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_domain_errors() {
        let rule = QuadratureRule::default();
        assert!(frac_power_scalar(0.0, 0.5, &rule).is_err());
        assert!(frac_power_scalar(-1.0, 0.5, &rule).is_err());
        assert!(frac_power_scalar(2.0, 0.0, &rule).is_err());
        assert!(frac_power_scalar(2.0, 1.0, &rule).is_err());
    }

    #[test]
    fn scalar_relative_accuracy_over_wide_range() {
        let rule = QuadratureRule::default();
        for k in -12..=12 {
            let a = 10f64.powf(k as f64 * 0.5);
            for &r in &[0.1, 0.25, 0.5, 0.75, 0.9] {
                let got = frac_power_scalar(a, r, &rule).unwrap();
                let want = a.powf(r);
                assert!(((got - want) / want).abs() < 1e-10, "a={a} r={r} got={got} want={want}");
            }
        }
    }

    #[test]
    fn resolvent_pair_matches_closed_form() {
        let rule = QuadratureRule::default();
        for &(a0, b0) in &[(0.7, 0.1), (0.5, 0.5), (0.01, 0.9), (1e-4, 0.3), (0.2, 0.2000001)] {
            for &r in &[0.1, 0.5, 0.9] {
                let quad = resolvent_pair_integral(a0, b0, r, &rule).unwrap();
                let closed = resolvent_pair_closed_form(a0, b0, r).unwrap();
                assert!(((quad - closed) / closed).abs() < 1e-10, "a0={a0} b0={b0} r={r}");
            }
        }
    }

    #[test]
    fn self_test_passes() {
        assert!(QuadratureRule::default().self_test().unwrap() < 1e-12);
    }
}
