//! Evaluators for the upper and lower continuity bounds on the relative
//! q-entropy and for the auxiliary operator inequalities behind them.
//!
//! Every evaluator returns a [`BoundReport`] comparing a directly computed
//! left-hand side with the bound. When the hypotheses of a bound fail the
//! report is marked vacuous with `rhs = +∞`, so sweeps over mixed families can
//! continue.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::entropy::{
    q_log, quantum_relative_q_with_tol, quantum_relative_sub_unit, relative_entropy_vn, ExtendedReal,
};
use crate::error::{Error, Result};
use crate::linalg::{
    apply_function, psd_gap, schatten_norm, zero_threshold, CMatrix, HermitianOperator, SchattenIndex, TOL_PSD,
};
use crate::quadrature::{frechet_integral_rhs, QuadratureRule};
use crate::states::{kernel_included, DensityMatrix, SpectralSummary, TOL_INCL};

/// Relative slack allowed in `lhs ≤ rhs`.
pub const TOL_BOUND: f64 = 1e-9;
/// Extra absolute allowance for quadrature error in the operator-order check.
pub const QUAD_ALLOWANCE: f64 = 1e-7;
/// `b1/b0` closer to one than this uses the limit value of the log prefactor.
pub const PREFACTOR_LIMIT_WINDOW: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub tol_bound: f64,
    pub tol_incl: f64,
    pub tol_psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_bound: TOL_BOUND,
            tol_incl: TOL_INCL,
            tol_psd: TOL_PSD,
        }
    }
}

/// Norm distances of `Δ = ρ - σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distances {
    pub trace_norm: f64,
    pub spectral_norm: f64,
}

impl Distances {
    pub fn of(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Self> {
        let delta = rho.op().sub(sigma.op())?;
        Ok(Self {
            trace_norm: delta.trace_norm()?,
            spectral_norm: delta.spectral_norm()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: ExtendedReal,
    pub rhs: ExtendedReal,
    /// `rhs - lhs` when both are finite.
    pub slack: Option<f64>,
    pub holds: bool,
    /// Hypotheses failed; `holds` is true by vacuity.
    pub vacuous: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<SpectralSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distances: Option<Distances>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

impl BoundReport {
    fn vacuous(name: &str, reason: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            lhs: ExtendedReal::PositiveInfinity,
            rhs: ExtendedReal::PositiveInfinity,
            slack: None,
            holds: true,
            vacuous: true,
            note: Some(reason.into()),
            constants: None,
            distances: None,
            extra: BTreeMap::new(),
        }
    }

    fn compared(name: &str, lhs: ExtendedReal, rhs: ExtendedReal, tol: f64) -> Self {
        let slack = match (lhs, rhs) {
            (ExtendedReal::Finite(l), ExtendedReal::Finite(r)) => Some(r - l),
            _ => None,
        };
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            slack,
            holds: le_within(lhs, rhs, tol),
            vacuous: false,
            note: None,
            constants: None,
            distances: None,
            extra: BTreeMap::new(),
        }
    }

    fn with_context(mut self, constants: SpectralSummary, distances: Distances) -> Self {
        self.constants = Some(constants);
        self.distances = Some(distances);
        self
    }

    /// The bound value, `None` when vacuous or infinite.
    pub fn rhs_value(&self) -> Option<f64> {
        if self.vacuous {
            None
        } else {
            self.rhs.value()
        }
    }
}

/// `lhs ≤ rhs + tol·(1 + rhs)`, with `+∞` on the right always satisfied.
pub fn le_within(lhs: ExtendedReal, rhs: ExtendedReal, tol: f64) -> bool {
    match (lhs, rhs) {
        (_, ExtendedReal::PositiveInfinity) => true,
        (ExtendedReal::PositiveInfinity, ExtendedReal::Finite(_)) => false,
        (ExtendedReal::Finite(l), ExtendedReal::Finite(r)) => l <= r + tol * (1.0 + r.abs()),
    }
}

fn finite(v: f64, what: &'static str) -> Result<ExtendedReal> {
    if v.is_finite() {
        Ok(ExtendedReal::Finite(v))
    } else {
        Err(Error::NonFinite(what))
    }
}

/// The relative q-entropy for a pair that satisfies kernel inclusion; an
/// infinite value here means the tolerances disagree with each other.
fn finite_entropy(rho: &DensityMatrix, sigma: &DensityMatrix, q: f64, tol: &Tolerances) -> Result<ExtendedReal> {
    let d = quantum_relative_q_with_tol(rho, sigma, q, tol.tol_incl)?;
    if !d.is_finite() {
        return Err(Error::Inconsistent(format!(
            "relative q-entropy is infinite at q = {q} although kernel inclusion holds"
        )));
    }
    Ok(d)
}

/// Full-rank bounds for `1 < q ≤ 2`: the spectral-norm form, its trace-norm
/// relaxation and the `a₁^q` trace-norm form, in that order.
pub fn thm1_bounds(rho: &DensityMatrix, sigma: &DensityMatrix, q: f64, tol: &Tolerances) -> Result<Vec<BoundReport>> {
    let names = ["thm1_rhs1", "thm1_rhs2", "thm1_rhs3"];
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let reason = if !(q > 1.0 && q <= 2.0) {
        Some(format!("q = {q} outside (1, 2]"))
    } else if !rho.is_full_rank() || !sigma.is_full_rank() {
        Some("both states must be strictly positive".to_string())
    } else {
        None
    };
    if let Some(reason) = reason {
        return Ok(names.iter().map(|n| BoundReport::vacuous(n, reason.clone())).collect());
    }
    let c = SpectralSummary::of(rho, sigma);
    let dist = Distances::of(rho, sigma)?;
    let lhs = finite_entropy(rho, sigma, q, tol)?;
    let r = q - 1.0;
    let base = c.a1.powf(r) / c.lambda0.powf(q) / r;
    let rhs = [
        base * dist.spectral_norm,
        0.5 * base * dist.trace_norm,
        c.a1.powf(q) / c.lambda0.powf(q) / r * dist.trace_norm,
    ];
    names
        .iter()
        .zip(rhs)
        .map(|(n, v)| Ok(BoundReport::compared(n, lhs, finite(v, n)?, tol.tol_bound).with_context(c, dist)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Thm2Variant {
    /// `‖Δ‖_∞‖Δ‖₁` second term.
    General,
    /// `½‖Δ‖₁²` second term, using tracelessness of Δ.
    Traceless,
}

/// `ln_q(x)/(1 - 1/x)` with its limit 1 substituted near `x = 1`.
pub fn thm2_prefactor(b1_over_b0: f64, q: f64) -> Result<(f64, bool)> {
    if (b1_over_b0 - 1.0).abs() < PREFACTOR_LIMIT_WINDOW {
        return Ok((1.0, true));
    }
    Ok((q_log(b1_over_b0, q)? / (1.0 - 1.0 / b1_over_b0), false))
}

/// Bound for `1 < q ≤ 2` under kernel inclusion, in terms of `b₀`, `b₁`, `a₁`.
pub fn thm2_bound(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    q: f64,
    variant: Thm2Variant,
    tol: &Tolerances,
) -> Result<BoundReport> {
    let name = match variant {
        Thm2Variant::General => "thm2_rhs",
        Thm2Variant::Traceless => "thm2tl_rhs",
    };
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    if !(q > 1.0 && q <= 2.0) {
        return Ok(BoundReport::vacuous(name, format!("q = {q} outside (1, 2]")));
    }
    if !kernel_included(sigma, rho, tol.tol_incl)? {
        return Ok(BoundReport::vacuous(name, "kernel of sigma not inside kernel of rho"));
    }
    let c = SpectralSummary::of(rho, sigma);
    let dist = Distances::of(rho, sigma)?;
    let lhs = finite_entropy(rho, sigma, q, tol)?;
    let r = q - 1.0;
    let (prefactor, limit) = thm2_prefactor(c.b1 / c.b0, q)?;
    let first = prefactor * (c.a1 / c.b0).powf(r) * dist.trace_norm;
    let second = match variant {
        Thm2Variant::General => c.a1.powf(r) / c.b0.powf(q) * dist.spectral_norm * dist.trace_norm,
        Thm2Variant::Traceless => c.a1.powf(r) / (2.0 * c.b0.powf(q)) * dist.trace_norm * dist.trace_norm,
    };
    let mut report = BoundReport::compared(name, lhs, finite(first + second, name)?, tol.tol_bound).with_context(c, dist);
    report.extra.insert("prefactor".into(), prefactor);
    if limit {
        report.note = Some("b1 = b0: log prefactor replaced by its limit 1".into());
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Thm3Variant {
    /// `(⌈q⌉-1)/(q-1) · (λ₁/b₀)^{q-1} ‖Δ‖₁`, any `q > 1`.
    General,
    /// `1/(q-1) · (a₁/b₀)^{q-1} ‖Δ‖₁`, `1 < q ≤ 2`.
    Q2,
}

/// `(⌈q⌉ - 1)/(q - 1)`; equals 1 at integer q.
pub fn ceiling_factor(q: f64) -> f64 {
    (q.ceil() - 1.0) / (q - 1.0)
}

/// Bound with the `b₀^{1-q}` dependence under kernel inclusion.
pub fn thm3_bound(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    q: f64,
    variant: Thm3Variant,
    tol: &Tolerances,
) -> Result<BoundReport> {
    let name = match variant {
        Thm3Variant::General => "thm3_rhs",
        Thm3Variant::Q2 => "thm3q2_rhs",
    };
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let q_ok = match variant {
        Thm3Variant::General => q > 1.0,
        Thm3Variant::Q2 => q > 1.0 && q <= 2.0,
    };
    if !q_ok {
        return Ok(BoundReport::vacuous(name, format!("q = {q} outside the bound's range")));
    }
    if !kernel_included(sigma, rho, tol.tol_incl)? {
        return Ok(BoundReport::vacuous(name, "kernel of sigma not inside kernel of rho"));
    }
    let c = SpectralSummary::of(rho, sigma);
    let dist = Distances::of(rho, sigma)?;
    let lhs = finite_entropy(rho, sigma, q, tol)?;
    let r = q - 1.0;
    let rhs = match variant {
        Thm3Variant::General => ceiling_factor(q) * (c.lambda1 / c.b0).powf(r) * dist.trace_norm,
        Thm3Variant::Q2 => (c.a1 / c.b0).powf(r) / r * dist.trace_norm,
    };
    let mut report = BoundReport::compared(name, lhs, finite(rhs, name)?, tol.tol_bound).with_context(c, dist);
    if variant == Thm3Variant::General {
        report.extra.insert("ceiling_factor".into(), ceiling_factor(q));
    }
    Ok(report)
}

/// Lower bounds for `1 < q ≤ 2`, `0 ≤ p < 1`: the ordering
/// `D_p ≤ D₁ ≤ D_q` and the Pinsker chain `½‖Δ‖₁² ≤ D₁ ≤ D_q`.
pub fn lower_bounds(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    q: f64,
    p: f64,
    tol: &Tolerances,
) -> Result<Vec<BoundReport>> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    if !(q > 1.0 && q <= 2.0 && (0.0..1.0).contains(&p)) {
        let reason = format!("need 1 < q <= 2 and 0 <= p < 1 (q = {q}, p = {p})");
        return Ok(vec![
            BoundReport::vacuous("chain", reason.clone()),
            BoundReport::vacuous("pinsker", reason),
        ]);
    }
    let c = SpectralSummary::of(rho, sigma);
    let dist = Distances::of(rho, sigma)?;
    let d_p = finite(quantum_relative_sub_unit(rho, sigma, p)?, "D_p")?;
    let d_1 = relative_entropy_vn(rho, sigma)?;
    let d_q = quantum_relative_q_with_tol(rho, sigma, q, tol.tol_incl)?;
    let pinsker = finite(0.5 * dist.trace_norm * dist.trace_norm, "pinsker")?;

    let upper_ok = le_within(d_1, d_q, tol.tol_bound);
    let mut chain = BoundReport::compared("chain", d_p, d_1, tol.tol_bound).with_context(c, dist);
    chain.holds &= upper_ok;
    let mut pins = BoundReport::compared("pinsker", pinsker, d_1, tol.tol_bound).with_context(c, dist);
    pins.holds &= upper_ok;
    for r in [&mut chain, &mut pins] {
        r.extra.insert("p".into(), p);
        r.extra.insert("D_q".into(), d_q.to_f64());
    }
    Ok(vec![chain, pins])
}

/// Which constant multiplies `n θ^{n-1}` in the power-difference bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerNormMode {
    /// `θ = max(‖X‖_∞, ‖Y‖_∞)`.
    Spectral,
    /// `θ = max(‖X‖_p, ‖Y‖_p)`, valid for any submultiplicative norm.
    Submultiplicative,
}

fn matrix_power(m: &CMatrix, n: u32) -> CMatrix {
    let mut acc = m.clone();
    for _ in 1..n {
        acc = &acc * m;
    }
    acc
}

/// `‖Xⁿ - Yⁿ‖_p ≤ n θ^{n-1} ‖X - Y‖_p`.
pub fn power_diff_bound(
    x: &HermitianOperator,
    y: &HermitianOperator,
    n: u32,
    p: SchattenIndex,
    mode: PowerNormMode,
    tol: &Tolerances,
) -> Result<BoundReport> {
    if n == 0 {
        return Err(Error::DomainViolation("power n must be at least 1".into()));
    }
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x.dim(), y.dim()));
    }
    let (xm, ym) = (x.matrix(), y.matrix());
    let lhs = schatten_norm(&(matrix_power(xm, n) - matrix_power(ym, n)), p);
    let diff = schatten_norm(&(xm - ym), p);
    let theta = match mode {
        PowerNormMode::Spectral => x.spectral_norm()?.max(y.spectral_norm()?),
        PowerNormMode::Submultiplicative => schatten_norm(xm, p).max(schatten_norm(ym, p)),
    };
    let rhs = n as f64 * theta.powi(n as i32 - 1) * diff;
    let name = match mode {
        PowerNormMode::Spectral => "lemma2",
        PowerNormMode::Submultiplicative => "remark1",
    };
    let mut report = BoundReport::compared(name, finite(lhs, name)?, finite(rhs, name)?, tol.tol_bound);
    report.extra.insert("n".into(), n as f64);
    report.extra.insert("p".into(), p.value());
    report.extra.insert("theta".into(), theta);
    Ok(report)
}

/// `|tr(B^{1-s} A^s) - τ| ≤ (a₁/b₀)^s ‖A - B‖₁` for `A ≥ 0`, `B > 0`,
/// `tr A = tr B = τ`.
pub fn lemma3_bound(a: &HermitianOperator, b: &HermitianOperator, s: f64, tol: &Tolerances) -> Result<BoundReport> {
    const NAME: &str = "lemma3";
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let (tau_a, tau_b) = (a.trace(), b.trace());
    let sa = a.spectral()?;
    let sb = b.spectral()?;
    let d = a.dim();
    let reason = if !(s > 0.0 && s < 1.0) {
        Some(format!("s = {s} outside (0, 1)"))
    } else if (tau_a - tau_b).abs() > 1e-10 * tau_a.abs().max(1.0) {
        Some(format!("traces differ: {tau_a} vs {tau_b}"))
    } else if sb.min() <= zero_threshold(d, sb.max()) {
        Some("B is not strictly positive".into())
    } else if sa.min() < -zero_threshold(d, sa.max()) {
        Some("A is not positive semidefinite".into())
    } else {
        None
    };
    if let Some(reason) = reason {
        return Ok(BoundReport::vacuous(NAME, reason));
    }
    let a_s = apply_function(a, |x| x.max(0.0).powf(s), |x| x >= 0.0)?;
    let b_1s = apply_function(b, |x| x.powf(1.0 - s), |x| x > 0.0)?;
    let cross = (b_1s.matrix() * a_s.matrix()).trace().re;
    let lhs = (cross - tau_a).abs();
    let a1 = sa.max();
    let b0 = sb.min();
    let dist = a.sub(b)?.trace_norm()?;
    let rhs = (a1 / b0).powf(s) * dist;
    let mut report = BoundReport::compared(NAME, finite(lhs, NAME)?, finite(rhs, NAME)?, tol.tol_bound);
    report.extra.insert("s".into(), s);
    report.extra.insert("tau".into(), tau_a);
    report.extra.insert("a1".into(), a1);
    report.extra.insert("b0".into(), b0);
    Ok(report)
}

/// Operator inequality `A^{-r} - B^{-r} ≤ (sin rπ/π)∫ y^{-r}(y+A)^{-1}(B-A)(y+A)^{-1} dy`.
///
/// The left side comes from spectral calculus and the right from quadrature.
/// The report's `rhs` is the minimum eigenvalue of right minus left.
pub fn frechet_check(
    a: &HermitianOperator,
    b: &HermitianOperator,
    r: f64,
    rule: &QuadratureRule,
    tol: &Tolerances,
) -> Result<BoundReport> {
    const NAME: &str = "lemma1";
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let d = a.dim();
    let positive = |h: &HermitianOperator| -> Result<bool> {
        let s = h.spectral()?;
        Ok(s.min() > zero_threshold(d, s.max()))
    };
    if !(r > 0.0 && r < 1.0) {
        return Ok(BoundReport::vacuous(NAME, format!("r = {r} outside (0, 1)")));
    }
    if !positive(a)? || !positive(b)? {
        return Ok(BoundReport::vacuous(NAME, "A and B must be strictly positive"));
    }
    let neg_power = |h: &HermitianOperator| apply_function(h, |x| x.powf(-r), |x| x > 0.0);
    let lhs_op = neg_power(a)?.sub(&neg_power(b)?)?;
    let rhs_op = frechet_integral_rhs(a, &b.sub(a)?, r, rule)?;
    let gap = psd_gap(&lhs_op, &rhs_op)?;
    let allowance = tol.tol_psd + QUAD_ALLOWANCE;
    let mut report = BoundReport::compared(NAME, ExtendedReal::Finite(0.0), finite(gap, NAME)?, 0.0);
    report.holds = gap >= -allowance;
    report.extra.insert("r".into(), r);
    report.extra.insert("allowance".into(), allowance);
    Ok(report)
}
