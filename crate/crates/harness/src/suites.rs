//! Randomized verification suites behind `qtsallis verify`.
//!
//! Instance `i` of a suite draws from `stream_seed(seed ^ (suite_id << 32), i)`,
//! so results do not depend on scheduling.

use std::path::{Path, PathBuf};

use qtsallis_core::bounds::{
    frechet_check, lemma3_bound, lower_bounds, power_diff_bound, thm1_bounds, thm2_bound, thm3_bound,
    BoundReport, PowerNormMode, Thm2Variant, Thm3Variant, Tolerances,
};
use qtsallis_core::entropy::{
    classical_relative_q, overlap_weights, quantum_relative_q_operator, quantum_relative_q_with_tol,
    relative_entropy_vn, ExtendedReal, ProbVector,
};
use qtsallis_core::error::{Error as CoreError, Result as CoreResult};
use qtsallis_core::linalg::{
    apply_function, eigh, max_abs, reconstruct, schatten_norm, CMatrix, HermitianOperator, SchattenIndex,
};
use qtsallis_core::quadrature::{
    frac_power_operator, frac_power_scalar, resolvent_pair_closed_form, resolvent_pair_integral, IntegralForm,
    QuadratureRule,
};
use qtsallis_core::rng::{ginibre, haar_unitary, random_hermitian, seeded, stream_seed, StateRng};
use qtsallis_core::states::{mix, partial_trace, tensor, DensityMatrix, Keep};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::SweepConfig;
use crate::error::{HarnessError, Result};
use crate::sample::{
    full_rank_state, mixed_pair, open_closed, pd_operator, pick_dim, sample_q, sigma_family,
};

/// Counterexample files written per failing suite.
const MAX_COUNTEREXAMPLES: usize = 5;
/// Agreement tolerance for two routes to the same quantity.
const TOL_AGREE: f64 = 1e-9;
const TOL_ORACLE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub instances_run: usize,
    pub failures: usize,
    /// Smallest `(rhs - lhs)/(1 + |rhs|)` over all checks in the suite.
    pub worst_slack: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.failures == 0)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Check log for one instance.
#[derive(Default)]
pub struct Instance {
    worst: Option<f64>,
    failed: Vec<String>,
    states: Vec<(String, CMatrix)>,
    context: Map<String, Value>,
}

impl Instance {
    fn slack(&mut self, s: f64) {
        self.worst = Some(self.worst.map_or(s, |w| w.min(s)));
    }

    /// `lhs ≤ rhs` with relative tolerance `tol`.
    pub fn check(&mut self, label: &str, lhs: f64, rhs: f64, tol: f64) {
        let s = (rhs - lhs) / (1.0 + rhs.abs());
        if s.is_nan() {
            self.failed.push(format!("{label}: non-finite comparison {lhs} <= {rhs}"));
            return;
        }
        self.slack(s);
        if s < -tol {
            self.failed.push(format!("{label}: {lhs:e} > {rhs:e}"));
        }
    }

    /// `|a - b| ≤ tol · (1 + max(|a|, |b|))`.
    pub fn agree(&mut self, label: &str, a: f64, b: f64, tol: f64) {
        let err = (a - b).abs() / (1.0 + a.abs().max(b.abs()));
        self.check(label, err, tol, 0.0);
    }

    pub fn require(&mut self, label: &str, ok: bool) {
        if !ok {
            self.failed.push(label.to_string());
        }
    }

    /// A bound report generated inside its preconditions.
    pub fn bound(&mut self, r: &BoundReport) {
        if r.vacuous {
            self.failed.push(format!("{}: unexpectedly vacuous ({:?})", r.name, r.note));
            return;
        }
        if let (ExtendedReal::Finite(l), ExtendedReal::Finite(h)) = (r.lhs, r.rhs) {
            self.slack((h - l) / (1.0 + h.abs()));
        }
        if !r.holds {
            self.failed.push(format!("{}: lhs {} exceeds rhs {}", r.name, r.lhs, r.rhs));
            self.note(&r.name, r);
        }
    }

    pub fn state(&mut self, name: &str, m: &CMatrix) {
        self.states.push((name.to_string(), m.clone()));
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.context
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }
}

struct Outcome {
    index: usize,
    stream_seed: u64,
    instance: Instance,
    error: Option<String>,
}

impl Outcome {
    fn failed(&self) -> bool {
        self.error.is_some() || !self.instance.failed.is_empty()
    }
}

/// Shared settings for a verify run.
pub struct Context {
    pub config: SweepConfig,
    pub tol: Tolerances,
    pub rule: QuadratureRule,
    pub counterexample_dir: PathBuf,
}

impl Context {
    pub fn new(config: SweepConfig, counterexample_dir: PathBuf) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            tol: config.bound_tolerances(),
            rule: config.rule()?,
            config,
            counterexample_dir,
        })
    }

    /// `base` instances per 1000 configured trials, at least one.
    fn scaled(&self, base: usize) -> usize {
        (base * self.config.trials).div_ceil(1000).max(1)
    }

    fn run<F>(&self, name: &str, id: u64, count: usize, f: F) -> Result<SuiteReport>
    where
        F: Fn(&Context, &mut StateRng, &mut Instance) -> CoreResult<()> + Sync,
    {
        let outcomes: Vec<Outcome> = (0..count)
            .into_par_iter()
            .map(|index| {
                let stream_seed = stream_seed(self.config.seed ^ (id << 32), index as u64);
                let mut rng = seeded(stream_seed);
                let mut instance = Instance::default();
                let error = f(self, &mut rng, &mut instance).err().map(|e| e.to_string());
                Outcome {
                    index,
                    stream_seed,
                    instance,
                    error,
                }
            })
            .collect();

        let mut report = SuiteReport {
            name: name.to_string(),
            instances_run: count,
            failures: 0,
            worst_slack: None,
            counterexample_path: None,
        };
        for o in &outcomes {
            if let Some(s) = o.instance.worst {
                report.worst_slack = Some(report.worst_slack.map_or(s, |w: f64| w.min(s)));
            }
            if o.failed() {
                if report.failures < MAX_COUNTEREXAMPLES {
                    let dir = self.counterexample_dir.join(name);
                    write_counterexample(&dir, name, o)?;
                    report.counterexample_path = Some(dir);
                }
                report.failures += 1;
            }
        }
        Ok(report)
    }
}

fn write_counterexample(dir: &Path, suite: &str, o: &Outcome) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let stem = format!("instance_{}", o.index);
    let mut names = Vec::new();
    for (name, m) in &o.instance.states {
        let path = dir.join(format!("{stem}_{name}.json"));
        let file = qtsallis_core::states::StateFile::from_matrix(m);
        std::fs::write(&path, file.to_json()).map_err(|e| HarnessError::io(&path, e))?;
        names.push(path.file_name().map(|n| n.to_string_lossy().into_owned()));
    }
    let context = json!({
        "suite": suite,
        "instance": o.index,
        "stream_seed": o.stream_seed,
        "failed_checks": o.instance.failed,
        "error": o.error,
        "state_files": names,
        "context": o.instance.context,
    });
    let path = dir.join(format!("{stem}_context.json"));
    let text = serde_json::to_string_pretty(&context).expect("context serializes") + "\n";
    std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))
}

fn value(x: ExtendedReal, what: &'static str) -> CoreResult<f64> {
    x.value().ok_or(CoreError::NonFinite(what))
}

fn dq(rho: &DensityMatrix, sigma: &DensityMatrix, q: f64, tol: &Tolerances) -> CoreResult<f64> {
    value(quantum_relative_q_with_tol(rho, sigma, q, tol.tol_incl)?, "D_q")
}

fn pair_states(inst: &mut Instance, rho: &DensityMatrix, sigma: &DensityMatrix) {
    inst.state("rho", rho.matrix());
    inst.state("sigma", sigma.matrix());
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

/// Closed-form values for the diagonal qubit pair and scalar integrals.
fn fixtures(ctx: &Context, _: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let tol = &ctx.tol;
    let rho = DensityMatrix::from_diagonal(&[0.5, 0.5])?;
    let sigma = DensityMatrix::from_diagonal(&[0.75, 0.25])?;
    let exact = |inst: &mut Instance, label: &str, got: f64, want: f64| {
        inst.check(label, (got - want).abs(), 1e-9, 0.0)
    };
    exact(inst, "D_2", dq(&rho, &sigma, 2.0, tol)?, 1.0 / 3.0);
    exact(inst, "D_1", value(relative_entropy_vn(&rho, &sigma)?, "D_1")?, 0.5 * (4.0f64 / 3.0).ln());
    let delta = rho.op().sub(sigma.op())?;
    exact(inst, "trace distance", delta.trace_norm()?, 0.5);
    exact(inst, "spectral distance", delta.spectral_norm()?, 0.25);
    for r in thm1_bounds(&rho, &sigma, 2.0, tol)? {
        exact(inst, &r.name, value(r.rhs, "thm1")?, 2.0);
    }
    let t2 = thm2_bound(&rho, &sigma, 2.0, Thm2Variant::General, tol)?;
    exact(inst, "thm2", value(t2.rhs, "thm2")?, 2.0);
    let t3 = thm3_bound(&rho, &sigma, 2.0, Thm3Variant::General, tol)?;
    exact(inst, "thm3", value(t3.rhs, "thm3")?, 1.5);
    let t3q2 = thm3_bound(&rho, &sigma, 2.0, Thm3Variant::Q2, tol)?;
    exact(inst, "thm3 q2", value(t3q2.rhs, "thm3q2")?, 1.0);
    let lower = lower_bounds(&rho, &sigma, 2.0, 0.5, tol)?;
    exact(inst, "pinsker lhs", value(lower[1].lhs, "pinsker")?, 0.125);
    let rr = tensor(&rho, &rho)?;
    let ss = tensor(&sigma, &sigma)?;
    exact(inst, "pseudoadditive", dq(&rr, &ss, 2.0, tol)?, 7.0 / 9.0);

    exact(inst, "4^0.5", frac_power_scalar(4.0, 0.5, &ctx.rule)?, 2.0);
    exact(inst, "8^(1/3)", frac_power_scalar(8.0, 1.0 / 3.0, &ctx.rule)?, 2.0);
    for &(a0, b0) in &[(0.2, 0.2), (0.2, 0.2000001), (0.5, 0.25), (1e-4, 0.9), (0.9, 1e-4)] {
        for &r in &[0.1, 0.5, 0.9] {
            let closed = resolvent_pair_closed_form(a0, b0, r)?;
            let quad = resolvent_pair_integral(a0, b0, r, &ctx.rule)?;
            inst.check("resolvent pair", (closed - quad).abs(), 1e-10 * closed.max(1.0), 0.0);
            inst.check("resolvent pair bound", closed, a0.min(b0).powf(-1.0 - r), 1e-12);
        }
    }
    for r in [t2, t3, t3q2] {
        inst.bound(&r);
    }
    Ok(())
}

fn schatten_choice(rng: &mut StateRng) -> (SchattenIndex, SchattenIndex) {
    match rng.random_range(0..4) {
        0 => (SchattenIndex::ONE, SchattenIndex::INF),
        1 => (SchattenIndex::TWO, SchattenIndex::TWO),
        2 => (SchattenIndex::INF, SchattenIndex::ONE),
        _ => {
            let p = rng.random_range(1.01..8.0);
            (SchattenIndex::Finite(p), SchattenIndex::Finite(p / (p - 1.0)))
        }
    }
}

fn linalg_norms(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let d = pick_dim(&ctx.config.dims, rng);
    let x = ginibre(d, d, rng);
    let y = ginibre(d, d, rng);
    let (p, p_dual) = schatten_choice(rng);
    let tol = 1e-10;
    let holder = schatten_norm(&x, p) * schatten_norm(&y, p_dual);
    inst.check("trace holder", (&x * &y).trace().norm(), holder, tol);
    inst.check("trace bound", x.trace().norm(), schatten_norm(&x, SchattenIndex::ONE), tol);
    inst.check(
        "submultiplicative",
        schatten_norm(&(&x * &y), p),
        schatten_norm(&x, p) * schatten_norm(&y, p),
        tol,
    );
    let lo = rng.random_range(1.0..4.0);
    let hi = lo + rng.random_range(0.0..4.0);
    let (nlo, nhi) = (schatten_norm(&x, SchattenIndex::Finite(lo)), schatten_norm(&x, SchattenIndex::Finite(hi)));
    inst.check("norm monotone in p", nhi, nlo, tol);
    inst.check("spectral norm smallest", schatten_norm(&x, SchattenIndex::INF), nhi, tol);

    let rho = full_rank_state(d, rng)?;
    let sigma = full_rank_state(d, rng)?;
    let delta = rho.op().sub(sigma.op())?;
    inst.check("traceless half", delta.spectral_norm()?, 0.5 * delta.trace_norm()?, tol);
    inst.state("x", &x);
    inst.state("y", &y);
    Ok(())
}

fn eigh_reconstruction(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let d = pick_dim(&ctx.config.dims, rng);
    let scale = 10f64.powf(rng.random_range(-3.0..3.0));
    let m = random_hermitian(d, rng).scale(scale);
    let h = HermitianOperator::new(m.clone())?;
    let (values, vectors) = eigh(&h)?;
    inst.require("ascending eigenvalues", values.windows(2).all(|w| w[0] <= w[1]));
    let norm = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    inst.check("reconstruction", max_abs(&(reconstruct(&values, &vectors) - &m)), 1e-12 * norm.max(1.0), 0.0);
    let gram = vectors.adjoint() * &vectors - CMatrix::identity(d, d);
    inst.check("orthonormal", max_abs(&gram), 1e-12, 0.0);
    inst.state("h", &m);
    Ok(())
}

fn quadrature_oracle(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let d = pick_dim(&ctx.config.dims, rng);
    let cond = 10f64.powf(rng.random_range(0.0..=6.0));
    let scale = 10f64.powf(rng.random_range(-2.0..=2.0));
    let a = pd_operator(d, cond, scale, rng)?;
    inst.state("a", a.matrix());
    inst.note("condition", cond);
    for &r in &[0.1, 0.5, 0.9] {
        let exact = apply_function(&a, |x| x.powf(r), |x| x > 0.0)?;
        let norm = exact.spectral_norm()?.max(1.0);
        for form in [IntegralForm::First, IntegralForm::Second] {
            let approx = frac_power_operator(&a, r, &ctx.rule, form)?;
            let err = max_abs(&(approx.matrix() - exact.matrix())) / norm;
            inst.check(&format!("A^{r} {form:?}"), err, TOL_ORACLE, 0.0);
        }
    }
    Ok(())
}

fn entropy_positivity(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let d = pick_dim(&ctx.config.dims, rng);
    let (rho, sigma) = mixed_pair(d, rng)?;
    pair_states(inst, &rho, &sigma);
    let q = open_closed(1.0, 6.0, rng);
    inst.note("q", q);
    // Rounding in 1 - tr is divided by q - 1.
    let cancellation = 4.0 * d as f64 * f64::EPSILON / (q - 1.0);
    inst.check("D_q >= 0", -dq(&rho, &sigma, q, &ctx.tol)?, 1e-12 + cancellation, 0.0);
    let same = dq(&rho, &rho, q, &ctx.tol)?.abs();
    // Eigenvector overlaps of order ε² are amplified by a₀^{1-q}.
    let spread = (rho.max_eigenvalue() / rho.min_nonzero_eigenvalue()).powf(q - 1.0);
    inst.check("D_q(rho||rho) = 0", same, 1e-12 + cancellation + 1e-29 * spread, 0.0);
    let distinct = rho.op().sub(sigma.op())?.trace_norm()? > 1e-6;
    if distinct {
        inst.require("D_q > 0 for distinct states", dq(&rho, &sigma, q, &ctx.tol)? > 0.0);
    }
    Ok(())
}

fn entropy_pseudoadditivity(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let (d1, d2) = (rng.random_range(2..=3), rng.random_range(2..=3));
    let (r1, s1) = mixed_pair(d1, rng)?;
    let (r2, s2) = mixed_pair(d2, rng)?;
    let q = open_closed(1.0, 4.0, rng);
    inst.note("q", q);
    for (n, s) in [("rho1", &r1), ("sigma1", &s1), ("rho2", &r2), ("sigma2", &s2)] {
        inst.state(n, s.matrix());
    }
    let (a, b) = (dq(&r1, &s1, q, &ctx.tol)?, dq(&r2, &s2, q, &ctx.tol)?);
    let joint = dq(&tensor(&r1, &r2)?, &tensor(&s1, &s2)?, q, &ctx.tol)?;
    inst.agree("pseudoadditive", joint, a + b + (q - 1.0) * a * b, TOL_AGREE);
    Ok(())
}

fn entropy_joint_convexity(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let d = pick_dim(&ctx.config.dims, rng);
    let (r1, s1) = mixed_pair(d, rng)?;
    let r2 = full_rank_state(d, rng)?;
    let s2 = full_rank_state(d, rng)?;
    let q = open_closed(1.0, 2.0, rng);
    let lambda = rng.random::<f64>();
    inst.note("q", q);
    inst.note("lambda", lambda);
    for (n, s) in [("rho1", &r1), ("sigma1", &s1), ("rho2", &r2), ("sigma2", &s2)] {
        inst.state(n, s.matrix());
    }
    let lhs = dq(&mix(lambda, &r1, &r2)?, &mix(lambda, &s1, &s2)?, q, &ctx.tol)?;
    let rhs = lambda * dq(&r1, &s1, q, &ctx.tol)? + (1.0 - lambda) * dq(&r2, &s2, q, &ctx.tol)?;
    inst.check("joint convexity", lhs, rhs, ctx.tol.tol_bound);
    Ok(())
}

fn entropy_monotonicity(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let (da, db) = (rng.random_range(2..=3), rng.random_range(2..=3));
    let (rho, sigma) = mixed_pair(da * db, rng)?;
    pair_states(inst, &rho, &sigma);
    let q = open_closed(1.0, 2.0, rng);
    inst.note("q", q);
    inst.note("dims", (da, db));
    let whole = dq(&rho, &sigma, q, &ctx.tol)?;
    for keep in [Keep::A, Keep::B] {
        let part = dq(
            &partial_trace(&rho, da, db, keep)?,
            &partial_trace(&sigma, da, db, keep)?,
            q,
            &ctx.tol,
        )?;
        inst.check(&format!("partial trace {keep:?}"), part, whole, ctx.tol.tol_bound);
    }
    Ok(())
}

fn entropy_unitary_invariance(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let d = pick_dim(&ctx.config.dims, rng);
    let (rho, sigma) = mixed_pair(d, rng)?;
    pair_states(inst, &rho, &sigma);
    let q = open_closed(1.0, 6.0, rng);
    inst.note("q", q);
    let u = haar_unitary(d, rng);
    let a = dq(&rho, &sigma, q, &ctx.tol)?;
    let b = dq(&rho.conjugate(&u)?, &sigma.conjugate(&u)?, q, &ctx.tol)?;
    inst.agree("unitary invariance", a, b, TOL_AGREE);
    Ok(())
}

fn entropy_classical_reduction(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let d = pick_dim(&ctx.config.dims, rng);
    let (rho, sigma) = mixed_pair(d, rng)?;
    let q = open_closed(1.0, 6.0, rng);
    inst.note("q", q);
    // Diagonal states built from the two spectra in a random relative order.
    let a = rho.spectrum().to_vec();
    let mut b = sigma.spectrum().to_vec();
    b.rotate_left(rng.random_range(0..d));
    let rho_c = DensityMatrix::from_diagonal(&a)?;
    let sigma_c = DensityMatrix::from_diagonal(&b)?;
    pair_states(inst, &rho_c, &sigma_c);
    let classical = classical_relative_q(&ProbVector::new(a)?, &ProbVector::new(b)?, q)?;
    let quantum = quantum_relative_q_with_tol(&rho_c, &sigma_c, q, ctx.tol.tol_incl)?;
    inst.require("same finiteness", classical.is_finite() == quantum.is_finite());
    if let (Some(c), Some(v)) = (classical.value(), quantum.value()) {
        inst.agree("classical reduction", v, c, TOL_AGREE);
    }
    Ok(())
}

/// `0 ≤ D_q - D₁ ≤ ((q-1)/2) Σ W a L² e^{(q-1) max L⁺}` with `L = ln(a/b)`.
fn entropy_q_to_one(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let d = pick_dim(&ctx.config.dims, rng);
    let (rho, sigma) = mixed_pair(d, rng)?;
    pair_states(inst, &rho, &sigma);
    let w = overlap_weights(&rho, &sigma)?;
    let (mut second, mut lmax, mut log_size) = (0.0, 0.0f64, 0.0f64);
    for (i, &a) in rho.spectrum().iter().enumerate() {
        for (j, &b) in sigma.spectrum().iter().enumerate() {
            if a > 0.0 && b > 0.0 {
                let l = (a / b).ln();
                second += w[(i, j)] * a * l * l;
                lmax = lmax.max(l);
                log_size = log_size.max(a.ln().abs() + b.ln().abs());
            }
        }
    }
    let d1 = value(relative_entropy_vn(&rho, &sigma)?, "D_1")?;
    for e in 2..=5 {
        let r = 10f64.powi(-e);
        let gap = dq(&rho, &sigma, 1.0 + r, &ctx.tol)? - d1;
        // Rounding in 1 - tr(ρ^q σ^{1-q}) is divided by q - 1; each term's
        // exponent q ln a + (1-q) ln b carries error of order ε·|ln|.
        let floor = d as f64 * 1e-14 * (1.0 + log_size) / r * (1.0 + d1) + 1e-12;
        inst.check(&format!("D_q >= D_1 at r=1e-{e}"), -gap, floor, 0.0);
        inst.check(
            &format!("D_q - D_1 second order at r=1e-{e}"),
            gap,
            0.5 * r * second * (r * lmax).exp() + floor,
            0.0,
        );
    }
    Ok(())
}

fn entropy_route_agreement(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let d = pick_dim(&ctx.config.dims, rng);
    let (rho, sigma) = mixed_pair(d, rng)?;
    pair_states(inst, &rho, &sigma);
    let q = open_closed(1.0, 3.0, rng);
    inst.note("q", q);
    let a = dq(&rho, &sigma, q, &ctx.tol)?;
    let b = value(quantum_relative_q_operator(&rho, &sigma, q)?, "operator route")?;
    inst.agree("spectral vs operator route", a, b, TOL_AGREE);
    Ok(())
}

fn thm1_suite(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let d = pick_dim(&ctx.config.dims, rng);
    let rho = full_rank_state(d, rng)?;
    let sigma = full_rank_state(d, rng)?;
    pair_states(inst, &rho, &sigma);
    let q = sample_q(1.0, 2.0, rng);
    inst.note("q", q);
    let reps = thm1_bounds(&rho, &sigma, q, &ctx.tol)?;
    for r in &reps {
        inst.bound(r);
    }
    if let (Some(r1), Some(r2)) = (reps[0].rhs_value(), reps[1].rhs_value()) {
        inst.check("rhs1 <= rhs2", r1, r2, 1e-12);
    }
    Ok(())
}

fn thm2_suite(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let d = pick_dim(&ctx.config.dims, rng);
    let (rho, sigma) = mixed_pair(d, rng)?;
    pair_states(inst, &rho, &sigma);
    let q = sample_q(1.0, 2.0, rng);
    inst.note("q", q);
    for v in [Thm2Variant::General, Thm2Variant::Traceless] {
        inst.bound(&thm2_bound(&rho, &sigma, q, v, &ctx.tol)?);
    }
    Ok(())
}

fn thm3_suite(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let d = pick_dim(&ctx.config.dims, rng);
    let (rho, sigma) = mixed_pair(d, rng)?;
    pair_states(inst, &rho, &sigma);
    let q = if rng.random_bool(0.5) {
        sample_q(1.0, 2.0, rng)
    } else {
        sample_q(2.0, 6.0, rng)
    };
    inst.note("q", q);
    inst.bound(&thm3_bound(&rho, &sigma, q, Thm3Variant::General, &ctx.tol)?);
    if q <= 2.0 {
        inst.bound(&thm3_bound(&rho, &sigma, q, Thm3Variant::Q2, &ctx.tol)?);
    }
    Ok(())
}

fn lower_bound_suite(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let d = pick_dim(&ctx.config.dims, rng);
    let (rho, sigma) = mixed_pair(d, rng)?;
    pair_states(inst, &rho, &sigma);
    let q = sample_q(1.0, 2.0, rng);
    let p = rng.random_range(0.0..1.0);
    inst.note("q", q);
    inst.note("p", p);
    for r in lower_bounds(&rho, &sigma, q, p, &ctx.tol)? {
        inst.bound(&r);
    }
    Ok(())
}

fn lemma1_suite(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let d = pick_dim(&ctx.config.dims, rng);
    let a = pd_operator(d, 10f64.powf(rng.random_range(0.0..3.0)), 1.0, rng)?;
    let b = pd_operator(d, 10f64.powf(rng.random_range(0.0..3.0)), 1.0, rng)?;
    inst.state("a", a.matrix());
    inst.state("b", b.matrix());
    for &r in &[0.1, 0.5, 0.9] {
        let rep = frechet_check(&a, &b, r, &ctx.rule, &ctx.tol)?;
        inst.bound(&rep);
        let gap = value(rep.rhs, "psd gap")?;
        inst.check(&format!("psd gap r={r} >= -1e-7"), 0.0, gap + 1e-7, 0.0);
    }
    Ok(())
}

fn lemma2_suite(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let d = pick_dim(&ctx.config.dims, rng);
    let x = HermitianOperator::new(random_hermitian(d, rng))?;
    let y = if rng.random_bool(0.5) {
        let e = HermitianOperator::new(random_hermitian(d, rng))?;
        x.add(&e.scaled(10f64.powf(rng.random_range(-6.0..0.0))))?
    } else {
        HermitianOperator::new(random_hermitian(d, rng))?
    };
    inst.state("x", x.matrix());
    inst.state("y", y.matrix());
    for n in 1..=6 {
        for p in [SchattenIndex::ONE, SchattenIndex::TWO, SchattenIndex::INF] {
            for mode in [PowerNormMode::Spectral, PowerNormMode::Submultiplicative] {
                inst.bound(&power_diff_bound(&x, &y, n, p, mode, &ctx.tol)?);
            }
        }
    }
    Ok(())
}

fn lemma3_suite(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let d = pick_dim(&ctx.config.dims, rng);
    let (rho, _) = mixed_pair(d, rng)?;
    let sigma = full_rank_state(d, rng)?;
    let tau = 10f64.powf(rng.random_range(-1.0..1.0));
    let a = rho.op().scaled(tau);
    let b = sigma.op().scaled(tau);
    inst.state("a", a.matrix());
    inst.state("b", b.matrix());
    inst.note("tau", tau);
    for &s in &[0.25, 0.5, 0.75] {
        inst.bound(&lemma3_bound(&a, &b, s, &ctx.tol)?);
    }
    Ok(())
}

const ENVELOPE_DIM: usize = 4;

/// On `σ(b₀)` with a fixed random ρ: `D_q ≤ C b₀^{1-q}` and
/// `D_q b₀^{q-1} ≤ C` at every grid point.
fn divergence_envelope(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let rho = full_rank_state(ENVELOPE_DIM, rng)?;
    inst.state("rho", rho.matrix());
    for &q in &ctx.config.q_grid {
        for &b0 in &ctx.config.b0_grid {
            if b0 > 1.0 / ENVELOPE_DIM as f64 {
                continue;
            }
            let sigma = sigma_family(ENVELOPE_DIM, b0)?;
            let r = thm3_bound(&rho, &sigma, q, Thm3Variant::General, &ctx.tol)?;
            inst.bound(&r);
            let (Some(c), Some(dist)) = (r.constants, r.distances) else {
                continue;
            };
            let constant = qtsallis_core::bounds::ceiling_factor(q) * c.lambda1.powf(q - 1.0) * dist.trace_norm;
            let ratio = value(r.lhs, "D_q")? * b0.powf(q - 1.0);
            inst.check(&format!("ratio q={q} b0={b0:e}"), ratio, constant, ctx.tol.tol_bound);
        }
    }
    Ok(())
}

/// For `b₀ ≤ 1e-3` at `q = 2` the `b₀^{1-q}` bound is below the `b₀^{-q}` one.
fn tightness(ctx: &Context, rng: &mut StateRng, inst: &mut Instance) -> CoreResult<()> {
    let rho = full_rank_state(ENVELOPE_DIM, rng)?;
    inst.state("rho", rho.matrix());
    for &b0 in ctx.config.b0_grid.iter().filter(|&&b| b <= 1e-3) {
        let sigma = sigma_family(ENVELOPE_DIM, b0)?;
        let t3 = thm3_bound(&rho, &sigma, 2.0, Thm3Variant::Q2, &ctx.tol)?;
        let t2 = thm2_bound(&rho, &sigma, 2.0, Thm2Variant::General, &ctx.tol)?;
        let (a, b) = (value(t3.rhs, "thm3q2")?, value(t2.rhs, "thm2")?);
        inst.require(&format!("b0={b0:e}: {a:e} < {b:e}"), a < b);
        inst.check(&format!("b0={b0:e}"), a, b, 0.0);
    }
    Ok(())
}

type SuiteFn = fn(&Context, &mut StateRng, &mut Instance) -> CoreResult<()>;

/// `(name, id, base count per 1000 trials, body)`; a zero count means a
/// single unscaled instance.
pub const SUITES: &[(&str, u64, usize, SuiteFn)] = &[
    ("fixtures", 1, 0, fixtures),
    ("linalg_norms", 2, 200, linalg_norms),
    ("eigh_reconstruction", 3, 200, eigh_reconstruction),
    ("quadrature_oracle", 4, 200, quadrature_oracle),
    ("entropy_positivity", 5, 200, entropy_positivity),
    ("entropy_pseudoadditivity", 6, 200, entropy_pseudoadditivity),
    ("entropy_joint_convexity", 7, 200, entropy_joint_convexity),
    ("entropy_monotonicity", 8, 200, entropy_monotonicity),
    ("entropy_unitary_invariance", 9, 200, entropy_unitary_invariance),
    ("entropy_classical_reduction", 10, 200, entropy_classical_reduction),
    ("entropy_q_to_one", 11, 200, entropy_q_to_one),
    ("entropy_route_agreement", 12, 200, entropy_route_agreement),
    ("thm1", 13, 1000, thm1_suite),
    ("thm2", 14, 1000, thm2_suite),
    ("thm3", 15, 1000, thm3_suite),
    ("lower_bounds", 16, 1000, lower_bound_suite),
    ("lemma1", 17, 200, lemma1_suite),
    ("lemma2", 18, 500, lemma2_suite),
    ("lemma3", 19, 500, lemma3_suite),
    ("divergence_envelope", 20, 50, divergence_envelope),
    ("tightness", 21, 50, tightness),
];

/// Runs the named suite.
pub fn run_suite(ctx: &Context, name: &str) -> Result<SuiteReport> {
    let &(name, id, base, body) = SUITES
        .iter()
        .find(|s| s.0 == name)
        .ok_or_else(|| HarnessError::Config(format!("unknown suite {name}")))?;
    let count = if base == 0 { 1 } else { ctx.scaled(base) };
    ctx.run(name, id, count, body)
}

/// Runs every suite in order.
pub fn verify(ctx: &Context) -> Result<VerifyReport> {
    let suites = SUITES
        .iter()
        .map(|s| run_suite(ctx, s.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport {
        seed: ctx.config.seed,
        trials: ctx.config.trials,
        suites,
    })
}
