//! `σ(b₀)` family sweeps written as CSV.

use std::io::Write;

use qtsallis_core::bounds::{
    lower_bounds, thm1_bounds, thm2_bound, thm3_bound, BoundReport, Distances, Thm2Variant, Thm3Variant,
};
use qtsallis_core::entropy::{quantum_relative_q_with_tol, relative_entropy_vn};
use qtsallis_core::error::Error as CoreError;
use qtsallis_core::rng::{seeded, stream_seed};
use qtsallis_core::states::DensityMatrix;
use rayon::prelude::*;

use crate::config::SweepConfig;
use crate::error::{HarnessError, Result};
use crate::sample::{full_rank_state, sigma_family};

pub const COLUMNS: [&str; 19] = [
    "d", "q", "b0", "trial", "seed", "Dq", "D1", "dist_tr", "dist_sp", "thm1_rhs1", "thm1_rhs2", "thm1_rhs3",
    "thm2_rhs", "thm2tl_rhs", "thm3_rhs", "thm3q2_rhs", "pinsker_lhs", "ratio_dq_b0", "vacuous",
];

/// Order parameter `p` of the lower-bound chain recorded in sweeps.
const SWEEP_P: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub d: usize,
    pub q: f64,
    pub b0: f64,
    pub trial: usize,
    pub seed: u64,
    pub dq: f64,
    pub d1: f64,
    pub dist_tr: f64,
    pub dist_sp: f64,
    pub thm1_rhs: [Option<f64>; 3],
    pub thm2_rhs: Option<f64>,
    pub thm2tl_rhs: Option<f64>,
    pub thm3_rhs: Option<f64>,
    pub thm3q2_rhs: Option<f64>,
    pub pinsker_lhs: Option<f64>,
    pub ratio_dq_b0: f64,
    /// Some bound was outside its hypotheses.
    pub vacuous: bool,
    /// Bounds that failed to hold.
    pub violations: Vec<String>,
}

/// Shortest round-trip text, in exponent form outside `[1e-4, 1e15)`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 || (x.abs() >= 1e-4 && x.abs() < 1e15) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), fmt_num)
}

impl SweepRow {
    pub fn record(&self) -> Vec<String> {
        let mut r = vec![
            self.d.to_string(),
            fmt_num(self.q),
            fmt_num(self.b0),
            self.trial.to_string(),
            self.seed.to_string(),
            fmt_num(self.dq),
            fmt_num(self.d1),
            fmt_num(self.dist_tr),
            fmt_num(self.dist_sp),
        ];
        r.extend(self.thm1_rhs.iter().map(|&v| fmt_opt(v)));
        r.extend(
            [self.thm2_rhs, self.thm2tl_rhs, self.thm3_rhs, self.thm3q2_rhs, self.pinsker_lhs]
                .into_iter()
                .map(fmt_opt),
        );
        r.push(fmt_num(self.ratio_dq_b0));
        r.push(u8::from(self.vacuous).to_string());
        r
    }
}

/// Stream seed of the ρ drawn for `(d, trial)`; shared across the q and b₀ grids.
pub fn row_seed(root: u64, d: usize, trial: usize) -> u64 {
    stream_seed(root ^ ((d as u64) << 48), trial as u64)
}

fn finite(x: qtsallis_core::entropy::ExtendedReal, what: &'static str) -> Result<f64> {
    x.value().ok_or(HarnessError::Core(CoreError::NonFinite(what)))
}

/// Evaluates one `(ρ, σ(b₀), q)` point.
pub fn evaluate_point(
    config: &SweepConfig,
    rho: &DensityMatrix,
    q: f64,
    b0: f64,
    trial: usize,
    seed: u64,
) -> Result<SweepRow> {
    let d = rho.dim();
    let tol = config.bound_tolerances();
    let sigma = sigma_family(d, b0)?;
    let dq = finite(quantum_relative_q_with_tol(rho, &sigma, q, tol.tol_incl)?, "D_q")?;
    let d1 = finite(relative_entropy_vn(rho, &sigma)?, "D_1")?;
    let dist = Distances::of(rho, &sigma)?;

    let mut reports: Vec<BoundReport> = thm1_bounds(rho, &sigma, q, &tol)?;
    reports.push(thm2_bound(rho, &sigma, q, Thm2Variant::General, &tol)?);
    reports.push(thm2_bound(rho, &sigma, q, Thm2Variant::Traceless, &tol)?);
    reports.push(thm3_bound(rho, &sigma, q, Thm3Variant::General, &tol)?);
    reports.push(thm3_bound(rho, &sigma, q, Thm3Variant::Q2, &tol)?);
    let lower = lower_bounds(rho, &sigma, q, SWEEP_P, &tol)?;
    let pinsker = &lower[1];
    let rhs = |i: usize| reports[i].rhs_value();

    let vacuous = reports.iter().chain(lower.iter()).any(|r| r.vacuous);
    let violations = reports
        .iter()
        .chain(lower.iter())
        .filter(|r| !r.holds)
        .map(|r| r.name.clone())
        .collect();
    Ok(SweepRow {
        d,
        q,
        b0,
        trial,
        seed,
        dq,
        d1,
        dist_tr: dist.trace_norm,
        dist_sp: dist.spectral_norm,
        thm1_rhs: [rhs(0), rhs(1), rhs(2)],
        thm2_rhs: rhs(3),
        thm2tl_rhs: rhs(4),
        thm3_rhs: rhs(5),
        thm3q2_rhs: rhs(6),
        pinsker_lhs: if pinsker.vacuous { None } else { pinsker.lhs.value() },
        ratio_dq_b0: dq * b0.powf(q - 1.0),
        vacuous,
        violations,
    })
}

/// One row per `(d, q, b₀, trial)` in that nesting order. A fixed ρ replaces
/// the random draw and restricts the sweep to its dimension.
pub fn run_sweep(config: &SweepConfig, fixed_rho: Option<&DensityMatrix>) -> Result<Vec<SweepRow>> {
    config.validate()?;
    if let Some(rho) = fixed_rho {
        if !config.dims.contains(&rho.dim()) {
            return Err(HarnessError::Config(format!(
                "fixed state has dimension {} not in dims {:?}",
                rho.dim(),
                config.dims
            )));
        }
    }
    let mut points = Vec::new();
    for &d in &config.dims {
        if fixed_rho.is_some_and(|r| r.dim() != d) {
            continue;
        }
        for &q in &config.q_grid {
            for &b0 in &config.b0_grid {
                for trial in 0..config.trials {
                    points.push((d, q, b0, trial));
                }
            }
        }
    }
    points
        .into_par_iter()
        .map(|(d, q, b0, trial)| {
            let seed = row_seed(config.seed, d, trial);
            let rho = match fixed_rho {
                Some(r) => r.clone(),
                None => full_rank_state(d, &mut seeded(seed))?,
            };
            evaluate_point(config, &rho, q, b0, trial, seed)
        })
        .collect()
}

/// CSV text with `#` comment lines carrying the config and root seed.
pub fn write_csv<W: Write>(config: &SweepConfig, rows: &[SweepRow], out: W) -> Result<()> {
    let io = |e: std::io::Error| HarnessError::io("<sweep output>", e);
    let mut out = out;
    writeln!(out, "# qtsallis sweep").map_err(io)?;
    writeln!(out, "# config: {}", config.to_json_line()).map_err(io)?;
    writeln!(out, "# seed: {}", config.seed).map_err(io)?;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| HarnessError::io("<sweep output>", std::io::Error::other(e));
    w.write_record(COLUMNS).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.record()).map_err(csv_err)?;
    }
    w.flush().map_err(io)
}

pub fn to_csv_string(config: &SweepConfig, rows: &[SweepRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(config, rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}
