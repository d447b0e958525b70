//! Single-pair evaluation and state generation.

use std::path::Path;

use qtsallis_core::bounds::{
    lower_bounds, thm1_bounds, thm2_bound, thm3_bound, BoundReport, Distances, Thm2Variant, Thm3Variant,
    Tolerances,
};
use qtsallis_core::entropy::{quantum_relative_q_with_tol, relative_entropy_vn};
use qtsallis_core::rng::seeded;
use qtsallis_core::states::{kernel_included, sample_density, DensityMatrix, SpectralSummary, StateFile};
use serde_json::{json, Value};

use crate::error::{HarnessError, Result};

/// Order parameter of the lower-bound chain reported by `eval`.
pub const EVAL_P: f64 = 0.5;

pub fn load_state(path: &Path) -> Result<DensityMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let file = StateFile::from_json(&text).map_err(|e| HarnessError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    file.to_density().map_err(|source| HarnessError::InvalidState {
        path: path.to_path_buf(),
        source,
    })
}

fn rhs(r: &BoundReport) -> Value {
    r.rhs_value().map_or(Value::Null, Value::from)
}

/// All bounds at one q, with the flat rhs fields alongside the full reports.
pub fn evaluate_q(rho: &DensityMatrix, sigma: &DensityMatrix, q: f64, tol: &Tolerances) -> Result<Value> {
    let dq = quantum_relative_q_with_tol(rho, sigma, q, tol.tol_incl)?;
    let mut reports = thm1_bounds(rho, sigma, q, tol)?;
    reports.push(thm2_bound(rho, sigma, q, Thm2Variant::General, tol)?);
    reports.push(thm2_bound(rho, sigma, q, Thm2Variant::Traceless, tol)?);
    reports.push(thm3_bound(rho, sigma, q, Thm3Variant::General, tol)?);
    reports.push(thm3_bound(rho, sigma, q, Thm3Variant::Q2, tol)?);
    let lower = lower_bounds(rho, sigma, q, EVAL_P, tol)?;
    let pinsker_lhs = if lower[1].vacuous { Value::Null } else { json!(lower[1].lhs) };
    reports.extend(lower);
    let holds = reports.iter().all(|r| r.holds);
    Ok(json!({
        "q": q,
        "D_q": dq,
        "thm1_rhs1": rhs(&reports[0]),
        "thm1_rhs2": rhs(&reports[1]),
        "thm1_rhs3": rhs(&reports[2]),
        "thm2_rhs": rhs(&reports[3]),
        "thm2tl_rhs": rhs(&reports[4]),
        "thm3_rhs": rhs(&reports[5]),
        "thm3_q2_rhs": rhs(&reports[6]),
        "pinsker_lhs": pinsker_lhs,
        "holds": holds,
        "reports": reports,
    }))
}

/// The `eval` report for a pair over a list of q values.
pub fn evaluate(rho: &DensityMatrix, sigma: &DensityMatrix, qs: &[f64], tol: &Tolerances) -> Result<Value> {
    if rho.dim() != sigma.dim() {
        return Err(HarnessError::Config(format!(
            "state dimensions differ: {} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    if qs.is_empty() {
        return Err(HarnessError::Config("no q values given".into()));
    }
    let results = qs
        .iter()
        .map(|&q| {
            if q > 1.0 && q <= qtsallis_core::entropy::Q_MAX {
                evaluate_q(rho, sigma, q, tol)
            } else {
                Err(HarnessError::Config(format!("q = {q} outside (1, {}]", qtsallis_core::entropy::Q_MAX)))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let holds = results.iter().all(|r| r["holds"] == Value::Bool(true));
    Ok(json!({
        "dim": rho.dim(),
        "kernel_included": kernel_included(sigma, rho, tol.tol_incl)?,
        "D_1": relative_entropy_vn(rho, sigma)?,
        "spectral_summary": SpectralSummary::of(rho, sigma),
        "distances": Distances::of(rho, sigma)?,
        "holds": holds,
        "results": results,
    }))
}

/// A random state of the given rank, deterministic in `seed`.
pub fn generate(d: usize, rank: usize, seed: u64) -> Result<StateFile> {
    if d == 0 || rank == 0 || rank > d {
        return Err(HarnessError::Config(format!("need 1 <= rank <= d, got rank {rank}, d {d}")));
    }
    Ok(sample_density(d, rank, &mut seeded(seed))?.to_state_file())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_pair() {
        let rho = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        let sigma = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        let v = evaluate(&rho, &sigma, &[2.0], &Tolerances::default()).unwrap();
        let r = &v["results"][0];
        assert!((r["D_q"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((r["thm3_q2_rhs"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r["holds"], Value::Bool(true));
    }

    #[test]
    fn unsupported_pair_is_infinite() {
        let rho = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        let sigma = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        let v = evaluate(&rho, &sigma, &[1.5], &Tolerances::default()).unwrap();
        let r = &v["results"][0];
        assert_eq!(r["D_q"], json!("inf"));
        assert_eq!(v["D_1"], json!("inf"));
        assert_eq!(r["thm2_rhs"], Value::Null);
        assert!(r["reports"].as_array().unwrap()[..7].iter().all(|x| x["vacuous"] == Value::Bool(true)));
    }

    #[test]
    fn generate_checks_rank() {
        assert!(matches!(generate(2, 3, 7), Err(HarnessError::Config(_))));
        assert_eq!(generate(2, 2, 7).unwrap().to_json(), generate(2, 2, 7).unwrap().to_json());
    }
}
