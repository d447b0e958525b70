//! Run configuration shared by every subcommand.

use std::path::{Path, PathBuf};

use qtsallis_core::bounds::{Tolerances, TOL_BOUND};
use qtsallis_core::entropy::Q_MAX;
use qtsallis_core::linalg::{MAX_DIM, TOL_PSD};
use qtsallis_core::quadrature::{QuadratureRule, DEFAULT_NODES_PER_PANEL};
use qtsallis_core::states::TOL_INCL;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub tol_incl: f64,
    pub tol_bound: f64,
    pub tol_psd: f64,
    pub quad_nodes: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            tol_incl: TOL_INCL,
            tol_bound: TOL_BOUND,
            tol_psd: TOL_PSD,
            quad_nodes: DEFAULT_NODES_PER_PANEL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub dims: Vec<usize>,
    pub q_grid: Vec<f64>,
    pub b0_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub tolerances: ToleranceConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            dims: (2..=8).collect(),
            q_grid: vec![1.5, 2.0, 3.0],
            b0_grid: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            trials: 1000,
            seed: 1,
            tolerances: ToleranceConfig::default(),
            output_path: None,
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub dims: Option<Vec<usize>>,
    pub q_grid: Option<Vec<f64>>,
    pub b0_grid: Option<Vec<f64>>,
    pub quad_nodes: Option<usize>,
    pub tol_bound: Option<f64>,
    pub out: Option<PathBuf>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn apply(mut self, o: Overrides) -> Self {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.trials {
            self.trials = v;
        }
        if let Some(v) = o.dims {
            self.dims = v;
        }
        if let Some(v) = o.q_grid {
            self.q_grid = v;
        }
        if let Some(v) = o.b0_grid {
            self.b0_grid = v;
        }
        if let Some(v) = o.quad_nodes {
            self.tolerances.quad_nodes = v;
        }
        if let Some(v) = o.tol_bound {
            self.tolerances.tol_bound = v;
        }
        if o.out.is_some() {
            self.output_path = o.out;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        let t = &self.tolerances;
        for (name, v) in [("tol_incl", t.tol_incl), ("tol_bound", t.tol_bound), ("tol_psd", t.tol_psd)] {
            if !(v >= 0.0 && v.is_finite()) {
                return fail(format!("{name} must be a finite nonnegative number, got {v}"));
            }
        }
        if t.quad_nodes < 4 {
            return fail(format!("quad_nodes must be at least 4, got {}", t.quad_nodes));
        }
        if self.dims.is_empty() {
            return fail("dims is empty".into());
        }
        if let Some(&d) = self.dims.iter().find(|&&d| !(2..=MAX_DIM).contains(&d)) {
            return fail(format!("dimension {d} outside 2..={MAX_DIM}"));
        }
        if self.q_grid.is_empty() {
            return fail("q_grid is empty".into());
        }
        if let Some(q) = self.q_grid.iter().find(|&&q| !(q > 1.0 && q <= Q_MAX)) {
            return fail(format!("q = {q} outside (1, {Q_MAX}]"));
        }
        if self.b0_grid.is_empty() {
            return fail("b0_grid is empty".into());
        }
        let d_max = *self.dims.iter().max().expect("dims nonempty");
        let b0_max = 1.0 / d_max as f64;
        if let Some(b0) = self.b0_grid.iter().find(|&&b| !(b > 0.0 && b <= b0_max)) {
            return fail(format!("b0 = {b0} outside (0, 1/{d_max}]"));
        }
        Ok(())
    }

    pub fn bound_tolerances(&self) -> Tolerances {
        Tolerances {
            tol_bound: self.tolerances.tol_bound,
            tol_incl: self.tolerances.tol_incl,
            tol_psd: self.tolerances.tol_psd,
        }
    }

    pub fn rule(&self) -> Result<QuadratureRule> {
        QuadratureRule::new(self.tolerances.quad_nodes).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Compact single-line JSON echo of the config.
    /// Single-line JSON of everything that affects results; the output path is left out.
    pub fn to_json_line(&self) -> String {
        let echo = SweepConfig {
            output_path: None,
            ..self.clone()
        };
        serde_json::to_string(&echo).expect("config serializes")
    }
}

/// Runs the scalar quadrature self-test and rejects rules that miss 1e-9.
pub fn quadrature_self_test(rule: &QuadratureRule) -> Result<f64> {
    let err = rule.self_test()?;
    if err > 1e-9 {
        return Err(HarnessError::SelfTest(err));
    }
    Ok(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        SweepConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let bad = |f: fn(&mut SweepConfig)| {
            let mut c = SweepConfig::default();
            f(&mut c);
            matches!(c.validate(), Err(HarnessError::Config(_)))
        };
        assert!(bad(|c| c.trials = 0));
        assert!(bad(|c| c.tolerances.tol_bound = -1.0));
        assert!(bad(|c| c.tolerances.tol_psd = f64::NAN));
        assert!(bad(|c| c.b0_grid.clear()));
        assert!(bad(|c| c.b0_grid = vec![0.2]));
        assert!(bad(|c| c.b0_grid = vec![0.0]));
        assert!(bad(|c| c.q_grid = vec![1.0]));
        assert!(bad(|c| c.dims = vec![1]));
        assert!(bad(|c| c.tolerances.quad_nodes = 2));
    }

    #[test]
    fn overrides_win() {
        let c = SweepConfig::from_json(r#"{"trials": 5, "seed": 3}"#).unwrap();
        assert_eq!(c.dims, SweepConfig::default().dims);
        let c = c.apply(Overrides {
            seed: Some(9),
            q_grid: Some(vec![2.0]),
            ..Default::default()
        });
        assert_eq!((c.trials, c.seed, c.q_grid.clone()), (5, 9, vec![2.0]));
        assert!(SweepConfig::from_json(r#"{"trails": 5}"#).is_err());
    }
}
