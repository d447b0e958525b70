use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qtsallis_harness::config::{quadrature_self_test, Overrides, SweepConfig};
use qtsallis_harness::error::{HarnessError, Result};
use qtsallis_harness::eval::{evaluate, generate, load_state};
use qtsallis_harness::suites::{run_suite, verify, Context, VerifyReport, SUITES};
use qtsallis_harness::sweep::{run_sweep, write_csv};

#[derive(Parser)]
#[command(name = "qtsallis", version, about = "Relative q-entropy bounds: verification, sweeps and evaluation")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Root seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Gauss nodes per quadrature panel.
    #[arg(long, global = true)]
    quad_nodes: Option<usize>,
    /// Relative tolerance for bound checks.
    #[arg(long, global = true, allow_negative_numbers = true)]
    tol_bound: Option<f64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Comma-separated dimensions.
    #[arg(long, global = true, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Comma-separated q values.
    #[arg(long, global = true, value_delimiter = ',')]
    q: Option<Vec<f64>>,
    /// Comma-separated b0 values.
    #[arg(long, global = true, value_delimiter = ',')]
    b0: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the randomized property and bound suites.
    Verify {
        /// Run only these suites.
        #[arg(long, value_delimiter = ',')]
        suite: Option<Vec<String>>,
        /// Directory for counterexample files.
        #[arg(long, default_value = "counterexamples")]
        counterexamples: PathBuf,
    },
    /// Sweep the sigma(b0) family and write CSV.
    Sweep {
        /// Fixed rho state file instead of random draws.
        #[arg(long)]
        rho: Option<PathBuf>,
    },
    /// Evaluate the entropy and every bound for one pair.
    Eval {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
    },
    /// Write a random state file.
    Gen {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        rank: usize,
    },
}

fn load_config(common: &Common) -> Result<SweepConfig> {
    let base = match &common.config {
        Some(path) => SweepConfig::load(path)?,
        None => SweepConfig::default(),
    };
    let config = base.apply(Overrides {
        seed: common.seed,
        trials: common.trials,
        dims: common.dims.clone(),
        q_grid: common.q.clone(),
        b0_grid: common.b0.clone(),
        quad_nodes: common.quad_nodes,
        tol_bound: common.tol_bound,
        out: common.out.clone(),
    });
    config.validate()?;
    Ok(config)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| HarnessError::io(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| HarnessError::io("<stdout>", e)),
    }
}

fn cmd_verify(config: SweepConfig, suites: Option<Vec<String>>, dir: PathBuf) -> Result<bool> {
    let ctx = Context::new(config, dir)?;
    quadrature_self_test(&ctx.rule)?;
    let report = match suites {
        None => verify(&ctx)?,
        Some(names) => {
            if let Some(bad) = names.iter().find(|n| !SUITES.iter().any(|s| s.0 == n.as_str())) {
                return Err(HarnessError::Config(format!("unknown suite {bad}")));
            }
            VerifyReport {
                seed: ctx.config.seed,
                trials: ctx.config.trials,
                suites: names.iter().map(|n| run_suite(&ctx, n)).collect::<Result<_>>()?,
            }
        }
    };
    for s in &report.suites {
        let status = if s.failures == 0 { "ok" } else { "FAIL" };
        eprintln!("{:<28} {:>6} instances  {:>4} failures  {status}", s.name, s.instances_run, s.failures);
    }
    emit(ctx.config.output_path.as_deref(), &report.to_json())?;
    Ok(report.passed())
}

fn cmd_sweep(config: SweepConfig, rho: Option<PathBuf>) -> Result<bool> {
    quadrature_self_test(&config.rule()?)?;
    let fixed = rho.as_deref().map(load_state).transpose()?;
    let rows = run_sweep(&config, fixed.as_ref())?;
    let mut buf = Vec::new();
    write_csv(&config, &rows, &mut buf)?;
    emit(config.output_path.as_deref(), &String::from_utf8_lossy(&buf))?;
    let bad: Vec<_> = rows.iter().filter(|r| !r.violations.is_empty()).collect();
    for r in &bad {
        eprintln!("violation at d={} q={} b0={} trial={}: {:?}", r.d, r.q, r.b0, r.trial, r.violations);
    }
    Ok(bad.is_empty())
}

fn run(cli: Cli) -> Result<bool> {
    let common = &cli.common;
    match cli.command {
        Command::Verify { suite, counterexamples } => cmd_verify(load_config(common)?, suite, counterexamples),
        Command::Sweep { rho } => cmd_sweep(load_config(common)?, rho),
        Command::Eval { rho, sigma } => {
            let config = load_config(common)?;
            let rho = load_state(&rho)?;
            let sigma = load_state(&sigma)?;
            let qs = common.q.clone().unwrap_or_else(|| vec![2.0]);
            let report = evaluate(&rho, &sigma, &qs, &config.bound_tolerances())?;
            let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            emit(config.output_path.as_deref(), &text)?;
            Ok(report["holds"] == serde_json::Value::Bool(true))
        }
        Command::Gen { dim, rank } => {
            let file = generate(dim, rank, common.seed.unwrap_or(0))?;
            emit(common.out.as_deref(), &file.to_json())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
