//! `segcert kfwer`: error-budget sweeps. For each requested budget b the
//! k-FWER procedure runs with k = b + 1 over a component-count grid; all
//! budgets see identical draws so the power comparison is paired.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::Serialize;

use segcert::smoothing::CertConfig;
use segcert::stats::CorrectionMethod;
use segcert::synthetic::{run_budget_sweep, Algorithm, OracleTemplate, SweepAxis, SweepSpec};

use segcert_cli::manifest::{manifest_path, RunManifest};
use segcert_cli::{data_err, usage_err, CliError};

#[derive(Args, Debug)]
pub struct KfwerArgs {
    /// Comma-separated error budgets, e.g. 0,1,1000
    #[arg(long)]
    budgets: String,

    /// Significance level; runs both 0.1 and 0.001 presets when omitted
    #[arg(long)]
    alpha: Option<f64>,

    /// Component-count grid as min:max, powers of ten (e.g. 1e2:1e6)
    #[arg(long, default_value = "1e2:1e5")]
    n_grid: String,

    #[arg(long, default_value_t = 20)]
    reps: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output CSV path (columns: n, budget, alpha, rate)
    #[arg(long)]
    out: PathBuf,

    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    #[arg(long, default_value_t = 1)]
    num_noisy: usize,
    #[arg(long, default_value_t = 1000)]
    n0: u32,
    #[arg(long, default_value_t = 1000)]
    n: u32,
    #[arg(long, default_value_t = 0.9)]
    tau: f64,
    #[arg(long, default_value_t = 0.25)]
    sigma: f64,
}

fn parse_budgets(s: &str) -> Result<Vec<u64>, CliError> {
    if s.trim().is_empty() {
        return Err(CliError::Usage("--budgets must not be empty".into()));
    }
    s.split(',')
        .map(|b| {
            b.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("'{b}' is not a budget")))
        })
        .collect()
}

/// Powers of ten inside [min, max].
fn parse_n_grid(s: &str) -> Result<Vec<usize>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!(
            "--n-grid '{s}' must look like min:max"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Usage(format!("'{}' is not a number", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Usage(format!("'{}' is not a number", parts[1])))?;
    if lo < 1.0 || hi < lo {
        return Err(CliError::Usage(format!("--n-grid '{s}' is not a range")));
    }
    let mut grid = Vec::new();
    let mut n = 1usize;
    while (n as f64) <= hi {
        if (n as f64) >= lo {
            grid.push(n);
        }
        n = n.saturating_mul(10);
    }
    if grid.is_empty() {
        return Err(CliError::Usage(format!(
            "--n-grid '{s}' contains no power of ten"
        )));
    }
    Ok(grid)
}

#[derive(Serialize)]
struct KfwerParams {
    budgets: Vec<u64>,
    alphas: Vec<f64>,
    spec: SweepSpec,
}

pub fn run(args: KfwerArgs) -> Result<(), CliError> {
    let budgets = parse_budgets(&args.budgets)?;
    let grid = parse_n_grid(&args.n_grid)?;
    let alphas = match args.alpha {
        Some(a) => vec![a],
        None => vec![0.1, 0.001],
    };
    let max_n = *grid.last().expect("nonempty grid");
    if budgets.iter().any(|&b| b + 1 > max_n as u64) {
        return Err(CliError::Usage(format!(
            "budget exceeds grid: k = b + 1 must stay within N <= {max_n}"
        )));
    }

    let base_spec = |alpha: f64| SweepSpec {
        axis: SweepAxis::NumComponents(grid.clone()),
        reps: args.reps,
        oracle: OracleTemplate {
            num_components: 100,
            num_noisy: args.num_noisy,
            gamma: args.gamma,
            noise_multiplier: 5.0,
            num_classes: 2,
        },
        config: CertConfig {
            sigma: args.sigma,
            tau: args.tau,
            alpha,
            n0: args.n0,
            n: args.n,
            correction: CorrectionMethod::KFwer,
            budget: 0,
        },
        algorithms: vec![Algorithm::SegCertifyKFwer],
        seed: args.seed,
    };

    let started = Instant::now();
    let mut csv = String::from("n,budget,alpha,rate\n");
    for &alpha in &alphas {
        let spec = base_spec(alpha);
        spec.config.validate().map_err(usage_err)?;
        let result = run_budget_sweep(&spec, &budgets).map_err(data_err)?;
        for row in &result.rows {
            let _ = writeln!(
                csv,
                "{},{},{alpha},{}",
                row.axis_value, row.budget, row.mean_rate
            );
        }
    }
    let wall_time_s = started.elapsed().as_secs_f64();

    std::fs::write(&args.out, &csv)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;
    let params = KfwerParams {
        budgets,
        alphas,
        spec: base_spec(0.1),
    };
    RunManifest::new("kfwer", params, false, wall_time_s).write(&manifest_path(&args.out))?;
    println!("wrote {}", args.out.display());
    Ok(())
}
