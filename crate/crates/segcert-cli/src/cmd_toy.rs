//! `segcert toy`: synthetic-oracle power experiments. Emits one CSV row per
//! (grid point, algorithm) with the raw mean certified rate and its
//! Savitzky-Golay smoothed counterpart, plus a run manifest.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::Serialize;

use segcert::smoothing::CertConfig;
use segcert::stats::CorrectionMethod;
use segcert::synthetic::{
    run_sweep, savgol_smooth, Algorithm, OracleTemplate, SweepAxis, SweepSpec,
};

use segcert_cli::manifest::{manifest_path, RunManifest};
use segcert_cli::{data_err, usage_err, CliError};

const SAVGOL_WINDOW: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// 101-point error-rate sweep, one noisy component, n0 = n = 100
    Fig3a,
    /// Same sweep with n0 = n = 1000
    Fig3b,
    /// Component-count sweep comparing Holm against Bonferroni
    Fig3c,
    /// Fully flag-driven configuration
    Custom,
}

#[derive(Args, Debug)]
pub struct ToyArgs {
    #[arg(long, value_enum)]
    preset: Preset,

    /// Repetitions per grid point (preset default when omitted)
    #[arg(long)]
    reps: Option<usize>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output CSV path (a .manifest.json sibling is written next to it)
    #[arg(long)]
    out: PathBuf,

    /// Extend the fig3c component grid to 10^6
    #[arg(long, default_value_t = false)]
    include_n_1e6: bool,

    // custom-preset knobs
    #[arg(long, default_value_t = 100)]
    n_components: usize,
    #[arg(long, default_value_t = 1)]
    num_noisy: usize,
    /// Single error rate (custom preset)
    #[arg(long, conflicts_with = "gamma_grid")]
    gamma: Option<f64>,
    /// Error-rate grid as start:stop:step (custom preset)
    #[arg(long)]
    gamma_grid: Option<String>,
    #[arg(long, default_value_t = 100)]
    n0: u32,
    #[arg(long, default_value_t = 100)]
    n: u32,
    #[arg(long, default_value_t = 0.001)]
    alpha: f64,
    #[arg(long, default_value_t = 0.75)]
    tau: f64,
    #[arg(long, default_value_t = 0.25)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    budget: u64,
    /// Comma-separated algorithm list (custom preset):
    /// holm,bonferroni,kfwer,indiv,joint
    #[arg(long, default_value = "holm,bonferroni,indiv,joint")]
    algorithms: String,
}

pub fn gamma_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if step <= 0.0 || stop < start || start < 0.0 {
        return Err(CliError::Usage(format!(
            "bad grid {start}:{stop}:{step}: need start <= stop and step > 0"
        )));
    }
    let points = ((stop - start) / step).round() as usize + 1;
    Ok((0..points)
        .map(|i| (start + i as f64 * step).min(stop))
        .collect())
}

fn parse_gamma_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "--gamma-grid '{s}' must look like start:stop:step"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.parse()
                .map_err(|_| CliError::Usage(format!("'{p}' is not a number")))
        })
        .collect::<Result<_, _>>()?;
    gamma_grid(nums[0], nums[1], nums[2])
}

#[derive(Serialize)]
struct ToyParams {
    preset: String,
    spec: SweepSpec,
}

struct PresetSpec {
    spec: SweepSpec,
    default_reps: usize,
    name: &'static str,
}

fn build_preset(args: &ToyArgs) -> Result<PresetSpec, CliError> {
    let paper_gamma_grid = gamma_grid(0.0, 0.1, 0.001)?;
    match args.preset {
        Preset::Fig3a | Preset::Fig3b => {
            let draws = if args.preset == Preset::Fig3a {
                100
            } else {
                1000
            };
            Ok(PresetSpec {
                spec: SweepSpec {
                    axis: SweepAxis::Gamma(paper_gamma_grid),
                    reps: 600,
                    oracle: OracleTemplate {
                        num_components: 100,
                        num_noisy: 1,
                        gamma: 0.0,
                        noise_multiplier: 5.0,
                        num_classes: 2,
                    },
                    config: CertConfig {
                        sigma: 0.25,
                        tau: 0.75,
                        alpha: 0.001,
                        n0: draws,
                        n: draws,
                        correction: CorrectionMethod::Holm,
                        budget: 0,
                    },
                    algorithms: vec![
                        Algorithm::SegCertifyHolm,
                        Algorithm::SegCertifyBonferroni,
                        Algorithm::IndivClass,
                        Algorithm::JointClass,
                    ],
                    seed: args.seed,
                },
                default_reps: 600,
                name: if args.preset == Preset::Fig3a {
                    "fig3a"
                } else {
                    "fig3b"
                },
            })
        }
        Preset::Fig3c => {
            let mut grid = vec![100usize, 1_000, 10_000, 100_000];
            if args.include_n_1e6 {
                grid.push(1_000_000);
            }
            Ok(PresetSpec {
                spec: SweepSpec {
                    axis: SweepAxis::NumComponents(grid),
                    reps: 100,
                    oracle: OracleTemplate {
                        num_components: 100,
                        num_noisy: 0,
                        gamma: 0.05,
                        noise_multiplier: 5.0,
                        num_classes: 2,
                    },
                    config: CertConfig {
                        sigma: 0.25,
                        // keeps the tests in the statistically marginal
                        // regime where the corrections differ; at 0.75 every
                        // p-value is astronomically small and all methods
                        // certify everything
                        tau: 0.9,
                        alpha: 0.1,
                        n0: 1000,
                        n: 1000,
                        correction: CorrectionMethod::Holm,
                        budget: 0,
                    },
                    algorithms: vec![Algorithm::SegCertifyHolm, Algorithm::SegCertifyBonferroni],
                    seed: args.seed,
                },
                default_reps: 100,
                name: "fig3c",
            })
        }
        Preset::Custom => {
            let grid = if let Some(spec) = &args.gamma_grid {
                parse_gamma_grid(spec)?
            } else if let Some(g) = args.gamma {
                vec![g]
            } else {
                return Err(CliError::Usage(
                    "custom preset needs --gamma or --gamma-grid".into(),
                ));
            };
            let algorithms: Vec<Algorithm> = args
                .algorithms
                .split(',')
                .map(|a| a.trim().parse().map_err(usage_err))
                .collect::<Result<_, _>>()?;
            let uses_kfwer = algorithms.contains(&Algorithm::SegCertifyKFwer);
            Ok(PresetSpec {
                spec: SweepSpec {
                    axis: SweepAxis::Gamma(grid),
                    reps: 100,
                    oracle: OracleTemplate {
                        num_components: args.n_components,
                        num_noisy: args.num_noisy,
                        gamma: 0.0,
                        noise_multiplier: 5.0,
                        num_classes: 2,
                    },
                    config: CertConfig {
                        sigma: args.sigma,
                        tau: args.tau,
                        alpha: args.alpha,
                        n0: args.n0,
                        n: args.n,
                        correction: if uses_kfwer {
                            CorrectionMethod::KFwer
                        } else {
                            CorrectionMethod::Holm
                        },
                        budget: args.budget,
                    },
                    algorithms,
                    seed: args.seed,
                },
                default_reps: 100,
                name: "custom",
            })
        }
    }
}

pub fn run(args: ToyArgs) -> Result<(), CliError> {
    let mut preset = build_preset(&args)?;
    if let Some(reps) = args.reps {
        if reps == 0 {
            return Err(CliError::Usage("--reps must be at least 1".into()));
        }
        preset.spec.reps = reps;
    }
    preset.spec.config.validate().map_err(usage_err)?;

    let started = Instant::now();
    let result = run_sweep(&preset.spec).map_err(data_err)?;
    let wall_time_s = started.elapsed().as_secs_f64();

    // smooth each algorithm's mean-rate series along the axis
    let mut csv = String::from("axis,algorithm,raw_rate,smoothed_rate\n");
    let mut smoothed: Vec<Vec<f64>> = Vec::with_capacity(preset.spec.algorithms.len());
    for &alg in &preset.spec.algorithms {
        let series = result.series(alg);
        // the filter shrinks its window at series boundaries on its own
        smoothed.push(savgol_smooth(&series, SAVGOL_WINDOW, 1).map_err(data_err)?);
    }
    for (g, chunk) in result.rows.chunks(preset.spec.algorithms.len()).enumerate() {
        for (a, row) in chunk.iter().enumerate() {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                row.axis_value,
                row.algorithm.name(),
                row.mean_rate,
                smoothed[a][g],
            );
        }
    }
    std::fs::write(&args.out, &csv)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;

    let coarsened = preset.spec.reps < preset.default_reps;
    let params = ToyParams {
        preset: preset.name.to_string(),
        spec: preset.spec,
    };
    RunManifest::new("toy", params, coarsened, wall_time_s).write(&manifest_path(&args.out))?;
    println!("wrote {}", args.out.display());
    Ok(())
}
