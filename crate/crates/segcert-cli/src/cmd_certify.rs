//! `segcert certify`: run a certification procedure over an offline counts
//! file (or joint-sample file) and emit decisions, a metrics summary, and a
//! run manifest.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::Serialize;

use segcert::metrics::{abstain_rate, certified_accuracy, mean_iou, Label};
use segcert::smoothing::{
    indiv_class_certify, joint_class_certify, seg_certify, CertConfig, ComponentDecision,
};
use segcert::stats::CorrectionMethod;

use segcert_cli::formats::{
    label_map_from, max_class, parse_counts_file, parse_joint_file, parse_label_file,
    write_label_file,
};
use segcert_cli::manifest::RunManifest;
use segcert_cli::{data_err, usage_err, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmChoice {
    /// Per-component tests with FWER control and threshold tau
    SegCertify,
    /// Per-component certification at level alpha/N, all-or-nothing
    IndivClass,
    /// One test over whole labelings, all-or-nothing
    JointClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrectionChoice {
    Holm,
    Bonferroni,
    Kfwer,
}

impl From<CorrectionChoice> for CorrectionMethod {
    fn from(c: CorrectionChoice) -> Self {
        match c {
            CorrectionChoice::Holm => CorrectionMethod::Holm,
            CorrectionChoice::Bonferroni => CorrectionMethod::Bonferroni,
            CorrectionChoice::Kfwer => CorrectionMethod::KFwer,
        }
    }
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    /// Counts file (selection and estimation rows per component)
    #[arg(long, required_unless_present = "joint_samples")]
    counts: Option<PathBuf>,

    /// Joint-sample file (required by --algorithm joint-class)
    #[arg(long)]
    joint_samples: Option<PathBuf>,

    /// Ground-truth label file; enables accuracy and mIoU in the summary
    #[arg(long)]
    truth: Option<PathBuf>,

    /// Noise standard deviation
    #[arg(long)]
    sigma: f64,

    /// Abstention threshold on the top-class probability, in [0.5, 1)
    #[arg(long)]
    tau: f64,

    /// Overall confidence level, in (0, 1)
    #[arg(long)]
    alpha: f64,

    /// Multiple-testing correction (seg-certify only)
    #[arg(long, value_enum, default_value_t = CorrectionChoice::Holm)]
    correction: CorrectionChoice,

    /// Allowed type I error budget b (k-FWER order is b + 1)
    #[arg(long, default_value_t = 0)]
    budget: u64,

    #[arg(long, value_enum, default_value_t = AlgorithmChoice::SegCertify)]
    algorithm: AlgorithmChoice,

    /// Output directory for decisions.txt, summary.csv, manifest.json
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Serialize)]
struct CertifyParams {
    algorithm: String,
    config: CertConfig,
    counts_file: Option<String>,
    joint_samples_file: Option<String>,
    truth_file: Option<String>,
}

struct Outcome {
    labels: Vec<Option<u32>>,
    radius: f64,
    certified_fraction: f64,
    error_budget: u64,
    n0: u32,
    n: u32,
}

fn run_counts_based(args: &CertifyArgs) -> Result<Outcome, CliError> {
    let path = args.counts.as_ref().expect("clap enforces presence");
    let (counts0, counts) = parse_counts_file(path)?;
    match args.algorithm {
        AlgorithmChoice::SegCertify => {
            let config = CertConfig {
                sigma: args.sigma,
                tau: args.tau,
                alpha: args.alpha,
                n0: counts0.draws(),
                n: counts.draws(),
                correction: args.correction.into(),
                budget: args.budget,
            };
            config.validate().map_err(usage_err)?;
            let result = seg_certify(&counts0, &counts, &config).map_err(data_err)?;
            Ok(Outcome {
                labels: result
                    .decisions
                    .iter()
                    .map(|d: &ComponentDecision| d.label)
                    .collect(),
                radius: result.radius,
                certified_fraction: result.certified_fraction,
                error_budget: if result.may_contain_errors() {
                    config.budget
                } else {
                    0
                },
                n0: counts0.draws(),
                n: counts.draws(),
            })
        }
        AlgorithmChoice::IndivClass => {
            let result = indiv_class_certify(&counts0, &counts, args.sigma, args.alpha)
                .map_err(usage_err)?;
            Ok(Outcome {
                labels: result.decisions.iter().map(|d| d.label).collect(),
                radius: result.radius,
                certified_fraction: result.certified_fraction,
                error_budget: 0,
                n0: counts0.draws(),
                n: counts.draws(),
            })
        }
        AlgorithmChoice::JointClass => unreachable!("dispatched before"),
    }
}

fn run_joint(args: &CertifyArgs) -> Result<Outcome, CliError> {
    let path = args.joint_samples.as_ref().ok_or_else(|| {
        CliError::Usage("--algorithm joint-class requires --joint-samples".into())
    })?;
    let (samples0, samples) = parse_joint_file(path)?;
    let result =
        joint_class_certify(&samples0, &samples, args.sigma, args.alpha).map_err(usage_err)?;
    let n_components = samples0[0].len();
    let (labels, radius, fraction) = match result.labeling {
        Some(labeling) => (labeling.into_iter().map(Some).collect(), result.radius, 1.0),
        None => (vec![None; n_components], 0.0, 0.0),
    };
    Ok(Outcome {
        labels,
        radius,
        certified_fraction: fraction,
        error_budget: 0,
        n0: samples0.len() as u32,
        n: samples.len() as u32,
    })
}

pub fn run(args: CertifyArgs) -> Result<(), CliError> {
    // domain checks that apply to every algorithm
    if args.sigma.is_nan() || args.sigma <= 0.0 {
        return Err(CliError::Usage(format!(
            "sigma = {} must be positive",
            args.sigma
        )));
    }
    if !(0.5..1.0).contains(&args.tau) {
        return Err(CliError::Usage(format!(
            "tau = {} must lie in [0.5, 1)",
            args.tau
        )));
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::Usage(format!(
            "alpha = {} must lie in (0, 1)",
            args.alpha
        )));
    }

    let started = Instant::now();
    let outcome = match args.algorithm {
        AlgorithmChoice::JointClass => run_joint(&args)?,
        _ => run_counts_based(&args)?,
    };
    let wall_time_s = started.elapsed().as_secs_f64();

    // metrics over the decisions
    let pred_labels: Vec<Label> = outcome
        .labels
        .iter()
        .map(|l| match l {
            Some(id) => Label::Class(*id),
            None => Label::Abstain,
        })
        .collect();
    let (accuracy, miou, abstain) = match &args.truth {
        Some(truth_path) => {
            let truth_labels = parse_label_file(truth_path, true)?;
            if truth_labels.len() != pred_labels.len() {
                return Err(CliError::Data(format!(
                    "truth has {} labels, decisions have {}",
                    truth_labels.len(),
                    pred_labels.len()
                )));
            }
            let classes = max_class(&pred_labels).max(max_class(&truth_labels));
            let pred = label_map_from(pred_labels, classes)?;
            let truth = label_map_from(truth_labels, classes)?;
            let acc = certified_accuracy(&pred, &truth).map_err(data_err)?;
            let miou = mean_iou(std::slice::from_ref(&pred), std::slice::from_ref(&truth))
                .map_err(data_err)?;
            let abst = abstain_rate(&pred, &truth).map_err(data_err)?;
            (Some(acc), Some(miou), abst)
        }
        None => {
            let abstained = outcome.labels.iter().filter(|l| l.is_none()).count();
            (None, None, abstained as f64 / outcome.labels.len() as f64)
        }
    };

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;
    write_label_file(&args.out.join("decisions.txt"), &outcome.labels)?;

    let algorithm_name = match args.algorithm {
        AlgorithmChoice::SegCertify => "seg_certify",
        AlgorithmChoice::IndivClass => "indiv_class",
        AlgorithmChoice::JointClass => "joint_class",
    };
    let mut summary = String::from(
        "algorithm,n_components,accuracy,miou,abstain_rate,radius,error_budget,wall_time_s\n",
    );
    let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let _ = writeln!(
        summary,
        "{algorithm_name},{},{},{},{abstain},{},{},{wall_time_s}",
        outcome.labels.len(),
        fmt_opt(accuracy),
        fmt_opt(miou),
        outcome.radius,
        outcome.error_budget,
    );
    std::fs::write(args.out.join("summary.csv"), &summary)
        .map_err(|e| CliError::Data(format!("summary.csv: {e}")))?;

    let params = CertifyParams {
        algorithm: algorithm_name.to_string(),
        config: CertConfig {
            sigma: args.sigma,
            tau: args.tau,
            alpha: args.alpha,
            n0: outcome.n0,
            n: outcome.n,
            correction: args.correction.into(),
            budget: args.budget,
        },
        counts_file: args.counts.as_ref().map(|p| p.display().to_string()),
        joint_samples_file: args.joint_samples.as_ref().map(|p| p.display().to_string()),
        truth_file: args.truth.as_ref().map(|p| p.display().to_string()),
    };
    RunManifest::new("certify", params, false, wall_time_s)
        .write(&args.out.join("manifest.json"))?;

    println!("R = {:.4}", outcome.radius);
    println!(
        "certified {} of {} components (fraction {})",
        outcome.labels.iter().filter(|l| l.is_some()).count(),
        outcome.labels.len(),
        outcome.certified_fraction,
    );
    println!("abstain rate {abstain}");
    if let (Some(acc), Some(miou)) = (accuracy, miou) {
        println!("accuracy {acc}");
        println!("mIoU {miou}");
    }
    if outcome.error_budget >= 1 {
        println!(
            "note: up to {} certified components may be erroneous (error budget in force)",
            outcome.error_budget
        );
    }
    Ok(())
}
