//! `segcert metrics`: accuracy, mIoU, and abstain rate over a prediction and
//! ground-truth label file pair, printed as a single CSV row.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::Serialize;

use segcert::metrics::{abstain_rate, certified_accuracy, mean_iou};

use segcert_cli::formats::{label_map_from, max_class, parse_label_file};
use segcert_cli::manifest::{manifest_path, RunManifest};
use segcert_cli::{data_err, CliError};

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Prediction label file (class ids and `~` for abstain)
    #[arg(long)]
    pred: PathBuf,

    /// Ground-truth label file (class ids, `~`, and `*` for ignore)
    #[arg(long)]
    truth: PathBuf,

    /// Also write the CSV (plus manifest) here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct MetricsParams {
    pred_file: String,
    truth_file: String,
}

pub fn run(args: MetricsArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let pred_labels = parse_label_file(&args.pred, false)?;
    let truth_labels = parse_label_file(&args.truth, true)?;
    if pred_labels.len() != truth_labels.len() {
        return Err(CliError::Data(format!(
            "prediction has {} labels, truth has {}",
            pred_labels.len(),
            truth_labels.len()
        )));
    }
    let classes = max_class(&pred_labels).max(max_class(&truth_labels));
    let pred = label_map_from(pred_labels, classes)?;
    let truth = label_map_from(truth_labels, classes)?;

    let accuracy = certified_accuracy(&pred, &truth).map_err(data_err)?;
    let miou =
        mean_iou(std::slice::from_ref(&pred), std::slice::from_ref(&truth)).map_err(data_err)?;
    let abstain = abstain_rate(&pred, &truth).map_err(data_err)?;

    let csv = format!("accuracy,miou,abstain_rate\n{accuracy},{miou},{abstain}\n");
    print!("{csv}");
    if let Some(out) = &args.out {
        std::fs::write(out, &csv).map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
        let params = MetricsParams {
            pred_file: args.pred.display().to_string(),
            truth_file: args.truth.display().to_string(),
        };
        RunManifest::new("metrics", params, false, started.elapsed().as_secs_f64())
            .write(&manifest_path(out))?;
    }
    Ok(())
}
