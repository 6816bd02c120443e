//! Segmentation quality metrics over certified outputs: per-component
//! certified accuracy, mean intersection-over-union, and abstain rate.
//!
//! Abstentions count against accuracy (the denominator is every labeled
//! component), and the abstain "class" is excluded from the IoU class set.
//! The ignore sentinel exists only in ground truth; positions carrying it are
//! excluded from every metric.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, mismatch, Error, Result};

/// One position's label: a class id, the abstain sentinel, or the
/// ground-truth-only ignore sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Class(u32),
    Abstain,
    Ignore,
}

/// A labeling of N positions over C classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    labels: Vec<Label>,
    num_classes: u32,
}

impl LabelMap {
    pub fn new(labels: Vec<Label>, num_classes: u32) -> Result<Self> {
        if labels.is_empty() {
            return Err(invalid("label map must be nonempty"));
        }
        if num_classes < 1 {
            return Err(invalid("label map needs at least one class"));
        }
        if let Some(bad) = labels.iter().find_map(|l| match l {
            Label::Class(c) if *c >= num_classes => Some(*c),
            _ => None,
        }) {
            return Err(invalid(format!(
                "class id {bad} outside range [0, {num_classes})"
            )));
        }
        Ok(LabelMap {
            labels,
            num_classes,
        })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> u32 {
        self.num_classes
    }
}

fn check_pair(pred: &LabelMap, truth: &LabelMap) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(mismatch(format!(
            "prediction has {} positions, truth has {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.labels.contains(&Label::Ignore) {
        return Err(invalid("ignore sentinel is only valid in ground truth"));
    }
    Ok(())
}

/// Fraction of non-ignored positions classified correctly. Abstentions are in
/// the denominator and never count as correct.
pub fn certified_accuracy(pred: &LabelMap, truth: &LabelMap) -> Result<f64> {
    check_pair(pred, truth)?;
    let mut valid = 0u64;
    let mut correct = 0u64;
    for (p, t) in pred.labels.iter().zip(&truth.labels) {
        if *t == Label::Ignore {
            continue;
        }
        valid += 1;
        // only a committed class can be correct
        if p == t && matches!(t, Label::Class(_)) {
            correct += 1;
        }
    }
    if valid == 0 {
        return Err(Error::UndefinedMetric(
            "all ground-truth positions are ignored".into(),
        ));
    }
    Ok(correct as f64 / valid as f64)
}

/// Fraction of non-ignored positions where the prediction abstained.
pub fn abstain_rate(pred: &LabelMap, truth: &LabelMap) -> Result<f64> {
    check_pair(pred, truth)?;
    let mut valid = 0u64;
    let mut abstained = 0u64;
    for (p, t) in pred.labels.iter().zip(&truth.labels) {
        if *t == Label::Ignore {
            continue;
        }
        valid += 1;
        if *p == Label::Abstain {
            abstained += 1;
        }
    }
    if valid == 0 {
        return Err(Error::UndefinedMetric(
            "all ground-truth positions are ignored".into(),
        ));
    }
    Ok(abstained as f64 / valid as f64)
}

/// How (input, class) IoU values are averaged into the final score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IouAveraging {
    /// Pool every (input, class) pair with a nonempty union into one mean.
    Pooled,
    /// Average classes within each input first, then average the inputs.
    PerImageFirst,
}

/// Mean intersection-over-union across inputs and classes (pooled averaging).
///
/// For each input and class, the predicted set is the positions predicted as
/// that class and the truth set is the positions labeled with it; ignored
/// positions are excluded from both sides and the abstain sentinel is not a
/// class. Pairs with an empty union contribute nothing.
pub fn mean_iou(preds: &[LabelMap], truths: &[LabelMap]) -> Result<f64> {
    mean_iou_with(preds, truths, IouAveraging::Pooled)
}

/// [`mean_iou`] with an explicit averaging mode.
pub fn mean_iou_with(preds: &[LabelMap], truths: &[LabelMap], mode: IouAveraging) -> Result<f64> {
    if preds.len() != truths.len() {
        return Err(mismatch(format!(
            "{} predictions for {} ground truths",
            preds.len(),
            truths.len()
        )));
    }
    if preds.is_empty() {
        return Err(invalid("need at least one input"));
    }
    let num_classes = preds
        .iter()
        .chain(truths.iter())
        .map(LabelMap::num_classes)
        .max()
        .expect("nonempty");

    let mut pooled_sum = 0.0;
    let mut pooled_pairs = 0u64;
    let mut per_image = Vec::with_capacity(preds.len());

    for (pred, truth) in preds.iter().zip(truths) {
        check_pair(pred, truth)?;
        let mut image_sum = 0.0;
        let mut image_pairs = 0u64;
        for class in 0..num_classes {
            let c = Label::Class(class);
            let mut intersection = 0u64;
            let mut union = 0u64;
            for (p, t) in pred.labels.iter().zip(&truth.labels) {
                if *t == Label::Ignore {
                    continue;
                }
                let in_p = *p == c;
                let in_g = *t == c;
                if in_p && in_g {
                    intersection += 1;
                }
                if in_p || in_g {
                    union += 1;
                }
            }
            if union > 0 {
                let iou = intersection as f64 / union as f64;
                pooled_sum += iou;
                pooled_pairs += 1;
                image_sum += iou;
                image_pairs += 1;
            }
        }
        if image_pairs > 0 {
            per_image.push(image_sum / image_pairs as f64);
        }
    }

    match mode {
        IouAveraging::Pooled => {
            if pooled_pairs == 0 {
                Err(Error::UndefinedMetric(
                    "no (input, class) pair has a nonempty union".into(),
                ))
            } else {
                Ok(pooled_sum / pooled_pairs as f64)
            }
        }
        IouAveraging::PerImageFirst => {
            if per_image.is_empty() {
                Err(Error::UndefinedMetric(
                    "no input has a class with nonempty union".into(),
                ))
            } else {
                Ok(per_image.iter().sum::<f64>() / per_image.len() as f64)
            }
        }
    }
}
