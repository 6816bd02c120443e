//! Family-wise error rate control: Bonferroni, Holm step-down, and the
//! Lehmann-Romano k-FWER step-down generalization.
//!
//! All procedures take the p-value vector by shared reference and never
//! mutate it; ordering work happens on an internal index permutation. Ties in
//! p-values are broken by original index so the internal visit order is
//! deterministic (the rejection set itself is unaffected by tie order since
//! tied p-values share a critical value).

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Which multiple-testing correction produced a [`RejectionVector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrectionMethod {
    Bonferroni,
    Holm,
    KFwer,
}

impl CorrectionMethod {
    pub fn name(&self) -> &'static str {
        match self {
            CorrectionMethod::Bonferroni => "bonferroni",
            CorrectionMethod::Holm => "holm",
            CorrectionMethod::KFwer => "kfwer",
        }
    }
}

impl std::str::FromStr for CorrectionMethod {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bonferroni" => Ok(CorrectionMethod::Bonferroni),
            "holm" => Ok(CorrectionMethod::Holm),
            "kfwer" => Ok(CorrectionMethod::KFwer),
            other => Err(invalid(format!(
                "unknown correction '{other}' (expected bonferroni, holm, or kfwer)"
            ))),
        }
    }
}

/// Per-test rejection decisions plus the parameters that produced them.
///
/// `flags` has the same length and order as the p-value vector it was derived
/// from; `k` is the k-FWER order (1 for plain FWER control).
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionVector {
    pub flags: Vec<bool>,
    pub method: CorrectionMethod,
    pub alpha: f64,
    pub k: u64,
}

impl RejectionVector {
    pub fn num_rejected(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}

fn check_inputs(pvs: &[f64], alpha: f64) -> Result<()> {
    if pvs.is_empty() {
        return Err(invalid("p-value vector must be nonempty"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if let Some((i, &pv)) = pvs
        .iter()
        .enumerate()
        .find(|(_, &pv)| !(0.0..=1.0).contains(&pv) || pv.is_nan())
    {
        return Err(invalid(format!("p-value [{i}] = {pv} outside [0, 1]")));
    }
    Ok(())
}

/// Indices of `pvs` sorted ascending by (p-value, original index).
fn sorted_order(pvs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pvs.len()).collect();
    order.sort_unstable_by(|&a, &b| pvs[a].total_cmp(&pvs[b]).then(a.cmp(&b)));
    order
}

/// Bonferroni correction: reject test i iff pvs[i] <= alpha / N.
pub fn bonferroni(pvs: &[f64], alpha: f64) -> Result<RejectionVector> {
    check_inputs(pvs, alpha)?;
    let threshold = alpha / pvs.len() as f64;
    Ok(RejectionVector {
        flags: pvs.iter().map(|&pv| pv <= threshold).collect(),
        method: CorrectionMethod::Bonferroni,
        alpha,
        k: 1,
    })
}

/// Step-down rejection under rank-dependent critical values: reject the
/// prefix of the sorted p-values until the first rank whose p-value exceeds
/// its critical value.
fn step_down(pvs: &[f64], critical: impl Fn(usize) -> f64) -> Vec<bool> {
    let order = sorted_order(pvs);
    let mut flags = vec![false; pvs.len()];
    for (rank, &idx) in order.iter().enumerate() {
        if pvs[idx] <= critical(rank + 1) {
            flags[idx] = true;
        } else {
            break;
        }
    }
    flags
}

/// Holm step-down correction: visits p-values in ascending order at levels
/// alpha/N, alpha/(N-1), ..., alpha/1, stopping at the first failure.
pub fn holm(pvs: &[f64], alpha: f64) -> Result<RejectionVector> {
    check_inputs(pvs, alpha)?;
    let n = pvs.len();
    let flags = step_down(pvs, |rank| alpha / (n - rank + 1) as f64);
    Ok(RejectionVector {
        flags,
        method: CorrectionMethod::Holm,
        alpha,
        k: 1,
    })
}

/// Lehmann-Romano k-FWER step-down: bounds the probability of k or more
/// false rejections by alpha. Critical value for sorted rank j is
/// alpha*k/N for j <= k and alpha*k/(N + k - j) beyond. With k = 1 the
/// procedure reduces exactly to [`holm`].
pub fn kfwer_stepdown(pvs: &[f64], alpha: f64, k: u64) -> Result<RejectionVector> {
    check_inputs(pvs, alpha)?;
    let n = pvs.len() as u64;
    if k < 1 || k > n {
        return Err(invalid(format!("k = {k} must satisfy 1 <= k <= {n}")));
    }
    let kf = k as f64;
    let nf = n as f64;
    let flags = step_down(pvs, |rank| {
        let rank = rank as u64;
        if rank <= k {
            alpha * kf / nf
        } else {
            alpha * kf / (nf + kf - rank as f64)
        }
    });
    Ok(RejectionVector {
        flags,
        method: CorrectionMethod::KFwer,
        alpha,
        k,
    })
}
