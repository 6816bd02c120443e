//! Certification algorithms for smoothed classifiers, operating purely on
//! Monte Carlo class counts.
//!
//! [`predict`] and [`certify_single`] are the single-input procedures
//! (two-sided binomial test, Clopper-Pearson bound). [`seg_certify`] is the
//! per-component procedure: one one-sided binomial test per component against
//! the threshold tau, a global FWER-control pass over the p-values, and a
//! uniform radius sigma * Phi^-1(tau) for everything that survives.
//! [`joint_class_certify`] and [`indiv_class_certify`] are the two naive
//! baselines it is compared against.
//!
//! Per-component p-values are computed with data parallelism over components;
//! the correction step is a single sequential sort-and-scan. Results depend
//! only on inputs, never on scheduling.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, mismatch, Result};
use crate::stats::{
    binom_p_value_ge, binom_p_value_two_sided, bonferroni, clopper_pearson_lower, holm,
    kfwer_stepdown, norm_quantile, CorrectionMethod, RejectionVector,
};

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_nan() || v <= 0.0 {
        return Err(invalid(format!("{name} = {v} must be positive")));
    }
    Ok(())
}

/// Per-component class-frequency table from a fixed number of Monte Carlo
/// draws. Row i holds, for each class, how often the base classifier emitted
/// that class for component i; every row sums to exactly `draws`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsMatrix {
    counts: Vec<u32>,
    num_components: usize,
    num_classes: usize,
    draws: u32,
}

impl CountsMatrix {
    /// Build from a flat row-major table, validating the row-sum invariant.
    pub fn new(
        counts: Vec<u32>,
        num_components: usize,
        num_classes: usize,
        draws: u32,
    ) -> Result<Self> {
        if num_components == 0 {
            return Err(invalid("counts matrix needs at least one component"));
        }
        if num_classes < 2 {
            return Err(invalid("counts matrix needs at least two classes"));
        }
        if counts.len() != num_components * num_classes {
            return Err(mismatch(format!(
                "counts length {} != {num_components} x {num_classes}",
                counts.len()
            )));
        }
        for i in 0..num_components {
            let sum: u64 = counts[i * num_classes..(i + 1) * num_classes]
                .iter()
                .map(|&c| u64::from(c))
                .sum();
            if sum != u64::from(draws) {
                return Err(invalid(format!(
                    "component {i}: row sums to {sum}, expected {draws}"
                )));
            }
        }
        Ok(CountsMatrix {
            counts,
            num_components,
            num_classes,
            draws,
        })
    }

    /// Convenience constructor from per-component rows.
    pub fn from_rows(rows: &[Vec<u32>], draws: u32) -> Result<Self> {
        let num_components = rows.len();
        let num_classes = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != num_classes) {
            return Err(mismatch("rows differ in class count"));
        }
        let counts = rows.iter().flatten().copied().collect();
        CountsMatrix::new(counts, num_components, num_classes, draws)
    }

    pub fn num_components(&self) -> usize {
        self.num_components
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn draws(&self) -> u32 {
        self.draws
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.counts[i * self.num_classes..(i + 1) * self.num_classes]
    }

    /// Index of the most frequent class in row i; ties break toward the lower
    /// class id.
    pub fn top_class(&self, i: usize) -> u32 {
        top_class_of(self.row(i))
    }
}

/// Argmax with ties broken toward the lower class id.
fn top_class_of(row: &[u32]) -> u32 {
    let mut best = 0usize;
    for (c, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = c;
        }
    }
    best as u32
}

/// Top two class indices of a row, ties toward lower ids.
fn top_two_of(row: &[u32]) -> (usize, usize) {
    let a = top_class_of(row) as usize;
    let mut b = usize::MAX;
    for (c, &v) in row.iter().enumerate() {
        if c == a {
            continue;
        }
        if b == usize::MAX || v > row[b] {
            b = c;
        }
    }
    (a, b)
}

/// Full parameterization of a certification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertConfig {
    /// Noise standard deviation in input-space units.
    pub sigma: f64,
    /// Abstention threshold on the smoothed top-class probability, in [0.5, 1).
    pub tau: f64,
    /// Overall confidence level, in (0, 1).
    pub alpha: f64,
    /// Preliminary (class-selection) draw count.
    pub n0: u32,
    /// Main (estimation) draw count.
    pub n: u32,
    /// Multiple-testing correction to apply.
    pub correction: CorrectionMethod,
    /// Allowed type I error budget b; the k-FWER order is b + 1. Must be 0
    /// unless the correction is k-FWER.
    pub budget: u64,
}

impl CertConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("sigma", self.sigma)?;
        if !(0.5..1.0).contains(&self.tau) {
            return Err(invalid(format!("tau = {} must lie in [0.5, 1)", self.tau)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid(format!(
                "alpha = {} must lie in (0, 1)",
                self.alpha
            )));
        }
        if self.n0 == 0 || self.n == 0 {
            return Err(invalid("n0 and n must be at least 1"));
        }
        if self.budget > 0 && self.correction != CorrectionMethod::KFwer {
            return Err(invalid(format!(
                "error budget {} requires the kfwer correction",
                self.budget
            )));
        }
        Ok(())
    }
}

/// Decision for one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentDecision {
    /// Committed class, or `None` for abstain. Never differs from
    /// `guessed_class` when present.
    pub label: Option<u32>,
    /// The p-value the decision was based on.
    pub p_value: f64,
    /// Class guessed from the selection draws.
    pub guessed_class: u32,
    /// Frequency of the guessed class among the estimation draws.
    pub hit_count: u32,
}

/// Certification output for a full input.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificationResult {
    pub decisions: Vec<ComponentDecision>,
    /// The l2 radius attached to every non-abstain component. For the
    /// per-component procedure this is sigma * Phi^-1(tau) -- a property of
    /// the configuration, reported even when everything abstained; consumers
    /// must check the certified set, not the radius alone.
    pub radius: f64,
    pub config: CertConfig,
    /// Fraction of components with a committed class.
    pub certified_fraction: f64,
}

impl CertificationResult {
    pub fn num_certified(&self) -> usize {
        self.decisions.iter().filter(|d| d.label.is_some()).count()
    }

    /// True when the guarantee tolerates type I errors: with an error budget
    /// of b >= 1, up to b certified components may be erroneous.
    pub fn may_contain_errors(&self) -> bool {
        self.config.correction == CorrectionMethod::KFwer && self.config.budget >= 1
    }
}

/// Decision for a single-input (one-component) query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleResult {
    pub label: Option<u32>,
    /// Certified l2 radius; 0 when abstained (and for [`predict`], which
    /// never certifies a radius).
    pub radius: f64,
}

impl SingleResult {
    const ABSTAIN: SingleResult = SingleResult {
        label: None,
        radius: 0.0,
    };
}

/// Evaluate the smoothed classifier on a single input: commit to the top
/// class iff the exact two-sided binomial test on the top-two counts rejects
/// at level alpha, otherwise abstain. No radius is computed.
pub fn predict(counts: &CountsMatrix, alpha: f64) -> Result<SingleResult> {
    if counts.num_components() != 1 {
        return Err(invalid(format!(
            "predict expects a single-component counts matrix, got N = {}",
            counts.num_components()
        )));
    }
    let row = counts.row(0);
    let (a, b) = top_two_of(row);
    let n_a = u64::from(row[a]);
    let n_b = u64::from(row[b]);
    if n_a + n_b == 0 {
        return Ok(SingleResult::ABSTAIN);
    }
    let pv = binom_p_value_two_sided(n_a, n_a + n_b, 0.5)?;
    if pv <= alpha {
        Ok(SingleResult {
            label: Some(a as u32),
            radius: 0.0,
        })
    } else {
        Ok(SingleResult::ABSTAIN)
    }
}

/// Certify a single input: guess the top class from the selection row, lower
/// bound its probability from the estimation row via Clopper-Pearson at
/// confidence 1 - alpha, and return the class with radius
/// sigma * Phi^-1(p_lower) when the bound clears 1/2.
pub fn certify_single(
    counts0: &[u32],
    counts: &[u32],
    sigma: f64,
    alpha: f64,
) -> Result<SingleResult> {
    if counts0.len() != counts.len() {
        return Err(mismatch(format!(
            "selection row has {} classes, estimation row has {}",
            counts0.len(),
            counts.len()
        )));
    }
    if counts0.len() < 2 {
        return Err(invalid("rows need at least two classes"));
    }
    check_positive("sigma", sigma)?;
    let guess = top_class_of(counts0) as usize;
    let n: u64 = counts.iter().map(|&c| u64::from(c)).sum();
    if n == 0 {
        return Err(invalid("estimation row has zero draws"));
    }
    let hits = u64::from(counts[guess]);
    let p_lower = clopper_pearson_lower(hits, n, 1.0 - alpha)?;
    if p_lower > 0.5 {
        Ok(SingleResult {
            label: Some(guess as u32),
            radius: sigma * norm_quantile(p_lower)?,
        })
    } else {
        Ok(SingleResult::ABSTAIN)
    }
}

fn check_pair(counts0: &CountsMatrix, counts: &CountsMatrix) -> Result<()> {
    if counts0.num_components() != counts.num_components() {
        return Err(mismatch(format!(
            "selection set has {} components, estimation set has {}",
            counts0.num_components(),
            counts.num_components()
        )));
    }
    if counts0.num_classes() != counts.num_classes() {
        return Err(mismatch(format!(
            "selection set has {} classes, estimation set has {}",
            counts0.num_classes(),
            counts.num_classes()
        )));
    }
    Ok(())
}

fn apply_correction(pvs: &[f64], config: &CertConfig) -> Result<RejectionVector> {
    match config.correction {
        CorrectionMethod::Bonferroni => bonferroni(pvs, config.alpha),
        CorrectionMethod::Holm => holm(pvs, config.alpha),
        CorrectionMethod::KFwer => kfwer_stepdown(pvs, config.alpha, config.budget + 1),
    }
}

/// The per-component certification procedure.
///
/// For each component: guess the class from the selection counts, read its
/// frequency among the estimation counts, and test the null `p <= tau` with
/// the exact one-sided binomial test. The configured FWER correction then
/// decides which tests reject at overall level alpha; everything else
/// abstains. All surviving components share the radius sigma * Phi^-1(tau).
///
/// With probability at least 1 - alpha over the sampling randomness, every
/// non-abstain component matches the tau-thresholded smoothed classifier and
/// is robust to any l2 perturbation of norm at most the returned radius
/// (allowing up to `budget` erroneous components when run with an error
/// budget).
pub fn seg_certify(
    counts0: &CountsMatrix,
    counts: &CountsMatrix,
    config: &CertConfig,
) -> Result<CertificationResult> {
    config.validate()?;
    check_pair(counts0, counts)?;
    if counts0.draws() != config.n0 {
        return Err(invalid(format!(
            "selection set has {} draws, config says n0 = {}",
            counts0.draws(),
            config.n0
        )));
    }
    if counts.draws() != config.n {
        return Err(invalid(format!(
            "estimation set has {} draws, config says n = {}",
            counts.draws(),
            config.n
        )));
    }
    let n = u64::from(config.n);
    let num = counts0.num_components();

    let per_component: Vec<(u32, u32, f64)> = (0..num)
        .into_par_iter()
        .map(|i| {
            let guess = counts0.top_class(i);
            let hits = counts.row(i)[guess as usize];
            let pv = binom_p_value_ge(u64::from(hits), n, config.tau).expect("validated arguments");
            (guess, hits, pv)
        })
        .collect();

    let pvs: Vec<f64> = per_component.iter().map(|&(_, _, pv)| pv).collect();
    let rejections = apply_correction(&pvs, config)?;

    let decisions: Vec<ComponentDecision> = per_component
        .iter()
        .zip(&rejections.flags)
        .map(|(&(guess, hits, pv), &rejected)| ComponentDecision {
            label: rejected.then_some(guess),
            p_value: pv,
            guessed_class: guess,
            hit_count: hits,
        })
        .collect();

    let certified = decisions.iter().filter(|d| d.label.is_some()).count();
    Ok(CertificationResult {
        certified_fraction: certified as f64 / num as f64,
        radius: radius(config.sigma, config.tau)?,
        decisions,
        config: *config,
    })
}

/// Certification outcome of the joint (whole-labeling) baseline: either one
/// full labeling certified at the given radius, or a global abstention.
#[derive(Debug, Clone, PartialEq)]
pub struct JointResult {
    pub labeling: Option<Vec<u32>>,
    pub radius: f64,
}

/// The joint-classification baseline: treat every distinct full labeling
/// vector as one class of the product label space, pick the most frequent
/// labeling from the selection draws, and certify it exactly like a
/// single-input query. All-or-nothing: a certificate covers every component
/// or none.
///
/// Only observed labelings are ever materialized; ties on the top labeling
/// break toward the lexicographically smallest vector.
pub fn joint_class_certify(
    samples0: &[Vec<u32>],
    samples: &[Vec<u32>],
    sigma: f64,
    alpha: f64,
) -> Result<JointResult> {
    if samples0.is_empty() || samples.is_empty() {
        return Err(invalid("both sample sets must be nonempty"));
    }
    let n_components = samples0[0].len();
    if samples0
        .iter()
        .chain(samples.iter())
        .any(|s| s.len() != n_components)
    {
        return Err(mismatch("labeling vectors differ in length"));
    }
    check_positive("sigma", sigma)?;

    let mut freq0: HashMap<&[u32], u64> = HashMap::new();
    for s in samples0 {
        *freq0.entry(s.as_slice()).or_insert(0) += 1;
    }
    let top = freq0
        .iter()
        .max_by(|(la, ca), (lb, cb)| ca.cmp(cb).then_with(|| lb.cmp(la)))
        .map(|(&l, _)| l)
        .expect("nonempty sample set");

    // estimation never reads the selection set's frequencies: only the draw
    // count of `samples` and the matches of `top` inside it matter
    let n = samples.len() as u64;
    let hits = samples.iter().filter(|s| s.as_slice() == top).count() as u64;
    let p_lower = clopper_pearson_lower(hits, n, 1.0 - alpha)?;
    if p_lower > 0.5 {
        Ok(JointResult {
            labeling: Some(top.to_vec()),
            radius: sigma * norm_quantile(p_lower)?,
        })
    } else {
        Ok(JointResult {
            labeling: None,
            radius: 0.0,
        })
    }
}

/// The individual-classification baseline: certify every component on its own
/// at level alpha / N (union bound over the Clopper-Pearson intervals). A
/// single abstention forces the whole input to abstain; otherwise the overall
/// radius is the minimum per-component radius.
///
/// The stored per-component p-value is the exact one-sided binomial test
/// against 1/2, which by Clopper-Pearson duality rejects at alpha / N exactly
/// when the per-component bound clears 1/2.
pub fn indiv_class_certify(
    counts0: &CountsMatrix,
    counts: &CountsMatrix,
    sigma: f64,
    alpha: f64,
) -> Result<CertificationResult> {
    check_pair(counts0, counts)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let num = counts0.num_components();
    let alpha_per_test = alpha / num as f64;
    let n = u64::from(counts.draws());

    let per_component: Vec<(SingleResult, f64, u32, u32)> = (0..num)
        .into_par_iter()
        .map(|i| {
            let single = certify_single(counts0.row(i), counts.row(i), sigma, alpha_per_test)
                .expect("validated arguments");
            let guess = counts0.top_class(i);
            let hits = counts.row(i)[guess as usize];
            let pv = binom_p_value_ge(u64::from(hits), n, 0.5).expect("validated arguments");
            (single, pv, guess, hits)
        })
        .collect();

    let all_certified = per_component.iter().all(|(s, ..)| s.label.is_some());
    let radius = if all_certified {
        per_component
            .iter()
            .map(|(s, ..)| s.radius)
            .fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };

    let decisions: Vec<ComponentDecision> = per_component
        .iter()
        .map(|&(single, pv, guess, hits)| ComponentDecision {
            label: if all_certified { single.label } else { None },
            p_value: pv,
            guessed_class: guess,
            hit_count: hits,
        })
        .collect();

    let config = CertConfig {
        sigma,
        tau: 0.5,
        alpha,
        n0: counts0.draws(),
        n: counts.draws(),
        correction: CorrectionMethod::Bonferroni,
        budget: 0,
    };
    Ok(CertificationResult {
        certified_fraction: if all_certified { 1.0 } else { 0.0 },
        radius,
        decisions,
        config,
    })
}

/// The uniform certification radius sigma * Phi^-1(tau).
pub fn radius(sigma: f64, tau: f64) -> Result<f64> {
    check_positive("sigma", sigma)?;
    if !(0.5..1.0).contains(&tau) {
        return Err(invalid(format!("tau = {tau} must lie in [0.5, 1)")));
    }
    if tau == 0.5 {
        return Ok(0.0);
    }
    Ok(sigma * norm_quantile(tau)?)
}

/// The two-probability radius sigma / 2 * (Phi^-1(p_a) - Phi^-1(p_b)); with
/// p_b = 1 - p_a this collapses to sigma * Phi^-1(p_a).
pub fn cohen_radius(sigma: f64, p_a: f64, p_b: f64) -> Result<f64> {
    check_positive("sigma", sigma)?;
    if !(p_a > 0.0 && p_a < 1.0 && p_b > 0.0 && p_b < 1.0) {
        return Err(invalid("p_a and p_b must lie in (0, 1)"));
    }
    if p_b > p_a {
        return Err(invalid(format!("p_b = {p_b} exceeds p_a = {p_a}")));
    }
    Ok(sigma / 2.0 * (norm_quantile(p_a)? - norm_quantile(p_b)?))
}

/// Noise level that yields a target radius at threshold tau:
/// sigma = target / Phi^-1(tau). Requires tau > 0.5.
pub fn sigma_for_target_radius(target_radius: f64, tau: f64) -> Result<f64> {
    check_positive("target radius", target_radius)?;
    if !(tau > 0.5 && tau < 1.0) {
        return Err(invalid(format!("tau = {tau} must lie in (0.5, 1)")));
    }
    Ok(target_radius / norm_quantile(tau)?)
}
