//! Synthetic oracle base classifier and the experiment sweeps built on it.
//!
//! The oracle does not look at any data: component i is classified correctly
//! with a fixed probability (1 - gamma on ordinary components, with the
//! multiplier applied on the designated noisy ones), so certification power
//! can be measured against a known ground truth.
//!
//! Randomness discipline: every (seed, grid index, repetition, phase) tuple
//! deterministically derives its own counter-based stream, so repetitions and
//! grid points can run on any number of worker threads and still produce
//! bitwise-identical results. Aggregation is a deterministic reduction
//! ordered by (grid index, algorithm index, repetition index).

use rand::Rng;
use rand::SeedableRng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::smoothing::{
    indiv_class_certify, joint_class_certify, seg_certify, CertConfig, CountsMatrix,
};
use crate::stats::CorrectionMethod;

/// Concrete RNG behind every sampling stream.
pub type StreamRng = rand_chacha::ChaCha8Rng;

/// Stateless splitmix64 finalizer, used to key streams.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sampling phase within one repetition. Selection and estimation draws come
/// from disjoint streams; the joint baseline draws its own pair so its
/// labeling vectors are independent of the counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Selection,
    Estimation,
    JointSelection,
    JointEstimation,
}

impl Phase {
    fn tag(self) -> u64 {
        match self {
            Phase::Selection => 0,
            Phase::Estimation => 1,
            Phase::JointSelection => 2,
            Phase::JointEstimation => 3,
        }
    }
}

/// Derive the RNG stream for one (seed, grid point, repetition, phase) cell.
pub fn stream_rng(seed: u64, grid_index: u64, rep_index: u64, phase: Phase) -> StreamRng {
    let mut state = mix(seed ^ 0x5E6C_E5F1_85C3_D134);
    for field in [grid_index, rep_index, phase.tag()] {
        state = mix(state ^ mix(field));
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = mix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    StreamRng::from_seed(key)
}

fn draw_binomial(rng: &mut StreamRng, n: u64, p: f64) -> u64 {
    if p <= 0.0 {
        0
    } else if p >= 1.0 {
        n
    } else {
        Binomial::new(n, p).expect("p validated").sample(rng)
    }
}

/// The synthetic base classifier of the toy experiments.
///
/// The first `num_noisy` components carry the elevated error rate
/// `noise_multiplier * gamma`; everything else errs with probability `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub num_components: usize,
    pub num_noisy: usize,
    pub gamma: f64,
    pub noise_multiplier: f64,
    pub num_classes: u32,
    pub true_labels: Vec<u32>,
    pub seed: u64,
}

impl OracleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_components == 0 {
            return Err(invalid("oracle needs at least one component"));
        }
        if self.num_noisy > self.num_components {
            return Err(invalid(format!(
                "num_noisy = {} exceeds num_components = {}",
                self.num_noisy, self.num_components
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(invalid(format!(
                "gamma = {} must lie in [0, 1]",
                self.gamma
            )));
        }
        if self.noise_multiplier < 0.0 {
            return Err(invalid("noise multiplier must be nonnegative"));
        }
        if self.num_classes < 2 {
            return Err(invalid("oracle needs at least two classes"));
        }
        if self.true_labels.len() != self.num_components {
            return Err(invalid(format!(
                "true_labels has {} entries for {} components",
                self.true_labels.len(),
                self.num_components
            )));
        }
        if self.true_labels.iter().any(|&l| l >= self.num_classes) {
            return Err(invalid("true label outside class range"));
        }
        Ok(())
    }

    /// Probability the oracle classifies component i correctly, clamped to
    /// [0, 1].
    pub fn correctness_probability(&self, i: usize) -> f64 {
        let error = if i < self.num_noisy {
            self.noise_multiplier * self.gamma
        } else {
            self.gamma
        };
        (1.0 - error).clamp(0.0, 1.0)
    }
}

/// Sample per-component class counts from the oracle.
///
/// For each component the correct-class count is Binomial(draws, q_i); in the
/// binary case the remainder lands on the single wrong class, otherwise it is
/// spread uniformly at random over the wrong classes (sequential binomial
/// thinning, i.e. an exact multinomial split).
pub fn oracle_sample(spec: &OracleSpec, draws: u32, rng: &mut StreamRng) -> Result<CountsMatrix> {
    spec.validate()?;
    if draws == 0 {
        return Err(invalid("draws must be at least 1"));
    }
    let classes = spec.num_classes as usize;
    let mut counts = vec![0u32; spec.num_components * classes];
    for i in 0..spec.num_components {
        let q = spec.correctness_probability(i);
        let correct = draw_binomial(rng, u64::from(draws), q) as u32;
        let row = &mut counts[i * classes..(i + 1) * classes];
        let truth = spec.true_labels[i] as usize;
        row[truth] = correct;
        let mut remaining = draws - correct;
        if classes == 2 {
            row[1 - truth] = remaining;
        } else {
            let mut wrong_left = classes as u32 - 1;
            for (c, slot) in row.iter_mut().enumerate() {
                if c == truth {
                    continue;
                }
                if wrong_left == 1 {
                    *slot = remaining;
                    break;
                }
                let share =
                    draw_binomial(rng, u64::from(remaining), 1.0 / f64::from(wrong_left)) as u32;
                *slot = share;
                remaining -= share;
                wrong_left -= 1;
            }
        }
    }
    CountsMatrix::new(counts, spec.num_components, classes, draws)
}

/// Sample full labeling vectors from the oracle (one vector per draw), for
/// the joint baseline where whole labelings are what gets counted.
pub fn oracle_sample_joint(
    spec: &OracleSpec,
    draws: u32,
    rng: &mut StreamRng,
) -> Result<Vec<Vec<u32>>> {
    spec.validate()?;
    if draws == 0 {
        return Err(invalid("draws must be at least 1"));
    }
    let classes = spec.num_classes;
    let mut out = Vec::with_capacity(draws as usize);
    for _ in 0..draws {
        let mut labeling = Vec::with_capacity(spec.num_components);
        for i in 0..spec.num_components {
            let truth = spec.true_labels[i];
            let q = spec.correctness_probability(i);
            let label = if rng.gen::<f64>() < q {
                truth
            } else if classes == 2 {
                1 - truth
            } else {
                let w = rng.gen_range(0..classes - 1);
                if w >= truth {
                    w + 1
                } else {
                    w
                }
            };
            labeling.push(label);
        }
        out.push(labeling);
    }
    Ok(out)
}

/// Certification algorithms the sweeps can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    SegCertifyHolm,
    SegCertifyBonferroni,
    SegCertifyKFwer,
    IndivClass,
    JointClass,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::SegCertifyHolm => "seg_certify_holm",
            Algorithm::SegCertifyBonferroni => "seg_certify_bonferroni",
            Algorithm::SegCertifyKFwer => "seg_certify_kfwer",
            Algorithm::IndivClass => "indiv_class",
            Algorithm::JointClass => "joint_class",
        }
    }

    fn needs_joint_samples(&self) -> bool {
        matches!(self, Algorithm::JointClass)
    }
}

impl std::str::FromStr for Algorithm {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seg_certify_holm" | "holm" => Ok(Algorithm::SegCertifyHolm),
            "seg_certify_bonferroni" | "bonferroni" => Ok(Algorithm::SegCertifyBonferroni),
            "seg_certify_kfwer" | "kfwer" => Ok(Algorithm::SegCertifyKFwer),
            "indiv_class" | "indiv" => Ok(Algorithm::IndivClass),
            "joint_class" | "joint" => Ok(Algorithm::JointClass),
            other => Err(invalid(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// Which parameter a sweep varies, together with its grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepAxis {
    /// Vary the base error rate.
    Gamma(Vec<f64>),
    /// Vary the number of components.
    NumComponents(Vec<usize>),
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            SweepAxis::Gamma(g) => g.len(),
            SweepAxis::NumComponents(n) => n.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, idx: usize) -> f64 {
        match self {
            SweepAxis::Gamma(g) => g[idx],
            SweepAxis::NumComponents(n) => n[idx] as f64,
        }
    }
}

/// Oracle parameters that stay fixed across a sweep; the axis overrides
/// either `gamma` or `num_components` per grid point. Sweeps use class 0 as
/// the ground truth for every component, which is without loss of generality
/// for the certified-rate metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleTemplate {
    pub num_components: usize,
    pub num_noisy: usize,
    pub gamma: f64,
    pub noise_multiplier: f64,
    pub num_classes: u32,
}

/// A full experiment description: grid, repetitions, oracle and certification
/// parameters, and the algorithms to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub reps: usize,
    pub oracle: OracleTemplate,
    pub config: CertConfig,
    pub algorithms: Vec<Algorithm>,
    pub seed: u64,
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        if self.axis.is_empty() {
            return Err(invalid("sweep grid must be nonempty"));
        }
        if self.reps == 0 {
            return Err(invalid("sweep needs at least one repetition"));
        }
        if self.algorithms.is_empty() {
            return Err(invalid("sweep needs at least one algorithm"));
        }
        self.config.validate()?;
        self.oracle_at(0)?.validate()
    }

    /// Oracle instance at one grid point.
    fn oracle_at(&self, grid_idx: usize) -> Result<OracleSpec> {
        let mut num_components = self.oracle.num_components;
        let mut gamma = self.oracle.gamma;
        match &self.axis {
            SweepAxis::Gamma(g) => gamma = g[grid_idx],
            SweepAxis::NumComponents(n) => num_components = n[grid_idx],
        }
        Ok(OracleSpec {
            num_components,
            num_noisy: self.oracle.num_noisy.min(num_components),
            gamma,
            noise_multiplier: self.oracle.noise_multiplier,
            num_classes: self.oracle.num_classes,
            true_labels: vec![0; num_components],
            seed: self.seed,
        })
    }

    fn config_for(&self, algorithm: Algorithm) -> CertConfig {
        let mut cfg = self.config;
        match algorithm {
            Algorithm::SegCertifyHolm => {
                cfg.correction = CorrectionMethod::Holm;
                cfg.budget = 0;
            }
            Algorithm::SegCertifyBonferroni => {
                cfg.correction = CorrectionMethod::Bonferroni;
                cfg.budget = 0;
            }
            Algorithm::SegCertifyKFwer => {
                cfg.correction = CorrectionMethod::KFwer;
            }
            _ => {}
        }
        cfg
    }
}

/// One output row of a sweep: the certified-component rate of one algorithm
/// at one grid point, averaged over repetitions (raw per-rep rates kept).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub algorithm: Algorithm,
    /// Error budget in force (nonzero only for the k-FWER algorithm).
    pub budget: u64,
    pub mean_rate: f64,
    pub rates: Vec<f64>,
}

/// All rows of a sweep, ordered by (grid index, algorithm index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Mean rates of one algorithm along the axis, in grid order.
    pub fn series(&self, algorithm: Algorithm) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.algorithm == algorithm)
            .map(|r| r.mean_rate)
            .collect()
    }
}

/// Certified-component rate of one algorithm on one repetition's draws.
fn rep_rate(
    spec: &SweepSpec,
    algorithm: Algorithm,
    oracle: &OracleSpec,
    grid_idx: usize,
    rep_idx: usize,
) -> Result<f64> {
    let cfg = spec.config_for(algorithm);
    if algorithm.needs_joint_samples() {
        let mut rng0 = stream_rng(
            spec.seed,
            grid_idx as u64,
            rep_idx as u64,
            Phase::JointSelection,
        );
        let mut rng1 = stream_rng(
            spec.seed,
            grid_idx as u64,
            rep_idx as u64,
            Phase::JointEstimation,
        );
        let samples0 = oracle_sample_joint(oracle, cfg.n0, &mut rng0)?;
        let samples = oracle_sample_joint(oracle, cfg.n, &mut rng1)?;
        let result = joint_class_certify(&samples0, &samples, cfg.sigma, cfg.alpha)?;
        return Ok(if result.labeling.is_some() { 1.0 } else { 0.0 });
    }

    let mut rng0 = stream_rng(spec.seed, grid_idx as u64, rep_idx as u64, Phase::Selection);
    let mut rng1 = stream_rng(
        spec.seed,
        grid_idx as u64,
        rep_idx as u64,
        Phase::Estimation,
    );
    let counts0 = oracle_sample(oracle, cfg.n0, &mut rng0)?;
    let counts = oracle_sample(oracle, cfg.n, &mut rng1)?;
    match algorithm {
        Algorithm::IndivClass => {
            let result = indiv_class_certify(&counts0, &counts, cfg.sigma, cfg.alpha)?;
            Ok(result.certified_fraction)
        }
        _ => {
            let result = seg_certify(&counts0, &counts, &cfg)?;
            Ok(result.certified_fraction)
        }
    }
}

/// Run a sweep: for every grid point and repetition draw fresh selection and
/// estimation sets from their derived streams, run each requested algorithm,
/// and aggregate mean certified-component rates per grid point.
///
/// Identical (spec, seed) produce bitwise-identical results regardless of
/// worker count. A failed repetition aborts the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let grid_len = spec.axis.len();

    let cells: Vec<Result<Vec<f64>>> = (0..grid_len * spec.reps)
        .into_par_iter()
        .map(|cell| {
            let grid_idx = cell / spec.reps;
            let rep_idx = cell % spec.reps;
            let oracle = spec.oracle_at(grid_idx)?;
            spec.algorithms
                .iter()
                .map(|&alg| rep_rate(spec, alg, &oracle, grid_idx, rep_idx))
                .collect()
        })
        .collect();

    let mut rows = Vec::with_capacity(grid_len * spec.algorithms.len());
    for grid_idx in 0..grid_len {
        let mut per_alg: Vec<Vec<f64>> = vec![Vec::with_capacity(spec.reps); spec.algorithms.len()];
        for rep_idx in 0..spec.reps {
            let rates = cells[grid_idx * spec.reps + rep_idx]
                .as_ref()
                .map_err(Clone::clone)?;
            for (a, &rate) in rates.iter().enumerate() {
                per_alg[a].push(rate);
            }
        }
        for (a, &algorithm) in spec.algorithms.iter().enumerate() {
            let rates = std::mem::take(&mut per_alg[a]);
            let mean_rate = rates.iter().sum::<f64>() / rates.len() as f64;
            rows.push(SweepRow {
                axis_value: spec.axis.value(grid_idx),
                algorithm,
                budget: if algorithm == Algorithm::SegCertifyKFwer {
                    spec.config_for(algorithm).budget
                } else {
                    0
                },
                mean_rate,
                rates,
            });
        }
    }
    Ok(SweepResult { rows })
}

/// Run one k-FWER sweep per error budget (k = b + 1). Streams are keyed the
/// same way for every budget, so all budgets see identical draws and the
/// power comparison is paired.
pub fn run_budget_sweep(spec: &SweepSpec, budgets: &[u64]) -> Result<SweepResult> {
    if budgets.is_empty() {
        return Err(invalid("budget list must be nonempty"));
    }
    if spec.config.correction != CorrectionMethod::KFwer {
        return Err(invalid("budget sweeps require the kfwer correction"));
    }
    if spec
        .algorithms
        .iter()
        .any(|a| *a != Algorithm::SegCertifyKFwer)
    {
        return Err(invalid("budget sweeps evaluate only seg_certify_kfwer"));
    }
    let mut rows = Vec::new();
    for &budget in budgets {
        let mut sub = spec.clone();
        sub.config.budget = budget;
        let result = run_sweep(&sub)?;
        for mut row in result.rows {
            row.budget = budget;
            rows.push(row);
        }
    }
    Ok(SweepResult { rows })
}

/// Savitzky-Golay smoothing of degree 1: at each point, fit a least-squares
/// line over the `window` nearest neighbours (shrunk symmetrically at the
/// boundaries) and evaluate it at the point. Only odd windows and degree 1
/// are supported.
pub fn savgol_smooth(series: &[f64], window: usize, degree: usize) -> Result<Vec<f64>> {
    if degree != 1 {
        return Err(invalid(format!("unsupported degree {degree}; only 1")));
    }
    if window.is_multiple_of(2) {
        return Err(invalid(format!("window {window} must be odd")));
    }
    if window < degree + 1 {
        return Err(invalid(format!(
            "window {window} too small for degree {degree}"
        )));
    }
    let half = window / 2;
    let n = series.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let h = half.min(i).min(n - 1 - i);
        let lo = i - h;
        let hi = i + h;
        // centered degree-1 least squares: sum of x offsets is zero, so the
        // fitted value at the center is the window mean
        let mean = series[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64;
        out.push(mean);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, gamma: f64) -> OracleSpec {
        OracleSpec {
            num_components: n,
            num_noisy: 1,
            gamma,
            noise_multiplier: 5.0,
            num_classes: 2,
            true_labels: vec![0; n],
            seed: 7,
        }
    }

    #[test]
    fn oracle_perfect_when_noiseless() {
        let s = spec(20, 0.0);
        let mut rng = stream_rng(7, 0, 0, Phase::Selection);
        let counts = oracle_sample(&s, 100, &mut rng).unwrap();
        for i in 0..20 {
            assert_eq!(counts.row(i)[0], 100);
            assert_eq!(counts.row(i)[1], 0);
        }
    }

    #[test]
    fn oracle_clamps_noisy_probability() {
        // at gamma = 0.05 with the 5x multiplier, the noisy component sits
        // exactly at correctness 0.75
        let boundary = spec(3, 0.05);
        assert_eq!(boundary.correctness_probability(0), 0.75);
        assert_eq!(boundary.correctness_probability(1), 0.95);

        let mut s = spec(3, 0.3); // noisy component error 1.5 -> clamped to q = 0
        s.num_noisy = 1;
        assert_eq!(s.correctness_probability(0), 0.0);
        assert_eq!(s.correctness_probability(1), 0.7);
        let mut rng = stream_rng(3, 0, 0, Phase::Selection);
        let counts = oracle_sample(&s, 50, &mut rng).unwrap();
        assert_eq!(counts.row(0)[0], 0);
        assert_eq!(counts.row(0)[1], 50);
    }

    #[test]
    fn oracle_law_of_large_numbers() {
        let mut s = spec(4, 0.05);
        s.num_noisy = 0;
        let draws = 100_000u32;
        let mut rng = stream_rng(11, 0, 0, Phase::Estimation);
        let counts = oracle_sample(&s, draws, &mut rng).unwrap();
        let sd = (0.95 * 0.05 * f64::from(draws)).sqrt();
        for i in 0..4 {
            let hit = f64::from(counts.row(i)[0]);
            assert!(
                (hit - 0.95 * f64::from(draws)).abs() <= 3.0 * sd,
                "component {i}: {hit}"
            );
        }
    }

    #[test]
    fn oracle_multiclass_rows_sum() {
        let s = OracleSpec {
            num_components: 50,
            num_noisy: 5,
            gamma: 0.2,
            noise_multiplier: 3.0,
            num_classes: 7,
            true_labels: (0..50u32).map(|i| i % 7).collect(),
            seed: 42,
        };
        let mut rng = stream_rng(42, 0, 0, Phase::Selection);
        let counts = oracle_sample(&s, 64, &mut rng).unwrap();
        for i in 0..50 {
            let sum: u32 = counts.row(i).iter().sum();
            assert_eq!(sum, 64);
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = oracle_sample(
            &spec(10, 0.1),
            100,
            &mut stream_rng(7, 2, 3, Phase::Selection),
        );
        let b = oracle_sample(
            &spec(10, 0.1),
            100,
            &mut stream_rng(7, 2, 3, Phase::Selection),
        );
        assert_eq!(a.unwrap(), b.unwrap());
        let c = oracle_sample(
            &spec(10, 0.1),
            100,
            &mut stream_rng(7, 2, 3, Phase::Estimation),
        );
        let d = oracle_sample(
            &spec(7, 0.1),
            100,
            &mut stream_rng(8, 2, 3, Phase::Selection),
        );
        // different phase or seed must not reproduce the same counts
        assert_ne!(a_ref(), c.unwrap());
        assert_ne!(
            oracle_sample(
                &spec(7, 0.1),
                100,
                &mut stream_rng(7, 2, 3, Phase::Selection)
            )
            .unwrap(),
            d.unwrap()
        );

        fn a_ref() -> CountsMatrix {
            oracle_sample(
                &spec(10, 0.1),
                100,
                &mut stream_rng(7, 2, 3, Phase::Selection),
            )
            .unwrap()
        }
        fn spec(n: usize, gamma: f64) -> OracleSpec {
            super::tests::spec(n, gamma)
        }
    }

    #[test]
    fn sweep_noiseless_certifies_everything() {
        let spec = SweepSpec {
            axis: SweepAxis::Gamma(vec![0.0]),
            reps: 5,
            oracle: OracleTemplate {
                num_components: 50,
                num_noisy: 1,
                gamma: 0.0,
                noise_multiplier: 5.0,
                num_classes: 2,
            },
            config: CertConfig {
                sigma: 0.25,
                tau: 0.75,
                alpha: 0.001,
                n0: 100,
                n: 100,
                correction: CorrectionMethod::Holm,
                budget: 0,
            },
            algorithms: vec![
                Algorithm::SegCertifyHolm,
                Algorithm::SegCertifyBonferroni,
                Algorithm::IndivClass,
                Algorithm::JointClass,
            ],
            seed: 1,
        };
        let result = run_sweep(&spec).unwrap();
        assert_eq!(result.rows.len(), 4);
        for row in &result.rows {
            assert_eq!(row.mean_rate, 1.0, "{:?}", row.algorithm);
            assert!(row.rates.iter().all(|&r| r == 1.0));
        }
    }

    #[test]
    fn budget_zero_matches_holm_sweep() {
        let base = SweepSpec {
            axis: SweepAxis::Gamma(vec![0.03, 0.06]),
            reps: 8,
            oracle: OracleTemplate {
                num_components: 40,
                num_noisy: 1,
                gamma: 0.0,
                noise_multiplier: 5.0,
                num_classes: 2,
            },
            config: CertConfig {
                sigma: 0.25,
                tau: 0.75,
                alpha: 0.01,
                n0: 100,
                n: 100,
                correction: CorrectionMethod::KFwer,
                budget: 0,
            },
            algorithms: vec![Algorithm::SegCertifyKFwer],
            seed: 99,
        };
        let budget = run_budget_sweep(&base, &[0]).unwrap();
        let mut holm_spec = base.clone();
        holm_spec.config.correction = CorrectionMethod::Holm;
        holm_spec.algorithms = vec![Algorithm::SegCertifyHolm];
        let holm = run_sweep(&holm_spec).unwrap();
        for (b, h) in budget.rows.iter().zip(&holm.rows) {
            assert_eq!(b.rates, h.rates);
        }
    }

    #[test]
    fn savgol_examples() {
        let constant = vec![0.4; 9];
        for (a, b) in savgol_smooth(&constant, 5, 1)
            .unwrap()
            .iter()
            .zip(&constant)
        {
            assert!((a - b).abs() < 1e-15);
        }

        let linear: Vec<f64> = (0..9).map(|i| 2.0 * i as f64 + 1.0).collect();
        let smoothed = savgol_smooth(&linear, 5, 1).unwrap();
        for (i, (&a, &b)) in linear.iter().zip(&smoothed).enumerate() {
            assert!((a - b).abs() < 1e-12, "i={i}");
        }

        let spike = vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        let smoothed = savgol_smooth(&spike, 3, 1).unwrap();
        let expect = [0.0, 0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0];
        for (a, b) in smoothed.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }

        assert!(savgol_smooth(&constant, 4, 1).is_err());
        assert!(savgol_smooth(&constant, 5, 2).is_err());
    }
}
