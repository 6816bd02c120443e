//! Independent oracles for the statistical functions under test.
//!
//! These deliberately avoid the implementation's code paths: binomial
//! probabilities come from a log-binomial-coefficient recurrence (cumulative
//! sums of ln ratios) rather than the saddle-point/continued-fraction route
//! the library uses.

/// ln C(n, k) via the cumulative product C(n,k) = prod_{i=1..k} (n-k+i)/i.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    let k = k.min(n - k.min(n));
    let mut acc = 0.0_f64;
    for i in 1..=k {
        acc += ((n - k + i) as f64 / i as f64).ln();
    }
    acc
}

/// Binomial pmf table for fixed (n, p), built independently of the library.
pub fn pmf_table(n: u64, p: f64) -> Vec<f64> {
    let ln_p = p.ln();
    let ln_q = (1.0 - p).ln();
    (0..=n)
        .map(|k| (ln_choose(n, k) + k as f64 * ln_p + (n - k) as f64 * ln_q).exp())
        .collect()
}

/// P[X >= x] for all x at once: backward suffix sums of the pmf table.
pub fn sf_table(n: u64, p: f64) -> Vec<f64> {
    let pmf = pmf_table(n, p);
    let mut sf = vec![0.0; (n + 2) as usize];
    for k in (0..=n as usize).rev() {
        sf[k] = sf[k + 1] + pmf[k];
    }
    sf.truncate((n + 1) as usize);
    sf
}

/// Brute-force minlike two-sided p-value with the 1e-7 relative tie slack.
pub fn two_sided(x: u64, n: u64, p: f64) -> f64 {
    let pmf = pmf_table(n, p);
    let threshold = pmf[x as usize] * (1.0 + 1e-7);
    pmf.iter()
        .filter(|&&v| v <= threshold)
        .sum::<f64>()
        .min(1.0)
}
