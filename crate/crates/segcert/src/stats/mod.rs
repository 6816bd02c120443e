//! Exact scalar statistics: binomial tail and two-sided tests, Clopper-Pearson
//! lower confidence bounds, the standard-normal CDF/quantile pair, and the
//! family-wise error rate control procedures.
//!
//! Everything is a pure function; nothing holds shared state, so all
//! operations are safe under unlimited concurrent invocation.

mod fwer;
pub mod special;

pub use fwer::{bonferroni, holm, kfwer_stepdown, CorrectionMethod, RejectionVector};

use crate::error::{invalid, Result};
use special::{binom_pmf, binom_sf_ge, norm_pdf, norm_quantile_approx, SQRT_2};

fn check_counts(x: u64, n: u64) -> Result<()> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    if x > n {
        return Err(invalid(format!("x = {x} exceeds n = {n}")));
    }
    Ok(())
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(invalid(format!("{name} = {v} must lie in (0, 1)")));
    }
    Ok(())
}

/// One-sided binomial p-value P[X >= x] for X ~ Binomial(n, p0), i.e. the
/// evidence against the null `p <= p0` given `x` successes in `n` trials.
///
/// Computed through the regularized incomplete beta identity
/// P[X >= x] = I_{p0}(x, n - x + 1) (continued fraction), which stays exact
/// to ~1e-12 absolute up to n = 10^6; direct pmf summation is used only as a
/// test oracle.
pub fn binom_p_value_ge(x: u64, n: u64, p0: f64) -> Result<f64> {
    check_counts(x, n)?;
    check_open_unit("p0", p0)?;
    Ok(binom_sf_ge(x, n, p0))
}

/// Exact two-sided binomial test p-value under the pmf-threshold ("minlike")
/// convention: the sum of pmf(j) over all outcomes j at most as likely as the
/// observed x, with a 1e-7 relative slack on the pmf comparison to absorb
/// floating-point ties.
pub fn binom_p_value_two_sided(x: u64, n: u64, p0: f64) -> Result<f64> {
    check_counts(x, n)?;
    check_open_unit("p0", p0)?;
    let threshold = binom_pmf(x, n, p0) * (1.0 + 1e-7);
    let mut included = 0.0;
    let mut excluded = 0.0;
    for j in 0..=n {
        let pj = binom_pmf(j, n, p0);
        if pj <= threshold {
            included += pj;
        } else {
            excluded += pj;
        }
    }
    // small p-values keep relative precision from the direct sum; near 1 the
    // complement avoids accumulation error (and is exactly 1 when nothing is
    // excluded)
    let total = if included <= 0.5 {
        included
    } else {
        1.0 - excluded
    };
    Ok(total.clamp(0.0, 1.0))
}

/// One-sided lower Clopper-Pearson confidence bound: the largest p such that
/// P[Binomial(n, p) >= x] = 1 - conf, i.e. the (1 - conf) quantile of
/// Beta(x, n - x + 1). Returns 0 when x = 0.
///
/// Solved by bisection on the regularized incomplete beta (unconditionally
/// convergent; 200 iterations cap, well past the 1e-10 accuracy target).
pub fn clopper_pearson_lower(x: u64, n: u64, conf: f64) -> Result<f64> {
    check_counts(x, n)?;
    check_open_unit("conf", conf)?;
    if x == 0 {
        return Ok(0.0);
    }
    let target = 1.0 - conf;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binom_sf_ge(x, n, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Standard normal CDF, accurate to well under 1e-12 absolute everywhere
/// (error-function based, with full relative precision in the lower tail).
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * special::erfc(-z / SQRT_2)
}

/// Standard normal quantile Phi^-1(p).
///
/// Acklam's rational approximation refined by one Newton step through
/// [`norm_cdf`]; the round trip |Phi(Phi^-1(p)) - p| stays below 1e-9 across
/// p in [1e-12, 1 - 1e-12].
pub fn norm_quantile(p: f64) -> Result<f64> {
    check_open_unit("p", p)?;
    let z = norm_quantile_approx(p);
    let density = norm_pdf(z);
    // skip the refinement where the density underflows; the approximation is
    // already beyond representable CDF resolution out there
    if density > 1e-300 {
        Ok(z - (norm_cdf(z) - p) / density)
    } else {
        Ok(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values frozen from direct pmf summation / bisection on the
    // exact tail, computed at 40-digit precision before this module was
    // implemented.
    const SF_90_100_075: f64 = 1.371_005_631_679_502e-4;
    const SF_100_100_075: f64 = 3.207_202_185_381_504e-13;
    const SF_75_100_075: f64 = 0.553_470_823_848_248_2;
    const TWOSIDED_8_10: f64 = 0.109_375; // 112/1024 by hand
    const TWOSIDED_60_100: f64 = 0.056_887_933_640_980_79;
    const CP_80_100_0999: f64 = 0.653_557_271_289_380_5;
    const CP_100_100_0999: f64 = 0.933_254_300_796_991; // = 0.001^(1/100)
    const CP_50_100_0999: f64 = 0.344_798_006_425_317_76;
    const Z_075: f64 = 0.674_489_750_196_081_7;
    const Z_095: f64 = 1.644_853_626_951_472_2;

    #[test]
    fn p_value_ge_trivial_and_derived() {
        assert_eq!(binom_p_value_ge(0, 100, 0.75).unwrap(), 1.0);
        let unanimous = binom_p_value_ge(100, 100, 0.75).unwrap();
        assert!((unanimous - SF_100_100_075).abs() < 1e-12 * SF_100_100_075.max(1e-12));
        let ninety = binom_p_value_ge(90, 100, 0.75).unwrap();
        assert!((ninety - SF_90_100_075).abs() < 1e-12);
        let boundary = binom_p_value_ge(75, 100, 0.75).unwrap();
        assert!((boundary - SF_75_100_075).abs() < 1e-12);
    }

    #[test]
    fn p_value_ge_rejects_bad_arguments() {
        assert!(binom_p_value_ge(5, 4, 0.5).is_err());
        assert!(binom_p_value_ge(0, 0, 0.5).is_err());
        assert!(binom_p_value_ge(1, 2, 0.0).is_err());
        assert!(binom_p_value_ge(1, 2, 1.0).is_err());
    }

    #[test]
    fn two_sided_examples() {
        assert_eq!(binom_p_value_two_sided(5, 10, 0.5).unwrap(), 1.0);
        let extreme = binom_p_value_two_sided(10, 10, 0.5).unwrap();
        assert!((extreme - 0.001_953_125).abs() < 1e-15);
        let eight = binom_p_value_two_sided(8, 10, 0.5).unwrap();
        assert!((eight - TWOSIDED_8_10).abs() < 1e-13);
        let sixty = binom_p_value_two_sided(60, 100, 0.5).unwrap();
        assert!((sixty - TWOSIDED_60_100).abs() < 1e-12);
    }

    #[test]
    fn clopper_pearson_examples() {
        assert_eq!(clopper_pearson_lower(0, 50, 0.999).unwrap(), 0.0);
        let full = clopper_pearson_lower(100, 100, 0.999).unwrap();
        assert!((full - CP_100_100_0999).abs() < 1e-10);
        let eighty = clopper_pearson_lower(80, 100, 0.999).unwrap();
        assert!((eighty - CP_80_100_0999).abs() < 1e-10);
        let half = clopper_pearson_lower(50, 100, 0.999).unwrap();
        assert!((half - CP_50_100_0999).abs() < 1e-10);
        assert!(half < 0.5);
        assert!(clopper_pearson_lower(5, 4, 0.9).is_err());
        assert!(clopper_pearson_lower(2, 4, 1.0).is_err());
    }

    #[test]
    fn norm_cdf_reference_points() {
        assert_eq!(norm_cdf(0.0), 0.5);
        assert!((norm_cdf(Z_095) - 0.95).abs() < 1e-10);
        assert!((norm_cdf(-Z_095) - 0.05).abs() < 1e-10);
        // deep tail keeps relative precision
        let tail = norm_cdf(-7.0);
        assert!((tail - 1.279_812_543_885_835e-12).abs() < 1e-24);
    }

    #[test]
    fn norm_quantile_reference_points() {
        assert_eq!(norm_quantile(0.5).unwrap(), 0.0);
        assert!((norm_quantile(0.75).unwrap() - Z_075).abs() < 1e-9);
        assert!((norm_quantile(0.95).unwrap() - Z_095).abs() < 1e-9);
        // tail branches
        assert!((norm_quantile(1e-9).unwrap() - -5.997_807_015_007_687).abs() < 1e-8);
        assert!((norm_quantile(1e-12).unwrap() - -7.034_483_825_301_132).abs() < 1e-8);
        assert!((norm_quantile(1e-5).unwrap() - -4.264_890_793_922_825).abs() < 1e-9);
        assert!((norm_quantile(0.9999).unwrap() - 3.719_016_485_455_680_6).abs() < 1e-9);
        assert!(norm_quantile(0.0).is_err());
        assert!(norm_quantile(1.0).is_err());
        assert!(norm_quantile(-0.1).is_err());
    }
}
