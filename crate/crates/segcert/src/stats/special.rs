//! Scalar special functions backing the exact tests.
//!
//! Everything here is plain f64 arithmetic with no table lookups beyond a few
//! coefficient sets, so results are identical across platforms. The binomial
//! pmf uses the saddle-point form (stirlerr/bd0) so it stays accurate to a few
//! ulp for n up to 10^6 instead of losing digits to lgamma cancellation.

use std::f64::consts::PI;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7; // ln(sqrt(2*pi))
pub(crate) const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Lanczos approximation (g = 7, 9 terms) for ln Gamma(x), x > 0.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for positive real arguments.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection formula keeps the recursion shallow
        (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        LN_SQRT_2PI + (x + 0.5) * t.ln() - t + acc.ln()
    }
}

/// stirlerr(n) = ln n! - [n ln n - n + 0.5 ln(2 pi n)].
///
/// Series for n > 15, direct lgamma below (the arguments there are small
/// enough that the subtraction is harmless).
fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;

    if n <= 15.0 {
        return ln_gamma(n + 1.0) - (n + 0.5) * n.ln() + n - LN_SQRT_2PI;
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// bd0(x, np) = x ln(x/np) + np - x, evaluated without cancellation when
/// x is close to np.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        let mut j = 1u32;
        loop {
            ej *= v2;
            let s1 = s + ej / f64::from(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
            j += 1;
        }
    } else {
        x * (x / np).ln() + np - x
    }
}

/// Binomial probability mass P[X = k] for X ~ Binomial(n, p).
///
/// Saddle-point expansion; relative error stays at a few ulp for all n.
pub fn binom_pmf(k: u64, n: u64, p: f64) -> f64 {
    debug_assert!(k <= n);
    let q = 1.0 - p;
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    if k == 0 {
        return (nf * (-p).ln_1p()).exp();
    }
    if k == n {
        return (nf * p.ln()).exp();
    }
    let kf = k as f64;
    let nk = nf - kf;
    let lc = stirlerr(nf) - stirlerr(kf) - stirlerr(nk) - bd0(kf, nf * p) - bd0(nk, nf * q);
    // k, n - k, n are exactly representable, so ln(2 pi k (n-k) / n) from
    // separate logs carries no ratio rounding (log1p(-k/n) would lose ~6
    // digits when k approaches n)
    let lf = (2.0 * PI).ln() + kf.ln() + nk.ln() - nf.ln();
    (lc - 0.5 * lf).exp()
}

/// Continued-fraction part of the regularized incomplete beta function
/// (modified Lentz), i.e. I_x(a, b) = prefix * betacf(a, b, x) with
/// prefix = x^a (1-x)^b / (a B(a, b)).
///
/// Callers must arrange x < (a + 1) / (a + b + 2) for fast convergence.
fn betacf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 2000;
    const TINY: f64 = 1e-300;
    let eps = f64::EPSILON;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=MAX_ITER {
        let mf = m as f64;
        let m2 = 2.0 * mf;

        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;

        if (del - 1.0).abs() < eps {
            break;
        }
    }
    h
}

/// Upper binomial tail P[X >= x] for X ~ Binomial(n, p) via the identity
/// P[X >= x] = I_p(x, n - x + 1).
///
/// The incomplete-beta prefix is expressed through the saddle-point pmf,
/// which keeps the result accurate for large n where a plain lbeta-based
/// prefix would lose digits.
pub fn binom_sf_ge(x: u64, n: u64, p: f64) -> f64 {
    debug_assert!(x <= n && n >= 1);
    if x == 0 {
        return 1.0;
    }
    if p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    if x == n {
        return ((n as f64) * p.ln()).exp();
    }

    let a = x as f64;
    let b = (n - x + 1) as f64;
    // prefix = p^a (1-p)^b / (a B(a,b)) = pmf(x; n, p) * (1 - p)
    let prefix = binom_pmf(x, n, p) * (1.0 - p);

    let result = if p < (a + 1.0) / (a + b + 2.0) {
        prefix * betacf(a, b, p)
    } else {
        // complement branch: I_p(a,b) = 1 - I_{1-p}(b,a); the complementary
        // prefix differs by the factor a/b.
        1.0 - prefix * (a / b) * betacf(b, a, 1.0 - p)
    };
    result.clamp(0.0, 1.0)
}

/// erf via its Maclaurin series; accurate for |x| <= 2.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 1u32;
    loop {
        term *= -x2 / f64::from(k);
        let add = term / f64::from(2 * k + 1);
        let new = sum + add;
        if new == sum {
            break;
        }
        sum = new;
        k += 1;
    }
    sum * 2.0 / PI.sqrt()
}

/// erfc via the Laplace continued fraction (modified Lentz); for x >= 2.
///
/// sqrt(pi) e^{x^2} erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
/// partial numerators a_j = j/2 with constant partial denominator x.
fn erfc_cf(x: f64) -> f64 {
    const MAX_ITER: usize = 400;
    const TINY: f64 = 1e-300;
    let eps = f64::EPSILON;

    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for j in 1..=MAX_ITER {
        let a = j as f64 / 2.0;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        d = 1.0 / d;
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        let del = c * d;
        f *= del;
        if (del - 1.0).abs() < eps {
            break;
        }
    }
    (-x * x).exp() / PI.sqrt() / f
}

/// Complementary error function, full relative precision on the positive tail.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        2.0 - erfc(-x)
    } else if x < 2.0 {
        1.0 - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    if x.abs() < 2.0 {
        erf_series(x)
    } else if x > 0.0 {
        1.0 - erfc_cf(x)
    } else {
        erfc_cf(-x) - 1.0
    }
}

/// Standard normal density.
pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Acklam's rational approximation to the standard normal quantile.
/// Relative error below 1.2e-9 over the full open interval; callers refine
/// with one Newton step to reach full double precision.
pub fn norm_quantile_approx(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        // the rational form itself evaluates negative on the lower tail
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p > 1.0 - P_LOW {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}
