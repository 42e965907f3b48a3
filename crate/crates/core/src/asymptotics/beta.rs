//! Log-gamma, log-Beta and the regularized incomplete Beta function.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Above this argument `ln Gamma` is evaluated by Stirling's series.
const STIRLING_MIN: f64 = 10.0;
const HALF_LN_TAU: f64 = 0.918_938_533_204_672_8;

/// Stirling remainder `ln Gamma(z) - [(z - 1/2) ln z - z + ln(2 pi)/2]`.
fn stirling_remainder(z: f64) -> f64 {
    let r = 1.0 / z;
    let r2 = r * r;
    r * (1.0 / 12.0
        - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))))
}

/// `ln Gamma(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x >= STIRLING_MIN {
        return (x - 0.5) * x.ln() - x + HALF_LN_TAU + stirling_remainder(x);
    }
    if x < 0.5 {
        // Gamma(x) = Gamma(x + 1) / x keeps the Lanczos sum in its good range
        return log_gamma(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let mut s = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        s += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_TAU + (z + 0.5) * t.ln() - t + s.ln()
}

/// `ln Gamma(y) - ln Gamma(x + y)` for `y >= STIRLING_MIN`, free of the
/// cancellation between two large log-gammas.
fn log_gamma_ratio(x: f64, y: f64) -> f64 {
    -x * y.ln() - (x + y - 0.5) * (x / y).ln_1p() + x + stirling_remainder(y)
        - stirling_remainder(x + y)
}

/// `ln B(x, y)` for `x, y > 0`.
pub fn log_beta(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
        return Err(Error::Domain(format!(
            "Beta function needs positive finite arguments, got ({x}, {y})"
        )));
    }
    let (small, large) = if x <= y { (x, y) } else { (y, x) };
    Ok(if large < STIRLING_MIN {
        log_gamma(small) + log_gamma(large) - log_gamma(small + large)
    } else {
        log_gamma(small) + log_gamma_ratio(small, large)
    })
}

/// `C(n, m)` for integers, exact while it fits the 53-bit mantissa and
/// through [`log_binomial`] beyond.
pub fn binomial(n: u64, m: u64) -> f64 {
    if m > n {
        return 0.0;
    }
    let m = m.min(n - m);
    let mut c = 1.0f64;
    for i in 0..m {
        // c * (n - i) is divisible by i + 1, so each step stays an integer
        c = c * (n - i) as f64 / (i + 1) as f64;
        if c > 2f64.powi(53) {
            return log_binomial(n as f64, m as f64).expect("valid binomial").exp();
        }
    }
    c
}

/// `ln C(n, m)` for real `n >= m >= 0`, through `Gamma`.
pub fn log_binomial(n: f64, m: f64) -> Result<f64> {
    if !(m >= 0.0 && n >= m) {
        return Err(Error::Domain(format!(
            "binomial coefficient needs 0 <= m <= n, got ({n}, {m})"
        )));
    }
    Ok(-(n + 1.0).ln() - log_beta(n - m + 1.0, m + 1.0)?)
}

const CF_MAX_ITER: usize = 10_000;
const CF_EPS: f64 = 1e-15;
const CF_TINY: f64 = 1e-300;

/// Continued fraction for `I_x(a, b)` (modified Lentz), valid for
/// `x < (a + 1) / (a + b + 2)`.
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        for coeff in [aa, -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))] {
            d = 1.0 + coeff * d;
            if d.abs() < CF_TINY {
                d = CF_TINY;
            }
            c = 1.0 + coeff / c;
            if c.abs() < CF_TINY {
                c = CF_TINY;
            }
            d = 1.0 / d;
            h *= d * c;
        }
        if (d * c - 1.0).abs() < CF_EPS {
            return Ok(h);
        }
    }
    Err(Error::ToleranceNotMet {
        estimate: h,
        error: f64::NAN,
        target: CF_EPS,
    })
}

/// `I_x(a, b) = B(x; a, b) / B(a, b)`.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "incomplete Beta needs 0 <= x <= 1, got {x}"
        )));
    }
    let lb = log_beta(a, b)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let front = (a * x.ln() + b * (-x).ln_1p() - lb).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_continued_fraction(x, a, b)? / a)
    } else {
        Ok(1.0 - front * beta_continued_fraction(1.0 - x, b, a)? / b)
    }
}
