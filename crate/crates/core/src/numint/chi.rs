//! Distribution of the length of a standard Gaussian vector.

use std::f64::consts::{LN_2, SQRT_2};

use crate::asymptotics::log_gamma;

/// `t^m exp(-t^2/2) / (2^(m/2) Gamma(m/2 + 1))`: the step between the chi
/// distributions with `m` and `m + 2` degrees of freedom.
fn chi_step(m: usize, t: f64) -> f64 {
    let m = m as f64;
    (m * t.ln() - 0.5 * t * t - 0.5 * m * LN_2 - log_gamma(0.5 * m + 1.0)).exp()
}

/// `Phi_k(t)`: the probability that a `k`-dimensional standard Gaussian
/// vector has length at most `t`. `Phi_1(t) = erf(t / sqrt 2)` and
/// `Phi_2(t) = 1 - exp(-t^2 / 2)`.
pub fn phi_k(k: usize, t: f64) -> f64 {
    assert!(k >= 1, "chi distribution needs k >= 1");
    if t <= 0.0 {
        return 0.0;
    }
    if t.is_infinite() {
        return 1.0;
    }
    match k {
        1 => libm::erf(t / SQRT_2),
        2 => -(-0.5 * t * t).exp_m1(),
        _ => {
            let tail = chi_tail(k, t);
            if tail <= 0.5 {
                return 1.0 - tail;
            }
            // lower regularized gamma P(k/2, t^2/2) by its positive power series
            let s = 0.5 * k as f64;
            let x = 0.5 * t * t;
            let (mut term, mut sum, mut n) = (1.0, 1.0, 1.0);
            while term > 1e-17 * sum {
                term *= x / (s + n);
                sum += term;
                n += 1.0;
            }
            (s * x.ln() - x - log_gamma(s + 1.0)).exp() * sum
        }
    }
}

/// `1 - Phi_k(t)`, computed without cancellation in the far tail.
pub fn chi_tail(k: usize, t: f64) -> f64 {
    assert!(k >= 1, "chi distribution needs k >= 1");
    if t <= 0.0 {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let (mut tail, mut m) = if k % 2 == 1 {
        (libm::erfc(t / SQRT_2), 1)
    } else {
        ((-0.5 * t * t).exp(), 2)
    };
    while m < k {
        tail += chi_step(m, t);
        m += 2;
    }
    tail
}
