//! Upper incomplete gamma at integer order, the exponential integral E₁ and
//! Γ at half-integers.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest order accepted by the factorial-bearing formulas.
pub const MAX_ORDER: u32 = 161;

/// Above this `x` the scaled forms go through logarithms.
const SCALED_LOG_THRESHOLD: f64 = 30.0;

/// E₁ switches from the power series to the continued fraction here.
pub const E1_BRANCH_POINT: f64 = 1.5;

/// ln n!, exact products up to 20 and log sums beyond.
pub fn ln_factorial(n: u32) -> f64 {
    if n <= 20 {
        factorial(n).ln()
    } else {
        (2..=n).map(|k| (k as f64).ln()).sum()
    }
}

/// n! in floating point (overflows to infinity past 170).
pub fn factorial(n: u32) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn check_order(s: u32, x: f64) -> Result<()> {
    if s == 0 {
        return Err(Error::InvalidParameter {
            name: "s",
            value: 0.0,
            reason: "order 0 is E1; use exp_integral_e1",
        });
    }
    if s > MAX_ORDER {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s as f64,
            reason: "order above supported maximum",
        });
    }
    if !(x >= 0.0) || x.is_infinite() {
        return Err(Error::InvalidParameter {
            name: "x",
            value: x,
            reason: "must be finite and >= 0",
        });
    }
    Ok(())
}

/// ln Σ_{k=0}^{n} x^k / k!, summed in ascending k relative to the largest term.
fn ln_exp_partial_sum(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let lx = x.ln();
    let log_terms: Vec<f64> = (0..=n)
        .scan(0.0, |acc, k| {
            if k > 0 {
                *acc += lx - (k as f64).ln();
            }
            Some(*acc)
        })
        .collect();
    let peak = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = log_terms.iter().map(|t| (t - peak).exp()).sum();
    peak + sum.ln()
}

/// Γ(s, x) for integer `s >= 1`, via Γ(n+1, x) = n! e^{-x} Σ_{k=0}^{n} x^k/k!.
pub fn upper_incomplete_gamma(s: u32, x: f64) -> Result<f64> {
    check_order(s, x)?;
    let n = s - 1;
    if n <= 20 && x <= SCALED_LOG_THRESHOLD {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=n {
            term *= x / k as f64;
            sum += term;
        }
        Ok(factorial(n) * (-x).exp() * sum)
    } else {
        Ok(ln_upper_incomplete_gamma(s, x)?.exp())
    }
}

/// ln Γ(s, x) for integer `s >= 1`.
pub fn ln_upper_incomplete_gamma(s: u32, x: f64) -> Result<f64> {
    check_order(s, x)?;
    let n = s - 1;
    Ok(ln_factorial(n) - x + ln_exp_partial_sum(n, x))
}

/// e^{x} Γ(s, x), which stays O(poly(x)) where both factors would not.
pub fn scaled_upper_incomplete_gamma(s: u32, x: f64) -> Result<f64> {
    check_order(s, x)?;
    if x > SCALED_LOG_THRESHOLD {
        Ok((x + ln_upper_incomplete_gamma(s, x)?).exp())
    } else {
        Ok(x.exp() * upper_incomplete_gamma(s, x)?)
    }
}

/// Exponential integral E₁(x) = Γ(0, x), for `x > 0`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidParameter {
            name: "x",
            value: x,
            reason: "E1 is singular at 0 and undefined below",
        });
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(if x <= E1_BRANCH_POINT {
        e1_series(x)
    } else {
        e1_continued_fraction(x)
    })
}

/// E₁(x) = −γ − ln x − Σ_{k≥1} (−x)^k / (k·k!).
pub(crate) fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -x / k as f64;
        let contrib = term / k as f64;
        sum += contrib;
        if contrib.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// Modified Lentz evaluation of e^{-x} / (x + 1 − 1/(x + 3 − 4/(x + 5 − …))).
pub(crate) fn e1_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

/// Γ(k + 1/2) by the recurrence from Γ(1/2) = √π.
pub fn gamma_half_integer(k: u32) -> f64 {
    (1..=k).fold(PI.sqrt(), |acc, j| acc * (j as f64 - 0.5))
}

/// ln Γ(k + 1/2).
pub fn ln_gamma_half_integer(k: u32) -> f64 {
    (1..=k).map(|j| (j as f64 - 0.5).ln()).sum::<f64>() + 0.5 * PI.ln()
}
