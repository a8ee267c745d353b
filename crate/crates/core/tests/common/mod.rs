//! Reference Gaussian CDF built from algorithms unrelated to the library's
//! rational approximations: a positive-term power series near the origin and
//! a continued fraction in the tails.

#![allow(dead_code)]

use std::f64::consts::PI;

const SERIES_LIMIT: f64 = 3.0;

/// `erf(x)` for `0 <= x < SERIES_LIMIT` via
/// `2/sqrt(pi) * exp(-x^2) * sum 2^n x^(2n+1) / (2n+1)!!`.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term > sum * 1e-18 {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
    }
    2.0 / PI.sqrt() * (-x2).exp() * sum
}

/// `erfc(x)` for `x >= SERIES_LIMIT` via the Laplace continued fraction,
/// evaluated with the modified Lentz method.
fn erfc_cf(x: f64) -> f64 {
    // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = x + a / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / PI.sqrt() / f
}

/// Upper tail `Q(z) = P(Z > z)` of the standard normal.
pub fn upper_tail(z: f64) -> f64 {
    let x = z.abs() / std::f64::consts::SQRT_2;
    let erfc = if x < SERIES_LIMIT {
        1.0 - erf_series(x)
    } else {
        erfc_cf(x)
    };
    if z >= 0.0 {
        0.5 * erfc
    } else {
        1.0 - 0.5 * erfc
    }
}

/// `P(lo <= X <= hi)` for `X ~ N(mean, sd^2)`, `sd > 0`.
pub fn interval_prob(lo: f64, hi: f64, mean: f64, sd: f64) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    let (zl, zh) = ((lo - mean) / sd, (hi - mean) / sd);
    if zl >= 0.0 {
        upper_tail(zl) - upper_tail(zh)
    } else if zh <= 0.0 {
        upper_tail(-zh) - upper_tail(-zl)
    } else {
        1.0 - upper_tail(-zl) - upper_tail(zh)
    }
}
