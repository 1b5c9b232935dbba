//! Complementary error function, accurate in the far tail.
//!
//! Two regimes: a Maclaurin series for the bulk and a continued fraction
//! (Lentz evaluation) for the tail, so that `erfc` keeps *relative* accuracy
//! where Gaussian tail probabilities get small. Computed in f64 regardless
//! of the caller's scalar type.

/// erfc(x) = 2/sqrt(pi) * integral of exp(-t^2) from x to infinity.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 1.5 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// Upper tail P(Z > z) of the standard normal.
pub fn normal_upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Two-sided tail P(|Z| > z), z >= 0.
pub fn normal_two_sided_tail(z: f64) -> f64 {
    erfc(z / std::f64::consts::SQRT_2)
}

/// Maclaurin series for erf, converges quickly for |x| <~ 2.
fn erf_series(x: f64) -> f64 {
    let two_over_sqrt_pi = 2.0 / std::f64::consts::PI.sqrt();
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 0usize;
    loop {
        k += 1;
        // term_k = (-1)^k x^(2k+1) / (k! (2k+1))
        term *= -x2 / k as f64;
        let contrib = term / (2 * k + 1) as f64;
        sum += contrib;
        if contrib.abs() < 1e-18 * sum.abs() || k > 200 {
            break;
        }
    }
    two_over_sqrt_pi * sum
}

/// A&S 7.1.14: sqrt(pi) e^{x^2} erfc(x) = 1/(x+ (1/2)/(x+ 1/(x+ (3/2)/(x+ ...))))
/// evaluated with the modified Lentz algorithm.
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0;
    for n in 0..200 {
        // b_n = x for every level, a_1 = 1, a_n = (n-1)/2 afterwards
        let a = if n == 0 { 1.0 } else { (n as f64) / 2.0 };
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / std::f64::consts::PI.sqrt() * f
}
