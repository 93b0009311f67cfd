//! Special functions used by the closed-form outage and rate expressions.
//!
//! Everything here is real-valued and double precision. Functions that feed
//! products like `e^x Ei(-x)` come in an exponentially scaled form so callers
//! never see the overflow/underflow pair.

use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const EPS: f64 = 1e-17;
const MAX_ITER: usize = 10_000;

/// Below this argument `Ei(-x)` uses the power series, above it the
/// continued fraction.
pub const EI_SWITCH: f64 = 10.0;

/// Gamma function at a positive integer, `(n-1)!`.
pub fn gamma_int(n: i64) -> Result<f64> {
    if n <= 0 {
        return Err(Error::domain("gamma_int", format!("n = {n} must be >= 1")));
    }
    if n > 170 {
        return Err(Error::Overflow {
            func: "gamma_int",
            detail: format!("n = {n} exceeds 170"),
        });
    }
    if n <= 21 {
        let mut acc: u64 = 1;
        for k in 2..n as u64 {
            acc *= k;
        }
        return Ok(acc as f64);
    }
    let mut acc = 1.0f64;
    for k in 2..n {
        acc *= k as f64;
    }
    Ok(acc)
}

/// `k!` as a float, valid for `k <= 170`.
pub(crate) fn factorial(k: usize) -> f64 {
    (2..=k).fold(1.0, |a, i| a * i as f64)
}

/// Log-gamma for positive real arguments (Lanczos, g = 7, n = 9).
pub fn ln_gamma(a: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
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
    if a < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * a).sin()).ln() - ln_gamma(1.0 - a);
    }
    let x = a - 1.0;
    let mut s = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        s += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + s.ln()
}

/// Lower incomplete gamma `γ(a, x) = ∫_0^x t^{a-1} e^{-t} dt`.
pub fn lower_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(
            "lower_incomplete_gamma",
            format!("a = {a} must be > 0"),
        ));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(
            "lower_incomplete_gamma",
            format!("x = {x} must be >= 0"),
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let lg = ln_gamma(a);
    let p = if x < a + 1.0 {
        gamma_series(a, x, lg)?
    } else {
        1.0 - gamma_cont_frac(a, x, lg)?
    };
    Ok(p * lg.exp())
}

/// Regularized lower incomplete gamma by its series.
fn gamma_series(a: f64, x: f64, lg: f64) -> Result<f64> {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            return Ok(sum * (-x + a * x.ln() - lg).exp());
        }
    }
    Err(Error::Numerical(format!(
        "gamma series did not converge at a={a}, x={x}"
    )))
}

/// Regularized upper incomplete gamma by Lentz's continued fraction.
fn gamma_cont_frac(a: f64, x: f64, lg: f64) -> Result<f64> {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok((-x + a * x.ln() - lg).exp() * h);
        }
    }
    Err(Error::Numerical(format!(
        "gamma continued fraction did not converge at a={a}, x={x}"
    )))
}

/// `Ei(-x)` for `x > 0`.
pub fn exp_integral_ei_neg(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(
            "exp_integral_ei_neg",
            format!("x = {x} must be > 0"),
        ));
    }
    if x < EI_SWITCH {
        Ok(ei_neg_series(x))
    } else {
        // e^{-x} underflows to zero long before the scaled value misbehaves
        Ok(-(-x).exp() * en_scaled_cf(1, x))
    }
}

/// `Ei(-x) = γ + ln x + Σ (-x)^k / (k k!)`.
fn ei_neg_series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..200 {
        term *= -x / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.abs() < EPS * sum.abs() {
            break;
        }
    }
    EULER_GAMMA + x.ln() + sum
}

/// `e^x Ei(-x)` for `x > 0`; tends to `-1/x` for large `x`.
pub fn ei_neg_scaled(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(
            "ei_neg_scaled",
            format!("x = {x} must be > 0"),
        ));
    }
    Ok(-expint_en_scaled_unchecked(1, x))
}

/// `e^x E_n(x)` for `n >= 0`, `x > 0`.
pub fn expint_en_scaled(n: usize, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(
            "expint_en_scaled",
            format!("x = {x} must be finite and > 0"),
        ));
    }
    Ok(expint_en_scaled_unchecked(n, x))
}

pub(crate) fn expint_en_scaled_unchecked(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0 / x;
    }
    if x <= 1.0 {
        en_series(n, x) * x.exp()
    } else {
        en_scaled_cf(n, x)
    }
}

/// Series for `E_n(x)`, `x <= 1`.
fn en_series(n: usize, x: f64) -> f64 {
    let nm1 = n - 1;
    let mut ans = if nm1 == 0 {
        -x.ln() - EULER_GAMMA
    } else {
        1.0 / nm1 as f64
    };
    let mut fact = 1.0;
    for i in 1..MAX_ITER {
        fact *= -x / i as f64;
        let del = if i != nm1 {
            -fact / (i as f64 - nm1 as f64)
        } else {
            let psi = -EULER_GAMMA + (1..=nm1).map(|k| 1.0 / k as f64).sum::<f64>();
            fact * (-x.ln() + psi)
        };
        ans += del;
        if del.abs() < ans.abs() * EPS {
            break;
        }
    }
    ans
}

/// Continued fraction for `e^x E_n(x)`, `x > 1`.
fn en_scaled_cf(n: usize, x: f64) -> f64 {
    let tiny = 1e-300;
    let nm1 = n as f64 - 1.0;
    let mut b = x + n as f64;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (nm1 + i as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `e_n(x) = Σ_{k=0}^{n} x^k / k!`.
pub fn truncated_exp_series(n: usize, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=n {
        term *= x / k as f64;
        sum += term;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_factorials() {
        assert_eq!(gamma_int(1).unwrap(), 1.0);
        assert_eq!(gamma_int(4).unwrap(), 6.0);
        assert_eq!(gamma_int(10).unwrap(), 362_880.0);
        assert_eq!(gamma_int(21).unwrap(), 2_432_902_008_176_640_000.0);
        assert!(gamma_int(0).is_err());
        assert!(gamma_int(171).is_err());
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        for n in 1..30 {
            let want = gamma_int(n).unwrap().ln();
            assert!((ln_gamma(n as f64) - want).abs() < 1e-12 * want.abs().max(1.0));
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn ei_branches_meet() {
        let lo = ei_neg_series(EI_SWITCH);
        let hi = -(-EI_SWITCH).exp() * en_scaled_cf(1, EI_SWITCH);
        assert!((lo - hi).abs() < 1e-10);
    }

    #[test]
    fn scaled_e1_continuity_at_one() {
        let a = en_series(1, 1.0) * 1f64.exp();
        let b = en_scaled_cf(1, 1.0);
        assert!((a - b).abs() < 1e-13);
    }
}
