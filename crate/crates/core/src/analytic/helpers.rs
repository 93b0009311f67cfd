//! Auxiliary integrals behind the ergodic-rate closed forms.
//!
//! `Φ` and friends multiply exponentially large and small factors; each has a
//! scaled twin (suffix `_scaled`) that carries the product analytically, and
//! the rate expressions only ever use those.

use std::sync::OnceLock;

use gauss_quad::GaussLaguerre;

use crate::error::{Error, Result};
use crate::specfun::{ei_neg_scaled, expint_en_scaled_unchecked, factorial};

use super::{across_singularity, SINGULAR_WINDOW};
use crate::quad::integrate_to_inf;

/// Below this `|ν|/(μτ)` the closed form of `Φ` loses digits to the
/// `(μ/ν)^{n+1}` factors and the series in `ν` takes over.
const PHI_SERIES_RATIO: f64 = 0.25;

fn check_phi_args(func: &'static str, mu: f64, nu: f64, tau: f64) -> Result<()> {
    if !(mu > 0.0) || !(tau > 0.0) || !nu.is_finite() {
        return Err(Error::domain(
            func,
            format!("need mu > 0, tau > 0, got mu={mu}, tau={tau}, nu={nu}"),
        ));
    }
    if !(mu * tau + nu > 0.0) {
        return Err(Error::domain(
            func,
            format!("need mu*tau + nu > 0, got {}", mu * tau + nu),
        ));
    }
    Ok(())
}

/// `Φ(μ, ν, τ, n) = -∫_τ^∞ t^{-(n+2)} Ei(-μt - ν) dt`.
pub fn phi(mu: f64, nu: f64, tau: f64, n: usize) -> Result<f64> {
    Ok((-(mu * tau + nu)).exp() * phi_scaled(mu, nu, tau, n)?)
}

/// `e^{μτ+ν} Φ(μ, ν, τ, n)`.
pub fn phi_scaled(mu: f64, nu: f64, tau: f64, n: usize) -> Result<f64> {
    check_phi_args("phi", mu, nu, tau)?;
    let x = mu * tau;
    if nu == 0.0 {
        return Ok(phi_bar_zero_scaled(mu, tau, n));
    }
    if nu.abs() < PHI_SERIES_RATIO * x {
        return Ok(phi_series_scaled(mu, nu, tau, n));
    }
    let np1 = (n + 1) as f64;
    let sg = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let r = (mu / nu).powi(n as i32 + 1);
    let a = -(1.0 / np1) * (tau.powi(-(n as i32) - 1) + sg * r) * ei_neg_scaled(x + nu)?;
    let b = (sg / np1) * r * crate::specfun::truncated_exp_series(n, nu) * ei_neg_scaled(x)?;
    let mut s = 0.0;
    for m in 1..=n {
        let mut inner = 0.0;
        for k in 0..m {
            inner += factorial(m - k - 1) * (-x).powi(k as i32);
        }
        s += (-nu / x).powi(m as i32) / factorial(m) * inner;
    }
    let c = -(sg / np1) * r * s;
    Ok(a + b + c)
}

/// `e^{μτ} Φ(μ, 0, τ, n)`.
fn phi_bar_zero_scaled(mu: f64, tau: f64, n: usize) -> f64 {
    let x = mu * tau;
    let np1 = (n + 1) as f64;
    let sg = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let fnp1 = factorial(n + 1);
    let first = -(tau.powi(-(n as i32) - 1) + sg * mu.powi(n as i32 + 1) / fnp1)
        * (-expint_en_scaled_unchecked(1, x));
    let mut s = 0.0;
    for m in 0..=n {
        s += factorial(n - m) * (-x).powi(m as i32);
    }
    (first - s / (fnp1 * tau.powi(n as i32 + 1))) / np1
}

/// Taylor series of `Φ` in `ν` about 0, scaled by `e^{μτ+ν}`.
///
/// `∂^k/∂ν^k Ei(-y-ν)|_0 = (-1)^{k-1} e^{-y} Σ_j C(k-1,j) j! y^{-j-1}`, and each
/// term integrates to a generalized exponential integral `E_{n+3+j}(μτ)`.
fn phi_series_scaled(mu: f64, nu: f64, tau: f64, n: usize) -> f64 {
    let x = mu * tau;
    let mut total = phi_bar_zero_scaled(mu, tau, n);
    let mut nu_pow = 1.0;
    for k in 1..200usize {
        nu_pow *= nu / k as f64;
        let mut inner = 0.0;
        // C(k-1, j) j! = (k-1)!/(k-1-j)!
        let mut coef = 1.0;
        for j in 0..k {
            if j > 0 {
                coef *= (k - j) as f64;
            }
            inner += coef
                * mu.powi(-(j as i32) - 1)
                * tau.powi(-((n + 2 + j) as i32))
                * expint_en_scaled_unchecked(n + 3 + j, x);
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let term = nu_pow * sign * inner;
        total -= term;
        if term.abs() < 1e-17 * total.abs() {
            break;
        }
    }
    total * nu.exp()
}

/// `Φ̄`: the `ν = 0` form when `ν` vanishes, `Φ` otherwise.
pub fn phi_bar(mu: f64, nu: f64, tau: f64, n: usize) -> Result<f64> {
    Ok((-(mu * tau + nu)).exp() * phi_bar_scaled(mu, nu, tau, n)?)
}

pub fn phi_bar_scaled(mu: f64, nu: f64, tau: f64, n: usize) -> Result<f64> {
    if nu == 0.0 {
        check_phi_args("phi_bar", mu, nu, tau)?;
        return Ok(phi_bar_zero_scaled(mu, tau, n));
    }
    phi_scaled(mu, nu, tau, n)
}

/// Once `h` times the distance from 0 to the integrand's nearest pole
/// exceeds this, the closed forms cancel badly and the Laplace integral is
/// taken by Gauss-Laguerre instead.
pub const LAPLACE_RATIO: f64 = 400.0;

const LAGUERRE_NODES: usize = 48;

fn laguerre() -> &'static GaussLaguerre {
    static RULE: OnceLock<GaussLaguerre> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLaguerre::new(LAGUERRE_NODES, 0.0).expect("valid Gauss-Laguerre degree")
    })
}

/// `∫_0^∞ g(z) e^{-hz} dz` for `g` smooth on `[0, ~LAPLACE_RATIO/h]`.
fn laplace(g: impl Fn(f64) -> f64, h: f64) -> f64 {
    laguerre().integrate(|t| g(t / h)) / h
}

/// `∫_0^∞ g(z) e^{-hz} dz` by adaptive quadrature to ~1e-12 relative; used
/// at removable singularities of the closed forms.
fn laplace_adaptive(g: impl Fn(f64) -> f64, h: f64) -> Result<f64> {
    let f = |z: f64| g(z) * (-h * z).exp();
    let rough = integrate_to_inf(&f, 0.0, 1e-6)?;
    integrate_to_inf(&f, 0.0, 1e-12 * rough.abs().max(f64::MIN_POSITIVE))
}

fn near(x: f64, s: f64) -> bool {
    (x - s).abs() <= SINGULAR_WINDOW * s.abs()
}

fn ln2() -> f64 {
    std::f64::consts::LN_2
}

/// `Θ(a,b,c,d,h,l)`, equal to
/// `b(d-1)/ln2 ∫_0^∞ (1+cz)^{1-l} e^{-hz} / ((1+z)(az+b)(az+db)) dz`.
pub fn theta(a: f64, b: f64, c: f64, d: f64, h: f64, l: usize) -> Result<f64> {
    if !(b > 0.0 && c > 0.0 && d > 0.0 && h > 0.0 && a >= 0.0) || l == 0 {
        return Err(Error::domain(
            "theta",
            format!(
                "need a >= 0, b, c, d, h > 0, l >= 1; got a={a}, b={b}, c={c}, d={d}, h={h}, l={l}"
            ),
        ));
    }
    if a == 0.0 {
        return Ok((d - 1.0) / (d * b * ln2()) * k_integral(c, l - 1, h)?);
    }
    let e = 1 - l as i32;
    let g = |z: f64| (1.0 + c * z).powi(e) / ((1.0 + z) * (a * z + b) * (a * z + d * b));
    let pole = 1f64.min(b / a).min(d * b / a).min(1.0 / c);
    if h * pole > LAPLACE_RATIO {
        return Ok(b * (d - 1.0) * laplace(g, h) / ln2());
    }
    if near(d, 1.0) || near(a, b) || near(a, d * b) {
        return Ok(b * (d - 1.0) * laplace_adaptive(g, h)? / ln2());
    }
    let ab = a - b;
    let adb = a - d * b;
    let mut r = -ei_neg_scaled(b * h / a)? / ab
        + ei_neg_scaled(b * h * d / a)? / adb
        + (1.0 - d) * b * ei_neg_scaled(h)? / (ab * adb);
    if l >= 2 {
        let lm1 = (l - 1) as f64;
        let n = l - 2;
        r -= lm1 * phi_scaled(h / c, h * (b * c - a) / (a * c), 1.0, n)? / ab;
        r += lm1 * phi_scaled(h / c, h * (b * c * d - a) / (a * c), 1.0, n)? / adb;
        r += lm1 * (1.0 - d) * b * phi_bar_scaled(h / c, h * (c - 1.0) / c, 1.0, n)? / (ab * adb);
    }
    Ok(r / ln2())
}

/// `Ψ(a,b,c,h,l) = ∫_0^∞ (a+bz)^{-l} e^{-hz} / ((1+z)(a+cz)) dz`.
pub fn psi(a: f64, b: f64, c: f64, h: f64, l: usize) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && c > 0.0 && h > 0.0) || l == 0 {
        return Err(Error::domain(
            "psi",
            format!("need a, b, c, h > 0 and l >= 1; got a={a}, b={b}, c={c}, h={h}, l={l}"),
        ));
    }
    let e = -(l as i32);
    let g = |z: f64| (a + b * z).powi(e) / ((1.0 + z) * (a + c * z));
    if h * 1f64.min(a / b).min(a / c) > LAPLACE_RATIO {
        return Ok(laplace(g, h));
    }
    if near(c, a) {
        return laplace_adaptive(g, h);
    }
    let lf = l as f64;
    let ac = a - c;
    let mut r = a.powi(-(l as i32)) / ac * (ei_neg_scaled(a * h / c)? - ei_neg_scaled(h)?);
    r -= lf / ac * phi_scaled(h / b, h * (b - a) / b, a, l - 1)?;
    r += lf / ac * phi_scaled(h / b, a * h * (b - c) / (b * c), a, l - 1)?;
    Ok(r)
}

/// `∫_0^∞ (1+κz)^{-m} e^{-sz} / (1+z) dz` for `κ >= 0`, `s > 0`.
///
/// Partial fractions in `w = 1+κz` give
/// `c^{-m} e^s E_1(s) - Σ_{j=1}^{m} c^{-(m-j+1)} e^{s/κ} E_j(s/κ)` with
/// `c = 1-κ`. Near `κ = 1` that cancels, so a series in `κ-1` is used there.
pub fn k_integral(kappa: f64, m: usize, s: f64) -> Result<f64> {
    if !(kappa >= 0.0) || !(s > 0.0) {
        return Err(Error::domain(
            "k_integral",
            format!("need kappa >= 0 and s > 0, got {kappa}, {s}"),
        ));
    }
    if kappa == 0.0 || m == 0 {
        return Ok(expint_en_scaled_unchecked(1, s));
    }
    let eps = kappa - 1.0;
    if eps.abs() < 0.05 {
        // (1+κz)^{-m} = (1+z)^{-m} (1 + ε z/(1+z))^{-m}
        // ∫ z^k (1+z)^{-m-k-1} e^{-sz} = Σ_i C(k,i) (-1)^{k-i} e^s E_{m+k+1-i}(s)
        let mut total = 0.0;
        // C(-m, k), updated in place
        let mut binom_m = 1.0;
        for k in 0..80usize {
            if k > 0 {
                binom_m *= -((m + k - 1) as f64) / k as f64;
            }
            let mut jk = 0.0;
            let mut ck = 1.0;
            for i in 0..=k {
                if i > 0 {
                    ck *= (k - i + 1) as f64 / i as f64;
                }
                let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
                jk += sign * ck * expint_en_scaled_unchecked(m + k + 1 - i, s);
            }
            let term = binom_m * eps.powi(k as i32) * jk;
            total += term;
            if k > 2 && term.abs() < 1e-17 * total.abs() {
                break;
            }
        }
        return Ok(total);
    }
    let c = 1.0 - kappa;
    let y = s / kappa;
    let mut r = c.powi(-(m as i32)) * expint_en_scaled_unchecked(1, s);
    for j in 1..=m {
        r -= c.powi(-((m - j + 1) as i32)) * expint_en_scaled_unchecked(j, y);
    }
    Ok(r)
}

/// `∫_0^∞ e^{-hz} / ((1+z)(a+bz)) dz` for `a, b, h > 0`.
pub fn j_integral(a: f64, b: f64, h: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && h > 0.0) {
        return Err(Error::domain(
            "j_integral",
            format!("need a, b, h > 0, got {a}, {b}, {h}"),
        ));
    }
    // 1/((1+z)(a+bz)) = [1/(1+z) - b/(a+bz)]/(a-b)
    let f = |b: f64| {
        Ok((expint_en_scaled_unchecked(1, h) - expint_en_scaled_unchecked(1, h * a / b)) / (a - b))
    };
    across_singularity(b, a, f)
}

/// `∫_0^∞ e^{-hz} / ((1+z)(az+b)) dz` for `a >= 0`, `b > 0`.
pub fn j_integral_rev(a: f64, b: f64, h: f64) -> Result<f64> {
    if !(a >= 0.0 && b > 0.0 && h > 0.0) {
        return Err(Error::domain(
            "j_integral_rev",
            format!("need a >= 0, b > 0, h > 0, got {a}, {b}, {h}"),
        ));
    }
    let e1h = expint_en_scaled_unchecked(1, h);
    if a == 0.0 {
        return Ok(e1h / b);
    }
    let f = |a: f64| Ok((e1h - expint_en_scaled_unchecked(1, h * b / a)) / (b - a));
    across_singularity(a, b, f)
}
