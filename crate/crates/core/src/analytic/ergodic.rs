//! Ergodic rates of the PMUX and PDIV streams.
//!
//! Each function takes one [`AnalyticParams`] per user of the group; `α`,
//! `φ`, `ρ` and `χ` are read from the first entry and must agree across the
//! list.

use std::f64::consts::LN_2;

use super::helpers::{j_integral, j_integral_rev, k_integral, psi, theta};
use super::{across_singularity, AnalyticParams};
use crate::error::{Error, Result};
use crate::specfun::{ei_neg_scaled, factorial, truncated_exp_series};

fn check_group(ps: &[AnalyticParams]) -> Result<&AnalyticParams> {
    let first = ps
        .first()
        .ok_or_else(|| Error::domain("ergodic", "empty user list"))?;
    for p in ps {
        p.validate()?;
        let same = p.alpha == first.alpha
            && p.phi == first.phi
            && p.rho == first.rho
            && p.chi == first.chi
            && p.xi == first.xi;
        if !same || p.users != ps.len() {
            return Err(Error::domain(
                "ergodic",
                format!(
                    "per-user params must share alpha, phi, rho, chi, xi and list all {} users",
                    p.users
                ),
            ));
        }
    }
    Ok(first)
}

/// Common stream of PMUX: `U · E[min_u log2(1+γ^c_u)]`.
///
/// The min of `U` independent common SINRs has survival function
/// `(α/(α+χβz))^{U²} e^{-zφΣ(1/ζ)/(ρα)}`; its rate integral is evaluated by
/// partial fractions (see [`k_integral`]).
pub fn ergodic_common_pmux(ps: &[AnalyticParams]) -> Result<f64> {
    let p0 = check_group(ps)?;
    let u = ps.len();
    let inv_zeta: f64 = ps.iter().map(|p| 1.0 / p.zeta).sum();
    let s = p0.phi * inv_zeta / (p0.rho * p0.alpha);
    let mut total = 0.0;
    for p in ps {
        total += k_integral(p0.chi * p.beta / p0.alpha, u * u, s)?;
    }
    Ok(total / LN_2)
}

/// The same quantity in its textbook rearrangement (prefactor
/// `(α/(χβ-α))^{U²}`, truncated exponential series and a double finite sum).
/// Suffers cancellation for small `χ`; kept for cross-checking.
pub fn ergodic_common_pmux_printed(ps: &[AnalyticParams]) -> Result<f64> {
    let p0 = check_group(ps)?;
    if p0.chi == 0.0 {
        return ergodic_common_pmux(ps);
    }
    let n = ps.len() * ps.len();
    let a = p0.alpha;
    let inv_zeta: f64 = ps.iter().map(|p| 1.0 / p.zeta).sum();
    let x_arg = p0.phi * inv_zeta / (p0.rho * a);
    let mut total = 0.0;
    let term = |cb: f64| -> Result<f64> {
        let y = p0.phi * inv_zeta / (p0.rho * cb);
        let w = x_arg - y;
        let mut tail = 0.0;
        for m in 1..n {
            let mut inner = 0.0;
            for k in 0..m {
                inner += factorial(m - k - 1) * (-y).powi(k as i32);
            }
            tail += (-(cb - a) / a).powi(m as i32) / factorial(m) * inner;
        }
        let br = ei_neg_scaled(x_arg)? - truncated_exp_series(n - 1, w) * ei_neg_scaled(y)? + tail;
        let sign = if (n - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(sign * (a / (cb - a)).powi(n as i32) * br)
    };
    for p in ps {
        let cb = p0.chi * p.beta;
        total += across_singularity(cb, a, term)?;
    }
    Ok(total / LN_2)
}

/// Private streams of PMUX, summed over users.
pub fn ergodic_private_pmux(ps: &[AnalyticParams]) -> Result<f64> {
    check_group(ps)?;
    let mut total = 0.0;
    for p in ps {
        let bb = p.phi / (p.rho * p.zeta * p.beta);
        if p.chi == 0.0 {
            total += -ei_neg_scaled(bb)?;
            continue;
        }
        let term = |ca: f64| -> Result<f64> {
            let aa = p.phi / (p.rho * p.zeta * ca);
            Ok(p.beta / (p.beta - ca) * (ei_neg_scaled(aa)? - ei_neg_scaled(bb)?))
        };
        let ca = p.chi * p.alpha;
        total += across_singularity(ca, p.beta, term)?;
    }
    Ok(total / LN_2)
}

/// Private streams of PDIV, summed over users: five `Θ` terms per user.
pub fn ergodic_private_pdiv(ps: &[AnalyticParams]) -> Result<f64> {
    check_group(ps)?;
    let mut total = 0.0;
    for p in ps {
        let (a, b, xi, l) = (p.alpha, p.beta, p.xi, p.users);
        let h = p.phi / (p.rho * p.zeta * b);
        if p.chi == 0.0 {
            let r = 2.0
                * (b * j_integral_rev(xi * a, b, h)?
                    - 0.5 * b * j_integral_rev(2.0 * xi * a, b, 2.0 * h)?);
            total += r / LN_2;
            continue;
        }
        let term = |x: f64| -> Result<f64> {
            let om = 1.0 - x;
            Ok(2.0 * b / (om * om) * theta(xi * a, b, x, 1.0 / x, h, l)?
                + 2.0 * x * x * b / (om * om) * theta(xi * a, b, 1.0, x, h / x, l)?
                + x.powi(3) * b / om.powi(3) * theta(2.0 * xi * a, b, 2.0, x, 2.0 * h / x, l)?
                - b / om.powi(3) * theta(2.0 * xi * a, b, 2.0 * x, 1.0 / x, 2.0 * h, l)?
                - 2.0 * x * x * b / om.powi(3)
                    * theta((1.0 + x) * xi * a, b, 1.0 + x, x, (1.0 + x) * h / x, l)?)
        };
        total += across_singularity(p.chi, 1.0, term)?;
    }
    Ok(total)
}

/// Common stream of PDIV: five `Ψ` terms with the group-level argument
/// `h = φ Σ_l ζ_l / (U ρ α)`.
pub fn ergodic_common_pdiv(ps: &[AnalyticParams]) -> Result<f64> {
    let p0 = check_group(ps)?;
    let u = ps.len();
    let a = p0.alpha;
    let zsum: f64 = ps.iter().map(|p| p.zeta).sum();
    let h = p0.phi * zsum / (u as f64 * p0.rho * a);
    let pre = 2f64.powi(u as i32 - 1) / LN_2;
    let mut total = 0.0;
    for p in ps {
        let b = p.beta;
        let term = if p0.chi == 0.0 {
            a * (j_integral(a, b, h)? - 0.5 * j_integral(a, 2.0 * b, 2.0 * h)?)
        } else {
            let sum = |x: f64| -> Result<f64> {
                let om = 1.0 - x;
                Ok(psi(a, x * b, b, h, u)? / om
                    - x * psi(a, b, b / x, h / x, u)? / om
                    - x * x * psi(a, 2.0 * b, 2.0 * b / x, 2.0 * h / x, u)? / (2.0 * om * om)
                    - psi(a, 2.0 * x * b, 2.0 * b, 2.0 * h, u)? / (2.0 * om * om)
                    + x * psi(a, (1.0 + x) * b, (1.0 + x) * b / x, (1.0 + x) * h / x, u)?
                        / (om * om))
            };
            let s = across_singularity(p0.chi, 1.0, sum)?;
            a.powi(u as i32 + 1) * s
        };
        total += term / u as f64;
    }
    Ok(pre * total)
}
