//! Outage probabilities of the common and private streams.

use serde::{Deserialize, Serialize};

use super::{across_singularity, clamp_probability, AnalyticParams};
use crate::error::{Error, Result};
use crate::schemes::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stream {
    Common,
    Private,
}

/// `1 - (α/(α+χβτ))^U e^{-φτ/(ρζα)}`.
pub fn outage_common_pmux(p: &AnalyticParams) -> Result<f64> {
    p.validate()?;
    let (a, b, x, t) = (p.alpha, p.beta, p.chi, p.tau_c);
    let ok = (a / (a + x * b * t)).powi(p.users as i32) * (-p.noise_scale() * t / a).exp();
    clamp_probability(1.0 - ok, "outage_common_pmux")
}

/// `1 - β/(χατ+β) e^{-φτ/(ρζβ)}`.
pub fn outage_private_pmux(p: &AnalyticParams) -> Result<f64> {
    p.validate()?;
    let (a, b, x, t) = (p.alpha, p.beta, p.chi, p.tau_p);
    let ok = b / (x * a * t + b) * (-p.noise_scale() * t / b).exp();
    clamp_probability(1.0 - ok, "outage_private_pmux")
}

/// Common stream with selection over two Hypoexponential branch gains.
pub fn outage_common_pdiv(p: &AnalyticParams) -> Result<f64> {
    p.validate()?;
    let (a, b, t, g) = (p.alpha, p.beta, p.tau_c, p.noise_scale());
    let u = p.users as i32;
    let e = |k: f64| (-k * g * t / a).exp();
    let ok = if p.chi == 0.0 {
        2.0 * (a / (a + b * t) * e(1.0) - a / (2.0 * (a + 2.0 * b * t)) * e(2.0))
    } else {
        let pw = |s: f64| (a / (a + s * b * t)).powi(u) * a;
        let f = |x: f64| -> Result<f64> {
            let om = 1.0 - x;
            let t1 = pw(x) / (om * (a + b * t)) * e(1.0);
            let t2 = -x * x * pw(1.0) / (om * (x * a + b * t)) * e(1.0 / x);
            let t3 = -x.powi(3) * pw(2.0) / (2.0 * om * om * (x * a + 2.0 * b * t)) * e(2.0 / x);
            let t4 = -pw(2.0 * x) / (2.0 * om * om * (a + 2.0 * b * t)) * e(2.0);
            let t5 =
                x * x * pw(1.0 + x) / (om * om * (x * a + (1.0 + x) * b * t)) * e((1.0 + x) / x);
            Ok(2.0 * (t1 + t2 + t3 + t4 + t5))
        };
        across_singularity(p.chi, 1.0, f)?
    };
    clamp_probability(1.0 - ok, "outage_common_pdiv")
}

/// Private stream with selection over two branches and residual common
/// interference `ξ`.
pub fn outage_private_pdiv(p: &AnalyticParams) -> Result<f64> {
    p.validate()?;
    let (a, b, t, g, xi) = (p.alpha, p.beta, p.tau_p, p.noise_scale(), p.xi);
    let e = |k: f64| (-k * g * t / b).exp();
    let s = xi * a * t;
    let ok = if p.chi == 0.0 {
        2.0 * (b / (s + b) * e(1.0) - b / (2.0 * (2.0 * s + b)) * e(2.0))
    } else {
        let m = 1 - p.users as i32;
        let b2 = b * b;
        let f = |x: f64| -> Result<f64> {
            let om = 1.0 - x;
            let t1 = b2 / om * (1.0 + x * t).powi(m) / ((s + b) * (x * s + b)) * e(1.0);
            let t2 = -x * x * b2 / om * (1.0 + t).powi(m) / ((s + b) * (s + x * b)) * e(1.0 / x);
            let t3 = -x.powi(3) * b2 / (om * om) * (1.0 + 2.0 * t).powi(m)
                / (2.0 * (2.0 * s + b) * (2.0 * s + x * b))
                * e(2.0 / x);
            let t4 = -b2 / (2.0 * om * om) * (1.0 + 2.0 * x * t).powi(m)
                / ((2.0 * s + b) * (2.0 * x * s + b))
                * e(2.0);
            let s1 = (1.0 + x) * s;
            let t5 = x * x * b2 / (om * om) * (1.0 + (1.0 + x) * t).powi(m)
                / ((s1 + b) * (s1 + x * b))
                * e((1.0 + x) / x);
            Ok(2.0 * (t1 + t2 + t3 + t4 + t5))
        };
        across_singularity(p.chi, 1.0, f)?
    };
    clamp_probability(1.0 - ok, "outage_private_pdiv")
}

/// Common stream on one polarization with SIC, per-polarization RSMA.
pub fn outage_common_spmux(p: &AnalyticParams) -> Result<f64> {
    p.validate()?;
    let (a, b, x, t) = (p.alpha, p.beta, p.chi, p.tau_c);
    let ok = a / ((x * t + 1.0) * (a + b * t))
        * (1.0 + x * b * t / a).powi(-(p.users as i32))
        * (-p.noise_scale() * t / a).exp();
    clamp_probability(1.0 - ok, "outage_common_spmux")
}

pub fn outage_private_spmux(p: &AnalyticParams) -> Result<f64> {
    p.validate()?;
    let (a, b, x, t) = (p.alpha, p.beta, p.chi, p.tau_p);
    let ok = b * b / ((p.xi * a * t + b) * (x * a * t + b))
        * (1.0 + x * t).powi(-(p.users as i32))
        * (-p.noise_scale() * t / b).exp();
    clamp_probability(1.0 - ok, "outage_private_spmux")
}

/// Dispatch over the three dual-polarized rate-splitting schemes.
pub fn outage(scheme: Scheme, stream: Stream, p: &AnalyticParams) -> Result<f64> {
    match (scheme, stream) {
        (Scheme::Pmux, Stream::Common) => outage_common_pmux(p),
        (Scheme::Pmux, Stream::Private) => outage_private_pmux(p),
        (Scheme::Pdiv, Stream::Common) => outage_common_pdiv(p),
        (Scheme::Pdiv, Stream::Private) => outage_private_pdiv(p),
        (Scheme::Spmux, Stream::Common) => outage_common_spmux(p),
        (Scheme::Spmux, Stream::Private) => outage_private_spmux(p),
        _ => Err(Error::Unknown {
            kind: "closed-form outage",
            name: scheme.tag().into(),
        }),
    }
}

/// Either stream in outage, treating the two events as independent.
pub fn outage_total(p_c: f64, p_p: f64) -> Result<f64> {
    for v in [p_c, p_p] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(
                "outage_total",
                format!("{v} is not a probability"),
            ));
        }
    }
    clamp_probability(p_c + p_p - p_c * p_p, "outage_total")
}

/// `Σ_u [(1-P^c_u) R^c + (1-P^p_u) R^p_u]`.
pub fn outage_sum_rate(
    outages: &[(f64, f64)],
    rate_common: f64,
    rate_private: &[f64],
) -> Result<f64> {
    if outages.len() != rate_private.len() {
        return Err(Error::Dimension(format!(
            "{} outage pairs for {} private rates",
            outages.len(),
            rate_private.len()
        )));
    }
    Ok(outages
        .iter()
        .zip(rate_private)
        .map(|(&(pc, pp), rp)| (1.0 - pc) * rate_common + (1.0 - pp) * rp)
        .sum())
}
