//! Brute-force references for the closed forms: sampling of the independent
//! gain model, and quadrature of a rate integral given a CDF.

use std::f64::consts::LN_2;

use rand::Rng;
use rand_distr::Exp1;

use super::outage::Stream;
use super::AnalyticParams;
use crate::error::{Error, Result};
use crate::mc::{Metric, MetricEstimate};
use crate::quad::integrate_to_inf;
use crate::schemes::Scheme;

/// Which closed form a gain-sampling run should mirror.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCase {
    pub scheme: Scheme,
    pub stream: Stream,
}

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample::<f64, _>(Exp1)
}

fn gamma_int<R: Rng + ?Sized>(shape: usize, rng: &mut R) -> f64 {
    (0..shape).map(|_| exp1(rng)).sum()
}

/// Estimates `Pr{S < τ(I + σ²)}` with `S`, `I` drawn from the
/// independent-gain model of the chosen scheme and stream. Gains are in
/// units of `ζ/φ`, so the noise term is `φ/(ρζ)`.
pub fn oracle_outage_by_gain_sampling<R: Rng + ?Sized>(
    case: OracleCase,
    p: &AnalyticParams,
    n: u64,
    rng: &mut R,
) -> Result<MetricEstimate> {
    p.validate()?;
    if n == 0 {
        return Err(Error::domain(
            "oracle_outage_by_gain_sampling",
            "need at least one draw",
        ));
    }
    let (a, b, x, xi, u) = (p.alpha, p.beta, p.chi, p.xi, p.users);
    let noise = p.noise_scale();
    let hypo = |w: f64, rng: &mut R| w * (exp1(rng) + x * exp1(rng));
    let (tau, metric) = match case.stream {
        Stream::Common => (p.tau_c, Metric::OutageCommon),
        Stream::Private => (p.tau_p, Metric::OutagePrivate),
    };
    let mut hits = 0u64;
    for _ in 0..n {
        let (s, i) = match (case.scheme, case.stream) {
            (Scheme::Pmux, Stream::Common) => (a * exp1(rng), x * b * gamma_int(u, rng)),
            (Scheme::Pmux, Stream::Private) => (b * exp1(rng), x * a * exp1(rng)),
            (Scheme::Pdiv, Stream::Common) => {
                let s = hypo(a, rng).max(hypo(a, rng));
                (s, b * exp1(rng) + x * b * gamma_int(u, rng))
            }
            (Scheme::Pdiv, Stream::Private) => {
                let s = hypo(b, rng).max(hypo(b, rng));
                (s, xi * hypo(a, rng) + x * b * gamma_int(u - 1, rng))
            }
            (Scheme::Spmux, Stream::Common) => (
                a * exp1(rng),
                b * exp1(rng) + x * a * exp1(rng) + x * b * gamma_int(u, rng),
            ),
            (Scheme::Spmux, Stream::Private) => (
                b * exp1(rng),
                xi * a * exp1(rng) + x * a * exp1(rng) + x * b * gamma_int(u, rng),
            ),
            _ => {
                return Err(Error::Unknown {
                    kind: "oracle case",
                    name: case.scheme.tag().into(),
                })
            }
        };
        if s < tau * (i + noise) {
            hits += 1;
        }
    }
    Ok(MetricEstimate::proportion(metric, hits, n))
}

/// `∫_0^∞ (1 - F(z)) / ((1+z) ln 2) dz` for the CDF `F` of an SINR.
pub fn oracle_ergodic_by_cdf_quadrature<F: Fn(f64) -> f64>(cdf: F) -> Result<f64> {
    let f = |z: f64| (1.0 - cdf(z)) / (1.0 + z);
    Ok(integrate_to_inf(&f, 0.0, 1e-10)? / LN_2)
}
