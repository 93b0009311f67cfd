//! Closed-form outage probabilities and ergodic rates, plus the
//! distribution-level oracles used to check them.
//!
//! All expressions model the effective gains as independent Exponential,
//! Gamma and Hypoexponential variables whose mean is `ζ·(power)/φ`.

mod ergodic;
mod helpers;
mod oracle;
mod outage;

pub use ergodic::{
    ergodic_common_pdiv, ergodic_common_pmux, ergodic_common_pmux_printed, ergodic_private_pdiv,
    ergodic_private_pmux,
};
pub use helpers::{
    j_integral, j_integral_rev, k_integral, phi, phi_bar, phi_bar_scaled, phi_scaled, psi, theta,
};
pub use oracle::{oracle_ergodic_by_cdf_quadrature, oracle_outage_by_gain_sampling, OracleCase};
pub use outage::{
    outage, outage_common_pdiv, outage_common_pmux, outage_common_spmux, outage_private_pdiv,
    outage_private_pmux, outage_private_spmux, outage_sum_rate, outage_total, Stream,
};

use crate::channel::CovarianceModel;
use crate::error::{Error, Result};
use crate::precoder::OuterPrecoder;

/// Relative half-width of the window around a removable singularity inside
/// which a formula is not evaluated directly.
pub const SINGULAR_WINDOW: f64 = 1e-3;

/// `f(x)` for an `f` with a removable singularity at `s`. Within
/// [`SINGULAR_WINDOW`] of `s` the value is a cubic interpolation through `f`
/// at `s ± δ`, `s ± 2δ` with `δ` twice the window.
///
/// Evaluating right next to `s` loses digits to `1/(x-s)` cancellation; the
/// interpolation error is `O(δ^4)` instead.
pub(crate) fn across_singularity(x: f64, s: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let w = SINGULAR_WINDOW * s.abs().max(f64::MIN_POSITIVE);
    if (x - s).abs() > w {
        return f(x);
    }
    let d = 2.0 * w;
    let nodes = [s - 2.0 * d, s - d, s + d, s + 2.0 * d];
    let mut total = 0.0;
    for (i, &xi) in nodes.iter().enumerate() {
        let mut lag = 1.0;
        for (j, &xj) in nodes.iter().enumerate() {
            if i != j {
                lag *= (x - xj) / (xi - xj);
            }
        }
        total += lag * f(xi)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticParams {
    /// `M̄ / tr(F^H R F)`.
    pub phi: f64,
    pub zeta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub chi: f64,
    pub xi: f64,
    pub users: usize,
    /// `1/σ²`.
    pub rho: f64,
    pub tau_c: f64,
    pub tau_p: f64,
}

impl AnalyticParams {
    /// Parameters with zero target rates; see [`with_rates`](Self::with_rates).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        phi: f64,
        zeta: f64,
        alpha: f64,
        beta: f64,
        chi: f64,
        xi: f64,
        users: usize,
        rho: f64,
    ) -> Self {
        AnalyticParams {
            phi,
            zeta,
            alpha,
            beta,
            chi,
            xi,
            users,
            rho,
            tau_c: 0.0,
            tau_p: 0.0,
        }
    }

    /// Sets `τ = 2^R - 1` from common and private target rates (bpcu).
    pub fn with_rates(mut self, rate_common: f64, rate_private: f64) -> Self {
        self.tau_c = rate_common.exp2() - 1.0;
        self.tau_p = rate_private.exp2() - 1.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("phi", self.phi),
            ("zeta", self.zeta),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("rho", self.rho),
        ];
        for (name, v) in pos {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(
                    "AnalyticParams",
                    format!("{name} = {v} must be positive and finite"),
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.chi) || !(0.0..=1.0).contains(&self.xi) {
            return Err(Error::domain(
                "AnalyticParams",
                format!("chi = {}, xi = {} must lie in [0, 1]", self.chi, self.xi),
            ));
        }
        if self.users == 0 {
            return Err(Error::domain("AnalyticParams", "need at least one user"));
        }
        if !(self.tau_c >= 0.0) || !(self.tau_p >= 0.0) {
            return Err(Error::domain(
                "AnalyticParams",
                "target thresholds must be nonnegative",
            ));
        }
        Ok(())
    }

    /// `φ/(ρζ)`: noise-to-mean-gain ratio per unit power.
    pub(crate) fn noise_scale(&self) -> f64 {
        self.phi / (self.rho * self.zeta)
    }
}

/// `φ = M̄ / tr(F^H R F)`, with `M̄ = 2 × (columns of F)`.
pub fn phi_factor(outer: &OuterPrecoder, cov: &CovarianceModel) -> Result<f64> {
    let f = &outer.f;
    if f.nrows() != cov.half_antennas() {
        return Err(Error::Dimension(format!(
            "outer precoder has {} rows, covariance is {}x{}",
            f.nrows(),
            cov.half_antennas(),
            cov.half_antennas()
        )));
    }
    let r = cov.truncated_covariance();
    let tr = (f.adjoint() * r * f).trace().re;
    if !(tr > 0.0) {
        return Err(Error::Numerical(format!(
            "tr(F^H R F) = {tr} is not positive"
        )));
    }
    Ok(2.0 * f.ncols() as f64 / tr)
}

/// Rounding slack allowed outside `[0, 1]`. The PDIV forms divide by
/// `(1-χ)^3` and lose up to ~1e-9 next to `χ = 1`.
const PROBABILITY_SLACK: f64 = 1e-8;

/// Clamps rounding overshoot; anything larger is a bug.
pub(crate) fn clamp_probability(p: f64, func: &str) -> Result<f64> {
    if !p.is_finite() {
        return Err(Error::Consistency(format!("{func} produced {p}")));
    }
    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        return Err(Error::Consistency(format!(
            "{func} produced probability {p} outside [0, 1]"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}
