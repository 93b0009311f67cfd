//! Instantaneous SINRs of the three dual-polarized rate-splitting schemes and
//! the baseline multiple-access schemes.
//!
//! All inputs are effective channels `e^{ij}_u = F^H h^{ij}_u` (length
//! `M̄/2`) plus the inner precoders. Each received power `|e^H x|^2` picks up
//! the branch factor [`BRANCH_GAIN`] because the unit transmit power of a
//! stream is shared by the two polarization branches of `I_2 ⊗ F`.
//!
//! Interference terms also carry the residual intra-polar leakage from other
//! users' private streams. With perfect CSI the private precoders null it and
//! it is zero up to rounding.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::C64;
use crate::error::{Error, Result};
use crate::precoder::{build_common_precoder, build_private_precoder, mrt};

pub const BRANCH_GAIN: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "pmux")]
    Pmux,
    #[serde(rename = "pdiv")]
    Pdiv,
    #[serde(rename = "spmux")]
    Spmux,
    #[serde(rename = "sp-oma")]
    SpOma,
    #[serde(rename = "sp-sdma")]
    SpSdma,
    #[serde(rename = "sp-rsma")]
    SpRsma,
    #[serde(rename = "sp-noma")]
    SpNoma,
    #[serde(rename = "dp-noma-div")]
    DpNomaDiv,
    #[serde(rename = "dp-sdma-div")]
    DpSdmaDiv,
    #[serde(rename = "dp-sdma-mux")]
    DpSdmaMux,
}

impl Scheme {
    pub const ALL: [Scheme; 10] = [
        Scheme::Pmux,
        Scheme::Pdiv,
        Scheme::Spmux,
        Scheme::SpOma,
        Scheme::SpSdma,
        Scheme::SpRsma,
        Scheme::SpNoma,
        Scheme::DpNomaDiv,
        Scheme::DpSdmaDiv,
        Scheme::DpSdmaMux,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Scheme::Pmux => "pmux",
            Scheme::Pdiv => "pdiv",
            Scheme::Spmux => "spmux",
            Scheme::SpOma => "sp-oma",
            Scheme::SpSdma => "sp-sdma",
            Scheme::SpRsma => "sp-rsma",
            Scheme::SpNoma => "sp-noma",
            Scheme::DpNomaDiv => "dp-noma-div",
            Scheme::DpSdmaDiv => "dp-sdma-div",
            Scheme::DpSdmaMux => "dp-sdma-mux",
        }
    }

    /// Rate-splitting schemes carry a common stream.
    pub fn is_rsma(self) -> bool {
        matches!(
            self,
            Scheme::Pmux | Scheme::Pdiv | Scheme::Spmux | Scheme::SpRsma
        )
    }

    /// Schemes whose streams per polarization carry distinct messages.
    pub fn is_per_polarization(self) -> bool {
        matches!(self, Scheme::Spmux | Scheme::DpSdmaMux)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .iter()
            .copied()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "scheme",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub alpha: f64,
    pub beta: Vec<f64>,
    /// Superposition coefficients of the NOMA baselines, strongest first.
    pub noma: Vec<f64>,
}

impl PowerAllocation {
    /// `α` for the common stream, `(1-α)/U` per private stream and the
    /// default NOMA split.
    pub fn uniform(alpha: f64, users: usize) -> Self {
        let noma = if users == 3 {
            vec![5.0 / 8.0, 2.0 / 8.0, 1.0 / 8.0]
        } else {
            // halving ladder, renormalized
            let raw: Vec<f64> = (0..users).map(|k| 0.5f64.powi(k as i32)).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / s).collect()
        };
        PowerAllocation {
            alpha,
            beta: vec![(1.0 - alpha) / users as f64; users],
            noma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let total = self.alpha + self.beta.iter().sum::<f64>();
        if !(self.alpha > 0.0 && self.alpha < 1.0) || self.beta.iter().any(|b| !(*b > 0.0)) {
            return Err(Error::Config(
                "power coefficients must be positive with alpha in (0, 1)".into(),
            ));
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "alpha + sum(beta) = {total}, expected 1"
            )));
        }
        let nsum: f64 = self.noma.iter().sum();
        if self.noma.len() != self.beta.len()
            || (nsum - 1.0).abs() > 1e-9
            || self.noma.iter().any(|x| !(*x > 0.0))
        {
            return Err(Error::Config(
                "NOMA coefficients must be positive, one per user, summing to 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentParams {
    pub chi: f64,
    pub xi: f64,
    #[serde(default)]
    pub csi_error: f64,
}

impl ImpairmentParams {
    pub fn new(chi: f64, xi: f64, csi_error: f64) -> Self {
        ImpairmentParams { chi, xi, csi_error }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.chi) {
            return Err(Error::Config(format!("chi = {} outside [0, 1]", self.chi)));
        }
        if !(self.xi >= 0.0) || !self.xi.is_finite() {
            return Err(Error::Config(format!("xi = {} must be >= 0", self.xi)));
        }
        if !(0.0..=1.0).contains(&self.csi_error) {
            return Err(Error::Config(format!(
                "csi_error = {} outside [0, 1]",
                self.csi_error
            )));
        }
        Ok(())
    }
}

/// Effective channels of every user in one group. `vh` is the block from
/// the vertical transmit branch to the horizontal receive antenna.
#[derive(Debug, Clone)]
pub struct GroupLinks {
    pub zeta: Vec<f64>,
    pub vv: Vec<DVector<C64>>,
    pub vh: Vec<DVector<C64>>,
    pub hv: Vec<DVector<C64>>,
    pub hh: Vec<DVector<C64>>,
}

impl GroupLinks {
    pub fn users(&self) -> usize {
        self.zeta.len()
    }

    pub fn dim(&self) -> usize {
        self.vv.first().map_or(0, |v| v.len())
    }

    fn check(&self) -> Result<()> {
        let u = self.users();
        let d = self.dim();
        for blk in [&self.vv, &self.vh, &self.hv, &self.hh] {
            if blk.len() != u || blk.iter().any(|v| v.len() != d) {
                return Err(Error::Dimension(format!(
                    "expected {u} effective channels of length {d}"
                )));
            }
        }
        Ok(())
    }
}

/// Inner precoders for one group and coherence block.
#[derive(Debug, Clone)]
pub struct PrecoderSet {
    pub common_v: DVector<C64>,
    pub common_h: DVector<C64>,
    pub private_v: Vec<DVector<C64>>,
    pub private_h: Vec<DVector<C64>>,
    /// Single-user beamformers for time-division access.
    pub mrt_v: Vec<DVector<C64>>,
}

impl PrecoderSet {
    /// Builds every inner precoder from the channel knowledge at the
    /// transmitter (`known` may be an imperfect estimate).
    pub fn build<R: Rng + ?Sized>(known: &GroupLinks, rng: &mut R) -> Result<Self> {
        let d = known.dim();
        let u = known.users();
        let common_v = build_common_precoder(d, rng)?;
        let common_h = build_common_precoder(d, rng)?;
        let mut private_v = Vec::with_capacity(u);
        let mut private_h = Vec::with_capacity(u);
        for k in 0..u {
            let ov: Vec<&DVector<C64>> = (0..u).filter(|&n| n != k).map(|n| &known.vv[n]).collect();
            let oh: Vec<&DVector<C64>> = (0..u).filter(|&n| n != k).map(|n| &known.hh[n]).collect();
            private_v.push(build_private_precoder(d, &ov, Some(&known.vv[k]), rng)?);
            private_h.push(build_private_precoder(d, &oh, Some(&known.hh[k]), rng)?);
        }
        let mrt_v = known.vv.iter().map(mrt).collect();
        Ok(PrecoderSet {
            common_v,
            common_h,
            private_v,
            private_h,
            mrt_v,
        })
    }

    fn check(&self, users: usize, dim: usize) -> Result<()> {
        let ok = self.common_v.len() == dim
            && self.common_h.len() == dim
            && self.private_v.len() == users
            && self.private_h.len() == users
            && self
                .private_v
                .iter()
                .chain(self.private_h.iter())
                .all(|p| p.len() == dim);
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "precoders do not match {users} users of dimension {dim}"
            )))
        }
    }
}

/// SINRs of one layer of streams (one polarization, or the whole scheme).
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `"v"`, `"h"` or empty when the layer is not tied to a polarization.
    pub label: &'static str,
    pub common: Option<Vec<f64>>,
    pub private: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinrOutcome {
    pub scheme: Scheme,
    pub layers: Vec<Layer>,
    /// Fraction of time each user is served (1/U for time division).
    pub time_share: f64,
}

impl SinrOutcome {
    /// `Σ_u log2(1+γ^p_u) + U min_u log2(1+γ^c_u)` per layer, summed over
    /// layers and scaled by the time share.
    pub fn sum_rate(&self) -> f64 {
        let mut total = 0.0;
        for layer in &self.layers {
            total += layer.private.iter().map(|g| (1.0 + g).log2()).sum::<f64>();
            if let Some(c) = &layer.common {
                let m = c
                    .iter()
                    .map(|g| (1.0 + g).log2())
                    .fold(f64::INFINITY, f64::min);
                total += c.len() as f64 * m;
            }
        }
        total * self.time_share
    }
}

#[inline]
fn gain(e: &DVector<C64>, x: &DVector<C64>) -> f64 {
    BRANCH_GAIN * e.dotc(x).norm_sqr()
}

/// `Σ_{n∈set} |e^H p_n|^2 β_n` with the branch factor.
fn stream_sum(e: &DVector<C64>, ps: &[DVector<C64>], beta: &[f64], skip: Option<usize>) -> f64 {
    ps.iter()
        .zip(beta)
        .enumerate()
        .filter(|(n, _)| Some(*n) != skip)
        .map(|(_, (p, b))| gain(e, p) * b)
        .sum()
}

fn check_all(
    links: &GroupLinks,
    prec: &PrecoderSet,
    powers: &PowerAllocation,
    noise_var: f64,
) -> Result<()> {
    links.check()?;
    prec.check(links.users(), links.dim())?;
    if powers.beta.len() != links.users() {
        return Err(Error::Dimension(format!(
            "{} private powers for {} users",
            powers.beta.len(),
            links.users()
        )));
    }
    if !(noise_var > 0.0) {
        return Err(Error::domain(
            "sinr",
            format!("noise variance {noise_var} must be positive"),
        ));
    }
    Ok(())
}

/// Common stream on the vertical branch, private streams on the horizontal
/// branch; no SIC.
pub fn sinr_pmux(
    links: &GroupLinks,
    prec: &PrecoderSet,
    powers: &PowerAllocation,
    imp: &ImpairmentParams,
    noise_var: f64,
) -> Result<SinrOutcome> {
    check_all(links, prec, powers, noise_var)?;
    let (a, b, chi) = (powers.alpha, &powers.beta, imp.chi);
    let mut common = Vec::with_capacity(links.users());
    let mut private = Vec::with_capacity(links.users());
    for u in 0..links.users() {
        let z = links.zeta[u];
        let sig_c = z * gain(&links.vv[u], &prec.common_v) * a;
        let int_c = z * chi * stream_sum(&links.hv[u], &prec.private_h, b, None);
        common.push(sig_c / (int_c + noise_var));

        let sig_p = z * gain(&links.hh[u], &prec.private_h[u]) * b[u];
        let leak = z * stream_sum(&links.hh[u], &prec.private_h, b, Some(u));
        let int_p = z * chi * gain(&links.vh[u], &prec.common_v) * a + leak;
        private.push(sig_p / (int_p + noise_var));
    }
    Ok(SinrOutcome {
        scheme: Scheme::Pmux,
        layers: vec![Layer {
            label: "",
            common: Some(common),
            private,
        }],
        time_share: 1.0,
    })
}

/// Replicas of every stream on both branches; the receiver decodes each
/// message from the branch with the larger effective gain (ties go to v).
pub fn sinr_pdiv(
    links: &GroupLinks,
    prec: &PrecoderSet,
    powers: &PowerAllocation,
    imp: &ImpairmentParams,
    noise_var: f64,
) -> Result<SinrOutcome> {
    check_all(links, prec, powers, noise_var)?;
    let (a, b, chi, xi) = (powers.alpha, &powers.beta, imp.chi, imp.xi);
    let (pv, ph) = (&prec.private_v, &prec.private_h);
    let mut common = Vec::with_capacity(links.users());
    let mut private = Vec::with_capacity(links.users());
    for u in 0..links.users() {
        let z = links.zeta[u];
        let (vv, vh, hv, hh) = (&links.vv[u], &links.vh[u], &links.hv[u], &links.hh[u]);
        let rc_v = z * (gain(vv, &prec.common_v) + chi * gain(hv, &prec.common_h)) * a;
        let rc_h = z * (gain(hh, &prec.common_h) + chi * gain(vh, &prec.common_v)) * a;
        let (rc, wc) = if rc_v >= rc_h {
            let w = z * (gain(vv, &pv[u]) * b[u] + chi * stream_sum(hv, ph, b, None))
                + z * stream_sum(vv, pv, b, Some(u));
            (rc_v, w)
        } else {
            let w = z * (gain(hh, &ph[u]) * b[u] + chi * stream_sum(vh, pv, b, None))
                + z * stream_sum(hh, ph, b, Some(u));
            (rc_h, w)
        };
        common.push(rc / (wc + noise_var));

        let rp_v = z * (gain(vv, &pv[u]) + chi * gain(hv, &ph[u])) * b[u];
        let rp_h = z * (gain(hh, &ph[u]) + chi * gain(vh, &pv[u])) * b[u];
        let (rp, wp) = if rp_v >= rp_h {
            let w = xi * rc_v
                + z * chi * stream_sum(hv, ph, b, Some(u))
                + z * stream_sum(vv, pv, b, Some(u));
            (rp_v, w)
        } else {
            let w = xi * rc_h
                + z * chi * stream_sum(vh, pv, b, Some(u))
                + z * stream_sum(hh, ph, b, Some(u));
            (rp_h, w)
        };
        private.push(rp / (wp + noise_var));
    }
    Ok(SinrOutcome {
        scheme: Scheme::Pdiv,
        layers: vec![Layer {
            label: "",
            common: Some(common),
            private,
        }],
        time_share: 1.0,
    })
}

/// One polarization branch of a rate-splitting transmission with SIC.
/// `cross` is false for single-polarized systems.
#[allow(clippy::too_many_arguments)]
fn rsma_branch(
    links: &GroupLinks,
    prec: &PrecoderSet,
    powers: &PowerAllocation,
    imp: &ImpairmentParams,
    noise_var: f64,
    pol: char,
    cross: bool,
) -> Layer {
    let (a, b, xi) = (powers.alpha, &powers.beta, imp.xi);
    let chi = if cross { imp.chi } else { 0.0 };
    let (co, leak_blk, ci, cj, pi, pj, label) = if pol == 'v' {
        (
            &links.vv,
            &links.hv,
            &prec.common_v,
            &prec.common_h,
            &prec.private_v,
            &prec.private_h,
            "v",
        )
    } else {
        (
            &links.hh,
            &links.vh,
            &prec.common_h,
            &prec.common_v,
            &prec.private_h,
            &prec.private_v,
            "h",
        )
    };
    let mut common = Vec::with_capacity(links.users());
    let mut private = Vec::with_capacity(links.users());
    for u in 0..links.users() {
        let z = links.zeta[u];
        let e = &co[u];
        let x = &leak_blk[u];
        let rc = z * gain(e, ci) * a;
        let own_p = z * gain(e, &pi[u]) * b[u];
        let leak = z * stream_sum(e, pi, b, Some(u));
        let xpol = z * chi * (gain(x, cj) * a + stream_sum(x, pj, b, None));
        common.push(rc / (own_p + xpol + leak + noise_var));
        private.push(own_p / (xi * rc + xpol + leak + noise_var));
    }
    Layer {
        label,
        common: Some(common),
        private,
    }
}

/// Full rate splitting run independently on each polarization.
pub fn sinr_spmux(
    links: &GroupLinks,
    prec: &PrecoderSet,
    powers: &PowerAllocation,
    imp: &ImpairmentParams,
    noise_var: f64,
) -> Result<SinrOutcome> {
    check_all(links, prec, powers, noise_var)?;
    Ok(SinrOutcome {
        scheme: Scheme::Spmux,
        layers: vec![
            rsma_branch(links, prec, powers, imp, noise_var, 'v', true),
            rsma_branch(links, prec, powers, imp, noise_var, 'h', true),
        ],
        time_share: 1.0,
    })
}

/// Power-domain superposition decoded with SIC in descending power;
/// already-decoded messages leave a residual `ξ`.
fn noma_sinrs(gains: &[f64], noma: &[f64], xi: f64, noise_var: f64) -> Vec<f64> {
    (0..gains.len())
        .map(|u| {
            let g = gains[u];
            let weaker: f64 = noma[u + 1..].iter().sum();
            let stronger: f64 = noma[..u].iter().sum();
            g * noma[u] / (g * weaker + xi * g * stronger + noise_var)
        })
        .collect()
}

/// SINRs of the baseline multiple-access schemes.
pub fn sinr_baseline(
    kind: Scheme,
    links: &GroupLinks,
    prec: &PrecoderSet,
    powers: &PowerAllocation,
    imp: &ImpairmentParams,
    noise_var: f64,
) -> Result<SinrOutcome> {
    check_all(links, prec, powers, noise_var)?;
    let users = links.users();
    let chi = imp.chi;
    let sdma_beta = vec![1.0 / users as f64; users];
    let one = |layer: Layer, time_share: f64| SinrOutcome {
        scheme: kind,
        layers: vec![layer],
        time_share,
    };
    match kind {
        Scheme::SpOma => {
            let private = (0..users)
                .map(|u| links.zeta[u] * gain(&links.vv[u], &prec.mrt_v[u]) / noise_var)
                .collect();
            Ok(one(
                Layer {
                    label: "",
                    common: None,
                    private,
                },
                1.0 / users as f64,
            ))
        }
        Scheme::SpSdma => {
            let private = (0..users)
                .map(|u| {
                    let z = links.zeta[u];
                    let e = &links.vv[u];
                    z * gain(e, &prec.private_v[u]) * sdma_beta[u]
                        / (z * stream_sum(e, &prec.private_v, &sdma_beta, Some(u)) + noise_var)
                })
                .collect();
            Ok(one(
                Layer {
                    label: "",
                    common: None,
                    private,
                },
                1.0,
            ))
        }
        Scheme::SpRsma => {
            let mut layer = rsma_branch(links, prec, powers, imp, noise_var, 'v', false);
            layer.label = "";
            Ok(one(layer, 1.0))
        }
        Scheme::SpNoma => {
            if powers.noma.len() != users {
                return Err(Error::Dimension(
                    "NOMA coefficients do not match the user count".into(),
                ));
            }
            let gains: Vec<f64> = (0..users)
                .map(|u| links.zeta[u] * gain(&links.vv[u], &prec.common_v))
                .collect();
            Ok(one(
                Layer {
                    label: "",
                    common: None,
                    private: noma_sinrs(&gains, &powers.noma, imp.xi, noise_var),
                },
                1.0,
            ))
        }
        Scheme::DpNomaDiv => {
            if powers.noma.len() != users {
                return Err(Error::Dimension(
                    "NOMA coefficients do not match the user count".into(),
                ));
            }
            let gains: Vec<f64> = (0..users)
                .map(|u| {
                    let z = links.zeta[u];
                    let gv = z
                        * (gain(&links.vv[u], &prec.common_v)
                            + chi * gain(&links.hv[u], &prec.common_h));
                    let gh = z
                        * (gain(&links.hh[u], &prec.common_h)
                            + chi * gain(&links.vh[u], &prec.common_v));
                    gv.max(gh)
                })
                .collect();
            Ok(one(
                Layer {
                    label: "",
                    common: None,
                    private: noma_sinrs(&gains, &powers.noma, imp.xi, noise_var),
                },
                1.0,
            ))
        }
        Scheme::DpSdmaDiv => {
            let (pv, ph, b) = (&prec.private_v, &prec.private_h, &sdma_beta);
            let private = (0..users)
                .map(|u| {
                    let z = links.zeta[u];
                    let (vv, vh, hv, hh) = (&links.vv[u], &links.vh[u], &links.hv[u], &links.hh[u]);
                    let sv = z * (gain(vv, &pv[u]) + chi * gain(hv, &ph[u])) * b[u];
                    let sh = z * (gain(hh, &ph[u]) + chi * gain(vh, &pv[u])) * b[u];
                    if sv >= sh {
                        sv / (z * chi * stream_sum(hv, ph, b, Some(u))
                            + z * stream_sum(vv, pv, b, Some(u))
                            + noise_var)
                    } else {
                        sh / (z * chi * stream_sum(vh, pv, b, Some(u))
                            + z * stream_sum(hh, ph, b, Some(u))
                            + noise_var)
                    }
                })
                .collect();
            Ok(one(
                Layer {
                    label: "",
                    common: None,
                    private,
                },
                1.0,
            ))
        }
        Scheme::DpSdmaMux => {
            let b = &sdma_beta;
            let branch = |pol: char| {
                let (co, xb, pi, pj, label) = if pol == 'v' {
                    (&links.vv, &links.hv, &prec.private_v, &prec.private_h, "v")
                } else {
                    (&links.hh, &links.vh, &prec.private_h, &prec.private_v, "h")
                };
                let private = (0..users)
                    .map(|u| {
                        let z = links.zeta[u];
                        z * gain(&co[u], &pi[u]) * b[u]
                            / (z * chi * stream_sum(&xb[u], pj, b, None)
                                + z * stream_sum(&co[u], pi, b, Some(u))
                                + noise_var)
                    })
                    .collect();
                Layer {
                    label,
                    common: None,
                    private,
                }
            };
            Ok(SinrOutcome {
                scheme: kind,
                layers: vec![branch('v'), branch('h')],
                time_share: 1.0,
            })
        }
        Scheme::Pmux | Scheme::Pdiv | Scheme::Spmux => Err(Error::Unknown {
            kind: "baseline",
            name: kind.tag().into(),
        }),
    }
}

/// Dispatches to the scheme's SINR evaluator.
pub fn sinr(
    kind: Scheme,
    links: &GroupLinks,
    prec: &PrecoderSet,
    powers: &PowerAllocation,
    imp: &ImpairmentParams,
    noise_var: f64,
) -> Result<SinrOutcome> {
    match kind {
        Scheme::Pmux => sinr_pmux(links, prec, powers, imp, noise_var),
        Scheme::Pdiv => sinr_pdiv(links, prec, powers, imp, noise_var),
        Scheme::Spmux => sinr_spmux(links, prec, powers, imp, noise_var),
        _ => sinr_baseline(kind, links, prec, powers, imp, noise_var),
    }
}
