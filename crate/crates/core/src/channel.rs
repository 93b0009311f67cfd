//! Spatial covariance (one-ring model) and dual-polarized fast-fading draws.
//!
//! A user's channel from polarization `i` to polarization `j` is
//! `h^{ij} = U_g Λ_g^{1/2} g^{ij}` with `g^{ij}` i.i.d. CN(0, 1) of length
//! `r̄_g`. Co-polar blocks are scaled by `√ζ` and cross-polar blocks by
//! `√(ζχ)`; that scaling is applied where the SINRs are formed, so one draw
//! serves a whole `χ` sweep.

use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Nodes for the angular integral.
pub const ONE_RING_NODES: usize = 200;

/// Eigenvalues below this fraction of the largest count as zero.
pub const RANK_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GroupGeometry {
    pub azimuth_deg: f64,
    pub distance_m: f64,
    pub radius_m: f64,
    pub user_distances_m: Vec<f64>,
}

impl GroupGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius_m > 0.0) || !(self.distance_m > self.radius_m) {
            return Err(Error::Geometry(format!(
                "need distance > radius > 0, got distance {} m, radius {} m",
                self.distance_m, self.radius_m
            )));
        }
        if self.user_distances_m.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Geometry("user distances must be positive".into()));
        }
        Ok(())
    }

    /// Half-width of the angular spread, radians.
    pub fn half_spread(&self) -> f64 {
        (self.radius_m / self.distance_m).atan()
    }
}

/// Per-group covariance and its dominant eigenpairs.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    /// Full `(M/2) x (M/2)` covariance.
    pub r: DMatrix<C64>,
    /// Dominant eigenvectors, one per column, `(M/2) x r̄`.
    pub eigvecs: DMatrix<C64>,
    /// Matching eigenvalues, descending.
    pub eigvals: Vec<f64>,
    pub rank: usize,
    pub truncated_rank: usize,
}

impl CovarianceModel {
    pub fn half_antennas(&self) -> usize {
        self.r.nrows()
    }

    /// `U_g Λ_g^{1/2}`, the map from reduced fast fading to the full channel.
    pub fn coloring(&self) -> DMatrix<C64> {
        let mut a = self.eigvecs.clone();
        for (j, lam) in self.eigvals.iter().enumerate() {
            let s = lam.max(0.0).sqrt();
            a.column_mut(j).scale_mut(s);
        }
        a
    }

    /// `U_g Λ_g U_g^H`, the covariance the sampled channels actually have.
    pub fn truncated_covariance(&self) -> DMatrix<C64> {
        let a = self.coloring();
        &a * a.adjoint()
    }

    /// Full-dimension channel for a reduced draw.
    pub fn full_channel(&self, g: &DVector<C64>) -> DVector<C64> {
        self.coloring() * g
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserLinkParams {
    pub zeta: f64,
    pub delta: f64,
    pub eta: f64,
}

impl UserLinkParams {
    pub fn from_distance(delta: f64, eta: f64, distance_m: f64) -> Self {
        UserLinkParams {
            zeta: delta * distance_m.powf(-eta),
            delta,
            eta,
        }
    }
}

/// One coherence-block draw of the four reduced fast-fading blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPolChannelSample {
    pub g_vv: DVector<C64>,
    pub g_vh: DVector<C64>,
    pub g_hv: DVector<C64>,
    pub g_hh: DVector<C64>,
    pub zeta: f64,
}

fn legendre() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(ONE_RING_NODES).expect("valid Gauss-Legendre degree"))
}

/// One-ring covariance with its eigen-decomposition and numerical rank.
pub fn build_one_ring_covariance(
    geometry: &GroupGeometry,
    half_antennas: usize,
    spacing_wavelengths: f64,
) -> Result<CovarianceModel> {
    geometry.validate()?;
    if half_antennas < 2 {
        return Err(Error::Geometry(format!(
            "need M/2 >= 2, got {half_antennas}"
        )));
    }
    if !(spacing_wavelengths > 0.0) {
        return Err(Error::Geometry(format!(
            "antenna spacing must be positive, got {spacing_wavelengths}"
        )));
    }
    let n = half_antennas;
    let theta = geometry.azimuth_deg.to_radians();
    let delta = geometry.half_spread();
    let rule = legendre();
    // Toeplitz: only the lag m - n matters
    let mut lag = Vec::with_capacity(n);
    for k in 0..n {
        let w = 2.0 * std::f64::consts::PI * spacing_wavelengths * k as f64;
        let re = rule.integrate(theta - delta, theta + delta, |om| (w * om.sin()).cos());
        let im = rule.integrate(theta - delta, theta + delta, |om| -(w * om.sin()).sin());
        let v = C64::new(re, im) / (2.0 * delta);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Numerical(
                "one-ring quadrature produced a non-finite value".into(),
            ));
        }
        lag.push(v);
    }
    lag[0] = C64::new(1.0, 0.0);
    let r = DMatrix::from_fn(n, n, |i, j| {
        if i >= j {
            lag[i - j]
        } else {
            lag[j - i].conj()
        }
    });
    decompose(r)
}

/// Eigen-decomposition of a Hermitian PSD matrix, keeping the eigenpairs above
/// the rank threshold in descending order.
pub fn decompose(r: DMatrix<C64>) -> Result<CovarianceModel> {
    let eig = r.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lmax = eig.eigenvalues[order[0]];
    if !(lmax > 0.0) {
        return Err(Error::Numerical(
            "covariance has no positive eigenvalue".into(),
        ));
    }
    let rank = order
        .iter()
        .filter(|&&i| eig.eigenvalues[i] > RANK_THRESHOLD * lmax)
        .count();
    let eigvals: Vec<f64> = order[..rank].iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigvecs = DMatrix::from_fn(r.nrows(), rank, |row, col| {
        eig.eigenvectors[(row, order[col])]
    });
    Ok(CovarianceModel {
        r,
        eigvecs,
        eigvals,
        rank,
        truncated_rank: rank,
    })
}

/// `r̄ = min(r, ⌊(M/2 - M̄/2)/(G - 1)⌋)`; `G = 1` keeps the full rank.
pub fn truncated_rank_for(
    rank: usize,
    half_antennas: usize,
    m_bar: usize,
    groups: usize,
) -> Result<usize> {
    if groups == 0 {
        return Err(Error::Infeasible("need at least one group".into()));
    }
    if !m_bar.is_multiple_of(2) || m_bar == 0 {
        return Err(Error::Infeasible(format!(
            "M_bar = {m_bar} must be even and positive"
        )));
    }
    if m_bar / 2 > half_antennas {
        return Err(Error::Infeasible(format!(
            "M_bar/2 = {} exceeds M/2 = {half_antennas}",
            m_bar / 2
        )));
    }
    if groups == 1 {
        return Ok(rank);
    }
    Ok(rank.min((half_antennas - m_bar / 2) / (groups - 1)))
}

/// Keep only the `r̄` dominant eigenpairs.
pub fn truncate_rank(
    cov: &CovarianceModel,
    m_bar: usize,
    groups: usize,
) -> Result<CovarianceModel> {
    let rb = truncated_rank_for(cov.rank, cov.half_antennas(), m_bar, groups)?;
    let mut out = cov.clone();
    out.eigvecs = cov.eigvecs.columns(0, rb).into_owned();
    out.eigvals.truncate(rb);
    out.truncated_rank = rb;
    Ok(out)
}

/// Standard circularly symmetric complex Gaussian.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_normal_vec<R: Rng + ?Sized>(len: usize, rng: &mut R) -> DVector<C64> {
    DVector::from_fn(len, |_, _| complex_normal(rng))
}

/// Draws the four reduced fast-fading blocks for one user.
pub fn sample_channel<R: Rng + ?Sized>(
    cov: &CovarianceModel,
    link: &UserLinkParams,
    rng: &mut R,
) -> DualPolChannelSample {
    let n = cov.truncated_rank;
    DualPolChannelSample {
        g_vv: complex_normal_vec(n, rng),
        g_vh: complex_normal_vec(n, rng),
        g_hv: complex_normal_vec(n, rng),
        g_hh: complex_normal_vec(n, rng),
        zeta: link.zeta,
    }
}

/// `√(1-ε) h + √ε e` with `e` white unit-variance noise.
pub fn apply_csi_error<R: Rng + ?Sized>(
    h: &DVector<C64>,
    error_variance: f64,
    rng: &mut R,
) -> Result<DVector<C64>> {
    if !(0.0..=1.0).contains(&error_variance) {
        return Err(Error::domain(
            "apply_csi_error",
            format!("error variance {error_variance} outside [0, 1]"),
        ));
    }
    if error_variance == 0.0 {
        return Ok(h.clone());
    }
    let e = complex_normal_vec(h.len(), rng);
    Ok(mix_csi_error(h, &e, error_variance))
}

/// Mixture with a given noise draw; lets one draw serve several `ε`.
pub fn mix_csi_error(h: &DVector<C64>, e: &DVector<C64>, error_variance: f64) -> DVector<C64> {
    if error_variance == 0.0 {
        return h.clone();
    }
    h * C64::from((1.0 - error_variance).sqrt()) + e * C64::from(error_variance.sqrt())
}
