//! Two-stage precoding: an outer precoder that separates groups using only
//! covariance knowledge, and inner per-user vectors built from the effective
//! (outer-precoded) channels.
//!
//! `K_g = I_2 ⊗ F_g` is never formed; both polarizations share `F_g`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::channel::{complex_normal_vec, CovarianceModel, C64};
use crate::error::{Error, Result};

/// Singular values below this fraction of the largest are treated as zero.
pub const NULL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct OuterPrecoder {
    /// `(M/2) x (M̄/2)` with orthonormal columns.
    pub f: DMatrix<C64>,
    pub group: usize,
}

impl OuterPrecoder {
    /// `F^H U_g Λ_g^{1/2}`: maps reduced fast fading straight to the
    /// effective channel.
    pub fn effective_map(&self, cov: &CovarianceModel) -> DMatrix<C64> {
        self.f.adjoint() * cov.coloring()
    }
}

/// Orthonormal basis of the orthogonal complement of span(columns of `a`).
fn complement_basis(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    if a.ncols() == 0 {
        return DMatrix::identity(n, n);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > NULL_TOL * smax)
        .collect();
    let mut proj = DMatrix::<C64>::identity(n, n);
    for &i in &keep {
        let col = u.column(i);
        proj -= col * col.adjoint();
    }
    // the projector's unit eigenvalues span the complement
    let eig = proj.symmetric_eigen();
    let cols: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    DMatrix::from_fn(n, cols.len(), |r, c| eig.eigenvectors[(r, cols[c])])
}

/// Outer precoder for group `g` given every group's truncated covariance.
///
/// Inside the null space of the interfering groups' eigenvectors the
/// `M̄/2` directions carrying the most of group `g`'s energy are kept.
pub fn build_outer_precoder(
    covs: &[CovarianceModel],
    g: usize,
    m_bar: usize,
) -> Result<OuterPrecoder> {
    let own = covs.get(g).ok_or_else(|| {
        Error::Infeasible(format!("group {g} out of range ({} groups)", covs.len()))
    })?;
    let half = own.half_antennas();
    let d = m_bar / 2;
    let others: usize = covs
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != g)
        .map(|(_, c)| c.truncated_rank)
        .sum();
    if others >= half {
        return Err(Error::Infeasible(format!(
            "M/2 > sum of interfering ranks violated: {half} <= {others}"
        )));
    }
    if d > half - others {
        return Err(Error::Infeasible(format!(
            "M_bar/2 <= M/2 - sum of interfering ranks violated: {d} > {}",
            half - others
        )));
    }
    if d > own.truncated_rank {
        return Err(Error::Infeasible(format!(
            "M_bar/2 <= r_bar_g violated: {d} > {}",
            own.truncated_rank
        )));
    }
    let mut stack = DMatrix::<C64>::zeros(half, others);
    let mut col = 0;
    for (k, c) in covs.iter().enumerate() {
        if k == g {
            continue;
        }
        stack
            .columns_mut(col, c.truncated_rank)
            .copy_from(&c.eigvecs);
        col += c.truncated_rank;
    }
    let e0 = complement_basis(&stack);
    let r_own = own.truncated_covariance();
    let proj = e0.adjoint() * r_own * &e0;
    let eig = proj.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let v = DMatrix::from_fn(e0.ncols(), d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(OuterPrecoder {
        f: e0 * v,
        group: g,
    })
}

/// Unit vector orthogonal to every vector in `others`.
///
/// When the null space has more than one dimension the projection of `own`
/// onto it is used (the choice maximizing `|own^H p|`); without `own`, or if
/// `own` has no component there, a random direction is projected instead.
pub fn build_private_precoder<R: Rng + ?Sized>(
    dim: usize,
    others: &[&DVector<C64>],
    own: Option<&DVector<C64>>,
    rng: &mut R,
) -> Result<DVector<C64>> {
    if others.len() >= dim {
        return Err(Error::Infeasible(format!(
            "M_bar/2 > U - 1 violated: {dim} <= {}",
            others.len()
        )));
    }
    if others.iter().any(|v| v.len() != dim) || own.is_some_and(|v| v.len() != dim) {
        return Err(Error::Dimension(format!(
            "private precoder inputs must have length {dim}"
        )));
    }
    let q = if others.is_empty() {
        DMatrix::<C64>::zeros(dim, 0)
    } else {
        let a = DMatrix::from_fn(dim, others.len(), |r, c| others[c][r]);
        let svd = a.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > NULL_TOL * smax)
            .collect();
        DMatrix::from_fn(dim, keep.len(), |r, c| u[(r, keep[c])])
    };
    let project = |x: &DVector<C64>| -> DVector<C64> {
        if q.ncols() == 0 {
            return x.clone();
        }
        // twice, for orthogonality to working precision
        let y = x - &q * (q.adjoint() * x);
        &y - &q * (q.adjoint() * &y)
    };
    if let Some(h) = own {
        let p = project(h);
        let n = p.norm();
        if n > 1e-12 * h.norm() && n > 0.0 {
            return Ok(p.unscale(n));
        }
    }
    loop {
        let p = project(&complex_normal_vec(dim, rng));
        let n = p.norm();
        if n > 1e-8 {
            return Ok(p.unscale(n));
        }
    }
}

/// Isotropic random unit vector.
pub fn build_common_precoder<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DVector<C64>> {
    if dim == 0 {
        return Err(Error::Dimension("common precoder needs dim >= 1".into()));
    }
    loop {
        let c = complex_normal_vec(dim, rng);
        let n = c.norm();
        if n > 0.0 {
            return Ok(c.unscale(n));
        }
    }
}

/// Unit vector along `h` (maximum-ratio transmission).
pub fn mrt(h: &DVector<C64>) -> DVector<C64> {
    let n = h.norm();
    if n == 0.0 {
        let mut e = DVector::zeros(h.len());
        e[0] = C64::new(1.0, 0.0);
        return e;
    }
    h.unscale(n)
}
