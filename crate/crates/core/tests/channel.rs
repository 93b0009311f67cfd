use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rsma_sim::channel::*;
use rsma_sim::Error;

fn geometry(azimuth_deg: f64, radius_m: f64) -> GroupGeometry {
    GroupGeometry {
        azimuth_deg,
        distance_m: 170.0,
        radius_m,
        user_distances_m: vec![200.0, 170.0, 140.0],
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn one_ring_structure() {
    for az in [30.0, -10.0, -50.0, 70.0] {
        let cov = build_one_ring_covariance(&geometry(az, 30.0), 50, 0.5).unwrap();
        let r = &cov.r;
        assert!(max_abs(&(r - r.adjoint())) <= 1e-12);
        for i in 0..50 {
            assert!((r[(i, i)] - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let trace: f64 = (0..50).map(|i| r[(i, i)].re).sum();
        assert!((trace - 50.0).abs() < 1e-10);
        let eig = r.clone().symmetric_eigen();
        let lmax = eig.eigenvalues.max();
        assert!(eig.eigenvalues.min() >= -1e-10 * lmax);
        assert!((eig.eigenvalues.sum() - 50.0).abs() < 1e-9);
        assert!(cov.eigvals.windows(2).all(|w| w[0] >= w[1]));
        assert!(cov.rank < 50 && cov.rank > 3, "rank {}", cov.rank);
        assert!(cov.eigvals.iter().all(|&l| l > RANK_THRESHOLD * lmax));
    }
}

#[test]
fn point_scatterer_gives_steering_outer_product() {
    let theta = 30f64.to_radians();
    let cov = build_one_ring_covariance(&geometry(30.0, 1e-6), 12, 0.5).unwrap();
    assert_eq!(cov.rank, 1);
    for m in 0..12 {
        for n in 0..12 {
            let want = C64::from_polar(
                1.0,
                -std::f64::consts::PI * (m as f64 - n as f64) * theta.sin(),
            );
            assert!((cov.r[(m, n)] - want).norm() < 1e-9, "({m},{n})");
        }
    }
}

#[test]
fn standard_geometry_has_ten_degree_spread() {
    let g = geometry(30.0, 30.0);
    assert!((g.half_spread().to_degrees() - 10.0).abs() < 0.1);
}

#[test]
fn geometry_errors() {
    let bad = GroupGeometry {
        distance_m: 20.0,
        ..geometry(30.0, 30.0)
    };
    assert!(matches!(
        build_one_ring_covariance(&bad, 50, 0.5),
        Err(Error::Geometry(_))
    ));
    let zero = geometry(30.0, 0.0);
    assert!(matches!(
        build_one_ring_covariance(&zero, 50, 0.5),
        Err(Error::Geometry(_))
    ));
    let neg = GroupGeometry {
        user_distances_m: vec![-1.0],
        ..geometry(30.0, 30.0)
    };
    assert!(neg.validate().is_err());
    assert!(build_one_ring_covariance(&geometry(30.0, 30.0), 1, 0.5).is_err());
    assert!(build_one_ring_covariance(&geometry(30.0, 30.0), 50, 0.0).is_err());
}

#[test]
fn truncation_rule() {
    assert_eq!(truncated_rank_for(40, 50, 6, 4).unwrap(), 15);
    assert_eq!(truncated_rank_for(12, 50, 6, 1).unwrap(), 12);
    assert_eq!(truncated_rank_for(10, 50, 6, 4).unwrap(), 10);
    assert!(matches!(
        truncated_rank_for(10, 50, 102, 4),
        Err(Error::Infeasible(_))
    ));
    let cov = build_one_ring_covariance(&geometry(30.0, 30.0), 50, 0.5).unwrap();
    let t = truncate_rank(&cov, 6, 4).unwrap();
    assert_eq!(t.truncated_rank, cov.rank.min(15));
    assert_eq!(t.eigvecs.ncols(), t.truncated_rank);
    assert_eq!(t.eigvals[..], cov.eigvals[..t.truncated_rank]);
    let gram = t.eigvecs.adjoint() * &t.eigvecs;
    assert!(max_abs(&(gram - DMatrix::identity(t.truncated_rank, t.truncated_rank))) <= 1e-10);
}

#[test]
fn path_loss() {
    let l = UserLinkParams::from_distance(4e4, 2.5, 200.0);
    assert!((l.zeta - 4e4 * 200f64.powf(-2.5)).abs() < 1e-15);
}

#[test]
fn sampling_is_deterministic() {
    let cov = truncate_rank(
        &build_one_ring_covariance(&geometry(30.0, 30.0), 50, 0.5).unwrap(),
        6,
        4,
    )
    .unwrap();
    let link = UserLinkParams::from_distance(4e4, 2.5, 170.0);
    let a = sample_channel(&cov, &link, &mut ChaCha8Rng::seed_from_u64(5));
    let b = sample_channel(&cov, &link, &mut ChaCha8Rng::seed_from_u64(5));
    assert_eq!(a, b);
    assert_eq!(a.g_vv.len(), cov.truncated_rank);
    assert_ne!(a.g_vv, a.g_hh);
}

#[test]
fn channel_energy_matches_eigenvalues() {
    let cov = truncate_rank(
        &build_one_ring_covariance(&geometry(30.0, 30.0), 50, 0.5).unwrap(),
        6,
        4,
    )
    .unwrap();
    let link = UserLinkParams::from_distance(4e4, 2.5, 170.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = cov.coloring();
    let n = 100_000;
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let x = (&a * sample_channel(&cov, &link, &mut rng).g_vv).norm_squared();
        s += x;
        s2 += x * x;
    }
    let mean = s / n as f64;
    let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
    let want: f64 = cov.eigvals.iter().sum();
    assert!(
        (mean - want).abs() <= 3.0 * se,
        "{mean} vs {want} (se {se})"
    );
}

#[test]
fn single_eigenvalue_gives_exponential_gain() {
    let r = DMatrix::from_diagonal(&DVector::from_vec(vec![
        C64::new(4.0, 0.0),
        C64::new(0.0, 0.0),
    ]));
    let cov = decompose(r).unwrap();
    assert_eq!(cov.truncated_rank, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 100_000;
    let draws: Vec<f64> = (0..n)
        .map(|_| {
            cov.full_channel(&complex_normal_vec(1, &mut rng))
                .norm_squared()
        })
        .collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    // Exp(mean 4): standard deviation 4
    assert!(
        (mean - 4.0).abs() <= 3.0 * 4.0 / (n as f64).sqrt(),
        "{mean}"
    );
    let tail = draws.iter().filter(|&&x| x > 4.0).count() as f64 / n as f64;
    let p = (-1f64).exp();
    assert!((tail - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt());
}

#[test]
fn sampled_covariance_matches_karhunen_loeve() {
    let cov = truncate_rank(
        &build_one_ring_covariance(&geometry(-10.0, 30.0), 16, 0.5).unwrap(),
        6,
        4,
    )
    .unwrap();
    let target = cov.truncated_covariance();
    let a = cov.coloring();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 200_000;
    let mut acc = DMatrix::<C64>::zeros(16, 16);
    for _ in 0..n {
        let h = &a * complex_normal_vec(cov.truncated_rank, &mut rng);
        acc += &h * h.adjoint();
    }
    acc /= C64::from(n as f64);
    for i in 0..16 {
        for j in 0..16 {
            // Var(h_i conj(h_j)) = R_ii R_jj for circular Gaussians
            let se = (target[(i, i)].re * target[(j, j)].re / n as f64).sqrt();
            let d = acc[(i, j)] - target[(i, j)];
            assert!(
                d.re.abs() <= 5.0 * se && d.im.abs() <= 5.0 * se,
                "({i},{j}): {d}"
            );
        }
    }
}

#[test]
fn csi_error_mixing() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let h = complex_normal_vec(4, &mut rng);
    assert_eq!(apply_csi_error(&h, 0.0, &mut rng).unwrap(), h);
    assert!(apply_csi_error(&h, 1.5, &mut rng).is_err());
    assert!(apply_csi_error(&h, -0.1, &mut rng).is_err());

    for (eps, want_corr2) in [(0.3, 0.7), (1.0, 0.0)] {
        let n = 100_000;
        let (mut var, mut cross, mut hvar) = (0.0, C64::new(0.0, 0.0), 0.0);
        let mut cross_sq = 0.0;
        for _ in 0..n {
            let x = complex_normal_vec(1, &mut rng);
            let y = apply_csi_error(&x, eps, &mut rng).unwrap();
            var += y[0].norm_sqr();
            hvar += x[0].norm_sqr();
            let c = x[0].conj() * y[0];
            cross += c;
            cross_sq += c.norm_sqr();
        }
        let nf = n as f64;
        let (var, hvar) = (var / nf, hvar / nf);
        let c = cross / nf;
        // unit-variance entries: var of |y|^2 is 1
        assert!(
            (var - hvar).abs() <= 3.0 * (2.0 / nf).sqrt(),
            "eps={eps}: {var} vs {hvar}"
        );
        let corr2 = c.norm_sqr() / (var * hvar);
        let se_c = (cross_sq / nf / nf).sqrt();
        let se_corr2 = 2.0 * c.norm() * se_c + se_c * se_c;
        assert!(
            (corr2 - want_corr2).abs() <= 3.0 * se_corr2 + 1e-3,
            "eps={eps}: corr^2 {corr2}"
        );
    }
}
