//! End-to-end checks on the stochastic ensemble integrator: stationary
//! fluctuation-dissipation balance, moment-balance residuals of the
//! equations of motion at large ensemble size, realized noise covariance,
//! weak self-convergence at an operating point, threshold behavior, and
//! bit-reproducibility across worker counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use srlaser_core::langevin::{
    self, diffusion, noise_factor, ArchiveFlag, PhaseSpacePoint, TrajectoryArchive,
};
use srlaser_core::params::SystemParams;

/// Pull a per-trajectory time average of f over the archived samples.
fn traj_means(archive: &TrajectoryArchive, f: impl Fn(&[f32; 5]) -> f64) -> Vec<f64> {
    archive
        .samples
        .iter()
        .map(|traj| traj.iter().map(&f).sum::<f64>() / traj.len() as f64)
        .collect()
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

#[test]
fn balanced_pumping_sits_at_the_fluctuation_dissipation_point() {
    // At w = gamma with the coupling off, every variable is an
    // Ornstein-Uhlenbeck process whose stationary variance is fixed by
    // the diffusion matrix: Var(q) = Var(p) = 1/4, Var(sx) = Var(sy) =
    // 1/(4N), Var(sz) = 1/N, and all means vanish (d0 = 0). Those widths
    // are exactly the symmetric-ordering vacuum, so the estimators must
    // read zero photons, zero inversion, zero pair correlation.
    let p = SystemParams::resonant(10, 0.0, 4.0, 1.0);
    let n = p.n_atoms as f64;
    let archive = langevin::run(&p, 600, 8.0, 15.0, 0.0125, 21).unwrap();
    assert!(
        archive.flags.contains(&ArchiveFlag::StrideFallback),
        "no linewidth prediction exists here, stride must fall back"
    );

    let pooled_var = |idx: usize| -> f64 {
        let mut acc = 0.0;
        let mut count = 0usize;
        for traj in &archive.samples {
            for s in traj {
                acc += (s[idx] as f64).powi(2);
                count += 1;
            }
        }
        acc / count as f64
    };
    // Second moments about zero; the means are zero by symmetry.
    assert!((pooled_var(0) - 0.25).abs() < 0.025, "Var(q) = {}", pooled_var(0));
    assert!((pooled_var(1) - 0.25).abs() < 0.025, "Var(p) = {}", pooled_var(1));
    let sx_var = pooled_var(2);
    let sy_var = pooled_var(3);
    assert!(
        (sx_var - 1.0 / (4.0 * n)).abs() < 0.1 / (4.0 * n),
        "Var(sx) = {sx_var} vs {}",
        1.0 / (4.0 * n)
    );
    assert!(
        (sy_var - 1.0 / (4.0 * n)).abs() < 0.1 / (4.0 * n),
        "Var(sy) = {sy_var} vs {}",
        1.0 / (4.0 * n)
    );
    let sz_var = pooled_var(4);
    assert!(
        (sz_var - 1.0 / n).abs() < 0.1 / n,
        "Var(sz) = {sz_var} vs {}",
        1.0 / n
    );

    let obs = srlaser_core::estimators::observables(&archive).unwrap();
    assert!(obs.photons.value.abs() < 4.0 * obs.photons.se);
    assert!(obs.sz.value.abs() < 4.0 * obs.sz.se);
    assert!(obs.pair.value.abs() < 4.0 * obs.pair.se);
}

#[test]
fn moment_balance_residuals_vanish_at_steady_state() {
    // Phase-invariant balance relations that hold exactly under the SDE,
    // including the vacuum (Ito) inflow of the field noise:
    //   photon flow:    -kappa <q^2+p^2 - 1/2> + N Omega <q sy - p sx> = 0
    //   inversion flow: -(w+gamma)(<sz> - d0) + 2 Omega <p sx - q sy> = 0
    // Tested over 10^4 trajectories as per-trajectory residual means
    // against their ensemble standard error.
    let p = SystemParams::resonant(40, 5.0, 25.0, 19.0);
    let archive = langevin::run(&p, 10_000, 3.0, 12.0, 0.002, 404).unwrap();
    let n = p.n_atoms as f64;

    let r1: Vec<f64> = traj_means(&archive, |s| {
        let (q, pp, sx, sy) = (s[0] as f64, s[1] as f64, s[2] as f64, s[3] as f64);
        -p.kappa * (q * q + pp * pp - 0.5) + n * p.omega * (q * sy - pp * sx)
    });
    let (m1, se1) = mean_se(&r1);
    assert!(
        m1.abs() <= 5.0 * se1,
        "photon balance residual {m1:.4} exceeds 5 se = {:.4}",
        5.0 * se1
    );

    let r2: Vec<f64> = traj_means(&archive, |s| {
        let (q, pp, sx, sy, sz) = (
            s[0] as f64,
            s[1] as f64,
            s[2] as f64,
            s[3] as f64,
            s[4] as f64,
        );
        -(p.repump + p.gamma) * (sz - p.d0()) + 2.0 * p.omega * (pp * sx - q * sy)
    });
    let (m2, se2) = mean_se(&r2);
    assert!(
        m2.abs() <= 5.0 * se2,
        "inversion balance residual {m2:.4} exceeds 5 se = {:.4}",
        5.0 * se2
    );
}

#[test]
fn realized_noise_covariance_matches_the_diffusion_matrix() {
    // Draw a large batch of increments through the factor the integrator
    // uses and check the empirical covariance against 2 D dt entrywise.
    let p = SystemParams::resonant(40, 5.0, 25.0, 19.0);
    let means = PhaseSpacePoint {
        q: 0.3,
        p: -0.2,
        sx: 0.05,
        sy: 0.02,
        sz: 0.5,
    };
    let dt = 0.01;
    let d = diffusion(&means, &p);
    let b = noise_factor(&d, dt).unwrap();
    let k_draws = 60_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut cov = [[0.0f64; 5]; 5];
    for _ in 0..k_draws {
        let mut z = [0.0f64; 5];
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        let mut xi = [0.0f64; 5];
        for i in 0..5 {
            xi[i] = (0..5).map(|k| b[i][k] * z[k]).sum();
        }
        for i in 0..5 {
            for j in 0..5 {
                cov[i][j] += xi[i] * xi[j];
            }
        }
    }
    for row in cov.iter_mut() {
        for c in row.iter_mut() {
            *c /= k_draws as f64;
        }
    }
    for i in 0..5 {
        for j in 0..5 {
            let target = 2.0 * d.0[i][j] * dt;
            // Gaussian fourth-moment error bar for a covariance entry.
            let se = ((2.0 * d.0[i][i] * dt) * (2.0 * d.0[j][j] * dt) + target * target)
                .sqrt()
                / (k_draws as f64).sqrt();
            assert!(
                (cov[i][j] - target).abs() <= 3.0 * se,
                "cov[{i}][{j}] = {:.3e} vs 2 D dt = {:.3e} (se {:.1e})",
                cov[i][j],
                target,
                se
            );
        }
    }
}

#[test]
fn operating_point_photons_are_step_size_converged() {
    // Weak second order: halving dt must leave the steady photon number
    // unchanged within combined statistics, and both runs should land on
    // the closed-form value. The collection window is trend-free.
    let p = SystemParams::resonant(40, 5.0, 25.0, 19.0);
    let coarse = langevin::run(&p, 300, 3.0, 25.0, 0.002, 11).unwrap();
    let fine = langevin::run(&p, 300, 3.0, 25.0, 0.001, 12).unwrap();
    let oc = srlaser_core::estimators::observables(&coarse).unwrap();
    let of = srlaser_core::estimators::observables(&fine).unwrap();
    let sigma = (oc.photons.se.powi(2) + of.photons.se.powi(2)).sqrt();
    assert!(
        (oc.photons.value - of.photons.value).abs() < 3.0 * sigma,
        "photons moved from {} to {} under dt halving",
        oc.photons,
        of.photons
    );
    let exact = srlaser_core::meanfield::steady_state_analytic(&p)
        .unwrap()
        .photons;
    assert!(
        (oc.photons.value - exact).abs() / exact < 0.15,
        "photons {} vs closed form {exact}",
        oc.photons
    );
    let (slope, se, trending) = coarse.stationarity();
    assert!(
        !trending,
        "photon series trend {slope:.3e} +- {se:.3e} flagged as significant"
    );
}

#[test]
fn just_above_threshold_photons_are_positive() {
    // Slightly past w = gamma the diffusion matrix is positive
    // semidefinite and amplified vacuum noise gives a small but real
    // photon signal; below gamma the factorization refuses by design.
    let p = SystemParams::resonant(40, 5.0, 25.0, 1.3);
    let archive = langevin::run(&p, 400, 5.0, 10.0, 0.002, 9).unwrap();
    let obs = srlaser_core::estimators::observables(&archive).unwrap();
    assert!(
        obs.photons.value > 0.0,
        "photons {} at w just above gamma",
        obs.photons
    );
    assert!(obs.photons.value < 1.0);

    let below = SystemParams::resonant(40, 5.0, 25.0, 0.5);
    assert!(matches!(
        langevin::run(&below, 400, 5.0, 10.0, 0.002, 9),
        Err(langevin::LangevinError::NonPositiveDiffusion { .. })
    ));
}

#[test]
fn archives_are_bit_identical_across_worker_counts() {
    // Per-trajectory random streams and a start-of-step shared diffusion
    // make the result a pure function of (seed, m_traj, dt); thread count
    // must not leak in anywhere.
    let p = SystemParams::resonant(10, 1.0, 4.0, 1.0);
    let run_in_pool = |threads: usize| -> TrajectoryArchive {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| langevin::run(&p, 24, 5.5, 3.0, 0.01, 77).unwrap())
    };
    let one = run_in_pool(1);
    let four = run_in_pool(4);
    assert!(one.flags.contains(&ArchiveFlag::LowTrajectories));
    assert_eq!(one.samples, four.samples);
    assert_eq!(one.mean_photons_series, four.mean_photons_series);
    for (a, b) in one.moments.iter().zip(&four.moments) {
        assert_eq!(a.sum_n, b.sum_n);
        assert_eq!(a.sum_n2, b.sum_n2);
        assert_eq!(a.sum_spm, b.sum_spm);
        assert_eq!(a.sum_sz, b.sum_sz);
        assert_eq!(a.count, b.count);
    }
    let mut tsv_one = Vec::new();
    let mut tsv_four = Vec::new();
    one.write_tsv(&mut tsv_one).unwrap();
    four.write_tsv(&mut tsv_four).unwrap();
    assert_eq!(tsv_one, tsv_four);
}
