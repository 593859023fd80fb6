// The ordering corrections inside the estimators are exact algebraic
// identities, so synthetic archives with known statistics must reproduce
// the corresponding quantum expectations to the digit (deterministic
// samples) or within quoted errors (random samples).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use srlaser_core::estimators;
use srlaser_core::langevin::{TrajMoments, TrajectoryArchive};
use srlaser_core::params::SystemParams;

// Build an archive directly from sample paths, deriving the running
// moments the same way the integrator does.
fn archive_from_samples(
    n_atoms: usize,
    samples: Vec<Vec<[f32; 5]>>,
    stride_time: f64,
) -> TrajectoryArchive {
    let m_traj = samples.len();
    let n_samples = samples[0].len();
    let mut moments = vec![TrajMoments::default(); m_traj];
    let mut mean_series = vec![0.0; n_samples];
    for (j, traj) in samples.iter().enumerate() {
        assert_eq!(traj.len(), n_samples);
        for (k, s) in traj.iter().enumerate() {
            let q = f64::from(s[0]);
            let p = f64::from(s[1]);
            let sx = f64::from(s[2]);
            let sy = f64::from(s[3]);
            let sz = f64::from(s[4]);
            let n = q * q + p * p;
            moments[j].sum_n += n;
            moments[j].sum_n2 += n * n;
            moments[j].sum_spm += sx * sx + sy * sy;
            moments[j].sum_sz += sz;
            moments[j].count += 1;
            mean_series[k] += n - 0.5;
        }
    }
    for v in &mut mean_series {
        *v /= m_traj as f64;
    }
    TrajectoryArchive {
        params: SystemParams::resonant(n_atoms, 1.0, 1.0, 1.5),
        m_traj,
        dt: stride_time,
        seed: 0,
        t_relax: 0.0,
        t_collect: stride_time * (n_samples.saturating_sub(1)) as f64,
        stride_time,
        samples,
        moments,
        mean_photons_series: mean_series,
        flags: Vec::new(),
    }
}

// Four deterministic sign patterns at fixed radius make every moment a
// dyadic rational, so the ordering identities must hold exactly:
// photons = 2v - 1/2 and the second factorial moment 4v^2 - 4v + 1/2
// for quadrature samples q, p = +-sqrt(v). The spin block carries the
// matching half-quantum: Sx, Sy = +-1/(2 sqrt N) with Sz = -1 is the
// symmetric-ordering image of every atom in the ground state, and the
// collective cross term must cancel it to give spsm = pair = 0.
#[test]
fn deterministic_widths_hit_the_ordering_identities_exactly() {
    let n_atoms = 4;
    let half = 1.0 / (2.0 * (n_atoms as f32).sqrt());
    for &v in &[0.25f32, 1.0, 4.0] {
        let r = v.sqrt();
        let mut traj = Vec::new();
        for signs in 0..4u8 {
            let sq = if signs & 1 == 0 { 1.0 } else { -1.0 };
            let sp = if signs & 2 == 0 { 1.0 } else { -1.0 };
            traj.push([r * sq, r * sp, half * sq, half * sp, -1.0]);
        }
        let archive = archive_from_samples(n_atoms, vec![traj; 3], 0.1);
        let obs = estimators::observables(&archive).unwrap();
        let v = f64::from(v);
        assert_eq!(obs.photons.value, 2.0 * v - 0.5);
        assert_eq!(obs.photons.se, 0.0);
        assert_eq!(obs.photons2.value, 4.0 * v * v - 4.0 * v + 0.5);
        assert_eq!(obs.spsm.value, 0.0);
        assert_eq!(obs.pair.value, 0.0);
        assert_eq!(obs.sz.value, -1.0);
    }
}

// Gaussian quadrature samples of width 1/4 around a displaced mean are a
// coherent state: four photons, Poissonian counting, no atomic
// coherence. Everything must land within its own quoted error.
#[test]
fn coherent_samples_reproduce_poissonian_statistics() {
    let n_atoms = 8;
    let m_traj = 400;
    let n_samples = 64;
    let half = 1.0 / (2.0 * (n_atoms as f64).sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let samples: Vec<Vec<[f32; 5]>> = (0..m_traj)
        .map(|_| {
            (0..n_samples)
                .map(|_| {
                    [
                        (2.0 + 0.5 * normal()) as f32,
                        (0.5 * normal()) as f32,
                        (half * normal()) as f32,
                        (half * normal()) as f32,
                        -1.0,
                    ]
                })
                .collect()
        })
        .collect();
    let archive = archive_from_samples(n_atoms, samples, 0.1);
    let obs = estimators::observables(&archive).unwrap();

    let photon_err = (obs.photons.value - 4.0).abs();
    assert!(
        photon_err < 3.0 * obs.photons.se && photon_err < 0.1,
        "photons {} +- {}",
        obs.photons.value,
        obs.photons.se
    );
    let g2_err = (obs.g2.value - 1.0).abs();
    assert!(
        g2_err < 3.0 * obs.g2.se && g2_err < 0.05,
        "g2 {} +- {}",
        obs.g2.value,
        obs.g2.se
    );
    assert!(obs.spsm.value.abs() < 3.0 * obs.spsm.se.max(1e-6));
    assert!(obs.pair.value.abs() < 3.0 * obs.pair.se.max(1e-6));

    // Lag zero of the correlation is the uncorrected mean square field,
    // computed from the same samples by the same averaging.
    let curve = estimators::field_correlation(&archive, 8).unwrap();
    assert!((curve.values[0].re - (obs.photons.value + 0.5)).abs() < 1e-12);
    assert!(curve.values[0].im.abs() < 1e-12);
}

// A constant-amplitude field whose phase performs a Gaussian random walk
// has |C(tau)| = n exp(-D tau) with D half the full width: the fitted
// width must recover the walk's diffusion constant.
#[test]
fn fitter_recovers_a_known_phase_diffusion_rate() {
    let delta_nu = 0.2f64;
    let stride = 0.1;
    let amp = 3.0f64;
    let m_traj = 200;
    let n_samples = 400;
    let step_sd = (delta_nu * stride).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let samples: Vec<Vec<[f32; 5]>> = (0..m_traj)
        .map(|_| {
            let mut phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            (0..n_samples)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    phi += step_sd * z;
                    [
                        (amp * phi.cos()) as f32,
                        (amp * phi.sin()) as f32,
                        0.0,
                        0.0,
                        -1.0,
                    ]
                })
                .collect()
        })
        .collect();
    let archive = archive_from_samples(2, samples, stride);
    let fit = estimators::linewidth(&archive).unwrap();
    let err = (fit.delta_nu - delta_nu).abs();
    assert!(
        err / delta_nu < 0.05 && err < 3.0 * fit.se + 0.004,
        "fitted {} +- {} for a walk at {}",
        fit.delta_nu,
        fit.se,
        delta_nu
    );
    assert!(fit.rms_log_residual < 0.03);
}

// Quadrupling the ensemble must halve the quoted standard errors, up to
// the sampling noise of the error estimate itself.
#[test]
fn standard_errors_halve_when_trajectories_quadruple() {
    let make = |m_traj: usize, seed: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<Vec<[f32; 5]>> = (0..m_traj)
            .map(|_| {
                (0..32)
                    .map(|_| {
                        let z: f64 = rng.sample(StandardNormal);
                        let z2: f64 = rng.sample(StandardNormal);
                        [
                            (1.0 + 0.5 * z) as f32,
                            (0.5 * z2) as f32,
                            0.0,
                            0.0,
                            0.2,
                        ]
                    })
                    .collect()
            })
            .collect();
        archive_from_samples(5, samples, 0.1)
    };
    let small = estimators::observables(&make(150, 5)).unwrap();
    let large = estimators::observables(&make(600, 6)).unwrap();
    let ratio = small.photons.se / large.photons.se;
    assert!(
        (1.4..2.6).contains(&ratio),
        "se ratio {ratio} (small {} large {})",
        small.photons.se,
        large.photons.se
    );
}
