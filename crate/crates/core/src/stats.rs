//! Small statistics helpers shared by the stochastic solvers and the
//! estimators: standard errors over independent trajectories, a jackknife
//! for the g2 ratio, and a trajectory-level bootstrap for correlation
//! functions.
//!
//! Trajectories are the independent units everywhere; samples within one
//! trajectory are correlated and must be reduced to per-trajectory
//! statistics before any of these are applied.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mean and standard error of the mean for independent samples.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    assert!(n >= 2, "need at least two samples for a standard error");
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Jackknife estimate and standard error for the intensity correlation
/// g2 = mean(num) / mean(den)^2, with `num`/`den` per-trajectory
/// time-averages of the fourth and second field moments.
pub fn jackknife_g2(num: &[f64], den: &[f64]) -> (f64, f64) {
    let j = num.len();
    assert_eq!(j, den.len());
    assert!(j >= 2);
    let sn: f64 = num.iter().sum();
    let sd: f64 = den.iter().sum();
    let full = (sn / j as f64) / (sd / j as f64).powi(2);
    let mut loo = Vec::with_capacity(j);
    for i in 0..j {
        let m = (sn - num[i]) / (j - 1) as f64;
        let n = (sd - den[i]) / (j - 1) as f64;
        loo.push(m / (n * n));
    }
    let loo_mean = loo.iter().sum::<f64>() / j as f64;
    let var = loo.iter().map(|x| (x - loo_mean) * (x - loo_mean)).sum::<f64>()
        * (j - 1) as f64
        / j as f64;
    // Bias-corrected jackknife point estimate.
    let est = j as f64 * full - (j - 1) as f64 * loo_mean;
    (est, var.sqrt())
}

/// Bootstrap standard error of |mean over trajectories| per lag, resampling
/// whole trajectories with replacement. `per_traj[j][l]` is trajectory j's
/// time-averaged correlation at lag l. Deterministic given `seed`.
pub fn bootstrap_abs_mean_se(per_traj: &[Vec<Complex64>], rounds: usize, seed: u64) -> Vec<f64> {
    let j = per_traj.len();
    assert!(j >= 2);
    let lags = per_traj[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = vec![0.0f64; lags];
    let mut acc2 = vec![0.0f64; lags];
    let mut sum = vec![Complex64::new(0.0, 0.0); lags];
    for _ in 0..rounds {
        for s in sum.iter_mut() {
            *s = Complex64::new(0.0, 0.0);
        }
        for _ in 0..j {
            let pick = rng.gen_range(0..j);
            for (s, c) in sum.iter_mut().zip(&per_traj[pick]) {
                *s += c;
            }
        }
        for l in 0..lags {
            let v = (sum[l] / j as f64).norm();
            acc[l] += v;
            acc2[l] += v * v;
        }
    }
    let r = rounds as f64;
    (0..lags)
        .map(|l| {
            let m = acc[l] / r;
            ((acc2[l] / r - m * m).max(0.0) * r / (r - 1.0)).sqrt()
        })
        .collect()
}

/// Ordinary least-squares slope of y against x with the standard error of
/// the slope estimated from the residuals. Returns (slope, slope_se).
pub fn ols_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len();
    assert_eq!(n, y.len());
    assert!(n >= 3, "need at least three points for a slope error");
    let xm = x.iter().sum::<f64>() / n as f64;
    let ym = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|xi| (xi - xm) * (xi - xm)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - xm) * (yi - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let r = yi - (intercept + slope * xi);
            r * r
        })
        .sum();
    let sigma2 = ss_res / (n - 2) as f64;
    (slope, (sigma2 / sxx).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_se_matches_hand_computation() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-15);
        // Sample variance 5/3, SE = sqrt(5/12).
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn jackknife_g2_on_constant_samples_is_exact() {
        let num = vec![8.0; 6];
        let den = vec![2.0; 6];
        let (g2, se) = jackknife_g2(&num, &den);
        assert!((g2 - 2.0).abs() < 1e-12);
        assert!(se < 1e-12);
    }

    #[test]
    fn jackknife_g2_se_scales_with_spread() {
        let num: Vec<f64> = (0..40).map(|i| 4.0 + 0.1 * ((i % 7) as f64 - 3.0)).collect();
        let den = vec![2.0; 40];
        let (g2, se) = jackknife_g2(&num, &den);
        assert!((g2 - 1.0).abs() < 0.05);
        assert!(se > 0.0 && se < 0.05);
    }

    #[test]
    fn ols_recovers_exact_line() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|xi| 3.0 - 0.25 * xi).collect();
        let (slope, se) = ols_slope(&x, &y);
        assert!((slope + 0.25).abs() < 1e-12);
        assert!(se < 1e-12);
    }

    #[test]
    fn bootstrap_se_shrinks_with_more_trajectories() {
        let mk = |j: usize| -> Vec<Vec<Complex64>> {
            (0..j)
                .map(|i| vec![Complex64::new(1.0 + 0.2 * ((i % 5) as f64 - 2.0), 0.0); 3])
                .collect()
        };
        let se_small = bootstrap_abs_mean_se(&mk(10), 400, 1)[0];
        let se_large = bootstrap_abs_mean_se(&mk(160), 400, 1)[0];
        assert!(se_large < se_small * 0.5);
    }
}
