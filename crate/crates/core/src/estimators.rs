//! Observable estimators over trajectory archives.
//!
//! The phase-space variables are symmetrically ordered, so every operator
//! expectation picks up ordering constants:
//!
//!   <adag a>            = E[q^2 + p^2] - 1/2
//!   <adag adag a a>     = E[(q^2 + p^2)^2] - 2 E[q^2 + p^2] + 1/2
//!   <sigma_z>           = E[Sz]
//!   <S+ S->             = E[Sx^2 + Sy^2] + E[Sz]/(2N)   (per-atom pair scale)
//!   <sigma1+ sigma2->   = (N^2 <S+ S-> - N (1 + <sigma_z>)/2) / (N (N - 1))
//!
//! Each trajectory contributes one time-averaged value; the ensemble mean
//! and its standard error come from the scatter across trajectories, which
//! is what makes the error bars honest in the presence of correlation
//! within a trajectory. g2(0) is a ratio of two such means and gets a
//! jackknife instead.

use num_complex::Complex64;
use thiserror::Error;

use crate::langevin::TrajectoryArchive;
use crate::stats;

#[derive(Debug, Error, PartialEq)]
pub enum EstimatorError {
    #[error("archive holds no samples")]
    EmptyArchive,
    #[error(
        "photon estimate {photons:.3e} +- {se:.1e} sits below zero by more \
         than three standard errors; the archive is unphysical"
    )]
    BelowNoiseFloor { photons: f64, se: f64 },
    #[error("pair correlation is undefined for a single atom")]
    PairUndefined,
    #[error("requested lag {lag} exceeds the archive span of {samples} samples")]
    LagBeyondSpan { lag: usize, samples: usize },
    #[error(
        "correlation window too short: |C| stayed above {fraction:.2} of C(0) \
         over {lags} available lags"
    )]
    WindowTooShort { fraction: f64, lags: usize },
    #[error("decay fit quality poor: rms log-residual {rms:.3} exceeds 0.05")]
    FitQuality { rms: f64 },
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl std::fmt::Display for Estimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.6e} +- {:.1e}", self.value, self.se)
    }
}

/// Steady-state observables from one archive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableRecord {
    /// Intracavity photon number <adag a>.
    pub photons: Estimate,
    /// Second factorial moment <adag adag a a>.
    pub photons2: Estimate,
    /// g2(0) = <adag adag a a> / <adag a>^2.
    pub g2: Estimate,
    /// Per-atom inversion <sigma_z>.
    pub sz: Estimate,
    /// Collective (per-atom normalized) <S+ S->.
    pub spsm: Estimate,
    /// Spin-spin correlation <sigma1+ sigma2->.
    pub pair: Estimate,
    pub m_traj: usize,
}

pub fn observables(archive: &TrajectoryArchive) -> Result<ObservableRecord, EstimatorError> {
    if archive.n_samples() == 0 || archive.moments.is_empty() {
        return Err(EstimatorError::EmptyArchive);
    }
    // The record carries the pair correlation, whose normalization divides
    // by N - 1; a single-atom archive has no pair to report.
    if archive.params.n_atoms == 1 {
        return Err(EstimatorError::PairUndefined);
    }
    let n = archive.params.n_atoms as f64;
    let m_traj = archive.moments.len();
    let mut photons = Vec::with_capacity(m_traj);
    let mut photons2 = Vec::with_capacity(m_traj);
    let mut sz = Vec::with_capacity(m_traj);
    let mut spsm = Vec::with_capacity(m_traj);
    let mut pair = Vec::with_capacity(m_traj);
    for m in &archive.moments {
        let cnt = m.count as f64;
        let mean_n = m.sum_n / cnt;
        let mean_n2 = m.sum_n2 / cnt;
        let mean_spm = m.sum_spm / cnt;
        let mean_sz = m.sum_sz / cnt;
        photons.push(mean_n - 0.5);
        photons2.push(mean_n2 - 2.0 * mean_n + 0.5);
        sz.push(mean_sz);
        let sp = mean_spm + mean_sz / (2.0 * n);
        spsm.push(sp);
        pair.push((n * n * sp - n * (1.0 + mean_sz) / 2.0) / (n * (n - 1.0)));
    }
    let est = |xs: &[f64]| -> Estimate {
        let (value, se) = stats::mean_se(xs);
        Estimate { value, se }
    };
    let photons_est = est(&photons);
    // A mildly negative mean is honest sampling noise around vacuum; a mean
    // negative beyond its own error bar means the ordering correction was
    // applied to something that was never a field sample.
    if photons_est.value < -3.0 * photons_est.se {
        return Err(EstimatorError::BelowNoiseFloor {
            photons: photons_est.value,
            se: photons_est.se,
        });
    }
    let (g2v, g2se) = stats::jackknife_g2(&photons2, &photons);
    Ok(ObservableRecord {
        photons: photons_est,
        photons2: est(&photons2),
        g2: Estimate { value: g2v, se: g2se },
        sz: est(&sz),
        spsm: est(&spsm),
        pair: est(&pair),
        m_traj,
    })
}

/// First-order field correlation C(tau_k) = E[conj(a(t)) a(t + tau_k)],
/// averaged over time origins within each trajectory and then over
/// trajectories. Errors on |C| come from a trajectory bootstrap.
#[derive(Debug, Clone)]
pub struct CorrelationCurve {
    pub taus: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Bootstrap standard error of |values[k]|.
    pub sigmas: Vec<f64>,
}

pub fn field_correlation(
    archive: &TrajectoryArchive,
    max_lag: usize,
) -> Result<CorrelationCurve, EstimatorError> {
    let s = archive.n_samples();
    if s == 0 {
        return Err(EstimatorError::EmptyArchive);
    }
    if max_lag >= s {
        return Err(EstimatorError::LagBeyondSpan {
            lag: max_lag,
            samples: s,
        });
    }
    let m = archive.samples.len();
    let mut per_traj: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    for j in 0..m {
        let a: Vec<Complex64> = (0..s).map(|k| archive.field(j, k)).collect();
        let mut curve = Vec::with_capacity(max_lag + 1);
        for lag in 0..=max_lag {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..s - lag {
                acc += a[t].conj() * a[t + lag];
            }
            curve.push(acc / (s - lag) as f64);
        }
        per_traj.push(curve);
    }
    let mut values = vec![Complex64::new(0.0, 0.0); max_lag + 1];
    for curve in &per_traj {
        for (v, c) in values.iter_mut().zip(curve) {
            *v += c;
        }
    }
    for v in values.iter_mut() {
        *v /= m as f64;
    }
    let sigmas = stats::bootstrap_abs_mean_se(&per_traj, 200, archive.seed ^ 0x9e37_79b9);
    let taus = (0..=max_lag)
        .map(|k| k as f64 * archive.stride_time)
        .collect();
    Ok(CorrelationCurve {
        taus,
        values,
        sigmas,
    })
}

/// Exponential decay fit of |C(tau)|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinewidthFit {
    /// FWHM in angular frequency units: twice the fitted amplitude decay
    /// rate, |C| ~ exp(-delta_nu tau / 2).
    pub delta_nu: f64,
    pub se: f64,
    pub rms_log_residual: f64,
    /// Index window [start, end] of the curve used by the fit.
    pub window: (usize, usize),
}

/// Fit the decay of |C| over the window from the first point at or below
/// 0.8 |C(0)| through the first point below 0.2 |C(0)|. The early window
/// is excluded on purpose: the symmetric-ordering vacuum contributes a
/// spurious fast component ~ exp(-kappa tau) of weight 1/2 that has died
/// by the time |C| reaches 80% of its initial value in any regime where
/// the linewidth is narrower than the cavity.
pub fn fit_linewidth(curve: &CorrelationCurve) -> Result<LinewidthFit, EstimatorError> {
    let mags: Vec<f64> = curve.values.iter().map(|v| v.norm()).collect();
    let c0 = mags[0];
    let start = mags
        .iter()
        .position(|&v| v <= 0.8 * c0)
        .ok_or(EstimatorError::WindowTooShort {
            fraction: 0.8,
            lags: mags.len(),
        })?;
    let end = mags
        .iter()
        .position(|&v| v < 0.2 * c0)
        .ok_or(EstimatorError::WindowTooShort {
            fraction: 0.2,
            lags: mags.len(),
        })?;
    if end < start + 3 {
        return Err(EstimatorError::WindowTooShort {
            fraction: 0.2,
            lags: end.saturating_sub(start) + 1,
        });
    }
    // Weighted least squares on ln|C|: Var(ln|C|) ~ (sigma/|C|)^2.
    let mut sw = 0.0;
    let mut swx = 0.0;
    let mut swy = 0.0;
    for k in start..=end {
        let w = if curve.sigmas[k] > 0.0 {
            (mags[k] / curve.sigmas[k]).powi(2)
        } else {
            1.0
        };
        sw += w;
        swx += w * curve.taus[k];
        swy += w * mags[k].ln();
    }
    let xbar = swx / sw;
    let ybar = swy / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for k in start..=end {
        let w = if curve.sigmas[k] > 0.0 {
            (mags[k] / curve.sigmas[k]).powi(2)
        } else {
            1.0
        };
        let dx = curve.taus[k] - xbar;
        sxx += w * dx * dx;
        sxy += w * dx * (mags[k].ln() - ybar);
    }
    let slope = sxy / sxx;
    let slope_se = (1.0 / sxx).sqrt();
    let intercept = ybar - slope * xbar;
    // Residual scale under the fit weights, so a few wild points with
    // honest large error bars do not masquerade as a bad model.
    let mut ss = 0.0;
    let mut ssw = 0.0;
    for k in start..=end {
        let w = if curve.sigmas[k] > 0.0 {
            (mags[k] / curve.sigmas[k]).powi(2)
        } else {
            1.0
        };
        let r = mags[k].ln() - (intercept + slope * curve.taus[k]);
        ss += w * r * r;
        ssw += w;
    }
    let rms = (ss / ssw).sqrt();
    if rms > 0.05 {
        return Err(EstimatorError::FitQuality { rms });
    }
    Ok(LinewidthFit {
        delta_nu: -2.0 * slope,
        se: 2.0 * slope_se,
        rms_log_residual: rms,
        window: (start, end),
    })
}

/// Linewidth straight from an archive: compute the correlation out to a
/// modest lag, extend if |C| has not yet decayed through the fit window,
/// then fit.
pub fn linewidth(archive: &TrajectoryArchive) -> Result<LinewidthFit, EstimatorError> {
    let s = archive.n_samples();
    if s < 8 {
        return Err(EstimatorError::EmptyArchive);
    }
    let mut max_lag = 80.min(s / 2);
    loop {
        let curve = field_correlation(archive, max_lag)?;
        match fit_linewidth(&curve) {
            Err(EstimatorError::WindowTooShort { .. }) if max_lag < s / 2 => {
                max_lag = (max_lag * 2).min(s / 2);
            }
            other => return other,
        }
    }
}
