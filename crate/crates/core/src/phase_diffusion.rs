//! Closed-form linewidth prediction from the phase-diffusion picture.
//!
//! Above threshold the field amplitude is pinned and only its phase
//! diffuses, giving a Lorentzian spectrum whose full width at half maximum
//! (angular frequency units) is
//!
//!   dnu = (C + 1) / (2 (C d0 - 1)) * Gamma/(w + gamma) * Omega^2 kappa / (kappa + Gamma)^2
//!
//! with C the cooperativity parameter and d0 the bare inversion. The
//! expression is meaningful only above threshold (C d0 > 1) and is derived
//! near the optimal repump rate; far from w_opt it degrades smoothly rather
//! than failing outright, so distance from w_opt is reported as a caveat
//! flag, not an error.

use crate::params::SystemParams;

/// Prediction output. `delta_nu` is None below threshold (C d0 <= 1),
/// where the phase-diffusion picture does not apply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinewidthPrediction {
    /// FWHM linewidth in angular frequency units, if above threshold.
    pub delta_nu: Option<f64>,
    /// Threshold parameter C d0; the prediction is valid for > 1.
    pub threshold_parameter: f64,
    /// Set when |w - w_opt| > 0.5 w_opt (or w_opt is not positive): the
    /// repump rate is far from where the expression is controlled.
    pub far_from_optimum: bool,
}

/// Evaluate the phase-diffusion linewidth for the given operating point.
pub fn linewidth(p: &SystemParams) -> LinewidthPrediction {
    let gamma_tot = p.gamma_tot();
    let coop = p.cooperativity();
    let d0 = p.d0();
    let cd0 = coop * d0;
    let w_opt = p.n_atoms as f64 * p.omega * p.omega / (2.0 * p.kappa) - p.gamma - p.t2_inv;
    let far_from_optimum = w_opt <= 0.0 || (p.repump - w_opt).abs() > 0.5 * w_opt;
    let delta_nu = if cd0 > 1.0 {
        let prefactor = (coop + 1.0) / (2.0 * (cd0 - 1.0));
        let pump_ratio = gamma_tot / (p.repump + p.gamma);
        let cavity = p.omega * p.omega * p.kappa / (p.kappa + gamma_tot).powi(2);
        Some(prefactor * pump_ratio * cavity)
    } else {
        None
    };
    LinewidthPrediction {
        delta_nu,
        threshold_parameter: cd0,
        far_from_optimum,
    }
}

/// Evaluate the prediction along a repump grid, carrying the validity
/// information per point. Rows where `delta_nu` is None fall below
/// threshold; `far_from_optimum` marks points outside the controlled band.
pub fn linewidth_curve(p: &SystemParams, w_grid: &[f64]) -> Vec<(f64, LinewidthPrediction)> {
    w_grid
        .iter()
        .map(|&w| {
            let mut q = *p;
            q.repump = w;
            (w, linewidth(&q))
        })
        .collect()
}

/// Large-cooperativity limit of the same expression: the prefactor
/// (C+1)/(2(C d0 - 1)) tends to 1/(2 d0). None when d0 <= 0, where no
/// above-threshold limit exists.
pub fn limit_large_cooperativity(p: &SystemParams) -> Option<f64> {
    let d0 = p.d0();
    if d0 <= 0.0 {
        return None;
    }
    let gamma_tot = p.gamma_tot();
    let pump_ratio = gamma_tot / (p.repump + p.gamma);
    let cavity = p.omega * p.omega * p.kappa / (p.kappa + gamma_tot).powi(2);
    Some(pump_ratio * cavity / (2.0 * d0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn forty_atom_anchor() {
        // N = 40, Omega = 5, kappa = 25, w = 19: C = 2, d0 = 0.9,
        // prefactor 3/1.6, pump ratio 1, cavity factor 625/2025.
        let p = SystemParams::resonant(40, 5.0, 25.0, 19.0);
        let pd = linewidth(&p);
        assert_relative_eq!(pd.delta_nu.unwrap(), 1.875 * 625.0 / 2025.0, epsilon = 1e-12);
        assert_relative_eq!(pd.threshold_parameter, 1.8, epsilon = 1e-12);
        assert!(!pd.far_from_optimum);

        // Same atom number, good-cavity side of the crossover.
        let p1 = SystemParams::resonant(40, 5.0f64.sqrt(), 5.0, 19.0);
        assert_relative_eq!(linewidth(&p1).delta_nu.unwrap(), 0.075, epsilon = 1e-12);
    }

    #[test]
    fn bulk_ensemble_anchors() {
        // N = 1e4 at fixed Omega^2/kappa = 0.1: three cavity widths.
        let p = SystemParams::resonant(10_000, 125f64.sqrt(), 1250.0, 100.0);
        assert_relative_eq!(linewidth(&p).delta_nu.unwrap(), 0.053605, epsilon = 1e-5);
        let p = SystemParams::resonant(10_000, 125f64.sqrt(), 1250.0, 50.0);
        assert_relative_eq!(linewidth(&p).delta_nu.unwrap(), 0.053322, epsilon = 1e-5);
        let p = SystemParams::resonant(10_000, 125f64.sqrt(), 1250.0, 250.0);
        assert_relative_eq!(linewidth(&p).delta_nu.unwrap(), 0.058540, epsilon = 1e-5);
    }

    #[test]
    fn no_prediction_below_threshold() {
        // w barely above gamma: C d0 tiny.
        let p = SystemParams::resonant(40, 5.0, 25.0, 1.05);
        let pd = linewidth(&p);
        assert!(pd.delta_nu.is_none());
        assert!(pd.threshold_parameter < 1.0);
    }

    #[test]
    fn caveat_flag_far_from_optimum() {
        // w_opt = 19 here; w = 2 is well outside the half-width band.
        let p = SystemParams::resonant(40, 5.0, 25.0, 2.0);
        assert!(linewidth(&p).far_from_optimum);
        let p = SystemParams::resonant(40, 5.0, 25.0, 12.0);
        assert!(!linewidth(&p).far_from_optimum);
    }

    #[test]
    fn curve_decreases_toward_optimal_repump_in_lasing_family() {
        // Good-cavity member of the bulk family: w_opt = 499 gamma. On an
        // ascending grid short of the optimum the width narrows steadily.
        let p = SystemParams::resonant(10_000, 1.25f64.sqrt(), 12.5, 0.0);
        let grid: Vec<f64> = (1..=10).map(|i| 49.9 * i as f64).collect();
        let curve = linewidth_curve(&p, &grid);
        assert_eq!(curve.len(), grid.len());
        let widths: Vec<f64> = curve.iter().map(|(_, r)| r.delta_nu.unwrap()).collect();
        for pair in widths.windows(2) {
            assert!(pair[1] < pair[0]);
        }
    }

    #[test]
    fn curve_validity_flips_at_first_threshold() {
        let p = SystemParams::resonant(10_000, 1.25f64.sqrt(), 12.5, 0.0);
        let curve = linewidth_curve(&p, &[0.5, 0.9, 1.0, 1.1, 2.0]);
        for (w, r) in &curve {
            if *w <= 1.0 {
                assert!(r.delta_nu.is_none(), "w = {w} should sit below threshold");
                assert!(r.threshold_parameter <= 1.0);
            } else {
                assert!(r.delta_nu.is_some(), "w = {w} should clear threshold");
                assert!(r.threshold_parameter > 1.0);
            }
        }
    }

    #[test]
    fn crossover_system_beats_equal_intensity_laser_by_an_order() {
        // Two systems at the same repump w = 499 and the same intracavity
        // intensity: the crossover point (xi = 1) of the bulk family, and a
        // laser-side system (xi = 10, so N Omega^2 = 80 kappa^2) whose
        // kappa is chosen to match the crossover photon number. Matching
        // n = N(w+gamma)(d0 - Gamma/(80 kappa))/(2 kappa) to the target is
        // a quadratic in kappa; the wide-cavity root is the laser that
        // emits as brightly, and its line is more than tenfold broader.
        let crossover = SystemParams::resonant(10_000, 12.5f64.sqrt(), 125.0, 499.0);
        let target = crate::meanfield::steady_state_analytic(&crossover).unwrap().photons;
        let n = 1e4;
        let (w, gamma_tot) = (499.0, 500.0);
        let half_flux = n * (w + 1.0) / 2.0;
        let (a, b, c) = (
            target,
            half_flux * (w - 1.0) / (w + 1.0),
            half_flux * gamma_tot / 80.0,
        );
        let kappa = (b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
        let laser = SystemParams::resonant(10_000, (0.008 * kappa * kappa).sqrt(), kappa, 499.0);
        assert_relative_eq!(laser.crossover_xi(), 10.0, max_relative = 1e-9);
        let laser_photons = crate::meanfield::steady_state_analytic(&laser).unwrap().photons;
        assert_relative_eq!(laser_photons, target, max_relative = 1e-6);
        let narrow = linewidth(&crossover).delta_nu.unwrap();
        let broad = linewidth(&laser).delta_nu.unwrap();
        assert!(broad / narrow >= 10.0, "ratio {}", broad / narrow);
    }

    #[test]
    fn limit_matches_at_large_cooperativity() {
        // Scale N up at fixed Omega, kappa until C ~ 1e3; the full
        // expression approaches the limiting form to better than 1%.
        let p = SystemParams::resonant(1_000_000, 5.0, 25.0, 19.0);
        assert!(p.cooperativity() >= 1e3);
        let full = linewidth(&p).delta_nu.unwrap();
        let lim = limit_large_cooperativity(&p).unwrap();
        assert!((full - lim).abs() / lim < 0.01);
    }
}
