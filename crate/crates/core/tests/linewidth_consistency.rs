// Cross-checks between the three routes to the emission linewidth: the
// deterministic regression of the field correlation, the stochastic
// c-number fit, and the closed-form phase-diffusion rate.
//
// The closed form keeps only dipole phase noise. Amplitude fluctuations
// add a further broadening that scales inversely with the photon number,
// so operating points with a handful of photons sit well above the
// formula while bright ones converge onto it. Measured excess over the
// formula along the fixed-N Omega^2 family (w = w_opt, gamma = 1):
//   N = 6,  kappa = 25, ~1.2 photons:  x1.48  (deterministic regression)
//   N = 40, kappa = 25, ~6.3 photons:  x1.35  (c-number fit, dt-converged)
//   N = 160, kappa = 25, ~25 photons:  x1.11  (c-number fit)
//   N = 40, kappa = 5,  ~32 photons:   x1.02  (c-number fit)
// These tests pin that envelope rather than pretending the closed form
// is exact at small photon numbers.

use num_complex::Complex64;
use srlaser_core::estimators::{self, CorrelationCurve};
use srlaser_core::langevin;
use srlaser_core::params::SystemParams;
use srlaser_core::phase_diffusion;
use srlaser_core::su4::{self, Counts, DetSolver};

// A decaying cavity with the atom parked in the ground state is the one
// case with a linewidth known exactly: C(tau) = n exp(-kappa tau / 2),
// so the fitted width must equal kappa itself.
#[test]
fn bare_cavity_regression_recovers_kappa() {
    let mut p = SystemParams::resonant(1, 0.0, 2.0, 0.0);
    p.gamma = 0.0;
    let mut solver = DetSolver::new(&p, 6).unwrap();
    solver.set_ground();
    let ground = Counts {
        ee: 0,
        gg: 1,
        eg: 0,
        ge: 0,
    };
    solver.set_amp(ground, 0, 0, Complex64::new(0.0, 0.0));
    solver.set_amp(ground, 1, 1, Complex64::new(1.0, 0.0));

    let series = solver.field_correlation(2.0, 1e-3, 100);
    let curve = CorrelationCurve {
        taus: series.iter().map(|(tau, _)| *tau).collect(),
        values: series.iter().map(|(_, c)| *c).collect(),
        sigmas: vec![1.0; series.len()],
    };
    let fit = estimators::fit_linewidth(&curve).unwrap();
    assert!(
        (fit.delta_nu - p.kappa).abs() < 1e-6,
        "fitted {} for a bare cavity at kappa = {}",
        fit.delta_nu,
        p.kappa
    );
    assert!(fit.rms_log_residual < 1e-8);
}

// Smallest member of the family: N = 6 keeps the exact solver cheap while
// the operating point stays at the same cooperativity and quantum
// efficiency as the N = 40 set. The regression value is frozen from this
// solver; the point of the test is that it reproduces deterministically
// and sits at the measured excess over the closed form, not closer.
#[test]
fn small_system_exact_width_sits_above_the_closed_form() {
    let p = SystemParams::resonant(6, (1000.0f64 / 6.0).sqrt(), 25.0, 19.0);
    let fit = su4::linewidth_regression(&p, 2.0).unwrap();
    let pd = phase_diffusion::linewidth(&p).delta_nu.unwrap();

    assert!(
        (fit.delta_nu - 5.6913).abs() / 5.6913 < 1e-3,
        "regression width drifted from its frozen value: {}",
        fit.delta_nu
    );
    let ratio = fit.delta_nu / pd;
    assert!(
        (1.35..1.65).contains(&ratio),
        "excess over the closed form left its measured band: ratio {ratio}"
    );
    // A single rate describes the whole decay window.
    assert!(fit.rms_log_residual < 0.01);
}

// The c-number fit at the N = 40 operating point carries the same
// finite-size excess, diluted by the larger photon number. dt = 1e-3 is
// inside the step-size-converged region (halving it moves the fit by
// well under a standard error).
#[test]
fn langevin_width_carries_the_finite_size_excess() {
    let p = SystemParams::resonant(40, 5.0, 25.0, 19.0);
    let run = langevin::run(&p, 400, 3.0, 40.0, 1e-3, 99).unwrap();
    let fit = estimators::linewidth(&run).unwrap();
    let pd = phase_diffusion::linewidth(&p).delta_nu.unwrap();

    assert!(fit.rms_log_residual < 0.05, "decay is not single-exponential");
    let ratio = fit.delta_nu / pd;
    assert!(
        (1.25..1.45).contains(&ratio),
        "fitted {} +- {} against closed form {}: ratio {ratio} left its measured band",
        fit.delta_nu,
        fit.se,
        pd
    );
}

// Same atom number, eight times fewer cavity losses: thirty photons are
// enough for the closed form to hold to a few percent.
#[test]
fn langevin_width_matches_the_closed_form_when_bright() {
    let p = SystemParams::resonant(40, 5f64.sqrt(), 5.0, 19.0);
    let run = langevin::run(&p, 400, 4.0, 120.0, 2e-3, 2024).unwrap();
    let fit = estimators::linewidth(&run).unwrap();
    let pd = phase_diffusion::linewidth(&p).delta_nu.unwrap();

    let ratio = fit.delta_nu / pd;
    assert!(
        (0.92..1.12).contains(&ratio),
        "fitted {} +- {} against closed form {}: ratio {ratio}",
        fit.delta_nu,
        fit.se,
        pd
    );
}
