//! Cross-representation checks. The symmetric-sector solver and the full
//! density-matrix integrator implement the same photon-truncated generator,
//! so from matching initial states and matched step sequences every
//! observable must agree to rounding, at any cutoff. The dense integrator
//! is also held to the structural requirements of a Lindblad evolution on
//! its own: unit trace, hermiticity, positivity, and the single-channel
//! analytic solutions.

use num_complex::Complex64;
use srlaser_core::bruteforce::{dense_from_counts, DenseState};
use srlaser_core::params::SystemParams;
use srlaser_core::su4::{det, Counts, DetSolver, SpinBasis};

/// Every channel switched on at a distinct scale so no term can hide, with
/// the cavity rate left free to move the dynamics across regimes.
fn all_channel_params(n_atoms: usize, kappa: f64) -> SystemParams {
    SystemParams {
        n_atoms,
        omega: 1.3,
        kappa,
        gamma: 1.0,
        repump: 1.7,
        t2_inv: 0.35,
        omega_a: 0.6,
        omega_c: 0.2,
    }
}

/// A step size both integrators accept for this system.
fn shared_dt(p: &SystemParams, m_cutoff: usize, dense: &DenseState) -> f64 {
    det::suggest_dt(p, m_cutoff).min(dense.suggest_dt())
}

/// Read the reduced solver's full coefficient block in the layout the
/// dense expansion expects.
fn det_amps(solver: &DetSolver, basis: &SpinBasis, m_cutoff: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(basis.len() * m_cutoff * m_cutoff);
    for b in 0..basis.len() {
        let c = basis.counts(b);
        for m in 0..m_cutoff {
            for n in 0..m_cutoff {
                out.push(solver.amp(c, m, n));
            }
        }
    }
    out
}

#[test]
fn observables_agree_between_representations() {
    // The cutoff truncates both generators identically, so agreement is
    // exact (to rounding) whether or not the cutoff is physically
    // converged; 1e-8 is pure accumulated floating-point drift headroom.
    let m_cutoff = 8;
    for n_atoms in 1..=3usize {
        for &kappa in &[8.0, 2.1, 0.6] {
            let p = all_channel_params(n_atoms, kappa);
            let mut red = DetSolver::new(&p, m_cutoff).unwrap();
            let mut dense = DenseState::new_ground(&p, m_cutoff).unwrap();
            let dt = shared_dt(&p, m_cutoff, &dense);
            for chunk in 0..10 {
                red.evolve(0.3, dt);
                dense.evolve(0.3, dt);
                let t = 0.3 * (chunk + 1) as f64;
                let ctx = format!("N = {n_atoms}, kappa = {kappa}, t = {t:.1}");
                assert!(
                    (red.trace() - dense.trace()).abs() < 1e-10,
                    "trace split between representations at {ctx}"
                );
                assert!(
                    (red.photons() - dense.photons()).abs() < 1e-8,
                    "photons split at {ctx}: {} vs {}",
                    red.photons(),
                    dense.photons()
                );
                assert!(
                    (red.photons2() - dense.photons2()).abs() < 1e-8,
                    "photon factorial moment split at {ctx}"
                );
                assert!(
                    (red.sz() - dense.sz()).abs() < 1e-8,
                    "inversion split at {ctx}: {} vs {}",
                    red.sz(),
                    dense.sz()
                );
                if n_atoms > 1 {
                    assert!(
                        (red.pair() - dense.pair()).abs() < 1e-8,
                        "pair correlation split at {ctx}: {} vs {}",
                        red.pair(),
                        dense.pair()
                    );
                }
            }
        }
    }
}

#[test]
fn reduced_state_expands_to_the_dense_matrix() {
    // Stronger than matching observables: expanding the symmetric-sector
    // coefficients over every atom assignment must rebuild the dense
    // density matrix element by element.
    let m_cutoff = 6;
    let p = all_channel_params(2, 2.1);
    let basis = SpinBasis::new(2);
    let mut red = DetSolver::new(&p, m_cutoff).unwrap();
    let mut dense = DenseState::new_ground(&p, m_cutoff).unwrap();
    let dt = shared_dt(&p, m_cutoff, &dense);
    for chunk in 0..6 {
        red.evolve(0.5, dt);
        dense.evolve(0.5, dt);
        let amps = det_amps(&red, &basis, m_cutoff);
        let expanded = dense_from_counts(&p, &basis, m_cutoff, &amps).unwrap();
        let sup = expanded
            .rho
            .iter()
            .zip(&dense.rho)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(
            sup < 1e-10,
            "expansion differs from dense matrix by {sup:.2e} at t = {:.1}",
            0.5 * (chunk + 1) as f64
        );
    }
}

#[test]
fn field_correlations_agree_between_representations() {
    // Two-time functions run the same deformed-state evolution, so they
    // inherit the equivalence pointwise on a shared lag grid.
    let m_cutoff = 6;
    let p = all_channel_params(2, 2.1);
    let mut red = DetSolver::new(&p, m_cutoff).unwrap();
    let mut dense = DenseState::new_ground(&p, m_cutoff).unwrap();
    let dt = shared_dt(&p, m_cutoff, &dense);
    red.evolve(4.0, dt);
    dense.evolve(4.0, dt);
    let ct_red = red.field_correlation(2.0, dt, 40);
    let ct_dense = dense.field_correlation(2.0, dt, 40);
    assert_eq!(ct_red.len(), ct_dense.len());
    for ((tau_r, c_r), (tau_d, c_d)) in ct_red.iter().zip(&ct_dense) {
        assert!((tau_r - tau_d).abs() < 1e-12);
        assert!(
            (c_r - c_d).norm() < 1e-8,
            "C(tau) split at tau = {tau_r:.3}: {c_r} vs {c_d}"
        );
    }
    // Zero delay reads back the photon number.
    assert!((ct_red[0].1.re - red.photons()).abs() < 1e-10);
    assert!(ct_red[0].1.im.abs() < 1e-10);
}

#[test]
fn dense_evolution_preserves_lindblad_structure() {
    // Long-haul structural check with every channel on: trace pinned to
    // one, hermiticity at rounding level, spectrum nonnegative up to
    // integrator noise.
    let p = all_channel_params(2, 2.1);
    let mut dense = DenseState::new_ground(&p, 6).unwrap();
    let dt = dense.suggest_dt();
    for _ in 0..20 {
        dense.evolve(5.0, dt);
        assert!(
            (dense.trace() - 1.0).abs() < 1e-10,
            "trace drifted to {} by t = {}",
            dense.trace(),
            dense.t
        );
        assert!(dense.hermiticity_defect() < 1e-10);
        assert!(
            dense.min_eigenvalue() > -1e-8,
            "negative weight {} at t = {}",
            dense.min_eigenvalue(),
            dense.t
        );
    }
}

#[test]
fn excited_atom_population_decays_at_gamma() {
    // Spontaneous emission alone: <sigma_z>(t) = 2 exp(-gamma t) - 1.
    let p = SystemParams {
        n_atoms: 1,
        omega: 0.0,
        kappa: 2.0,
        gamma: 1.0,
        repump: 0.0,
        t2_inv: 0.0,
        omega_a: 0.0,
        omega_c: 0.0,
    };
    let basis = SpinBasis::new(1);
    let m_cutoff = 4;
    let mut amps = vec![Complex64::new(0.0, 0.0); basis.len() * m_cutoff * m_cutoff];
    let b_exc = basis.index_of(Counts {
        ee: 1,
        gg: 0,
        eg: 0,
        ge: 0,
    });
    amps[(b_exc * m_cutoff) * m_cutoff] = Complex64::new(1.0, 0.0);
    let mut dense = dense_from_counts(&p, &basis, m_cutoff, &amps).unwrap();
    assert!((dense.sz() - 1.0).abs() < 1e-12);
    for k in 1..=8 {
        dense.evolve(0.25, 1e-3);
        let expect = 2.0 * (-0.25 * k as f64).exp() - 1.0;
        assert!(
            (dense.sz() - expect).abs() < 1e-9,
            "inversion {} vs analytic {expect} at t = {}",
            dense.sz(),
            dense.t
        );
    }
}

#[test]
fn repump_alone_drives_inversion_to_its_fixed_point() {
    // Pumping with no decay: <sigma_z>(t) = 1 - 2 exp(-w t), settling on
    // the bare inversion d0 = +1.
    let p = SystemParams {
        n_atoms: 1,
        omega: 0.0,
        kappa: 2.0,
        gamma: 0.0,
        repump: 1.7,
        t2_inv: 0.0,
        omega_a: 0.0,
        omega_c: 0.0,
    };
    let mut dense = DenseState::new_ground(&p, 4).unwrap();
    for k in 1..=10 {
        dense.evolve(0.5, 1e-3);
        let expect = 1.0 - 2.0 * (-1.7 * 0.5 * k as f64).exp();
        assert!(
            (dense.sz() - expect).abs() < 1e-9,
            "inversion {} vs analytic {expect} at t = {}",
            dense.sz(),
            dense.t
        );
    }
    assert!((dense.sz() - p.d0()).abs() < 1e-2);
}

#[test]
fn seeded_cavity_correlation_decays_at_half_kappa() {
    // Coupling off: the cavity is a free damped mode, and in its own
    // rotating frame C(tau) = <adag a> exp(-kappa tau / 2), purely real.
    let p = SystemParams {
        n_atoms: 1,
        omega: 0.0,
        kappa: 2.0,
        gamma: 0.3,
        repump: 0.0,
        t2_inv: 0.0,
        omega_a: 0.0,
        omega_c: 0.0,
    };
    let basis = SpinBasis::new(1);
    let m_cutoff = 5;
    let mut amps = vec![Complex64::new(0.0, 0.0); basis.len() * m_cutoff * m_cutoff];
    let b_g = basis.index_of(Counts {
        ee: 0,
        gg: 1,
        eg: 0,
        ge: 0,
    });
    amps[(b_g * m_cutoff) * m_cutoff] = Complex64::new(0.4, 0.0);
    amps[(b_g * m_cutoff + 1) * m_cutoff + 1] = Complex64::new(0.6, 0.0);
    let dense = dense_from_counts(&p, &basis, m_cutoff, &amps).unwrap();
    assert!((dense.photons() - 0.6).abs() < 1e-12);
    let ct = dense.field_correlation(1.5, 1e-3, 30);
    for (tau, c) in &ct {
        let expect = 0.6 * (-p.kappa * tau / 2.0).exp();
        assert!(
            (c.re - expect).abs() < 1e-8,
            "C({tau:.3}) = {} vs analytic {expect}",
            c.re
        );
        assert!(c.im.abs() < 1e-10);
    }
}
