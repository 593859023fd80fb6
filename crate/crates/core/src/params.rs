//! Model parameters and the closed-form quantities derived from them.
//!
//! A run is defined by seven rates/frequencies: atom number N, single-atom
//! cavity coupling Omega, cavity decay kappa, spontaneous decay gamma (the
//! unit of rate), incoherent repump w, extra dephasing 1/T2, and the bare
//! frequencies omega_a, omega_c. Everything else used downstream (the
//! generalized decoherence Gamma, the saturated inversion scale, the
//! cooperativity, the crossover parameter xi, the two thresholds, and the
//! optimal repump) is a pure function of these and lives here.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("atom number must be at least 1")]
    NoAtoms,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("{0} must be nonnegative")]
    Negative(&'static str),
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("crossover parameter must be positive")]
    NonPositiveXi,
}

/// The seven physical inputs. Rates are in units of `gamma`; `gamma` itself
/// is carried explicitly so scaled parameter sets remain expressible, but
/// the rest of the crate assumes `gamma = 1` is the common case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Number of two-level atoms, N >= 1.
    pub n_atoms: usize,
    /// Single-atom vacuum Rabi coupling Omega >= 0.
    pub omega: f64,
    /// Cavity field decay rate kappa > 0.
    pub kappa: f64,
    /// Spontaneous emission rate gamma >= 0 (the rate unit).
    pub gamma: f64,
    /// Incoherent repump rate w >= 0.
    pub repump: f64,
    /// Inhomogeneous dephasing rate 1/T2 >= 0.
    pub t2_inv: f64,
    /// Bare atomic transition frequency (relative to an arbitrary reference).
    pub omega_a: f64,
    /// Bare cavity resonance frequency (same reference).
    pub omega_c: f64,
}

impl SystemParams {
    /// Convenience constructor for the common resonant, dephasing-free case
    /// with `gamma = 1`.
    pub fn resonant(n_atoms: usize, omega: f64, kappa: f64, repump: f64) -> Self {
        SystemParams {
            n_atoms,
            omega,
            kappa,
            gamma: 1.0,
            repump,
            t2_inv: 0.0,
            omega_a: 0.0,
            omega_c: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.n_atoms < 1 {
            return Err(ParamsError::NoAtoms);
        }
        if !self.kappa.is_finite() {
            return Err(ParamsError::NonFinite("kappa"));
        }
        if self.kappa <= 0.0 {
            return Err(ParamsError::NonPositive("kappa"));
        }
        // Zero coupling or zero decay rates leave a perfectly good generator
        // (decoupled atoms, non-decaying atoms), so only negatives are
        // rejected here. kappa alone must stay positive: the cavity lifetime
        // anchors the time heuristics and the photon formulas divide by it.
        for (v, name) in [
            (self.omega, "omega"),
            (self.gamma, "gamma"),
            (self.repump, "repump"),
            (self.t2_inv, "t2_inv"),
        ] {
            if !v.is_finite() {
                return Err(ParamsError::NonFinite(name));
            }
            if v < 0.0 {
                return Err(ParamsError::Negative(name));
            }
        }
        for (v, name) in [(self.omega_a, "omega_a"), (self.omega_c, "omega_c")] {
            if !v.is_finite() {
                return Err(ParamsError::NonFinite(name));
            }
        }
        Ok(())
    }

    /// Atom-cavity detuning delta = omega_a - omega_c, the only frequency
    /// that survives in the rotating frame.
    pub fn delta(&self) -> f64 {
        self.omega_a - self.omega_c
    }

    /// Generalized single-atom decoherence Gamma = w + gamma + 2/T2.
    pub fn gamma_tot(&self) -> f64 {
        self.repump + self.gamma + 2.0 * self.t2_inv
    }

    /// Unsaturated inversion d0 = (w - gamma)/(w + gamma).
    pub fn d0(&self) -> f64 {
        (self.repump - self.gamma) / (self.repump + self.gamma)
    }

    /// Many-atom cooperativity C = N Omega^2 / (kappa Gamma). Depends on the
    /// repump through Gamma.
    pub fn cooperativity(&self) -> f64 {
        self.n_atoms as f64 * self.omega * self.omega / (self.kappa * self.gamma_tot())
    }

    /// Crossover parameter xi = N Omega^2 / (8 kappa^2): the peak intracavity
    /// photon number per atom. Small xi is the superradiant (bad-cavity)
    /// side, large xi the laser side.
    pub fn crossover_xi(&self) -> f64 {
        let n = self.n_atoms as f64;
        n * self.omega * self.omega / (8.0 * self.kappa * self.kappa)
    }

    pub fn derive(&self) -> Result<DerivedParams, ParamsError> {
        self.validate()?;
        let n = self.n_atoms as f64;
        let omega_sq = self.omega * self.omega;
        let gamma_tot = self.gamma_tot();
        let kappa = self.kappa;
        let w_opt = n * omega_sq / (2.0 * kappa) - self.gamma - self.t2_inv;
        let photons_opt = n * n * omega_sq / (8.0 * kappa * kappa);
        Ok(DerivedParams {
            gamma_tot,
            d0: self.d0(),
            cooperativity: self.cooperativity(),
            xi: self.crossover_xi(),
            w1: self.gamma,
            w2: n * omega_sq / kappa,
            w_opt,
            w_opt_negative: w_opt < 0.0,
            photons_opt,
            line_center: (kappa * self.omega_a + gamma_tot * self.omega_c) / (kappa + gamma_tot),
        })
    }
}

/// Closed-form derived quantities for one parameter set.
#[derive(Debug, Clone, Copy)]
pub struct DerivedParams {
    /// Gamma = w + gamma + 2/T2.
    pub gamma_tot: f64,
    /// Unsaturated inversion (w - gamma)/(w + gamma), in [-1, 1].
    pub d0: f64,
    /// C = N Omega^2 / (kappa Gamma).
    pub cooperativity: f64,
    /// xi = N Omega^2 / (8 kappa^2); equals photons_opt / N identically.
    pub xi: f64,
    /// First threshold: repump must exceed gamma to invert.
    pub w1: f64,
    /// Second threshold (quenching): w2 = N Omega^2 / kappa.
    pub w2: f64,
    /// Repump maximizing the steady photon number,
    /// N Omega^2/(2 kappa) - gamma - 1/T2. May be negative for weak
    /// coupling; reported as-is with the flag below.
    pub w_opt: f64,
    pub w_opt_negative: bool,
    /// Photon number at the optimum, N^2 Omega^2 / (8 kappa^2).
    pub photons_opt: f64,
    /// Emission line center (kappa omega_a + Gamma omega_c)/(kappa + Gamma),
    /// evaluated at this parameter set's repump.
    pub line_center: f64,
}

/// Operating regime classified by xi. The paper-style asymptotic labels
/// (xi << 1, xi ~ 1, xi >> 1) need concrete boundaries for reporting; they
/// are fixed at 0.5 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Superradiant,
    Crossover,
    Lasing,
}

impl Regime {
    pub fn classify(xi: f64) -> Result<Regime, ParamsError> {
        if !(xi > 0.0) {
            return Err(ParamsError::NonPositiveXi);
        }
        Ok(if xi < 0.5 {
            Regime::Superradiant
        } else if xi <= 2.0 {
            Regime::Crossover
        } else {
            Regime::Lasing
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regime::Superradiant => "superradiant",
            Regime::Crossover => "crossover",
            Regime::Lasing => "lasing",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn gamma_tot_and_d0_simple_point() {
        let p = SystemParams::resonant(10, 1.0, 1.0, 2.0);
        assert_relative_eq!(p.gamma_tot(), 3.0);
        assert_relative_eq!(p.d0(), 1.0 / 3.0);
    }

    #[test]
    fn derived_values_small_superradiant_set() {
        // N = 40, Omega = 5, kappa = 25 puts the ensemble well into the
        // bad-cavity regime.
        let p = SystemParams::resonant(40, 5.0, 25.0, 19.0);
        let d = p.derive().unwrap();
        assert_relative_eq!(d.xi, 0.2);
        assert_relative_eq!(d.w_opt, 19.0);
        assert_relative_eq!(d.photons_opt, 8.0);
        assert_relative_eq!(d.w2, 40.0);
        assert!(!d.w_opt_negative);
    }

    #[test]
    fn derived_values_large_crossover_set() {
        let p = SystemParams::resonant(10_000, 12.5f64.sqrt(), 125.0, 499.0);
        let d = p.derive().unwrap();
        assert_relative_eq!(d.xi, 1.0, max_relative = 1e-12);
        assert_relative_eq!(d.w_opt, 499.0, max_relative = 1e-12);
        assert_relative_eq!(d.photons_opt, 1e4, max_relative = 1e-12);
    }

    #[test]
    fn xi_examples() {
        assert_relative_eq!(SystemParams::resonant(40, 1.0, 1.0, 0.0).crossover_xi(), 5.0);
        assert_relative_eq!(SystemParams::resonant(8, 2.0, 2.0, 0.0).crossover_xi(), 1.0);
        let p = SystemParams::resonant(10_000, 1.25f64.sqrt(), 12.5, 0.0);
        assert_relative_eq!(p.crossover_xi(), 10.0, max_relative = 1e-12);
    }

    #[test]
    fn regime_boundaries() {
        assert_eq!(Regime::classify(0.2).unwrap(), Regime::Superradiant);
        assert_eq!(Regime::classify(1.0).unwrap(), Regime::Crossover);
        assert_eq!(Regime::classify(5.0).unwrap(), Regime::Lasing);
        // Boundary values belong to the crossover band.
        assert_eq!(Regime::classify(0.5).unwrap(), Regime::Crossover);
        assert_eq!(Regime::classify(2.0).unwrap(), Regime::Crossover);
        assert_eq!(Regime::classify(0.0), Err(ParamsError::NonPositiveXi));
        assert_eq!(Regime::classify(-1.0), Err(ParamsError::NonPositiveXi));
        assert_eq!(Regime::classify(f64::NAN), Err(ParamsError::NonPositiveXi));
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        let good = SystemParams::resonant(2, 1.0, 1.0, 0.5);
        assert!(good.validate().is_ok());
        let mut p = good;
        p.n_atoms = 0;
        assert_eq!(p.validate(), Err(ParamsError::NoAtoms));
        let mut p = good;
        p.kappa = 0.0;
        assert_eq!(p.validate(), Err(ParamsError::NonPositive("kappa")));
        let mut p = good;
        p.omega = -1.0;
        assert_eq!(p.validate(), Err(ParamsError::Negative("omega")));
        let mut p = good;
        p.omega = 0.0;
        p.gamma = 0.0;
        assert!(p.validate().is_ok());
        let mut p = good;
        p.repump = -0.1;
        assert_eq!(p.validate(), Err(ParamsError::Negative("repump")));
        let mut p = good;
        p.omega_a = f64::INFINITY;
        assert_eq!(p.validate(), Err(ParamsError::NonFinite("omega_a")));
    }

    #[test]
    fn negative_w_opt_is_flagged_not_rejected() {
        // Weak coupling: N Omega^2 / (2 kappa) < gamma.
        let p = SystemParams::resonant(2, 0.1, 10.0, 0.5);
        let d = p.derive().unwrap();
        assert!(d.w_opt < 0.0);
        assert!(d.w_opt_negative);
    }

    fn arb_params() -> impl Strategy<Value = SystemParams> {
        (
            1usize..200,
            0.01f64..20.0,
            0.05f64..2000.0,
            0.0f64..500.0,
            0.0f64..50.0,
            -100.0f64..100.0,
            -100.0f64..100.0,
        )
            .prop_map(|(n, omega, kappa, repump, t2_inv, omega_a, omega_c)| SystemParams {
                n_atoms: n,
                omega,
                kappa,
                gamma: 1.0,
                repump,
                t2_inv,
                omega_a,
                omega_c,
            })
    }

    proptest! {
        #[test]
        fn derive_xi_equals_crossover_xi(p in arb_params()) {
            let d = p.derive().unwrap();
            prop_assert_eq!(d.xi, p.crossover_xi());
            // photons_opt / N reproduces xi to machine precision.
            prop_assert!((d.photons_opt / p.n_atoms as f64 - d.xi).abs() <= 1e-14 * d.xi.max(1e-300));
        }

        #[test]
        fn d0_bounded(p in arb_params()) {
            prop_assert!(p.d0().abs() <= 1.0);
        }

        #[test]
        fn common_frequency_shift_changes_nothing_but_line_center(
            p in arb_params(),
            shift in -1e4f64..1e4,
        ) {
            let mut q = p;
            q.omega_a += shift;
            q.omega_c += shift;
            let dp = p.derive().unwrap();
            let dq = q.derive().unwrap();
            prop_assert_eq!(dp.xi, dq.xi);
            prop_assert_eq!(dp.gamma_tot, dq.gamma_tot);
            prop_assert_eq!(dp.d0, dq.d0);
            prop_assert_eq!(dp.w1, dq.w1);
            prop_assert_eq!(dp.w2, dq.w2);
            prop_assert_eq!(dp.w_opt, dq.w_opt);
            prop_assert!((p.delta() - q.delta()).abs() <= 1e-9 * (1.0 + p.delta().abs()));
            prop_assert!((dq.line_center - dp.line_center - shift).abs() <= 1e-6 * (1.0 + shift.abs()));
        }

        #[test]
        fn w_opt_below_w2_when_positive(p in arb_params()) {
            let d = p.derive().unwrap();
            if d.w_opt > 0.0 {
                prop_assert!(d.w_opt < d.w2);
            }
        }
    }
}
