//! Mean-field (noise-free) dynamics of the atom-cavity ensemble and the
//! closed-form steady state, line center, and pulling sensitivities.
//!
//! Variables are the scaled expectation values a0 (cavity amplitude,
//! |a0|^2 = photon number), S0_minus (collective coherence per atom), and
//! S0_z (inversion per atom). The equations are written in the frame
//! rotating at the cavity frequency, so the only frequency left is
//! delta = omega_a - omega_c:
//!
//!   da0/dt = -(kappa/2) a0 - i (N Omega / 2) S0_minus
//!   dS0m/dt = -(Gamma/2 + i delta) S0_minus + i (Omega/2) a0 S0_z
//!   dS0z/dt = -(w + gamma)(S0_z - d0) - 2 Omega Im(conj(a0) S0_minus)
//!
//! With nonzero delta the steady state is a limit cycle in this frame (a0
//! and S0_minus rotate together at the line-center offset); the rotation
//! invariants |a0|, |S0_minus|, S0_z are what converge.

use num_complex::Complex64;
use thiserror::Error;

use crate::params::SystemParams;

#[derive(Debug, Error)]
pub enum MeanFieldError {
    #[error("step size {dt} exceeds stability bound {bound}")]
    StepTooLarge { dt: f64, bound: f64 },
    #[error("t_end must be positive")]
    BadHorizon,
    #[error("solution diverged (NaN or overflow) at t = {t}")]
    Diverged { t: f64 },
    #[error(transparent)]
    Params(#[from] crate::params::ParamsError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldState {
    /// Scaled cavity amplitude; |a0|^2 is the intracavity photon number.
    pub a0: Complex64,
    /// Collective atomic coherence per atom.
    pub s_minus: Complex64,
    /// Inversion per atom, in [-1, 1].
    pub s_z: f64,
}

impl MeanFieldState {
    /// All atoms in the ground state, empty cavity, with a small seed
    /// coherence so the trivial fixed point is left when it is unstable.
    pub fn seeded_ground(seed: f64) -> Self {
        MeanFieldState {
            a0: Complex64::new(0.0, 0.0),
            s_minus: Complex64::new(seed, 0.0),
            s_z: -1.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a0.is_finite() && self.s_minus.is_finite() && self.s_z.is_finite()
    }

    /// Spin length indicator |S0m|^2 + S0z^2/4; at most 1/4 for physical
    /// states (up to integrator error).
    pub fn spin_length_sq(&self) -> f64 {
        self.s_minus.norm_sqr() + 0.25 * self.s_z * self.s_z
    }
}

/// Closed-form steady-state summary.
#[derive(Debug, Clone, Copy)]
pub struct SteadyStateSolution {
    /// Saturated inversion per atom above threshold, the unsaturated d0
    /// below.
    pub s_z: f64,
    /// Emitted line center (kappa omega_a + Gamma omega_c)/(kappa + Gamma).
    pub line_center: f64,
    /// Intracavity photon number from the small-detuning form
    /// (N(w+gamma)/2kappa)(d0 - 1/C); clamped to 0 below threshold.
    pub photons: f64,
    /// True when d0 > 1/C, i.e. the trivial fixed point is unstable.
    pub above_threshold: bool,
}

fn rhs(p: &SystemParams, s: &MeanFieldState) -> (Complex64, Complex64, f64) {
    let n = p.n_atoms as f64;
    let delta = p.delta();
    let gamma_tot = p.gamma_tot();
    let da = -0.5 * p.kappa * s.a0 - Complex64::i() * (0.5 * n * p.omega) * s.s_minus;
    let dsm = -Complex64::new(0.5 * gamma_tot, delta) * s.s_minus
        + Complex64::i() * (0.5 * p.omega) * s.a0 * s.s_z;
    let pump = p.repump + p.gamma;
    let dsz = -pump * (s.s_z - p.d0()) - 2.0 * p.omega * (s.a0.conj() * s.s_minus).im;
    (da, dsm, dsz)
}

fn rk4_step(p: &SystemParams, s: &MeanFieldState, dt: f64) -> MeanFieldState {
    let add = |s: &MeanFieldState, k: &(Complex64, Complex64, f64), h: f64| MeanFieldState {
        a0: s.a0 + h * k.0,
        s_minus: s.s_minus + h * k.1,
        s_z: s.s_z + h * k.2,
    };
    let k1 = rhs(p, s);
    let k2 = rhs(p, &add(s, &k1, 0.5 * dt));
    let k3 = rhs(p, &add(s, &k2, 0.5 * dt));
    let k4 = rhs(p, &add(s, &k3, dt));
    MeanFieldState {
        a0: s.a0 + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        s_minus: s.s_minus + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        s_z: s.s_z + dt / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2),
    }
}

/// Largest admissible step for the fixed-step integrator.
pub fn max_step(p: &SystemParams) -> f64 {
    let n = p.n_atoms as f64;
    let fastest = p
        .kappa
        .max(p.gamma_tot())
        .max(0.5 * n * p.omega)
        .max(p.delta().abs());
    0.1 / fastest
}

/// Fixed-step RK4 integration from `state0` to `t_end`, recording a
/// subsampled time series (at most ~4096 interior points plus the final
/// state).
pub fn integrate(
    p: &SystemParams,
    state0: MeanFieldState,
    t_end: f64,
    dt: f64,
) -> Result<Vec<(f64, MeanFieldState)>, MeanFieldError> {
    p.validate()?;
    if !(t_end > 0.0) {
        return Err(MeanFieldError::BadHorizon);
    }
    let bound = max_step(p);
    if dt > bound {
        return Err(MeanFieldError::StepTooLarge { dt, bound });
    }
    let steps = (t_end / dt).ceil() as usize;
    let stride = (steps / 4096).max(1);
    let mut out = Vec::with_capacity(steps / stride + 2);
    let mut s = state0;
    let mut t = 0.0;
    out.push((t, s));
    for k in 0..steps {
        s = rk4_step(p, &s, dt);
        t = (k + 1) as f64 * dt;
        if !s.is_finite() {
            return Err(MeanFieldError::Diverged { t });
        }
        if (k + 1) % stride == 0 || k + 1 == steps {
            out.push((t, s));
        }
    }
    Ok(out)
}

/// Integrate until the rotation invariants (|a0|^2, |S0m|, S0z) all move
/// less than 1e-8 (normalized) per unit 1/gamma, or `max_t` is reached.
/// Returns the final state and whether convergence was detected.
///
/// The detector is movement-based, so a sufficiently slow escape from the
/// unstable vacuum fixed point looks identical to convergence: seeding with
/// an amplitude below 1e-8 / (growth rate) can return `converged = true`
/// while still parked at zero. Callers probing growth from near-vacuum must
/// seed large enough that seed * growth rate clears the tolerance.
pub fn integrate_to_steady(
    p: &SystemParams,
    state0: MeanFieldState,
    dt: f64,
    max_t: f64,
) -> Result<(MeanFieldState, bool), MeanFieldError> {
    p.validate()?;
    let bound = max_step(p);
    if dt > bound {
        return Err(MeanFieldError::StepTooLarge { dt, bound });
    }
    let chunk_steps = (1.0 / p.gamma / dt).ceil().max(1.0) as usize;
    let mut s = state0;
    let mut t = 0.0;
    let mut prev = [s.a0.norm_sqr(), s.s_minus.norm(), s.s_z];
    while t < max_t {
        for _ in 0..chunk_steps {
            s = rk4_step(p, &s, dt);
        }
        t += chunk_steps as f64 * dt;
        if !s.is_finite() {
            return Err(MeanFieldError::Diverged { t });
        }
        let cur = [s.a0.norm_sqr(), s.s_minus.norm(), s.s_z];
        let moved = prev
            .iter()
            .zip(&cur)
            .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
            .fold(0.0, f64::max);
        if moved < 1e-8 {
            return Ok((s, true));
        }
        prev = cur;
    }
    Ok((s, false))
}

/// Closed-form steady state. The photon number uses the small-detuning
/// form, documented as the canonical analytic output; the exact-detuning
/// value is available from [`steady_photons_exact_delta`] or by integrating.
pub fn steady_state_analytic(p: &SystemParams) -> Result<SteadyStateSolution, MeanFieldError> {
    p.validate()?;
    let n = p.n_atoms as f64;
    let gamma_tot = p.gamma_tot();
    let kappa = p.kappa;
    let line_center = (kappa * p.omega_a + gamma_tot * p.omega_c) / (kappa + gamma_tot);
    let d0 = p.d0();
    let coop = p.cooperativity();
    let above = d0 > 1.0 / coop;
    let delta = p.delta();
    // Saturated inversion, exact in delta; reduces to 1/C on resonance.
    let s_z_sat = kappa * gamma_tot * (1.0 + 4.0 * delta * delta / (kappa + gamma_tot).powi(2))
        / (n * p.omega * p.omega);
    let photons = if above {
        n * (p.repump + p.gamma) / (2.0 * kappa) * (d0 - 1.0 / coop)
    } else {
        0.0
    };
    Ok(SteadyStateSolution {
        s_z: if above { s_z_sat } else { d0 },
        line_center,
        photons,
        above_threshold: above,
    })
}

/// Steady photon number exact in the detuning:
/// n = N(w+gamma)(d0 - S0z)/(2 kappa) with the delta-corrected saturated
/// inversion. Returns 0 below threshold.
pub fn steady_photons_exact_delta(p: &SystemParams) -> f64 {
    let n = p.n_atoms as f64;
    let gamma_tot = p.gamma_tot();
    let delta = p.delta();
    let s_z_sat = p.kappa * gamma_tot * (1.0 + 4.0 * delta * delta / (p.kappa + gamma_tot).powi(2))
        / (n * p.omega * p.omega);
    let photons = n * (p.repump + p.gamma) / (2.0 * p.kappa) * (p.d0() - s_z_sat);
    photons.max(0.0)
}

/// Line-pulling sensitivities (d line / d omega_c, d line / d omega_a) =
/// (Gamma, kappa) / (kappa + Gamma). They sum to 1 exactly.
pub fn sensitivity(p: &SystemParams) -> (f64, f64) {
    let gamma_tot = p.gamma_tot();
    let s = p.kappa + gamma_tot;
    (gamma_tot / s, p.kappa / s)
}

/// Steady-state photon number along a repump grid.
pub fn photon_curve(
    p: &SystemParams,
    w_grid: &[f64],
) -> Result<Vec<(f64, SteadyStateSolution)>, MeanFieldError> {
    let mut out = Vec::with_capacity(w_grid.len());
    for &w in w_grid {
        let mut q = *p;
        q.repump = w;
        out.push((w, steady_state_analytic(&q)?));
    }
    Ok(out)
}
