//! Simulation toolkit for an ensemble of incoherently repumped two-level
//! atoms coupled to a single lossy cavity mode.
//!
//! The same physical model is solved four ways, at different cost/size
//! trade-offs, so the methods can validate one another:
//!
//! * [`bruteforce`]: dense Lindblad integration on the full Hilbert space.
//!   Exponential in atom number, usable to N = 4; the ground truth.
//! * [`su4`]: exact master-equation solver in the permutation-symmetric
//!   Liouville basis (cubic in N), deterministically with an explicit photon
//!   basis or as a quantum-jump Monte Carlo with the photon mode eliminated
//!   through total-quanta bookkeeping.
//! * [`langevin`]: c-number (symmetric-ordering) Langevin ensembles whose
//!   cost is independent of N; the workhorse for large ensembles.
//! * [`meanfield`] / [`phase_diffusion`]: noise-free dynamics, closed-form
//!   steady states, and the analytic phase-diffusion linewidth.
//!
//! Conventions shared by every module: the single-atom decay rate gamma is
//! the unit of rate (gamma = 1 in ordinary use), all dynamics are written in
//! the frame rotating at the cavity frequency so only the atom-cavity
//! detuning delta = omega_a - omega_c enters, and linewidths are full widths
//! at half maximum in angular units.

pub mod bruteforce;
pub mod estimators;
pub mod langevin;
pub mod linalg;
pub mod meanfield;
pub mod params;
pub mod phase_diffusion;
pub mod stats;
pub mod su4;

pub use estimators::ObservableRecord;
pub use num_complex::Complex64;
pub use params::{DerivedParams, Regime, SystemParams};
