//! Permutation-symmetric density-matrix representation.
//!
//! Every atom permutation commutes with the dynamics, so a state that
//! starts symmetric stays inside the span of symmetrized products of the
//! four single-atom matrix units ee = |e><e|, gg = |g><g|, eg = |e><g|,
//! ge = |g><e|. A basis element is the plain (unnormalized) sum over all
//! distinct assignments of letters to atoms with fixed letter counts
//! (n_ee, n_gg, n_eg, n_ge), which turns an exponentially large operator
//! space into (N+1)(N+2)(N+3)/6 coefficients per cavity matrix element.
//!
//! Two drivers share the representation: a deterministic master-equation
//! propagator over coefficients c(b; m, n) with an explicit photon cutoff
//! ([`det`]), and a quantum-jump unraveling whose photon indices are tied
//! to a conserved quanta counter so each trajectory carries only the spin
//! coefficients ([`mc`]).

pub mod basis;
pub mod det;
pub mod mc;

pub use basis::{Counts, SpinBasis};
pub use det::{linewidth_regression, DetSolver};
pub use mc::{run_mc, McInitial, McOptions, McRunResult};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Su4Error {
    #[error("photon cutoff must be at least 2")]
    CutoffTooSmall,
    #[error("all jump channel weights vanished at t = {t}")]
    DeadState { t: f64 },
    #[error("populated basis element implies a negative photon index; quanta bookkeeping broken")]
    InternalQuantaError,
    #[error("quanta counter {n_q} exceeded bound {bound}; photon window too small for this drive")]
    QuantaOverflow { n_q: i64, bound: i64 },
    #[error("trajectory {index}: {source}")]
    Trajectory {
        index: usize,
        #[source]
        source: Box<Su4Error>,
    },
    #[error("ensemble needs at least two trajectories")]
    TooFewTrajectories,
    #[error("state still moving at t = {t}; no steady state to regress from")]
    NotSettled { t: f64 },
    #[error(transparent)]
    Fit(#[from] crate::estimators::EstimatorError),
    #[error(transparent)]
    Params(#[from] crate::params::ParamsError),
}
