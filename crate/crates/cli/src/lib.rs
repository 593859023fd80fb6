//! Sweep orchestration over the solver library: run configurations, grid
//! construction, method dispatch, figure presets, CSV emission, and paired
//! comparison runs.
//!
//! The binary in `main.rs` is a thin shell over this library so the whole
//! surface stays testable in-process.

pub mod compare;
pub mod config;
pub mod csvout;
pub mod presets;
pub mod sweep;

/// Failure classes, one per process exit code: configuration or I/O
/// problems exit 1, numerical failure across an entire sweep exits 2, and
/// capacity refusals (a method asked for more state than it is allowed to
/// allocate) exit 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliFail {
    Config(String),
    Numerical(String),
    Capacity(String),
    Io(String),
}

impl CliFail {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliFail::Config(_) | CliFail::Io(_) => 1,
            CliFail::Numerical(_) => 2,
            CliFail::Capacity(_) => 3,
        }
    }
}

impl std::fmt::Display for CliFail {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliFail::Config(m) => write!(f, "config: {m}"),
            CliFail::Numerical(m) => write!(f, "numerical: {m}"),
            CliFail::Capacity(m) => write!(f, "capacity: {m}"),
            CliFail::Io(m) => write!(f, "io: {m}"),
        }
    }
}

impl std::error::Error for CliFail {}

/// Invert the crossover parameterization: given the atom number, the
/// pump-strength ratio r = Omega^2/(kappa gamma), and the target xi,
/// return (kappa, Omega) in units of gamma. Algebra: xi = N Omega^2 /
/// (8 kappa^2) with Omega^2 = r kappa gamma gives kappa = (N/8) r gamma / xi.
pub fn solve_kappa_for_xi(n_atoms: usize, ratio: f64, xi: f64) -> (f64, f64) {
    let kappa = (n_atoms as f64 / 8.0) * ratio / xi;
    let omega = (ratio * kappa).sqrt();
    (kappa, omega)
}
