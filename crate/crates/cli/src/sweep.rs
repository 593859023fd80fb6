//! Sweep execution: build the grid, derive per-point parameters, dispatch
//! to the selected solver, and collect one row per grid point.
//!
//! A point that cannot produce numbers becomes a flagged row, never an
//! abort; only capacity refusals (checked up front, before any work) and
//! a sweep where every single row failed escalate to process-level
//! errors. The loop over points is serial; the stochastic backends
//! parallelize internally over trajectories, so thread count never
//! affects the emitted numbers.

use crate::config::{Hold, Method, Numeric, RunConfig, Spacing, SweepSpec, SweepVar};
use crate::CliFail;
use srlaser_core::estimators::{self, CorrelationCurve, EstimatorError};
use srlaser_core::langevin::{self, ArchiveFlag, LangevinError};
use srlaser_core::params::SystemParams;
use srlaser_core::su4::{self, DetSolver, McOptions};
use srlaser_core::{bruteforce, meanfield, phase_diffusion};

/// One grid point's worth of output. Observable fields hold
/// (value, standard error); deterministic methods leave the error slot
/// empty. Missing values are empty CSV cells, with the reason in `flags`.
#[derive(Debug, Clone, Default)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub photons: (Option<f64>, Option<f64>),
    pub photons2: (Option<f64>, Option<f64>),
    pub g2: (Option<f64>, Option<f64>),
    pub sz: (Option<f64>, Option<f64>),
    pub spsm: (Option<f64>, Option<f64>),
    pub pair: (Option<f64>, Option<f64>),
    pub delta_nu: Option<f64>,
    pub delta_nu_se: Option<f64>,
    pub fit_rms: Option<f64>,
    pub pull_cavity: Option<f64>,
    pub pull_atom: Option<f64>,
    pub flags: Vec<&'static str>,
}

impl SweepRow {
    pub fn has_values(&self) -> bool {
        self.photons.0.is_some()
    }

    fn flag(&mut self, name: &'static str) {
        if !self.flags.contains(&name) {
            self.flags.push(name);
        }
    }
}

pub struct SweepResult {
    pub config: RunConfig,
    pub rows: Vec<SweepRow>,
}

/// Grid values for a sweep spec. One point collapses to `[min]`.
pub fn grid(spec: &SweepSpec) -> Vec<f64> {
    if spec.points == 1 {
        return vec![spec.min];
    }
    let n = spec.points;
    (0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            match spec.spacing {
                Spacing::Linear => spec.min + f * (spec.max - spec.min),
                Spacing::Log => spec.min * (spec.max / spec.min).powf(f),
            }
        })
        .collect()
}

/// Parameters at one grid point. A xi sweep re-derives the cavity
/// linewidth from xi = N Omega^2 / (8 kappa^2): `Hold::Ratio` keeps
/// r = Omega^2/(kappa gamma) fixed (so kappa = (N/8) r gamma / xi and
/// Omega moves with it), `Hold::Omega` keeps the coupling fixed and sets
/// kappa = sqrt(N Omega^2 / (8 xi)). With `at_w_opt` the repump rate then
/// tracks w_opt = N Omega^2/(2 kappa) - gamma - 1/T2 at each point; a
/// non-positive optimum has no operating point and yields a flagged row.
pub fn point_params(
    base: &SystemParams,
    spec: &SweepSpec,
    value: f64,
) -> Result<SystemParams, &'static str> {
    let mut q = *base;
    match spec.variable {
        SweepVar::Repump => {
            q.repump = value;
        }
        SweepVar::Xi => {
            let n = base.n_atoms as f64;
            match spec.hold {
                Hold::Ratio => {
                    let r = base.omega * base.omega / (base.kappa * base.gamma);
                    q.kappa = (n / 8.0) * r * base.gamma / value;
                    q.omega = (r * q.kappa * base.gamma).sqrt();
                }
                Hold::Omega => {
                    q.kappa = (n * base.omega * base.omega / (8.0 * value)).sqrt();
                }
            }
            if spec.at_w_opt {
                let w_opt =
                    n * q.omega * q.omega / (2.0 * q.kappa) - q.gamma - q.t2_inv;
                if w_opt <= 0.0 {
                    return Err("BELOW_THRESHOLD");
                }
                q.repump = w_opt;
            }
        }
    }
    Ok(q)
}

fn san(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Collective <S+S->/N^2 from the pair correlation and the inversion:
/// N^2 spsm = N(N-1) pair + N (1+sz)/2.
fn spsm_from_pair(n_atoms: usize, pair: f64, sz: f64) -> f64 {
    let n = n_atoms as f64;
    pair * (n - 1.0) / n + (1.0 + sz) / (2.0 * n)
}

fn fill_correlation_fit(row: &mut SweepRow, taus: Vec<f64>, values: Vec<srlaser_core::Complex64>) {
    let curve = CorrelationCurve {
        sigmas: vec![1.0; taus.len()],
        taus,
        values,
    };
    match estimators::fit_linewidth(&curve) {
        Ok(fit) => {
            row.delta_nu = san(fit.delta_nu);
            row.fit_rms = san(fit.rms_log_residual);
        }
        Err(EstimatorError::WindowTooShort { .. }) => row.flag("FIT_WINDOW"),
        Err(EstimatorError::FitQuality { .. }) => row.flag("FIT_QUALITY"),
        Err(_) => row.flag("FIT_WINDOW"),
    }
}

/// Settle-time budget: a few hundred times the slowest relevant rate.
fn settle_budget(q: &SystemParams) -> f64 {
    let slow = (q.repump + q.gamma).min(q.kappa).max(q.gamma);
    400.0 / slow
}

fn run_analytic(q: &SystemParams, row: &mut SweepRow) {
    match meanfield::steady_state_analytic(q) {
        Ok(sol) => {
            row.photons = (san(sol.photons), None);
            row.sz = (san(sol.s_z), None);
            if !sol.above_threshold {
                row.flag("BELOW_THRESHOLD");
            }
        }
        Err(_) => {
            row.flag("NUMERIC_ERROR");
            return;
        }
    }
    let pd = phase_diffusion::linewidth(q);
    match pd.delta_nu {
        Some(dnu) => {
            row.delta_nu = san(dnu);
            if pd.far_from_optimum {
                row.flag("FAR_FROM_OPTIMUM");
            }
        }
        None => row.flag("BELOW_THRESHOLD"),
    }
    let (pull_c, pull_a) = meanfield::sensitivity(q);
    row.pull_cavity = san(pull_c);
    row.pull_atom = san(pull_a);
}

fn run_meanfield(q: &SystemParams, numeric: &Numeric, row: &mut SweepRow) {
    let dt = numeric.dt.unwrap_or(0.5 * meanfield::max_step(q));
    let max_t = numeric.t_relax.unwrap_or(settle_budget(q));
    let state0 = meanfield::MeanFieldState::seeded_ground(1e-3);
    match meanfield::integrate_to_steady(q, state0, dt, max_t) {
        Ok((s, settled)) => {
            if !settled {
                row.flag("NOT_SETTLED");
            }
            let photons = s.a0.norm_sqr();
            let pair = s.s_minus.norm_sqr();
            row.photons = (san(photons), None);
            row.sz = (san(s.s_z), None);
            row.pair = (san(pair), None);
            row.spsm = (san(spsm_from_pair(q.n_atoms, pair, s.s_z)), None);
            match meanfield::steady_state_analytic(q) {
                Ok(sol) if !sol.above_threshold => row.flag("BELOW_THRESHOLD"),
                _ => {}
            }
        }
        Err(_) => row.flag("NUMERIC_ERROR"),
    }
}

fn run_langevin(q: &SystemParams, numeric: &Numeric, seed: u64, row: &mut SweepRow) {
    // Presence of these keys was enforced at parse time.
    let dt = numeric.dt.unwrap();
    let t_relax = numeric.t_relax.unwrap();
    let t_collect = numeric.t_collect.unwrap();
    let n_traj = numeric.n_traj.unwrap();
    let archive = match langevin::run(q, n_traj, t_relax, t_collect, dt, seed) {
        Ok(a) => a,
        Err(LangevinError::NonPositiveDiffusion { .. }) => {
            row.flag("BELOW_THRESHOLD");
            return;
        }
        Err(LangevinError::StepTooLarge { .. }) => {
            row.flag("STEP_BOUND");
            return;
        }
        Err(LangevinError::RelaxTooShort { .. }) => {
            row.flag("RELAX_SHORT");
            return;
        }
        Err(_) => {
            row.flag("NUMERIC_ERROR");
            return;
        }
    };
    for f in &archive.flags {
        match f {
            ArchiveFlag::LowTrajectories => row.flag("LOW_TRAJECTORIES"),
            ArchiveFlag::StrideFallback => row.flag("STRIDE_FALLBACK"),
        }
    }
    let (_, _, trending) = archive.stationarity();
    if trending {
        row.flag("NOT_SETTLED");
    }
    match estimators::observables(&archive) {
        Ok(obs) => {
            row.photons = (san(obs.photons.value), san(obs.photons.se));
            row.photons2 = (san(obs.photons2.value), san(obs.photons2.se));
            row.g2 = (san(obs.g2.value), san(obs.g2.se));
            row.sz = (san(obs.sz.value), san(obs.sz.se));
            row.spsm = (san(obs.spsm.value), san(obs.spsm.se));
            row.pair = (san(obs.pair.value), san(obs.pair.se));
        }
        Err(EstimatorError::BelowNoiseFloor { photons, se }) => {
            row.photons = (san(photons), san(se));
            row.flag("NOISE_FLOOR");
            return;
        }
        Err(_) => {
            row.flag("NUMERIC_ERROR");
            return;
        }
    }
    match estimators::linewidth(&archive) {
        Ok(fit) => {
            row.delta_nu = san(fit.delta_nu);
            row.delta_nu_se = san(fit.se);
            row.fit_rms = san(fit.rms_log_residual);
        }
        Err(EstimatorError::WindowTooShort { .. }) => row.flag("FIT_WINDOW"),
        Err(EstimatorError::FitQuality { .. }) => row.flag("FIT_QUALITY"),
        Err(_) => row.flag("FIT_WINDOW"),
    }
}

fn run_su4_det(q: &SystemParams, numeric: &Numeric, row: &mut SweepRow) {
    let m = numeric.m_cutoff.unwrap_or_else(|| su4::det::suggest_cutoff(q));
    let dt = numeric.dt.unwrap_or_else(|| su4::det::suggest_dt(q, m));
    let budget = numeric.t_relax.unwrap_or(settle_budget(q));
    let mut solver = match DetSolver::new(q, m) {
        Ok(s) => s,
        Err(_) => {
            row.flag("NUMERIC_ERROR");
            return;
        }
    };
    solver.set_ground();
    if !solver.evolve_to_steady(dt, 1e-9, budget) {
        row.flag("NOT_SETTLED");
    }
    if (solver.trace() - 1.0).abs() > 1e-6 {
        row.flag("TRACE_DRIFT");
    }
    let photons = solver.photons();
    let photons2 = solver.photons2();
    let sz = solver.sz();
    let pair = solver.pair();
    row.photons = (san(photons), None);
    row.photons2 = (san(photons2), None);
    row.sz = (san(sz), None);
    row.pair = (san(pair), None);
    row.spsm = (san(spsm_from_pair(q.n_atoms, pair, sz)), None);
    if photons * photons > 1e-12 {
        row.g2 = (san(photons2 / (photons * photons)), None);
    }
    if let Some(tau_max) = numeric.tau_max {
        let pts = solver.field_correlation(tau_max, dt, 200);
        let (taus, values): (Vec<f64>, Vec<_>) = pts.into_iter().unzip();
        fill_correlation_fit(row, taus, values);
    }
}

fn run_su4_mc(q: &SystemParams, numeric: &Numeric, seed: u64, row: &mut SweepRow) {
    let mut opts = McOptions::new(
        numeric.n_traj.unwrap(),
        numeric.t_relax.unwrap(),
        numeric.t_collect.unwrap(),
        seed,
    );
    opts.dt = numeric.dt;
    opts.m_hi = numeric.m_cutoff;
    match su4::run_mc(q, &opts) {
        Ok(res) => {
            row.photons = (san(res.photons.value), san(res.photons.se));
            row.g2 = (san(res.g2.value), san(res.g2.se));
            row.sz = (san(res.sz.value), san(res.sz.se));
            row.pair = (san(res.pair.value), san(res.pair.se));
            let spsm = spsm_from_pair(q.n_atoms, res.pair.value, res.sz.value);
            let spsm_se = {
                let n = q.n_atoms as f64;
                let a = res.pair.se * (n - 1.0) / n;
                let b = res.sz.se / (2.0 * n);
                (a * a + b * b).sqrt()
            };
            row.spsm = (san(spsm), san(spsm_se));
        }
        Err(_) => row.flag("NUMERIC_ERROR"),
    }
}

fn run_bruteforce(q: &SystemParams, numeric: &Numeric, row: &mut SweepRow) {
    let m = numeric.m_cutoff.unwrap_or_else(|| su4::det::suggest_cutoff(q));
    let mut state = match bruteforce::DenseState::new_ground(q, m) {
        Ok(s) => s,
        Err(_) => {
            row.flag("NUMERIC_ERROR");
            return;
        }
    };
    let dt = numeric.dt.unwrap_or_else(|| state.suggest_dt());
    let budget = numeric.t_relax.unwrap_or(settle_budget(q));
    // Chunked settle loop: march one slow time unit at a time and stop
    // when the photon number stops moving.
    let slow = (q.repump + q.gamma).min(q.kappa).max(q.gamma);
    let chunk = 1.0 / slow;
    let mut t = 0.0;
    let mut prev = state.photons();
    let mut settled = false;
    while t < budget {
        state.evolve(chunk, dt);
        t += chunk;
        let cur = state.photons();
        if (cur - prev).abs() / cur.abs().max(1.0) < 1e-9 {
            settled = true;
            break;
        }
        prev = cur;
    }
    if !settled {
        row.flag("NOT_SETTLED");
    }
    if (state.trace() - 1.0).abs() > 1e-6 {
        row.flag("TRACE_DRIFT");
    }
    let photons = state.photons();
    let photons2 = state.photons2();
    let sz = state.sz();
    let pair = state.pair();
    row.photons = (san(photons), None);
    row.photons2 = (san(photons2), None);
    row.sz = (san(sz), None);
    row.pair = (san(pair), None);
    row.spsm = (san(spsm_from_pair(q.n_atoms, pair, sz)), None);
    if photons * photons > 1e-12 {
        row.g2 = (san(photons2 / (photons * photons)), None);
    }
    if let Some(tau_max) = numeric.tau_max {
        let pts = state.field_correlation(tau_max, dt, 200);
        let (taus, values): (Vec<f64>, Vec<_>) = pts.into_iter().unzip();
        fill_correlation_fit(row, taus, values);
    }
}

/// Capacity refusal thresholds. The su4 deterministic solver's state is
/// basis_len * M^2 complex numbers with basis_len = (N+1)(N+2)(N+3)/6;
/// the dense oracle's density matrix is (2^N M)^2. Both are checked over
/// every grid point before any point runs.
const SU4_DET_MAX_ATOMS: usize = 64;
const SU4_DET_MAX_STATE: usize = 20_000_000;
const SU4_MC_MAX_ATOMS: usize = 128;

fn check_capacity(cfg: &RunConfig, points: &[(f64, Option<SystemParams>)]) -> Result<(), CliFail> {
    for (value, q) in points {
        let Some(q) = q else { continue };
        match cfg.method {
            Method::Su4Det => {
                if q.n_atoms > SU4_DET_MAX_ATOMS {
                    return Err(CliFail::Capacity(format!(
                        "su4-det refuses n_atoms = {} (cap {SU4_DET_MAX_ATOMS})",
                        q.n_atoms
                    )));
                }
                let n = q.n_atoms;
                let basis = (n + 1) * (n + 2) * (n + 3) / 6;
                let m = cfg.numeric.m_cutoff.unwrap_or_else(|| su4::det::suggest_cutoff(q));
                let state = basis * m * m;
                if state > SU4_DET_MAX_STATE {
                    return Err(CliFail::Capacity(format!(
                        "su4-det state at sweep value {value} needs {state} coefficients \
                         (basis {basis} x cutoff {m}^2), above the {SU4_DET_MAX_STATE} cap"
                    )));
                }
            }
            Method::Bruteforce => {
                let m = cfg.numeric.m_cutoff.unwrap_or_else(|| su4::det::suggest_cutoff(q));
                let dim = (1usize << q.n_atoms.min(20)) * m;
                if q.n_atoms > 8 || dim > bruteforce::MAX_DIM {
                    return Err(CliFail::Capacity(format!(
                        "bruteforce dimension at sweep value {value} is 2^{} x {m} = {dim}, \
                         above the {} cap",
                        q.n_atoms,
                        bruteforce::MAX_DIM
                    )));
                }
            }
            Method::Su4Mc => {
                if q.n_atoms > SU4_MC_MAX_ATOMS {
                    return Err(CliFail::Capacity(format!(
                        "su4-mc refuses n_atoms = {} (cap {SU4_MC_MAX_ATOMS})",
                        q.n_atoms
                    )));
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// Run every grid point and collect rows. Row seeds are derived from the
/// config seed and the point index, so inserting grid points changes only
/// the new rows' streams.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepResult, CliFail> {
    cfg.params
        .validate()
        .map_err(|e| CliFail::Config(format!("[params]: {e}")))?;

    // (sweep value, derived params); None marks a point with no valid
    // operating point, which becomes a flagged empty row.
    let points: Vec<(f64, Option<SystemParams>)> = match &cfg.sweep {
        Some(spec) => grid(spec)
            .into_iter()
            .map(|v| (v, point_params(&cfg.params, spec, v).ok()))
            .collect(),
        None => vec![(cfg.params.repump, Some(cfg.params))],
    };

    check_capacity(cfg, &points)?;

    let mut rows = Vec::with_capacity(points.len());
    for (idx, (value, q)) in points.iter().enumerate() {
        let mut row = SweepRow {
            sweep_value: *value,
            ..SweepRow::default()
        };
        let Some(q) = q else {
            row.flag("BELOW_THRESHOLD");
            rows.push(row);
            continue;
        };
        if q.validate().is_err() {
            row.flag("NUMERIC_ERROR");
            rows.push(row);
            continue;
        }
        let row_seed = cfg.seed.wrapping_add((idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        match cfg.method {
            Method::Analytic => run_analytic(q, &mut row),
            Method::Meanfield => run_meanfield(q, &cfg.numeric, &mut row),
            Method::Langevin => run_langevin(q, &cfg.numeric, row_seed, &mut row),
            Method::Su4Det => run_su4_det(q, &cfg.numeric, &mut row),
            Method::Su4Mc => run_su4_mc(q, &cfg.numeric, row_seed, &mut row),
            Method::Bruteforce => run_bruteforce(q, &cfg.numeric, &mut row),
        }
        rows.push(row);
    }

    if !rows.is_empty() && rows.iter().all(|r| !r.has_values()) {
        let first_flags = rows[0].flags.join(";");
        return Err(CliFail::Numerical(format!(
            "no sweep point produced values (first row flags: {first_flags})"
        )));
    }

    Ok(SweepResult {
        config: cfg.clone(),
        rows,
    })
}
