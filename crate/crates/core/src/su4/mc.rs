//! Quantum-jump unraveling over the symmetric letter basis.
//!
//! Between jumps a trajectory evolves under the no-jump effective
//! generator: the coherent scatter moves plus all anticommutator decay
//! terms, with every sandwich term removed. The coherent coupling
//! conserves total quanta (photons plus excited atoms), so instead of
//! carrying photon indices each trajectory carries one integer quanta
//! counter N_q, and every basis element's photon indices are implied:
//!
//!   m(b) = N_q - (n_ee + n_eg),   n(b) = N_q - (n_ee + n_ge).
//!
//! The trajectory state is then just one complex coefficient per basis
//! element. The trace decays monotonically between jumps; a pre-drawn
//! uniform variate fixes the next jump time (found by bisection inside the
//! step that crosses it), a second draw picks the channel by weight, and
//! the jump map is applied, the quanta counter updated, and the trace
//! renormalized.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::basis::{binom, Counts, SpinBasis};
use super::det::{coherent_moves, Move, MoveKind};
use super::Su4Error;
use crate::estimators::Estimate;
use crate::params::SystemParams;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McInitial {
    /// All atoms in g, cavity empty, N_q = 0.
    Ground,
    /// All atoms in e, cavity empty, N_q = N.
    AllExcited,
}

#[derive(Debug, Clone)]
pub struct McOptions {
    pub n_traj: usize,
    /// Evolution discarded before time averaging begins.
    pub t_relax: f64,
    /// Length of the averaging window.
    pub t_collect: f64,
    /// Integrator step; None picks [`suggest_mc_dt`].
    pub dt: Option<f64>,
    /// Photon scale for the step heuristic and the quanta guard; None
    /// picks the deterministic cutoff heuristic.
    pub m_hi: Option<usize>,
    pub seed: u64,
    pub initial: McInitial,
}

impl McOptions {
    pub fn new(n_traj: usize, t_relax: f64, t_collect: f64, seed: u64) -> Self {
        McOptions {
            n_traj,
            t_relax,
            t_collect,
            dt: None,
            m_hi: None,
            seed,
            initial: McInitial::Ground,
        }
    }
}

/// Time-averaged observables of a single trajectory, plus its jump record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McTrajectory {
    pub photons: f64,
    pub photons2: f64,
    pub sz: f64,
    pub pair: f64,
    /// Jump counts by channel: repump, spontaneous, dephasing, cavity.
    pub jumps: [u64; 4],
    pub final_n_q: i64,
}

#[derive(Debug, Clone)]
pub struct McRunResult {
    pub per_traj: Vec<McTrajectory>,
    pub photons: Estimate,
    pub g2: Estimate,
    pub sz: Estimate,
    pub pair: Estimate,
    pub dt: f64,
    pub m_hi: usize,
}

/// Step heuristic against the largest no-jump scatter rate at the
/// expected photon scale.
pub fn suggest_mc_dt(p: &SystemParams, m_hi: usize) -> f64 {
    let n = p.n_atoms as f64;
    let mhi = m_hi as f64;
    let lambda = p.kappa * mhi
        + (p.gamma + p.repump) * n
        + 0.5 * p.t2_inv * n
        + p.delta().abs()
        + 0.5 * p.omega * mhi.sqrt() * n;
    0.5 / lambda
}

/// Shared per-run tables: basis, coherent moves, diagonal rates split
/// into the part independent of photon indices and the -(kappa/2)(m+n)
/// coefficient applied against the quanta counter.
struct McOp {
    basis: SpinBasis,
    p: SystemParams,
    moves: Vec<Move>,
    offsets: Vec<usize>,
    /// Photon-independent diagonal per element.
    diag0: Vec<Complex64>,
    /// m(b) and n(b) offsets: photon indices are N_q minus these.
    m_off: Vec<i64>,
    n_off: Vec<i64>,
    /// Trace, inversion, and pair weights.
    trace_w: Vec<f64>,
}

impl McOp {
    fn new(p: &SystemParams) -> Self {
        let basis = SpinBasis::new(p.n_atoms);
        let nb = basis.len();
        let n = p.n_atoms as f64;
        let mut moves = Vec::new();
        let mut offsets = Vec::with_capacity(nb + 1);
        let mut diag0 = Vec::with_capacity(nb);
        let mut m_off = Vec::with_capacity(nb);
        let mut n_off = Vec::with_capacity(nb);
        for i in 0..nb {
            let c = basis.counts(i);
            offsets.push(moves.len());
            moves.extend(coherent_moves(c, &basis, p));
            let (e, g, x, y) = (c.ee as f64, c.gg as f64, c.eg as f64, c.ge as f64);
            diag0.push(Complex64::new(
                -0.5 * p.gamma * (2.0 * e + x + y)
                    - 0.5 * p.repump * (2.0 * g + x + y)
                    - 0.5 * p.t2_inv * n,
                -p.delta() * (x - y),
            ));
            m_off.push((c.ee as i64) + (c.eg as i64));
            n_off.push((c.ee as i64) + (c.ge as i64));
        }
        offsets.push(moves.len());
        let trace_w = (0..nb).map(|i| basis.trace_weight(i)).collect();
        McOp {
            basis,
            p: *p,
            moves,
            offsets,
            diag0,
            m_off,
            n_off,
            trace_w,
        }
    }

    fn rhs(&self, n_q: i64, c: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        let kappa = self.p.kappa;
        for b in 0..self.basis.len() {
            let m = n_q - self.m_off[b];
            let n = n_q - self.n_off[b];
            if m < 0 || n < 0 {
                continue;
            }
            let v = c[b];
            let d = Complex64::new(
                self.diag0[b].re - 0.5 * kappa * (m + n) as f64,
                self.diag0[b].im,
            );
            out[b] += d * v;
            for mv in &self.moves[self.offsets[b]..self.offsets[b + 1]] {
                let f = match mv.kind {
                    MoveKind::KetUp => ((m + 1) as f64).sqrt(),
                    MoveKind::KetDown => (m as f64).sqrt(),
                    MoveKind::BraDown => (n as f64).sqrt(),
                    MoveKind::BraUp => ((n + 1) as f64).sqrt(),
                    MoveKind::SpinJump => unreachable!("no sandwich moves in the effective generator"),
                };
                out[mv.dst as usize] += mv.coeff * f * v;
            }
        }
    }

    fn trace(&self, c: &[Complex64]) -> f64 {
        let mut acc = 0.0;
        for b in 0..self.basis.len() {
            if self.trace_w[b] != 0.0 {
                acc += self.trace_w[b] * c[b].re;
            }
        }
        acc
    }

    /// Jump channel weights: repump, spontaneous, dephasing, cavity.
    fn weights(&self, n_q: i64, c: &[Complex64]) -> [f64; 4] {
        let mut w = [0.0f64; 4];
        let nb = self.basis.len();
        for b in 0..nb {
            let tw = self.trace_w[b];
            if tw == 0.0 {
                continue;
            }
            let counts = self.basis.counts(b);
            let pop = tw * c[b].re;
            w[0] += counts.gg as f64 * pop;
            w[1] += counts.ee as f64 * pop;
            let m = (n_q - self.m_off[b]).max(0);
            w[3] += m as f64 * pop;
        }
        let tr = self.trace(c);
        w[0] *= self.p.repump;
        w[1] *= self.p.gamma;
        w[2] = self.p.t2_inv * 0.5 * self.p.n_atoms as f64 * tr;
        w[3] *= self.p.kappa;
        w
    }

    /// Apply a jump channel in place; returns the quanta increment.
    /// The caller renormalizes.
    fn apply_jump(&self, channel: usize, n_q: i64, c: &mut Vec<Complex64>) -> i64 {
        let nb = self.basis.len();
        match channel {
            0 | 1 => {
                let mut d = vec![Complex64::new(0.0, 0.0); nb];
                for b in 0..nb {
                    if c[b] == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let counts = self.basis.counts(b);
                    if channel == 0 && counts.gg >= 1 {
                        // Repump transfer g -> e.
                        let dst = Counts {
                            ee: counts.ee + 1,
                            gg: counts.gg - 1,
                            eg: counts.eg,
                            ge: counts.ge,
                        };
                        d[self.basis.index_of(dst)] += (counts.ee + 1) as f64 * c[b];
                    } else if channel == 1 && counts.ee >= 1 {
                        // Spontaneous transfer e -> g.
                        let dst = Counts {
                            ee: counts.ee - 1,
                            gg: counts.gg + 1,
                            eg: counts.eg,
                            ge: counts.ge,
                        };
                        d[self.basis.index_of(dst)] += (counts.gg + 1) as f64 * c[b];
                    }
                }
                *c = d;
                if channel == 0 {
                    1
                } else {
                    -1
                }
            }
            2 => {
                // Dephasing: each letter keeps or flips sign under the
                // sigma-z sandwich, summed over atoms.
                for b in 0..nb {
                    let counts = self.basis.counts(b);
                    let f = counts.ee as f64 + counts.gg as f64
                        - counts.eg as f64
                        - counts.ge as f64;
                    c[b] *= f;
                }
                0
            }
            _ => {
                // Cavity emission: per-element sqrt(m n) scaling.
                for b in 0..nb {
                    let m = n_q - self.m_off[b];
                    let n = n_q - self.n_off[b];
                    let f = if m > 0 && n > 0 {
                        ((m * n) as f64).sqrt()
                    } else {
                        0.0
                    };
                    c[b] *= f;
                }
                -1
            }
        }
    }

    fn observables(&self, n_q: i64, c: &[Complex64]) -> [f64; 4] {
        let nb = self.basis.len();
        let n_atoms = self.p.n_atoms;
        let tr = self.trace(c);
        let mut photons = 0.0;
        let mut photons2 = 0.0;
        let mut sz = 0.0;
        let mut pair = 0.0;
        for b in 0..nb {
            let counts = self.basis.counts(b);
            if self.trace_w[b] != 0.0 {
                let pop = self.trace_w[b] * c[b].re;
                let m = (n_q - self.m_off[b]).max(0) as f64;
                photons += m * pop;
                photons2 += m * (m - 1.0).max(0.0) * pop;
                sz += (counts.ee as f64 - counts.gg as f64) / n_atoms as f64 * pop;
            } else if counts.eg == 1 && counts.ge == 1 {
                pair += binom(n_atoms - 2, counts.ee as usize) * c[b].re;
            }
        }
        [photons / tr, photons2 / tr, sz / tr, pair / tr]
    }

    /// A populated element whose implied photon index is negative means
    /// the quanta bookkeeping has been violated.
    fn check_quanta(&self, n_q: i64, c: &[Complex64]) -> Result<(), Su4Error> {
        for b in 0..self.basis.len() {
            if (n_q - self.m_off[b] < 0 || n_q - self.n_off[b] < 0) && c[b].norm() > 1e-12 {
                return Err(Su4Error::InternalQuantaError);
            }
        }
        Ok(())
    }
}

fn rk4(op: &McOp, n_q: i64, c: &[Complex64], dt: f64, scratch: &mut [Vec<Complex64>]) -> Vec<Complex64> {
    let nb = c.len();
    let (k1, rest) = scratch.split_at_mut(1);
    let (k2, rest) = rest.split_at_mut(1);
    let (k3, rest) = rest.split_at_mut(1);
    let (k4, tmp) = rest.split_at_mut(1);
    let (k1, k2, k3, k4, tmp) = (&mut k1[0], &mut k2[0], &mut k3[0], &mut k4[0], &mut tmp[0]);
    op.rhs(n_q, c, k1);
    for i in 0..nb {
        tmp[i] = c[i] + 0.5 * dt * k1[i];
    }
    op.rhs(n_q, tmp, k2);
    for i in 0..nb {
        tmp[i] = c[i] + 0.5 * dt * k2[i];
    }
    op.rhs(n_q, tmp, k3);
    for i in 0..nb {
        tmp[i] = c[i] + dt * k3[i];
    }
    op.rhs(n_q, tmp, k4);
    let mut out = vec![Complex64::new(0.0, 0.0); nb];
    for i in 0..nb {
        out[i] = c[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn run_one(
    op: &McOp,
    opts: &McOptions,
    dt: f64,
    n_q_bound: i64,
    traj_index: usize,
) -> Result<McTrajectory, Su4Error> {
    let nb = op.basis.len();
    let n = op.p.n_atoms as u8;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(traj_index as u64);

    let mut c = vec![Complex64::new(0.0, 0.0); nb];
    let mut n_q: i64;
    match opts.initial {
        McInitial::Ground => {
            c[op.basis.index_of(Counts {
                ee: 0,
                gg: n,
                eg: 0,
                ge: 0,
            })] = Complex64::new(1.0, 0.0);
            n_q = 0;
        }
        McInitial::AllExcited => {
            c[op.basis.index_of(Counts {
                ee: n,
                gg: 0,
                eg: 0,
                ge: 0,
            })] = Complex64::new(1.0, 0.0);
            n_q = n as i64;
        }
    }
    let n_q_start = n_q;

    let mut scratch = vec![vec![Complex64::new(0.0, 0.0); nb]; 5];
    let t_end = opts.t_relax + opts.t_collect;
    let mut t = 0.0f64;
    let mut u: f64 = 1.0 - rng.gen::<f64>();
    let mut jumps = [0u64; 4];
    let mut acc = [0.0f64; 4];
    let mut measure = 0.0f64;
    let mut prev_obs = op.observables(n_q, &c);

    let settle = |t0: f64, t1: f64, o0: &[f64; 4], o1: &[f64; 4], acc: &mut [f64; 4], measure: &mut f64| {
        let lo = t0.max(opts.t_relax);
        if t1 <= lo {
            return;
        }
        let w = t1 - lo;
        for k in 0..4 {
            acc[k] += 0.5 * (o0[k] + o1[k]) * w;
        }
        *measure += w;
    };

    while t < t_end {
        let h = dt.min(t_end - t);
        let trial = rk4(op, n_q, &c, h, &mut scratch);
        if op.trace(&trial) >= u {
            let obs = op.observables(n_q, &trial);
            settle(t, t + h, &prev_obs, &obs, &mut acc, &mut measure);
            c = trial;
            t += h;
            prev_obs = obs;
            continue;
        }
        // The trace crossed the jump threshold inside this step: bisect
        // for the crossing, always stepping fresh from the left state.
        let mut lo = 0.0f64;
        let mut hi = h;
        for _ in 0..8 {
            let mid = 0.5 * (lo + hi);
            let probe = rk4(op, n_q, &c, mid, &mut scratch);
            if op.trace(&probe) >= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo > 0.0 {
            let at_jump = rk4(op, n_q, &c, lo, &mut scratch);
            let obs = op.observables(n_q, &at_jump);
            settle(t, t + lo, &prev_obs, &obs, &mut acc, &mut measure);
            c = at_jump;
            t += lo;
        }
        let w = op.weights(n_q, &c);
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            return Err(Su4Error::DeadState { t });
        }
        let mut pick = rng.gen::<f64>() * total;
        let mut channel = 3;
        for (k, wk) in w.iter().enumerate() {
            if pick < *wk {
                channel = k;
                break;
            }
            pick -= wk;
        }
        n_q += op.apply_jump(channel, n_q, &mut c);
        jumps[channel] += 1;
        let tr = op.trace(&c);
        if !(tr > 0.0) {
            return Err(Su4Error::DeadState { t });
        }
        let inv = 1.0 / tr;
        for v in c.iter_mut() {
            *v *= inv;
        }
        if n_q > n_q_bound {
            return Err(Su4Error::QuantaOverflow {
                n_q,
                bound: n_q_bound,
            });
        }
        op.check_quanta(n_q, &c)?;
        u = 1.0 - rng.gen::<f64>();
        prev_obs = op.observables(n_q, &c);
    }

    // Exact quanta ledger: every repump adds one, every spontaneous or
    // cavity emission removes one, dephasing keeps the count.
    debug_assert_eq!(
        n_q,
        n_q_start + jumps[0] as i64 - jumps[1] as i64 - jumps[3] as i64
    );
    if measure <= 0.0 {
        return Err(Su4Error::DeadState { t });
    }
    Ok(McTrajectory {
        photons: acc[0] / measure,
        photons2: acc[1] / measure,
        sz: acc[2] / measure,
        pair: acc[3] / measure,
        jumps,
        final_n_q: n_q,
    })
}

pub fn run_mc(p: &SystemParams, opts: &McOptions) -> Result<McRunResult, Su4Error> {
    p.validate()?;
    if opts.n_traj < 2 {
        return Err(Su4Error::TooFewTrajectories);
    }
    let op = McOp::new(p);
    let m_hi = opts
        .m_hi
        .unwrap_or_else(|| super::det::suggest_cutoff(p))
        .max(2);
    let dt = opts.dt.unwrap_or_else(|| suggest_mc_dt(p, m_hi));
    let n_q_bound = 4 * m_hi as i64 + 2 * p.n_atoms as i64 + 20;

    let results: Vec<Result<McTrajectory, Su4Error>> = (0..opts.n_traj)
        .into_par_iter()
        .map(|j| run_one(&op, opts, dt, n_q_bound, j))
        .collect();
    let mut per_traj = Vec::with_capacity(opts.n_traj);
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(tr) => per_traj.push(tr),
            Err(e) => {
                return Err(Su4Error::Trajectory {
                    index,
                    source: Box::new(e),
                })
            }
        }
    }

    let photons: Vec<f64> = per_traj.iter().map(|t| t.photons).collect();
    let photons2: Vec<f64> = per_traj.iter().map(|t| t.photons2).collect();
    let sz: Vec<f64> = per_traj.iter().map(|t| t.sz).collect();
    let pair: Vec<f64> = per_traj.iter().map(|t| t.pair).collect();
    let est = |xs: &[f64]| {
        let (value, se) = stats::mean_se(xs);
        Estimate { value, se }
    };
    let (g2v, g2se) = stats::jackknife_g2(&photons2, &photons);
    Ok(McRunResult {
        photons: est(&photons),
        g2: Estimate { value: g2v, se: g2se },
        sz: est(&sz),
        pair: est(&pair),
        per_traj,
        dt,
        m_hi,
    })
}
