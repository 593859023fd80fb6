//! Deterministic master-equation propagation of the symmetric-basis
//! coefficients c(b; m, n), m and n photon indices below an explicit
//! cutoff.
//!
//! All couplings between basis elements are precomputed once as scatter
//! moves. A move writes `coeff * f(m, n) * c(src; m, n)` into the
//! destination element, where f is one of the ladder factors sqrt(m+1),
//! sqrt(m), sqrt(n), sqrt(n+1), or 1. Move coefficients count letters of
//! the destination element: transferring one letter into a group of k
//! identical letters merges k+1 equivalent arrangements of the plain
//! (unnormalized) symmetrized products.
//!
//! Photon amplitude that the drive pushes past the cutoff is dropped;
//! choose the cutoff so occupation there is negligible (see
//! [`suggest_cutoff`]).

use num_complex::Complex64;

use super::basis::{binom, Counts, SpinBasis};
use super::Su4Error;
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy)]
pub(super) enum MoveKind {
    /// factor sqrt(m+1), photon indices (m+1, n): left a-dagger.
    KetUp,
    /// factor sqrt(m), (m-1, n): left a.
    KetDown,
    /// factor sqrt(n), (m, n-1): right a-dagger.
    BraDown,
    /// factor sqrt(n+1), (m, n+1): right a.
    BraUp,
    /// no photon factor, (m, n): incoherent spin transfer.
    SpinJump,
}

#[derive(Debug, Clone, Copy)]
pub(super) struct Move {
    pub(super) dst: u32,
    pub(super) coeff: Complex64,
    pub(super) kind: MoveKind,
}

/// Scatter moves of the coherent coupling for one basis element. x and y
/// are the eg and ge letter counts of the source; destinations move
/// exactly one letter. Shared with the jump unraveling, whose effective
/// evolution keeps exactly these terms.
pub(super) fn coherent_moves(b: Counts, basis: &SpinBasis, p: &SystemParams) -> Vec<Move> {
    let (e, g, x, y) = (b.ee as i32, b.gg as i32, b.eg as i32, b.ge as i32);
    let hi = Complex64::new(0.0, -0.5 * p.omega); // -i Omega/2
    let hi_c = -hi; // +i Omega/2
    let mut out = Vec::with_capacity(8);
    let mut push = |de: i32, dg: i32, dx: i32, dy: i32, coeff: Complex64, kind: MoveKind| {
        let dst = Counts {
            ee: (e + de) as u8,
            gg: (g + dg) as u8,
            eg: (x + dx) as u8,
            ge: (y + dy) as u8,
        };
        out.push(Move {
            dst: basis.index_of(dst) as u32,
            coeff,
            kind,
        });
    };
    // Left multiplication by a-dagger sigma-: ee -> ge, eg -> gg.
    if e >= 1 {
        push(-1, 0, 0, 1, hi * (y + 1) as f64, MoveKind::KetUp);
    }
    if x >= 1 {
        push(0, 1, -1, 0, hi * (g + 1) as f64, MoveKind::KetUp);
    }
    // Left multiplication by a sigma+: gg -> eg, ge -> ee.
    if g >= 1 {
        push(0, -1, 1, 0, hi * (x + 1) as f64, MoveKind::KetDown);
    }
    if y >= 1 {
        push(1, 0, 0, -1, hi * (e + 1) as f64, MoveKind::KetDown);
    }
    // Right multiplication by a-dagger sigma-: gg -> ge, eg -> ee.
    if g >= 1 {
        push(0, -1, 0, 1, hi_c * (y + 1) as f64, MoveKind::BraDown);
    }
    if x >= 1 {
        push(1, 0, -1, 0, hi_c * (e + 1) as f64, MoveKind::BraDown);
    }
    // Right multiplication by a sigma+: ee -> eg, ge -> gg.
    if e >= 1 {
        push(-1, 0, 1, 0, hi_c * (x + 1) as f64, MoveKind::BraUp);
    }
    if y >= 1 {
        push(0, 1, 0, -1, hi_c * (g + 1) as f64, MoveKind::BraUp);
    }
    out
}

/// Full deterministic scatter table: coherent moves plus the incoherent
/// spin transfer sandwiches.
fn moves_for(b: Counts, basis: &SpinBasis, p: &SystemParams) -> Vec<Move> {
    let (e, g) = (b.ee as i32, b.gg as i32);
    let mut out = coherent_moves(b, basis, p);
    let mut push = |de: i32, dg: i32, coeff: f64| {
        let dst = Counts {
            ee: (e + de) as u8,
            gg: (g + dg) as u8,
            eg: b.eg,
            ge: b.ge,
        };
        out.push(Move {
            dst: basis.index_of(dst) as u32,
            coeff: Complex64::new(coeff, 0.0),
            kind: MoveKind::SpinJump,
        });
    };
    // Spontaneous-emission and repump transfer terms.
    if e >= 1 {
        push(-1, 1, p.gamma * (g + 1) as f64);
    }
    if g >= 1 {
        push(1, -1, p.repump * (e + 1) as f64);
    }
    out
}

/// Element-diagonal rate: decay of every letter plus the atomic detuning
/// rotation of the coherence letters. The photon part -(kappa/2)(m+n) is
/// added per matrix element.
fn diag_rate(b: Counts, p: &SystemParams) -> Complex64 {
    let (e, g, x, y) = (
        b.ee as f64,
        b.gg as f64,
        b.eg as f64,
        b.ge as f64,
    );
    let re = -0.5 * p.gamma * (2.0 * e + x + y)
        - 0.5 * p.repump * (2.0 * g + x + y)
        - p.t2_inv * (x + y);
    let im = -p.delta() * (x - y);
    Complex64::new(re, im)
}

pub struct DetSolver {
    pub basis: SpinBasis,
    pub m_cutoff: usize,
    pub t: f64,
    /// Coefficients, laid out as (b * m_cutoff + m) * m_cutoff + n.
    pub amps: Vec<Complex64>,
    pub params: SystemParams,
    diag0: Vec<Complex64>,
    moves: Vec<Move>,
    offsets: Vec<usize>,
    sqrt_t: Vec<f64>,
    scratch: Vec<Vec<Complex64>>,
}

impl DetSolver {
    /// Ground-state solver: every atom in g, cavity empty.
    pub fn new(p: &SystemParams, m_cutoff: usize) -> Result<Self, Su4Error> {
        p.validate()?;
        if m_cutoff < 2 {
            return Err(Su4Error::CutoffTooSmall);
        }
        let basis = SpinBasis::new(p.n_atoms);
        let nb = basis.len();
        let mut moves = Vec::new();
        let mut offsets = Vec::with_capacity(nb + 1);
        for i in 0..nb {
            offsets.push(moves.len());
            moves.extend(moves_for(basis.counts(i), &basis, p));
        }
        offsets.push(moves.len());
        let diag0 = (0..nb).map(|i| diag_rate(basis.counts(i), p)).collect();
        let sqrt_t = (0..=m_cutoff).map(|m| (m as f64).sqrt()).collect();
        let dim = nb * m_cutoff * m_cutoff;
        let mut solver = DetSolver {
            basis,
            m_cutoff,
            t: 0.0,
            amps: vec![Complex64::new(0.0, 0.0); dim],
            params: *p,
            diag0,
            moves,
            offsets,
            sqrt_t,
            scratch: vec![vec![Complex64::new(0.0, 0.0); dim]; 5],
        };
        solver.set_ground();
        Ok(solver)
    }

    pub fn idx(&self, b: usize, m: usize, n: usize) -> usize {
        (b * self.m_cutoff + m) * self.m_cutoff + n
    }

    pub fn amp(&self, c: Counts, m: usize, n: usize) -> Complex64 {
        self.amps[self.idx(self.basis.index_of(c), m, n)]
    }

    pub fn set_amp(&mut self, c: Counts, m: usize, n: usize, v: Complex64) {
        let i = self.idx(self.basis.index_of(c), m, n);
        self.amps[i] = v;
    }

    pub fn set_ground(&mut self) {
        let n = self.params.n_atoms as u8;
        self.amps.fill(Complex64::new(0.0, 0.0));
        let ground = Counts {
            ee: 0,
            gg: n,
            eg: 0,
            ge: 0,
        };
        self.set_amp(ground, 0, 0, Complex64::new(1.0, 0.0));
        self.t = 0.0;
    }

    fn rhs(&self, c: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        let mm = self.m_cutoff;
        let kappa = self.params.kappa;
        for b in 0..self.basis.len() {
            let base = b * mm * mm;
            let diag0 = self.diag0[b];
            for m in 0..mm {
                let row = base + m * mm;
                for n in 0..mm {
                    let d = Complex64::new(
                        diag0.re - 0.5 * kappa * (m + n) as f64,
                        diag0.im,
                    );
                    out[row + n] += d * c[row + n];
                }
            }
            for m in 1..mm {
                let src_row = base + m * mm;
                let dst_row = base + (m - 1) * mm;
                let fm = kappa * self.sqrt_t[m];
                for n in 1..mm {
                    out[dst_row + (n - 1)] += fm * self.sqrt_t[n] * c[src_row + n];
                }
            }
            for mv in &self.moves[self.offsets[b]..self.offsets[b + 1]] {
                let dbase = mv.dst as usize * mm * mm;
                match mv.kind {
                    MoveKind::KetUp => {
                        for m in 0..mm - 1 {
                            let f = mv.coeff * self.sqrt_t[m + 1];
                            let src_row = base + m * mm;
                            let dst_row = dbase + (m + 1) * mm;
                            for n in 0..mm {
                                out[dst_row + n] += f * c[src_row + n];
                            }
                        }
                    }
                    MoveKind::KetDown => {
                        for m in 1..mm {
                            let f = mv.coeff * self.sqrt_t[m];
                            let src_row = base + m * mm;
                            let dst_row = dbase + (m - 1) * mm;
                            for n in 0..mm {
                                out[dst_row + n] += f * c[src_row + n];
                            }
                        }
                    }
                    MoveKind::BraDown => {
                        for m in 0..mm {
                            let src_row = base + m * mm;
                            let dst_row = dbase + m * mm;
                            for n in 1..mm {
                                out[dst_row + (n - 1)] += mv.coeff * self.sqrt_t[n] * c[src_row + n];
                            }
                        }
                    }
                    MoveKind::BraUp => {
                        for m in 0..mm {
                            let src_row = base + m * mm;
                            let dst_row = dbase + m * mm;
                            for n in 0..mm - 1 {
                                out[dst_row + (n + 1)] +=
                                    mv.coeff * self.sqrt_t[n + 1] * c[src_row + n];
                            }
                        }
                    }
                    MoveKind::SpinJump => {
                        for i in 0..mm * mm {
                            out[dbase + i] += mv.coeff * c[base + i];
                        }
                    }
                }
            }
        }
    }

    pub fn step(&mut self, dt: f64) {
        let dim = self.amps.len();
        let mut scratch = std::mem::take(&mut self.scratch);
        let (k1, rest) = scratch.split_at_mut(1);
        let (k2, rest) = rest.split_at_mut(1);
        let (k3, rest) = rest.split_at_mut(1);
        let (k4, tmp) = rest.split_at_mut(1);
        let (k1, k2, k3, k4, tmp) = (
            &mut k1[0],
            &mut k2[0],
            &mut k3[0],
            &mut k4[0],
            &mut tmp[0],
        );
        self.rhs(&self.amps, k1);
        for i in 0..dim {
            tmp[i] = self.amps[i] + 0.5 * dt * k1[i];
        }
        self.rhs(tmp, k2);
        for i in 0..dim {
            tmp[i] = self.amps[i] + 0.5 * dt * k2[i];
        }
        self.rhs(tmp, k3);
        for i in 0..dim {
            tmp[i] = self.amps[i] + dt * k3[i];
        }
        self.rhs(tmp, k4);
        for i in 0..dim {
            self.amps[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        self.t += dt;
        self.scratch = scratch;
    }

    pub fn evolve(&mut self, duration: f64, dt: f64) {
        assert!(duration >= 0.0 && dt > 0.0);
        if duration == 0.0 {
            return;
        }
        let n = (duration / dt).ceil().max(1.0) as usize;
        let h = duration / n as f64;
        for _ in 0..n {
            self.step(h);
        }
    }

    /// Run in chunks until photons and inversion both move by less than
    /// tol (relative, floored at 1) per chunk. Returns whether the state
    /// settled before max_t.
    pub fn evolve_to_steady(&mut self, dt: f64, tol: f64, max_t: f64) -> bool {
        let rate = self
            .params
            .gamma
            .max((self.params.repump + self.params.gamma) / 20.0)
            .max(self.params.kappa / 20.0);
        let chunk = 1.0 / rate;
        let mut prev = (self.photons(), self.sz());
        while self.t < max_t {
            self.evolve(chunk.min(max_t - self.t), dt);
            let cur = (self.photons(), self.sz());
            let moved = ((cur.0 - prev.0).abs() / cur.0.abs().max(1.0))
                .max((cur.1 - prev.1).abs() / cur.1.abs().max(1.0));
            if moved < tol {
                return true;
            }
            prev = cur;
        }
        false
    }

    /// Sum over the trace-bearing slice; real part is the physical trace.
    pub fn trace(&self) -> f64 {
        self.trace_weighted(|_m| 1.0)
    }

    fn trace_weighted(&self, f: impl Fn(usize) -> f64) -> f64 {
        let mm = self.m_cutoff;
        let mut acc = 0.0;
        for b in 0..self.basis.len() {
            let w = self.basis.trace_weight(b);
            if w == 0.0 {
                continue;
            }
            let base = b * mm * mm;
            for m in 0..mm {
                acc += w * f(m) * self.amps[base + m * mm + m].re;
            }
        }
        acc
    }

    pub fn photons(&self) -> f64 {
        self.trace_weighted(|m| m as f64) / self.trace()
    }

    /// Second factorial moment <adag adag a a>.
    pub fn photons2(&self) -> f64 {
        self.trace_weighted(|m| (m * m.saturating_sub(1)) as f64) / self.trace()
    }

    pub fn sz(&self) -> f64 {
        let mm = self.m_cutoff;
        let n = self.params.n_atoms as f64;
        let mut acc = 0.0;
        for b in 0..self.basis.len() {
            let w = self.basis.trace_weight(b);
            if w == 0.0 {
                continue;
            }
            let c = self.basis.counts(b);
            let base = b * mm * mm;
            let mut diag = 0.0;
            for m in 0..mm {
                diag += self.amps[base + m * mm + m].re;
            }
            acc += w * (c.ee as f64 - c.gg as f64) / n * diag;
        }
        acc / self.trace()
    }

    /// Spin-spin correlation <sigma1+ sigma2->: one eg and one ge letter,
    /// every other atom diagonal; the arrangement count over the remaining
    /// N-2 atoms is the binomial in n_ee.
    pub fn pair(&self) -> f64 {
        let n = self.params.n_atoms;
        if n < 2 {
            return 0.0;
        }
        let mm = self.m_cutoff;
        let mut acc = Complex64::new(0.0, 0.0);
        for b in 0..self.basis.len() {
            let c = self.basis.counts(b);
            if c.eg != 1 || c.ge != 1 {
                continue;
            }
            let base = b * mm * mm;
            let mut diag = Complex64::new(0.0, 0.0);
            for m in 0..mm {
                diag += self.amps[base + m * mm + m];
            }
            acc += binom(n - 2, c.ee as usize) * diag;
        }
        (acc / self.trace()).re
    }

    /// Largest violation of rho = rho-dagger across all stored elements.
    pub fn hermiticity_defect(&self) -> f64 {
        let mm = self.m_cutoff;
        let mut worst = 0.0f64;
        for b in 0..self.basis.len() {
            let bd = self.basis.index_of(self.basis.counts(b).dagger());
            for m in 0..mm {
                for n in 0..mm {
                    let lhs = self.amps[self.idx(b, m, n)];
                    let rhs = self.amps[self.idx(bd, n, m)].conj();
                    worst = worst.max((lhs - rhs).norm());
                }
            }
        }
        worst
    }

    /// First-order field correlation by the quantum regression theorem:
    /// seed Phi(0) = a rho, evolve Phi under the same generator, read off
    /// C(tau) = Tr[a-dagger Phi(tau)]. Returns (tau, C) pairs on a grid of
    /// about n_points values up to tau_max, starting at tau = 0.
    pub fn field_correlation(
        &self,
        tau_max: f64,
        dt: f64,
        n_points: usize,
    ) -> Vec<(f64, Complex64)> {
        let mm = self.m_cutoff;
        let mut phi = DetSolver {
            basis: SpinBasis::new(self.params.n_atoms),
            m_cutoff: mm,
            t: 0.0,
            amps: vec![Complex64::new(0.0, 0.0); self.amps.len()],
            params: self.params,
            diag0: self.diag0.clone(),
            moves: self.moves.clone(),
            offsets: self.offsets.clone(),
            sqrt_t: self.sqrt_t.clone(),
            scratch: self.scratch.clone(),
        };
        for b in 0..self.basis.len() {
            for m in 0..mm - 1 {
                for n in 0..mm {
                    let dst = phi.idx(b, m, n);
                    phi.amps[dst] = self.sqrt_t[m + 1] * self.amps[self.idx(b, m + 1, n)];
                }
            }
        }
        let read_c = |s: &DetSolver| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..s.basis.len() {
                let w = s.basis.trace_weight(b);
                if w == 0.0 {
                    continue;
                }
                for m in 1..mm {
                    acc += w * s.sqrt_t[m] * s.amps[s.idx(b, m - 1, m)];
                }
            }
            acc
        };
        let total_steps = (tau_max / dt).ceil().max(1.0) as usize;
        let stride = (total_steps / n_points.max(1)).max(1);
        let mut out = vec![(0.0, read_c(&phi))];
        for k in 1..=total_steps {
            phi.step(dt);
            if k % stride == 0 || k == total_steps {
                out.push((phi.t, read_c(&phi)));
            }
        }
        out
    }
}

/// Steady-state field linewidth by regression: settle the density matrix
/// from the ground state, deform it by the annihilation channel, evolve
/// the deformation, and fit a single exponential to |C(tau)| over the
/// standard 0.8 -> 0.2 decay window. `tau_max` must reach past the 0.2
/// crossing or the fit reports its window as too short.
pub fn linewidth_regression(
    p: &SystemParams,
    tau_max: f64,
) -> Result<crate::estimators::LinewidthFit, Su4Error> {
    let m_cutoff = suggest_cutoff(p);
    let dt = suggest_dt(p, m_cutoff);
    let mut solver = DetSolver::new(p, m_cutoff)?;
    let settle_cap = 400.0 / (p.repump + p.gamma).min(p.kappa).max(p.gamma);
    if !solver.evolve_to_steady(dt, 1e-9, settle_cap) {
        return Err(Su4Error::NotSettled { t: solver.t });
    }
    let series = solver.field_correlation(tau_max, dt, 200);
    let curve = crate::estimators::CorrelationCurve {
        taus: series.iter().map(|(tau, _)| *tau).collect(),
        values: series.iter().map(|(_, c)| *c).collect(),
        sigmas: vec![1.0; series.len()],
    };
    Ok(crate::estimators::fit_linewidth(&curve)?)
}

/// Photon cutoff heuristic: mean-field steady photons plus six standard
/// deviations of a Poissonian spread plus a floor for transient excursions.
pub fn suggest_cutoff(p: &SystemParams) -> usize {
    let n_pred = crate::meanfield::steady_photons_exact_delta(p).max(0.0);
    (n_pred + 6.0 * n_pred.sqrt() + 10.0).ceil() as usize
}

/// Explicit-scheme step bound from the largest scatter rates.
pub fn suggest_dt(p: &SystemParams, m_cutoff: usize) -> f64 {
    let n = p.n_atoms as f64;
    let mhi = m_cutoff as f64;
    let lambda = p.kappa * mhi
        + (p.gamma + p.repump) * n
        + p.t2_inv * n
        + p.delta().abs()
        + 0.5 * p.omega * mhi.sqrt() * n;
    0.5 / lambda
}
