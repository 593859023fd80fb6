//! Dense full-Hilbert-space master equation, the arbiter every reduced
//! representation is checked against.
//!
//! No structure is assumed beyond the Lindblad form itself: the state is
//! the full density matrix over 2^N atomic configurations times a photon
//! ladder of length M, capped at dimension 256. Everything here favors
//! being obviously correct over being fast.

use num_complex::Complex64;
use thiserror::Error;

use crate::params::SystemParams;
use crate::su4::SpinBasis;

pub const MAX_DIM: usize = 256;

#[derive(Debug, Error)]
pub enum BruteforceError {
    #[error("dense dimension {dim} exceeds {MAX_DIM}")]
    DimTooLarge { dim: usize },
    #[error("photon cutoff must be at least 2")]
    CutoffTooSmall,
    #[error(transparent)]
    Params(#[from] crate::params::ParamsError),
}

pub struct DenseState {
    pub n_atoms: usize,
    pub m_cutoff: usize,
    pub dim: usize,
    /// Row-major density matrix, rho[r * dim + c] = <r|rho|c>.
    pub rho: Vec<Complex64>,
    pub t: f64,
    pub params: SystemParams,
    /// Off-diagonal Hamiltonian adjacency: for each index k, the list of
    /// (k2, h) with <k2|H|k> = h. Real symmetric by construction.
    neighbors: Vec<Vec<(u32, f64)>>,
    /// Element-diagonal generator entries.
    diag: Vec<Complex64>,
    scratch: Vec<Vec<Complex64>>,
}

fn popcount(bits: usize) -> u32 {
    bits.count_ones()
}

impl DenseState {
    pub fn new_ground(p: &SystemParams, m_cutoff: usize) -> Result<Self, BruteforceError> {
        p.validate()?;
        if m_cutoff < 2 {
            return Err(BruteforceError::CutoffTooSmall);
        }
        let dim = (1usize << p.n_atoms) * m_cutoff;
        if dim > MAX_DIM {
            return Err(BruteforceError::DimTooLarge { dim });
        }
        let n = p.n_atoms;
        let mm = m_cutoff;
        let mut neighbors = vec![Vec::new(); dim];
        for bits in 0..(1usize << n) {
            for m in 0..mm {
                let k = bits * mm + m;
                for j in 0..n {
                    if bits & (1 << j) != 0 {
                        if m + 1 < mm {
                            // a-dagger sigma-_j: photon up, atom j down.
                            let k2 = (bits & !(1 << j)) * mm + (m + 1);
                            neighbors[k]
                                .push((k2 as u32, 0.5 * p.omega * ((m + 1) as f64).sqrt()));
                        }
                    } else if m >= 1 {
                        // a sigma+_j: photon down, atom j up.
                        let k2 = (bits | (1 << j)) * mm + (m - 1);
                        neighbors[k].push((k2 as u32, 0.5 * p.omega * (m as f64).sqrt()));
                    }
                }
            }
        }
        let delta = p.delta();
        let mut diag = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            let (br, mr) = (r / mm, r % mm);
            let pr = popcount(br) as f64;
            for c in 0..dim {
                let (bc, mc) = (c / mm, c % mm);
                let pc = popcount(bc) as f64;
                let nf = n as f64;
                let re = -0.5 * p.kappa * (mr + mc) as f64
                    - 0.5 * p.gamma * (pr + pc)
                    - 0.5 * p.repump * (2.0 * nf - pr - pc)
                    - p.t2_inv * popcount(br ^ bc) as f64;
                let im = -delta * (pr - pc);
                diag[r * dim + c] = Complex64::new(re, im);
            }
        }
        let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
        rho[0] = Complex64::new(1.0, 0.0);
        Ok(DenseState {
            n_atoms: n,
            m_cutoff,
            dim,
            rho,
            t: 0.0,
            params: *p,
            neighbors,
            diag,
            scratch: vec![vec![Complex64::new(0.0, 0.0); dim * dim]; 5],
        })
    }

    pub fn idx(&self, bits: usize, m: usize) -> usize {
        bits * self.m_cutoff + m
    }

    fn rhs(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let dim = self.dim;
        let mm = self.m_cutoff;
        let n = self.n_atoms;
        let p = &self.params;
        for i in 0..dim * dim {
            out[i] = self.diag[i] * rho[i];
        }
        // -i H rho: scatter source rows into neighbor rows.
        for k in 0..dim {
            for &(k2, h) in &self.neighbors[k] {
                let f = Complex64::new(0.0, -h);
                let src = k * dim;
                let dst = k2 as usize * dim;
                for c in 0..dim {
                    out[dst + c] += f * rho[src + c];
                }
            }
        }
        // +i rho H: scatter source columns into neighbor columns.
        for c in 0..dim {
            for &(c2, h) in &self.neighbors[c] {
                let f = Complex64::new(0.0, h);
                for r in 0..dim {
                    out[r * dim + c2 as usize] += f * rho[r * dim + c];
                }
            }
        }
        // kappa a rho a-dagger.
        for r in 0..dim {
            let (br, mr) = (r / mm, r % mm);
            if mr == 0 {
                continue;
            }
            for c in 0..dim {
                let (bc, mc) = (c / mm, c % mm);
                if mc == 0 {
                    continue;
                }
                let f = p.kappa * ((mr * mc) as f64).sqrt();
                out[(br * mm + mr - 1) * dim + (bc * mm + mc - 1)] += f * rho[r * dim + c];
            }
        }
        // Per-atom spontaneous emission and repump sandwiches.
        for j in 0..n {
            let bit = 1usize << j;
            for r in 0..dim {
                let br = r / mm;
                for c in 0..dim {
                    let bc = c / mm;
                    if p.gamma != 0.0 && (br & bit != 0) && (bc & bit != 0) {
                        out[(r - bit * mm) * dim + (c - bit * mm)] += p.gamma * rho[r * dim + c];
                    }
                    if p.repump != 0.0 && (br & bit == 0) && (bc & bit == 0) {
                        out[(r + bit * mm) * dim + (c + bit * mm)] += p.repump * rho[r * dim + c];
                    }
                }
            }
        }
    }

    pub fn step(&mut self, dt: f64) {
        let dim2 = self.dim * self.dim;
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
        self.rhs(&self.rho, k1);
        for i in 0..dim2 {
            tmp[i] = self.rho[i] + 0.5 * dt * k1[i];
        }
        self.rhs(tmp, k2);
        for i in 0..dim2 {
            tmp[i] = self.rho[i] + 0.5 * dt * k2[i];
        }
        self.rhs(tmp, k3);
        for i in 0..dim2 {
            tmp[i] = self.rho[i] + dt * k3[i];
        }
        self.rhs(tmp, k4);
        for i in 0..dim2 {
            self.rho[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        self.t += dt;
        self.scratch = scratch;
    }

    pub fn evolve(&mut self, duration: f64, dt: f64) {
        assert!(duration >= 0.0 && dt > 0.0);
        if duration == 0.0 {
            return;
        }
        let steps = (duration / dt).ceil().max(1.0) as usize;
        let h = duration / steps as f64;
        for _ in 0..steps {
            self.step(h);
        }
    }

    /// Step bound for the explicit scheme, matching the reduced solver's.
    pub fn suggest_dt(&self) -> f64 {
        crate::su4::det::suggest_dt(&self.params, self.m_cutoff)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.rho[i * self.dim + i].re).sum()
    }

    pub fn photons(&self) -> f64 {
        let mm = self.m_cutoff;
        let acc: f64 = (0..self.dim)
            .map(|i| (i % mm) as f64 * self.rho[i * self.dim + i].re)
            .sum();
        acc / self.trace()
    }

    pub fn photons2(&self) -> f64 {
        let mm = self.m_cutoff;
        let acc: f64 = (0..self.dim)
            .map(|i| {
                let m = i % mm;
                (m * m.saturating_sub(1)) as f64 * self.rho[i * self.dim + i].re
            })
            .sum();
        acc / self.trace()
    }

    pub fn sz(&self) -> f64 {
        let mm = self.m_cutoff;
        let nf = self.n_atoms as f64;
        let acc: f64 = (0..self.dim)
            .map(|i| {
                (2.0 * popcount(i / mm) as f64 - nf) / nf * self.rho[i * self.dim + i].re
            })
            .sum();
        acc / self.trace()
    }

    /// Pair correlation <sigma1+ sigma2->, averaged over ordered atom
    /// pairs; permutation symmetry of the evolved state makes every pair
    /// equal, and the average stays correct for cross-checks on states
    /// built without that symmetry.
    pub fn pair(&self) -> f64 {
        let n = self.n_atoms;
        if n < 2 {
            return 0.0;
        }
        let mm = self.m_cutoff;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                if j == k {
                    continue;
                }
                let (bj, bk) = (1usize << j, 1usize << k);
                for bits in 0..(1usize << n) {
                    if bits & bk != 0 && bits & bj == 0 {
                        let flipped = bits ^ bj ^ bk;
                        for m in 0..mm {
                            acc += self.rho[(bits * mm + m) * self.dim + (flipped * mm + m)];
                        }
                    }
                }
            }
        }
        (acc / (n * (n - 1)) as f64 / self.trace()).re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                worst = worst
                    .max((self.rho[r * self.dim + c] - self.rho[c * self.dim + r].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the (Hermitized) density matrix: a physical
    /// state never goes below zero beyond roundoff and truncation.
    pub fn min_eigenvalue(&self) -> f64 {
        let vals = crate::linalg::herm_eigenvalues(&self.rho, self.dim);
        vals.into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Quantum-regression two-time correlation, C(tau) = Tr[a-dagger
    /// exp(L tau)(a rho)], on a grid of about n_points values up to
    /// tau_max.
    pub fn field_correlation(
        &self,
        tau_max: f64,
        dt: f64,
        n_points: usize,
    ) -> Vec<(f64, Complex64)> {
        let dim = self.dim;
        let mm = self.m_cutoff;
        let mut phi = DenseState {
            n_atoms: self.n_atoms,
            m_cutoff: mm,
            dim,
            rho: vec![Complex64::new(0.0, 0.0); dim * dim],
            t: 0.0,
            params: self.params,
            neighbors: self.neighbors.clone(),
            diag: self.diag.clone(),
            scratch: self.scratch.clone(),
        };
        for bits in 0..(1usize << self.n_atoms) {
            for m in 0..mm - 1 {
                for c in 0..dim {
                    phi.rho[(bits * mm + m) * dim + c] =
                        ((m + 1) as f64).sqrt() * self.rho[(bits * mm + m + 1) * dim + c];
                }
            }
        }
        let read_c = |s: &DenseState| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for bits in 0..(1usize << s.n_atoms) {
                for m in 1..mm {
                    acc += (m as f64).sqrt() * s.rho[(bits * mm + m - 1) * dim + (bits * mm + m)];
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

/// Expand symmetric-basis coefficients into a dense density matrix by
/// summing every letter-to-atom assignment: the bridge that lets the
/// reduced representation be compared against this one element by element.
pub fn dense_from_counts(
    p: &SystemParams,
    basis: &SpinBasis,
    m_cutoff: usize,
    amps: &[Complex64],
) -> Result<DenseState, BruteforceError> {
    let n = p.n_atoms;
    assert_eq!(basis.n_atoms, n);
    assert_eq!(amps.len(), basis.len() * m_cutoff * m_cutoff);
    let mut out = DenseState::new_ground(p, m_cutoff)?;
    out.rho.fill(Complex64::new(0.0, 0.0));
    let mm = m_cutoff;
    // Letters encoded in 2 bits per atom: bit 0 = ket excited, bit 1 =
    // bra excited.
    for code in 0..(1usize << (2 * n)) {
        let mut counts = [0u8; 4];
        let mut ket = 0usize;
        let mut bra = 0usize;
        for j in 0..n {
            let l = (code >> (2 * j)) & 3;
            match l {
                0 => counts[1] += 1, // gg
                1 => {
                    counts[2] += 1; // eg
                    ket |= 1 << j;
                }
                2 => {
                    counts[3] += 1; // ge
                    bra |= 1 << j;
                }
                _ => {
                    counts[0] += 1; // ee
                    ket |= 1 << j;
                    bra |= 1 << j;
                }
            }
        }
        let b = basis.index_of(crate::su4::Counts {
            ee: counts[0],
            gg: counts[1],
            eg: counts[2],
            ge: counts[3],
        });
        for m in 0..mm {
            for nn in 0..mm {
                let v = amps[(b * mm + m) * mm + nn];
                if v != Complex64::new(0.0, 0.0) {
                    out.rho[(ket * mm + m) * out.dim + (bra * mm + nn)] += v;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ground_state_observables() {
        let p = SystemParams::resonant(2, 1.0, 4.0, 2.0);
        let s = DenseState::new_ground(&p, 3).unwrap();
        assert_relative_eq!(s.trace(), 1.0);
        assert_relative_eq!(s.photons(), 0.0);
        assert_relative_eq!(s.sz(), -1.0);
        assert_relative_eq!(s.pair(), 0.0);
    }

    #[test]
    fn dimension_guard() {
        let p = SystemParams::resonant(8, 1.0, 4.0, 2.0);
        assert!(matches!(
            DenseState::new_ground(&p, 2),
            Err(BruteforceError::DimTooLarge { dim: 512 })
        ));
    }

    #[test]
    fn trace_hermiticity_positivity_under_drive() {
        let p = SystemParams::resonant(2, 2.0, 4.0, 3.0);
        let mut s = DenseState::new_ground(&p, 6).unwrap();
        let dt = s.suggest_dt();
        s.evolve(2.0, dt);
        assert!((s.trace() - 1.0).abs() < 1e-9);
        assert!(s.hermiticity_defect() < 1e-10);
        assert!(s.min_eigenvalue() > -1e-10);
        assert!(s.photons() > 0.0);
    }

    #[test]
    fn repump_only_relaxation_is_analytic() {
        let mut p = SystemParams::resonant(3, 1.0, 4.0, 2.0);
        p.omega = 0.0;
        let mut s = DenseState::new_ground(&p, 2).unwrap();
        s.evolve(1.0, 0.002);
        let d0 = p.d0();
        let expect = d0 + (-1.0 - d0) * (-3.0f64).exp();
        assert_relative_eq!(s.sz(), expect, epsilon = 1e-7);
    }

    #[test]
    fn cavity_decay_is_analytic() {
        let mut p = SystemParams::resonant(1, 1.0, 2.0, 2.0);
        p.omega = 0.0;
        p.repump = 0.0;
        p.gamma = 0.0;
        let mut s = DenseState::new_ground(&p, 5).unwrap();
        s.rho.fill(Complex64::new(0.0, 0.0));
        let i = s.idx(0, 2);
        let d = s.dim;
        s.rho[i * d + i] = Complex64::new(1.0, 0.0);
        s.evolve(0.7, 0.002);
        assert_relative_eq!(s.photons(), 2.0 * (-2.0 * 0.7f64).exp(), epsilon = 1e-7);
    }

    #[test]
    fn atomic_coherence_decays_with_total_dephasing() {
        // (|g> + |e>)/sqrt(2) with vacuum: the coherence rotates at delta
        // and decays at Gamma/2 = (w + gamma)/2 + 1/T2.
        let mut p = SystemParams::resonant(1, 1.0, 2.0, 0.5);
        p.omega = 0.0;
        p.t2_inv = 0.75;
        p.omega_a = 2.0;
        let mut s = DenseState::new_ground(&p, 2).unwrap();
        s.rho.fill(Complex64::new(0.0, 0.0));
        let d = s.dim;
        let (g0, e0) = (s.idx(0, 0), s.idx(1, 0));
        s.rho[g0 * d + g0] = Complex64::new(0.5, 0.0);
        s.rho[e0 * d + e0] = Complex64::new(0.5, 0.0);
        s.rho[e0 * d + g0] = Complex64::new(0.5, 0.0);
        s.rho[g0 * d + e0] = Complex64::new(0.5, 0.0);
        s.evolve(0.4, 0.001);
        let half_gamma_tot = 0.5 * (0.5 + 1.0) + 0.75;
        let expect = 0.5 * Complex64::from_polar((-half_gamma_tot * 0.4f64).exp(), -2.0 * 0.4);
        let got = s.rho[e0 * d + g0];
        assert!((got - expect).norm() < 1e-8, "got {got}, expect {expect}");
    }

    #[test]
    fn free_cavity_correlation_decays_at_half_kappa() {
        let mut p = SystemParams::resonant(1, 1.0, 2.0, 2.0);
        p.omega = 0.0;
        p.repump = 0.0;
        p.gamma = 0.0;
        let mut s = DenseState::new_ground(&p, 4).unwrap();
        s.rho.fill(Complex64::new(0.0, 0.0));
        let d = s.dim;
        let (v0, v1) = (s.idx(0, 0), s.idx(0, 1));
        s.rho[v0 * d + v0] = Complex64::new(0.6, 0.0);
        s.rho[v1 * d + v1] = Complex64::new(0.4, 0.0);
        for (tau, c) in s.field_correlation(1.0, 0.001, 20) {
            let expect = 0.4 * (-tau).exp();
            assert!((c.re - expect).abs() < 1e-8);
            assert!(c.im.abs() < 1e-12);
        }
    }

    #[test]
    fn counts_expansion_reproduces_ground() {
        let p = SystemParams::resonant(3, 1.0, 4.0, 2.0);
        let basis = SpinBasis::new(3);
        let mm = 2;
        let mut amps = vec![Complex64::new(0.0, 0.0); basis.len() * mm * mm];
        let ground = basis.index_of(crate::su4::Counts {
            ee: 0,
            gg: 3,
            eg: 0,
            ge: 0,
        });
        amps[(ground * mm) * mm] = Complex64::new(1.0, 0.0);
        let dense = dense_from_counts(&p, &basis, mm, &amps).unwrap();
        let reference = DenseState::new_ground(&p, mm).unwrap();
        let diff: f64 = dense
            .rho
            .iter()
            .zip(&reference.rho)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert_eq!(diff, 0.0);
    }
}
