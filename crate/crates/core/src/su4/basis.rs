//! Enumeration of symmetrized letter-count basis elements.

/// Letter counts of one basis element. The four letters are the
/// single-atom matrix units; counts always sum to the atom number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Counts {
    pub ee: u8,
    pub gg: u8,
    pub eg: u8,
    pub ge: u8,
}

impl Counts {
    pub fn sum(&self) -> usize {
        self.ee as usize + self.gg as usize + self.eg as usize + self.ge as usize
    }

    /// Only elements without coherence letters carry trace.
    pub fn is_traceful(&self) -> bool {
        self.eg == 0 && self.ge == 0
    }

    /// Counts of the Hermitian-conjugate element.
    pub fn dagger(&self) -> Counts {
        Counts {
            ee: self.ee,
            gg: self.gg,
            eg: self.ge,
            ge: self.eg,
        }
    }
}

/// Exact binomial coefficient as f64; n stays small enough (<= 64) that
/// the products are exact or near-exact in double precision.
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// All letter-count tuples for a fixed atom number, in lexicographic order
/// of (n_ee, n_gg, n_eg); n_ge is the remainder. Index lookups are closed
/// form, no table search.
pub struct SpinBasis {
    pub n_atoms: usize,
    elems: Vec<Counts>,
    /// Offset of the (n_ee = e) block in the enumeration.
    ee_offsets: Vec<usize>,
    /// trace weight (arrangement count) per element; zero off the
    /// trace-bearing slice.
    trace_w: Vec<f64>,
}

impl SpinBasis {
    pub fn new(n_atoms: usize) -> Self {
        assert!(n_atoms >= 1, "need at least one atom");
        assert!(n_atoms <= 255, "letter counts are stored as u8");
        let n = n_atoms;
        let mut elems = Vec::with_capacity((n + 1) * (n + 2) * (n + 3) / 6);
        let mut ee_offsets = Vec::with_capacity(n + 2);
        for e in 0..=n {
            ee_offsets.push(elems.len());
            for g in 0..=n - e {
                for x in 0..=n - e - g {
                    let y = n - e - g - x;
                    elems.push(Counts {
                        ee: e as u8,
                        gg: g as u8,
                        eg: x as u8,
                        ge: y as u8,
                    });
                }
            }
        }
        ee_offsets.push(elems.len());
        let trace_w = elems
            .iter()
            .map(|c| {
                if c.is_traceful() {
                    binom(n, c.ee as usize)
                } else {
                    0.0
                }
            })
            .collect();
        SpinBasis {
            n_atoms,
            elems,
            ee_offsets,
            trace_w,
        }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn counts(&self, i: usize) -> Counts {
        self.elems[i]
    }

    pub fn elements(&self) -> &[Counts] {
        &self.elems
    }

    /// Number of distinct atom arrangements of a trace-bearing element;
    /// zero for elements with coherence letters.
    pub fn trace_weight(&self, i: usize) -> f64 {
        self.trace_w[i]
    }

    /// Closed-form rank of a counts tuple in the enumeration order.
    pub fn index_of(&self, c: Counts) -> usize {
        debug_assert_eq!(c.sum(), self.n_atoms);
        let n = self.n_atoms;
        let e = c.ee as usize;
        let g = c.gg as usize;
        let x = c.eg as usize;
        // Within the e block, g' < g contributes (n - e - g' + 1) tuples.
        let inner = g * (n - e + 1) - g * g.saturating_sub(1) / 2 + x;
        self.ee_offsets[e] + inner
    }
}
