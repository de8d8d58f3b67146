//! Fixed-particle-number bosonic Fock basis on the two-leg ladder.
//!
//! Sites use a linear embedding with leg A first: rung `r` of leg A is linear
//! site `r`, rung `r` of leg B is linear site `L + r` (all indices 0-based).
//! Every anyonic string phase in the crate is defined against this ordering.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// One of the two ladder legs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Leg {
    A,
    B,
}

impl Leg {
    pub const BOTH: [Leg; 2] = [Leg::A, Leg::B];

    /// Sign of the leg in the staggered potential and non-reciprocity (`+1` for A).
    pub fn sign(self) -> f64 {
        match self {
            Leg::A => 1.0,
            Leg::B => -1.0,
        }
    }
}

impl fmt::Display for Leg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Leg::A => f.write_str("A"),
            Leg::B => f.write_str("B"),
        }
    }
}

/// A ladder site addressed by `(rung, leg)`, rung 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SiteIndex {
    pub rung: usize,
    pub leg: Leg,
}

impl SiteIndex {
    pub fn new(rung: usize, leg: Leg) -> Self {
        Self { rung, leg }
    }

    /// Position in the A-first linear embedding of a ladder with `l` rungs.
    pub fn linear(self, l: usize) -> usize {
        debug_assert!(self.rung < l);
        match self.leg {
            Leg::A => self.rung,
            Leg::B => l + self.rung,
        }
    }

    /// Inverse of [`SiteIndex::linear`].
    pub fn from_linear(linear: usize, l: usize) -> Self {
        debug_assert!(linear < 2 * l);
        if linear < l {
            Self::new(linear, Leg::A)
        } else {
            Self::new(linear - l, Leg::B)
        }
    }
}

/// Occupation numbers of all `2L` linear sites.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationState(Vec<u8>);

impl OccupationState {
    pub fn new(occ: Vec<u8>) -> Self {
        Self(occ)
    }

    pub fn occupations(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, site: usize) -> u8 {
        self.0[site]
    }

    pub fn particle_count(&self) -> usize {
        self.0.iter().map(|&n| n as usize).sum()
    }

    /// Number of particles on linear sites strictly below `site`.
    pub fn count_below(&self, site: usize) -> usize {
        self.0[..site].iter().map(|&n| n as usize).sum()
    }

    pub(crate) fn with_delta(&self, site: usize, delta: i8) -> Self {
        let mut occ = self.0.clone();
        occ[site] = (occ[site] as i16 + delta as i16) as u8;
        Self(occ)
    }

    pub(crate) fn set(&mut self, site: usize, value: u8) {
        self.0[site] = value;
    }
}

impl From<Vec<u8>> for OccupationState {
    fn from(occ: Vec<u8>) -> Self {
        Self(occ)
    }
}

impl fmt::Display for OccupationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        for n in &self.0 {
            write!(f, "{n}")?;
        }
        f.write_str(">")
    }
}

/// Particle counts `(N_A, N_B)` on the two legs of a state on `l` rungs.
pub fn leg_counts(s: &OccupationState, l: usize) -> (usize, usize) {
    let occ = s.occupations();
    let na = occ[..l].iter().map(|&n| n as usize).sum();
    let nb = occ[l..].iter().map(|&n| n as usize).sum();
    (na, nb)
}

/// Lexicographically ordered basis of all occupation vectors with a fixed
/// particle number and a per-site cap.
#[derive(Clone, Debug)]
pub struct BasisTable {
    rungs: usize,
    particles: usize,
    n_cap: u8,
    states: Vec<OccupationState>,
    lookup: HashMap<OccupationState, usize>,
}

impl BasisTable {
    /// Enumerates the sector of `particles` bosons on `2 * rungs` sites.
    ///
    /// The empty sector (`particles == 0`) is allowed and holds only the
    /// vacuum; it is needed as the target of single-particle annihilation.
    pub fn build(rungs: usize, particles: usize, n_cap: u8) -> Result<Self> {
        if rungs == 0 {
            return Err(Error::InvalidParameter("ladder needs at least one rung".into()));
        }
        if n_cap == 0 {
            return Err(Error::InvalidParameter("occupation cap must be at least 1".into()));
        }
        let sites = 2 * rungs;
        if (n_cap as usize) * sites < particles {
            return Err(Error::EmptyBasis { rungs, particles, n_cap });
        }
        let mut states = Vec::new();
        let mut occ = vec![0u8; sites];
        enumerate(&mut occ, 0, particles, n_cap, &mut states);
        let lookup = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Self { rungs, particles, n_cap, states, lookup })
    }

    pub fn rungs(&self) -> usize {
        self.rungs
    }

    pub fn sites(&self) -> usize {
        2 * self.rungs
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn n_cap(&self) -> u8 {
        self.n_cap
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[OccupationState] {
        &self.states
    }

    pub fn state(&self, index: usize) -> &OccupationState {
        &self.states[index]
    }

    /// Index of `s`, `None` if `s` is outside this sector (wrong particle
    /// number or an entry above the cap).
    pub fn index_of(&self, s: &OccupationState) -> Result<Option<usize>> {
        if s.len() != self.sites() {
            return Err(Error::DimensionMismatch { expected: self.sites(), found: s.len() });
        }
        Ok(self.lookup.get(s).copied())
    }

    /// Lookup for states already known to have the right length.
    pub(crate) fn find(&self, s: &OccupationState) -> Option<usize> {
        self.lookup.get(s).copied()
    }

    /// Returns `(N_A, N_B)` for basis state `index`.
    pub fn leg_counts(&self, index: usize) -> (usize, usize) {
        leg_counts(&self.states[index], self.rungs)
    }

    /// True when `other` lives on the same ladder with the same cap.
    pub fn is_compatible(&self, other: &BasisTable) -> bool {
        self.rungs == other.rungs && self.n_cap == other.n_cap
    }
}

// Emits states in ascending lexicographic order: small occupations on early
// sites come first, so the first state stacks everything on the last sites.
fn enumerate(occ: &mut [u8], site: usize, remaining: usize, cap: u8, out: &mut Vec<OccupationState>) {
    let sites = occ.len();
    if site + 1 == sites {
        if remaining <= cap as usize {
            occ[site] = remaining as u8;
            out.push(OccupationState::new(occ.to_vec()));
            occ[site] = 0;
        }
        return;
    }
    let room_after = (sites - site - 1) * cap as usize;
    let lo = remaining.saturating_sub(room_after);
    let hi = remaining.min(cap as usize);
    for n in lo..=hi {
        occ[site] = n as u8;
        enumerate(occ, site + 1, remaining - n, cap, out);
    }
    occ[site] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_dim(sites: usize, particles: usize, cap: usize) -> usize {
        let mut count = 0;
        let total = (cap + 1).pow(sites as u32);
        for code in 0..total {
            let mut c = code;
            let mut sum = 0;
            for _ in 0..sites {
                sum += c % (cap + 1);
                c /= cap + 1;
            }
            if sum == particles {
                count += 1;
            }
        }
        count
    }

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn small_dimensions() {
        assert_eq!(BasisTable::build(1, 1, 2).unwrap().dim(), 2);
        assert_eq!(BasisTable::build(10, 2, 2).unwrap().dim(), 210);
        assert_eq!(BasisTable::build(10, 3, 3).unwrap().dim(), 1540);
        assert_eq!(BasisTable::build(3, 0, 2).unwrap().dim(), 1);
    }

    #[test]
    fn dimension_matches_brute_force_and_closed_form() {
        for l in 1..=4 {
            for n in 1..=3 {
                let basis = BasisTable::build(l, n, n as u8).unwrap();
                assert_eq!(basis.dim(), brute_force_dim(2 * l, n, n));
                assert_eq!(basis.dim(), binomial(2 * l + n - 1, n));
            }
        }
        // a cap below N removes states
        let capped = BasisTable::build(3, 3, 1).unwrap();
        assert_eq!(capped.dim(), brute_force_dim(6, 3, 1));
        assert_eq!(capped.dim(), binomial(6, 3));
    }

    #[test]
    fn rejects_empty_sector() {
        assert!(matches!(BasisTable::build(1, 5, 2), Err(Error::EmptyBasis { .. })));
        assert!(BasisTable::build(0, 1, 1).is_err());
        assert!(BasisTable::build(2, 1, 0).is_err());
    }

    #[test]
    fn strictly_lexicographic_and_indexed() {
        let basis = BasisTable::build(3, 3, 3).unwrap();
        for w in basis.states().windows(2) {
            assert!(w[0] < w[1]);
        }
        for (k, s) in basis.states().iter().enumerate() {
            assert_eq!(basis.index_of(s).unwrap(), Some(k));
            assert_eq!(s.particle_count(), 3);
        }
        assert_eq!(basis.state(0).occupations(), &[0, 0, 0, 0, 0, 3]);
    }

    #[test]
    fn index_of_absent_and_mismatch() {
        let basis = BasisTable::build(2, 2, 2).unwrap();
        let too_many = OccupationState::new(vec![1, 1, 1, 0]);
        let too_few = OccupationState::new(vec![1, 0, 0, 0]);
        assert_eq!(basis.index_of(&too_many).unwrap(), None);
        assert_eq!(basis.index_of(&too_few).unwrap(), None);
        let wrong_len = OccupationState::new(vec![1, 1]);
        assert!(matches!(basis.index_of(&wrong_len), Err(Error::DimensionMismatch { .. })));
        let over_cap = BasisTable::build(2, 2, 1).unwrap();
        assert_eq!(over_cap.index_of(&OccupationState::new(vec![2, 0, 0, 0])).unwrap(), None);
    }

    #[test]
    fn leg_counts_examples() {
        let l = 3;
        assert_eq!(leg_counts(&OccupationState::new(vec![1, 0, 1, 0, 0, 0]), l), (2, 0));
        assert_eq!(leg_counts(&OccupationState::new(vec![1, 0, 0, 0, 1, 0]), l), (1, 1));
        assert_eq!(leg_counts(&OccupationState::new(vec![0, 0, 1, 2, 0, 0]), l), (1, 2));
    }

    #[test]
    fn linear_embedding_is_bijective() {
        let l = 5;
        let mut seen = vec![false; 2 * l];
        for leg in Leg::BOTH {
            for rung in 0..l {
                let site = SiteIndex::new(rung, leg);
                let lin = site.linear(l);
                assert!(!seen[lin]);
                seen[lin] = true;
                assert_eq!(SiteIndex::from_linear(lin, l), site);
            }
        }
        assert!(seen.into_iter().all(|b| b));
    }
}
