//! Fixed-width bit sets over the canonical state order of one transition system.

use std::cmp::Ordering;
use std::fmt;

const WORD: usize = 64;

/// A set of state indices, sized to the state count of the owning transition system.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet {
    words: Vec<u64>,
    universe: usize,
}

impl StateSet {
    pub fn empty(universe: usize) -> Self {
        StateSet {
            words: vec![0; universe.div_ceil(WORD)],
            universe,
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for i in 0..universe {
            s.insert(i);
        }
        s
    }

    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(universe);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Builds a set from the low `universe` bits of `mask`.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        debug_assert!(universe <= WORD);
        let mut s = Self::empty(universe);
        if universe > 0 {
            s.words[0] = mask;
        }
        s
    }

    #[inline]
    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.universe && self.words[i / WORD] & (1u64 << (i % WORD)) != 0
    }

    #[inline]
    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.universe, "state index {i} out of range");
        let w = &mut self.words[i / WORD];
        let bit = 1u64 << (i % WORD);
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.universe {
            self.words[i / WORD] &= !(1u64 << (i % WORD));
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.universe
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &StateSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn union_with(&mut self, other: &StateSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &StateSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn complement(&self) -> StateSet {
        let mut s = StateSet::full(self.universe);
        for (a, b) in s.words.iter_mut().zip(&self.words) {
            *a &= !b;
        }
        s
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let tz = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(wi * WORD + tz)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Canonical order: by cardinality, then lexicographically by ascending member indices.
    pub fn canonical_cmp(&self, other: &StateSet) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
