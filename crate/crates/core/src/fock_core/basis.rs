use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on the dimension `(cap + 1)^slots` of a truncated basis.
pub const DEFAULT_MAX_DIM: usize = 20_000;

/// Environment variable that overrides [`DEFAULT_MAX_DIM`].
pub const MAX_DIM_ENV: &str = "TCCR_MAX_DIM";

/// Capacity limit in effect: the environment override if it parses, the default otherwise.
pub fn capacity_limit() -> usize {
    std::env::var(MAX_DIM_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_MAX_DIM)
}

/// Occupation numbers `(n_1, ..., n_m)` of a product basis vector `e_{n_1} ⊗ ... ⊗ e_{n_m}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        MultiIndex(entries)
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest occupation number, 0 for the empty index.
    pub fn max_entry(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, n) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// Per-slot truncated tensor-product basis, enumerated lexicographically
/// (slot 1 most significant), vacuum at index 0.
///
/// A basis with zero slots is the one-dimensional space spanned by the empty
/// multi-index; it carries the scalar representations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockBasis {
    slots: usize,
    cap: usize,
    dim: usize,
}

impl FockBasis {
    /// Basis with the capacity limit read from the environment.
    pub fn new(slots: usize, cap: usize) -> Result<Self> {
        Self::with_limit(slots, cap, capacity_limit())
    }

    pub fn with_limit(slots: usize, cap: usize, limit: usize) -> Result<Self> {
        if slots == 0 {
            return Err(Error::Parameter("a Fock basis needs at least one slot".into()));
        }
        if cap == 0 {
            return Err(Error::Parameter("the per-slot cap must be at least 1".into()));
        }
        let dim = (cap as u128 + 1).checked_pow(slots as u32).unwrap_or(u128::MAX);
        if dim > limit as u128 {
            return Err(Error::Capacity {
                dim,
                limit,
                slots,
                cap,
            });
        }
        Ok(FockBasis {
            slots,
            cap,
            dim: dim as usize,
        })
    }

    /// The zero-slot, one-dimensional basis. `cap` is kept so that degree
    /// bookkeeping stays uniform across representation classes.
    pub fn scalar(cap: usize) -> Self {
        FockBasis { slots: 0, cap, dim: 1 }
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index of the vacuum vector Ω.
    pub fn vacuum(&self) -> usize {
        0
    }

    /// Dimension of one slot, `cap + 1`.
    pub fn slot_dim(&self) -> usize {
        self.cap + 1
    }

    pub fn multi_index(&self, index: usize) -> MultiIndex {
        assert!(index < self.dim, "basis index {index} out of range");
        let base = self.slot_dim();
        let mut entries = vec![0; self.slots];
        let mut rest = index;
        for slot in (0..self.slots).rev() {
            entries[slot] = rest % base;
            rest /= base;
        }
        MultiIndex(entries)
    }

    pub fn index_of(&self, mi: &MultiIndex) -> Option<usize> {
        if mi.len() != self.slots || mi.entries().iter().any(|&n| n > self.cap) {
            return None;
        }
        let base = self.slot_dim();
        Some(mi.entries().iter().fold(0, |acc, &n| acc * base + n))
    }

    pub fn iter(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.dim).map(move |i| self.multi_index(i))
    }

    /// Indices of basis vectors whose occupation numbers are all `<= level`.
    pub fn core_indices(&self, level: usize) -> Vec<usize> {
        (0..self.dim)
            .filter(|&i| self.multi_index(i).max_entry() <= level)
            .collect()
    }
}

impl fmt::Display for FockBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FockBasis(slots={}, cap={}, dim={})", self.slots, self.cap, self.dim)
    }
}

/// Lexicographic enumeration of `{0..=cap}^slots`.
pub fn enumerate_basis(slots: usize, cap: usize) -> Result<FockBasis> {
    FockBasis::new(slots, cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entries(b: &FockBasis) -> Vec<Vec<usize>> {
        b.iter().map(|m| m.entries().to_vec()).collect()
    }

    #[test]
    fn two_slots_cap_one() {
        let b = enumerate_basis(2, 1).unwrap();
        assert_eq!(entries(&b), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn one_slot_cap_three() {
        let b = enumerate_basis(1, 3).unwrap();
        assert_eq!(entries(&b), vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn three_slots_cap_nine() {
        let b = enumerate_basis(3, 9).unwrap();
        assert_eq!(b.dim(), 1000);
        let all = entries(&b);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, all);
        assert_eq!(all[0], vec![0, 0, 0]);
    }

    #[test]
    fn capacity_error_names_dimension() {
        let err = FockBasis::with_limit(5, 9, 20_000).unwrap_err();
        match err {
            Error::Capacity { dim, .. } => assert_eq!(dim, 100_000),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err_string(5, 9).contains("100000"));
    }

    fn err_string(slots: usize, cap: usize) -> String {
        FockBasis::with_limit(slots, cap, 20_000).unwrap_err().to_string()
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(enumerate_basis(0, 3).is_err());
        assert!(enumerate_basis(2, 0).is_err());
        assert!(FockBasis::with_limit(64, 9, 20_000).is_err());
    }

    #[test]
    fn index_roundtrip_and_core() {
        let b = enumerate_basis(3, 4).unwrap();
        for i in 0..b.dim() {
            assert_eq!(b.index_of(&b.multi_index(i)), Some(i));
        }
        assert_eq!(b.core_indices(2).len(), 27);
        assert_eq!(b.core_indices(4).len(), b.dim());
        assert_eq!(b.index_of(&MultiIndex::new(vec![0, 5, 0])), None);
    }

    #[test]
    fn scalar_basis_is_one_dimensional() {
        let b = FockBasis::scalar(8);
        assert_eq!(b.dim(), 1);
        assert_eq!(b.multi_index(0), MultiIndex::new(vec![]));
        assert_eq!(b.core_indices(0), vec![0]);
    }
}
