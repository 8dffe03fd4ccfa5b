//! Bitmask representation of queue-index subsets.
//!
//! Indices are 0-based internally; up to 64 queues are supported, far
//! beyond what the exhaustive operations allow anyway.

use std::fmt;

/// A subset of `{0, .., n-1}` stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Subset(pub u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    /// The full set `{0, .., n-1}`.
    pub fn full(n: usize) -> Subset {
        debug_assert!(n <= 64);
        if n == 64 {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Subset {
        Subset(1u64 << i)
    }

    pub fn from_indices(indices: &[usize]) -> Subset {
        indices.iter().fold(Subset::EMPTY, |s, &i| s.insert(i))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn insert(self, i: usize) -> Subset {
        Subset(self.0 | 1 << i)
    }

    pub fn remove(self, i: usize) -> Subset {
        Subset(self.0 & !(1 << i))
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn intersection(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub fn difference(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Iterate over the member indices in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }
}

/// All subsets of `{0, .., n-1}` in increasing-cardinality order
/// (ties broken by mask value). This is the recursion order used by the
/// subset solvers: every strict subset of a mask precedes it.
pub fn subsets_by_cardinality(n: usize) -> impl Iterator<Item = Subset> {
    assert!(n <= 24, "subset enumeration capped at 24 indices");
    (0..=n).flat_map(move |k| subsets_of_size(n, k))
}

/// All k-subsets of `{0, .., n-1}` in increasing mask order (Gosper's hack).
pub fn subsets_of_size(n: usize, k: usize) -> impl Iterator<Item = Subset> {
    let limit = if n == 64 { u64::MAX } else { 1u64 << n };
    let mut cur = if k == 0 { Some(0u64) } else { Some((1u64 << k) - 1) };
    std::iter::from_fn(move || {
        let mask = cur?;
        if k > n || (k > 0 && mask >= limit) {
            return None;
        }
        // next k-combination
        cur = if mask == 0 {
            None
        } else {
            let lo = mask & mask.wrapping_neg();
            let carry = mask + lo;
            if carry == 0 {
                None
            } else {
                Some(carry | (((mask ^ carry) / lo) >> 2))
            }
        };
        Some(Subset(mask))
    })
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Subset {
    /// Members printed 1-based, matching the usual queue numbering.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (pos, i) in self.iter().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}
