use std::fmt;
use std::ops::Range;

use crate::basis::MAX_MODES;

/// Inclusive 1-based mode range `[first, last]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexRange {
    pub first: usize,
    pub last: usize,
}

impl IndexRange {
    pub fn new(first: usize, last: usize) -> Option<Self> {
        (1 <= first && first <= last && last <= MAX_MODES).then_some(Self { first, last })
    }

    /// `[1, n]`
    pub fn upto(n: usize) -> Self {
        Self::new(1, n).expect("invalid mode count")
    }

    /// 0-based half-open equivalent.
    #[inline]
    pub fn span(&self) -> Range<usize> {
        self.first - 1..self.last
    }

    #[inline]
    pub fn contains0(&self, i: usize) -> bool {
        i + 1 >= self.first && i < self.last
    }

    pub fn len(&self) -> usize {
        self.last + 1 - self.first
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for IndexRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.first, self.last)
    }
}

/// Test-function range and trial-expansion range of one kernel invocation.
///
/// A linear term with coefficient index `i` is included when `i` lies in the
/// trial range; a product term with indices `(i, j)` when `max(i, j)` does.
/// Splitting the trial range therefore partitions every sum exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelRanges {
    pub test: IndexRange,
    pub trial: IndexRange,
}

impl KernelRanges {
    pub fn full(n: usize) -> Self {
        Self {
            test: IndexRange::upto(n),
            trial: IndexRange::upto(n),
        }
    }
}

/// Calls `f(i, j)` for all 0-based pairs with `i, j < hi` and `max(i, j) >= lo`.
#[inline]
pub(crate) fn for_pairs(trial: Range<usize>, mut f: impl FnMut(usize, usize)) {
    let (lo, hi) = (trial.start, trial.end);
    for i in 0..hi {
        let j0 = if i >= lo { 0 } else { lo };
        for j in j0..hi {
            f(i, j);
        }
    }
}
