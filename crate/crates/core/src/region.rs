//! Index sets, value sets and boxes `bx(S, I)` in the grid view of a sequence.

use serde::{Deserialize, Serialize};

use crate::sequence::Point;

/// A set of indices stored as sorted, disjoint, non-adjacent closed-open intervals `[a, b)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "Vec<(usize, usize)>", into = "Vec<(usize, usize)>")]
pub struct IndexSet {
    intervals: Vec<(usize, usize)>,
}

impl IndexSet {
    /// Normalizes arbitrary intervals: drops empty ones, sorts, merges overlaps and adjacency.
    pub fn new(mut intervals: Vec<(usize, usize)>) -> Self {
        intervals.retain(|&(a, b)| a < b);
        intervals.sort_unstable();
        let mut merged: Vec<(usize, usize)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Self { intervals: merged }
    }

    /// The contiguous range `[start, end)`.
    pub fn range(start: usize, end: usize) -> Self {
        Self::new(vec![(start, end)])
    }

    pub fn intervals(&self) -> &[(usize, usize)] {
        &self.intervals
    }

    /// Total number of indices `|S|`.
    pub fn len(&self) -> usize {
        self.intervals.iter().map(|&(a, b)| b - a).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        let pos = self.intervals.partition_point(|&(_, b)| b <= index);
        self.intervals.get(pos).is_some_and(|&(a, _)| a <= index)
    }

    pub fn min(&self) -> Option<usize> {
        self.intervals.first().map(|&(a, _)| a)
    }

    pub fn max(&self) -> Option<usize> {
        self.intervals.last().map(|&(_, b)| b - 1)
    }

    /// The `rank`-th smallest index (0-based rank).
    pub fn nth(&self, mut rank: usize) -> Option<usize> {
        for &(a, b) in &self.intervals {
            if rank < b - a {
                return Some(a + rank);
            }
            rank -= b - a;
        }
        None
    }

    /// Number of members strictly below `index`.
    pub fn rank_of(&self, index: usize) -> usize {
        self.intervals
            .iter()
            .map(|&(a, b)| if index <= a { 0 } else { index.min(b) - a })
            .sum()
    }

    /// Members with rank in `[lo, hi)`.
    pub fn slice_by_rank(&self, lo: usize, hi: usize) -> IndexSet {
        let mut out = Vec::new();
        let mut offset = 0;
        for &(a, b) in &self.intervals {
            let len = b - a;
            let s = lo.max(offset);
            let e = hi.min(offset + len);
            if s < e {
                out.push((a + s - offset, a + e - offset));
            }
            offset += len;
        }
        IndexSet::new(out)
    }

    /// Splits into `parts` sets that are contiguous in rank order, with sizes differing by at most one.
    pub fn split_equal(&self, parts: usize) -> Vec<IndexSet> {
        let n = self.len();
        (0..parts)
            .map(|p| self.slice_by_rank(p * n / parts, (p + 1) * n / parts))
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.intervals.iter().flat_map(|&(a, b)| a..b)
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        IndexSet::new(all)
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.intervals.iter().all(|&(a, b)| {
            other.intervals.iter().any(|&(c, d)| c <= a && b <= d)
        })
    }

    /// Whether every member of `self` is smaller than every member of `other`.
    pub fn entirely_before(&self, other: &IndexSet) -> bool {
        match (self.max(), other.min()) {
            (Some(a), Some(b)) => a < b,
            _ => true,
        }
    }
}

impl From<Vec<(usize, usize)>> for IndexSet {
    fn from(v: Vec<(usize, usize)>) -> Self {
        IndexSet::new(v)
    }
}

impl From<IndexSet> for Vec<(usize, usize)> {
    fn from(s: IndexSet) -> Self {
        s.intervals
    }
}

/// A set of values stored as sorted, disjoint, non-touching half-open intervals `(lo, hi]`.
///
/// Infinite endpoints are allowed; they serialize as `null`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<(Option<f64>, Option<f64>)>", into = "Vec<(Option<f64>, Option<f64>)>")]
pub struct ValueSet {
    intervals: Vec<(f64, f64)>,
}

impl ValueSet {
    /// Normalizes arbitrary intervals: drops empty ones, sorts, merges overlapping or touching ones.
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Self {
        intervals.retain(|&(lo, hi)| lo < hi);
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (lo, hi) in intervals {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        Self { intervals: merged }
    }

    /// All real values.
    pub fn all() -> Self {
        Self { intervals: vec![(f64::NEG_INFINITY, f64::INFINITY)] }
    }

    /// The interval `(lo, hi]`.
    pub fn interval(lo: f64, hi: f64) -> Self {
        Self::new(vec![(lo, hi)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, v: f64) -> bool {
        let pos = self.intervals.partition_point(|&(_, hi)| hi < v);
        self.intervals.get(pos).is_some_and(|&(lo, _)| lo < v)
    }

    /// Infimum (the open lower end of the first interval).
    pub fn inf(&self) -> Option<f64> {
        self.intervals.first().map(|&(lo, _)| lo)
    }

    /// Supremum (the closed upper end of the last interval).
    pub fn sup(&self) -> Option<f64> {
        self.intervals.last().map(|&(_, hi)| hi)
    }

    pub fn intersect(&self, other: &ValueSet) -> ValueSet {
        let mut out = Vec::new();
        for &(a, b) in &self.intervals {
            for &(c, d) in &other.intervals {
                let lo = a.max(c);
                let hi = b.min(d);
                if lo < hi {
                    out.push((lo, hi));
                }
            }
        }
        ValueSet::new(out)
    }

    pub fn union(&self, other: &ValueSet) -> ValueSet {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        ValueSet::new(all)
    }

    pub fn is_subset(&self, other: &ValueSet) -> bool {
        self.intervals.iter().all(|&(a, b)| {
            other.intervals.iter().any(|&(c, d)| c <= a && b <= d)
        })
    }

    /// Whether every member of `self` is smaller than every member of `other`.
    pub fn entirely_below(&self, other: &ValueSet) -> bool {
        match (self.sup(), other.inf()) {
            (Some(a), Some(b)) => a <= b,
            _ => true,
        }
    }
}

fn finite_or_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl From<Vec<(Option<f64>, Option<f64>)>> for ValueSet {
    fn from(v: Vec<(Option<f64>, Option<f64>)>) -> Self {
        ValueSet::new(
            v.into_iter()
                .map(|(lo, hi)| (lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY)))
                .collect(),
        )
    }
}

impl From<ValueSet> for Vec<(Option<f64>, Option<f64>)> {
    fn from(s: ValueSet) -> Self {
        s.intervals.into_iter().map(|(lo, hi)| (finite_or_none(lo), finite_or_none(hi))).collect()
    }
}

/// The box `bx(S, I)`: indices in `S` whose values fall in `I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub index_set: IndexSet,
    pub value_set: ValueSet,
}

impl BoxRegion {
    pub fn new(index_set: IndexSet, value_set: ValueSet) -> Self {
        Self { index_set, value_set }
    }

    /// The whole grid of a length-`n` sequence.
    pub fn full(n: usize) -> Self {
        Self::new(IndexSet::range(0, n), ValueSet::all())
    }

    /// The number of indices `|S|`.
    pub fn len(&self) -> usize {
        self.index_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty() || self.value_set.is_empty()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.index_set.contains(p.index) && self.value_set.contains(p.value)
    }

    pub fn is_subset(&self, other: &BoxRegion) -> bool {
        self.index_set.is_subset(&other.index_set) && self.value_set.is_subset(&other.value_set)
    }
}
