//! Memoizing query session shared by all recursive calls of one test.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pattern::Pattern;
use crate::region::{BoxRegion, IndexSet};
use crate::search::{find_pattern, PointSet};
use crate::sequence::{Point, QueryAccess, SequenceOracle};

/// Wraps the oracle for one test: every index is charged at most once, and everything learned
/// so far is available to later steps.
pub struct Session<'a> {
    oracle: &'a mut SequenceOracle,
    known: Vec<Option<Option<f64>>>,
    known_points: Vec<Point>,
    start_count: u64,
    budget: Option<u64>,
    pattern: Pattern,
    pi_checked: usize,
    pub rng: ChaCha8Rng,
}

impl<'a> Session<'a> {
    pub fn new(
        oracle: &'a mut SequenceOracle,
        pattern: Pattern,
        budget: Option<u64>,
        rng: ChaCha8Rng,
    ) -> Self {
        let n = oracle.len();
        let start_count = oracle.query_count();
        Self {
            oracle,
            known: vec![None; n],
            known_points: Vec::new(),
            start_count,
            budget,
            pattern,
            pi_checked: 0,
            rng,
        }
    }

    /// Queries charged to this session so far.
    pub fn queries_used(&self) -> u64 {
        self.oracle.query_count() - self.start_count
    }

    /// Cached value of `index`, without querying: `None` if never queried.
    pub fn peek(&self, index: usize) -> Option<Option<f64>> {
        self.known[index]
    }

    pub fn is_known(&self, index: usize) -> bool {
        self.known[index].is_some()
    }

    pub fn fully_known(&self, s: &IndexSet) -> bool {
        s.iter().all(|i| self.known[i].is_some())
    }

    /// Queries every index of `s`.
    pub fn query_all(&mut self, s: &IndexSet) -> Result<()> {
        for i in s.iter() {
            self.query(i)?;
        }
        Ok(())
    }

    /// Known nonerased points inside `b`, in increasing index order.
    pub fn known_points_in(&self, b: &BoxRegion) -> Vec<Point> {
        b.index_set
            .iter()
            .filter_map(|i| match self.known[i] {
                Some(Some(v)) if b.value_set.contains(v) => Some(Point::new(i, v)),
                _ => None,
            })
            .collect()
    }

    /// Searches all known points for the top-level pattern, skipping the search when nothing
    /// was learned since the last unsuccessful one.
    pub fn find_pi_among_known(&mut self) -> Option<Vec<Point>> {
        if self.known_points.len() == self.pi_checked {
            return None;
        }
        let set = PointSet::new(self.known_points.clone());
        let found = find_pattern(&set, &self.pattern);
        if found.is_none() {
            self.pi_checked = self.known_points.len();
        }
        found
    }
}

impl QueryAccess for Session<'_> {
    fn len(&self) -> usize {
        self.known.len()
    }

    fn query(&mut self, index: usize) -> Result<Option<f64>> {
        if let Some(v) = self.known.get(index).copied().flatten() {
            return Ok(v);
        }
        if let Some(budget) = self.budget {
            if self.queries_used() >= budget {
                return Err(Error::BudgetExceeded { budget });
            }
        }
        let v = self.oracle.value_at(index)?;
        self.known[index] = Some(v);
        if let Some(value) = v {
            self.known_points.push(Point::new(index, value));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn charges_each_index_once_and_enforces_budget() {
        let mut oracle = SequenceOracle::from_entries(vec![Some(2.0), None, Some(1.0)]).unwrap();
        let pi: Pattern = "2,1".parse().unwrap();
        let mut s = Session::new(&mut oracle, pi, Some(2), ChaCha8Rng::seed_from_u64(0));
        assert_eq!(s.query(0).unwrap(), Some(2.0));
        assert_eq!(s.query(0).unwrap(), Some(2.0));
        assert_eq!(s.query(1).unwrap(), None);
        assert_eq!(s.queries_used(), 2);
        assert_eq!(s.query(2), Err(Error::BudgetExceeded { budget: 2 }));
        assert!(s.find_pi_among_known().is_none());
        assert!(s.fully_known(&IndexSet::range(0, 2)));
    }

    #[test]
    fn finds_pattern_once_points_are_known() {
        let mut oracle = SequenceOracle::new(vec![3.0, 1.0, 2.0]).unwrap();
        let pi: Pattern = "2,1".parse().unwrap();
        let mut s = Session::new(&mut oracle, pi, None, ChaCha8Rng::seed_from_u64(0));
        s.query(1).unwrap();
        assert!(s.find_pi_among_known().is_none());
        s.query(0).unwrap();
        let w = s.find_pi_among_known().unwrap();
        assert_eq!(w, vec![Point::new(0, 3.0), Point::new(1, 1.0)]);
        let b = BoxRegion::new(IndexSet::range(0, 3), crate::region::ValueSet::interval(1.5, 5.0));
        assert_eq!(s.known_points_in(&b), vec![Point::new(0, 3.0)]);
    }
}
