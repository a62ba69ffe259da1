//! Exact pattern search over known point sets.
//!
//! The tester needs exact answers on the points it has already queried: "do the known points
//! contain `pi`?" and "is there a `phi`-legged `nu`-appearance whose legs lie in given boxes?".
//! Both reduce to backtracking over legs, where each leg's candidates are found by a
//! rectangle query (index range times open value range) on a merge-sort tree.

use crate::pattern::Pattern;
use crate::sequence::Point;

/// Points sorted by index, with a merge-sort tree over values for rectangle queries.
///
/// Several points may share an index coordinate (grid cells sharing a stripe, for example);
/// index constraints are always strict, so such points never appear together in a match.
#[derive(Debug, Clone, Default)]
pub struct PointSet {
    points: Vec<Point>,
    size: usize,
    tree: Vec<Vec<(f64, u32)>>,
}

/// Strict bounds on a leg: `index in (idx_lo, idx_hi)` and `value in (val_lo, val_hi)`.
#[derive(Debug, Clone, Copy)]
struct Rect {
    idx_lo: Option<usize>,
    idx_hi: Option<usize>,
    val_lo: f64,
    val_hi: f64,
}

impl PointSet {
    pub fn new(mut points: Vec<Point>) -> Self {
        points.sort_by(|a, b| a.index.cmp(&b.index).then(a.value.total_cmp(&b.value)));
        let n = points.len();
        let size = n.next_power_of_two().max(1);
        let mut tree = vec![Vec::new(); 2 * size];
        for (pos, p) in points.iter().enumerate() {
            tree[size + pos] = vec![(p.value, pos as u32)];
        }
        for node in (1..size).rev() {
            let (l, r) = (&tree[2 * node], &tree[2 * node + 1]);
            let mut merged = Vec::with_capacity(l.len() + r.len());
            let (mut i, mut j) = (0, 0);
            while i < l.len() && j < r.len() {
                if l[i].0 <= r[j].0 {
                    merged.push(l[i]);
                    i += 1;
                } else {
                    merged.push(r[j]);
                    j += 1;
                }
            }
            merged.extend_from_slice(&l[i..]);
            merged.extend_from_slice(&r[j..]);
            tree[node] = merged;
        }
        Self { points, size, tree }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    fn position_range(&self, rect: &Rect) -> (usize, usize) {
        let l = match rect.idx_lo {
            Some(a) => self.points.partition_point(|p| p.index <= a),
            None => 0,
        };
        let r = match rect.idx_hi {
            Some(b) => self.points.partition_point(|p| p.index < b),
            None => self.points.len(),
        };
        (l, r.max(l))
    }

    /// Canonical tree nodes covering positions `[l, r)`.
    fn cover(&self, l: usize, r: usize, out: &mut Vec<usize>) {
        out.clear();
        let (mut l, mut r) = (l + self.size, r + self.size);
        while l < r {
            if l & 1 == 1 {
                out.push(l);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                out.push(r);
            }
            l >>= 1;
            r >>= 1;
        }
    }

    fn exists(&self, rect: &Rect, scratch: &mut Vec<usize>) -> bool {
        if rect.val_lo >= rect.val_hi {
            return false;
        }
        let (l, r) = self.position_range(rect);
        if l >= r {
            return false;
        }
        self.cover(l, r, scratch);
        scratch.iter().any(|&node| {
            let vals = &self.tree[node];
            let k = vals.partition_point(|&(v, _)| v <= rect.val_lo);
            k < vals.len() && vals[k].0 < rect.val_hi
        })
    }

    fn candidates(&self, rect: &Rect, scratch: &mut Vec<usize>, out: &mut Vec<u32>) {
        out.clear();
        if rect.val_lo >= rect.val_hi {
            return;
        }
        let (l, r) = self.position_range(rect);
        if l >= r {
            return;
        }
        if r - l <= 32 {
            out.extend(
                (l..r)
                    .filter(|&p| {
                        let v = self.points[p].value;
                        rect.val_lo < v && v < rect.val_hi
                    })
                    .map(|p| p as u32),
            );
            return;
        }
        self.cover(l, r, scratch);
        for &node in scratch.iter() {
            let vals = &self.tree[node];
            let k = vals.partition_point(|&(v, _)| v <= rect.val_lo);
            out.extend(vals[k..].iter().take_while(|&&(v, _)| v < rect.val_hi).map(|&(_, p)| p));
        }
        out.sort_unstable();
    }
}

/// Finds a strict `pattern`-appearance among `points`, if one exists.
pub fn find_pattern(points: &PointSet, pattern: &Pattern) -> Option<Vec<Point>> {
    let sets = vec![points; pattern.len()];
    find_legged(&sets, pattern)
}

/// Finds a strict `pattern`-appearance whose leg `i` is drawn from `sets[i]`.
pub fn find_legged(sets: &[&PointSet], pattern: &Pattern) -> Option<Vec<Point>> {
    let k = pattern.len();
    assert_eq!(sets.len(), k, "one candidate set per leg");
    if sets.iter().any(|s| s.is_empty()) {
        return None;
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&leg| (std::cmp::Reverse(pattern.inversions_at(leg)), leg));
    let mut search = Backtrack {
        sets,
        pattern: pattern.values(),
        order,
        assigned: vec![None; k],
        scratch: Vec::new(),
    };
    if search.rec(0) {
        Some(search.assigned.iter().map(|p| p.expect("all legs assigned")).collect())
    } else {
        None
    }
}

struct Backtrack<'a> {
    sets: &'a [&'a PointSet],
    pattern: &'a [u8],
    order: Vec<usize>,
    assigned: Vec<Option<Point>>,
    scratch: Vec<usize>,
}

impl Backtrack<'_> {
    fn rect(&self, leg: usize) -> Rect {
        let mut rect = Rect {
            idx_lo: None,
            idx_hi: None,
            val_lo: f64::NEG_INFINITY,
            val_hi: f64::INFINITY,
        };
        for (other, p) in self.assigned.iter().enumerate() {
            let Some(p) = p else { continue };
            if other < leg {
                rect.idx_lo = Some(rect.idx_lo.map_or(p.index, |a| a.max(p.index)));
            } else {
                rect.idx_hi = Some(rect.idx_hi.map_or(p.index, |b| b.min(p.index)));
            }
            if self.pattern[other] < self.pattern[leg] {
                rect.val_lo = rect.val_lo.max(p.value);
            } else {
                rect.val_hi = rect.val_hi.min(p.value);
            }
        }
        rect
    }

    fn others_feasible(&mut self) -> bool {
        for leg in 0..self.assigned.len() {
            if self.assigned[leg].is_none() {
                let rect = self.rect(leg);
                if !self.sets[leg].exists(&rect, &mut self.scratch) {
                    return false;
                }
            }
        }
        true
    }

    fn rec(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let leg = self.order[depth];
        let rect = self.rect(leg);
        let mut cands = Vec::new();
        self.sets[leg].candidates(&rect, &mut self.scratch, &mut cands);
        for pos in cands {
            self.assigned[leg] = Some(self.sets[leg].points[pos as usize]);
            if self.others_feasible() && self.rec(depth + 1) {
                return true;
            }
        }
        self.assigned[leg] = None;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(values: &[f64]) -> PointSet {
        PointSet::new(values.iter().enumerate().map(|(i, &v)| Point::new(i, v)).collect())
    }

    fn p(s: &str) -> Pattern {
        s.parse().unwrap()
    }

    fn check(found: &[Point], pattern: &Pattern) {
        assert!(found.windows(2).all(|w| w[0].index < w[1].index));
        let values: Vec<f64> = found.iter().map(|q| q.value).collect();
        assert!(pattern.matches(&values, crate::pattern::Semantics::Strict));
    }

    #[test]
    fn finds_and_rejects_small_cases() {
        assert!(find_pattern(&pts(&[1.0, 2.0, 3.0, 4.0]), &p("2,1")).is_none());
        let w = find_pattern(&pts(&[3.0, 2.0, 1.0, 4.0]), &p("3,2,1,4")).unwrap();
        check(&w, &p("3,2,1,4"));
        let w = find_pattern(&pts(&[2.0, 4.0, 1.0, 3.0]), &p("1,3,2")).unwrap();
        check(&w, &p("1,3,2"));
        assert!(find_pattern(&pts(&[]), &p("1")).is_none());
        assert!(find_pattern(&pts(&[5.0, 5.0, 5.0]), &p("1,2")).is_none());
    }

    #[test]
    fn increasing_large_input_is_free_of_descents() {
        let values: Vec<f64> = (0..5000).map(f64::from).collect();
        let set = pts(&values);
        for pi in Pattern::all_of_length(4) {
            let found = find_pattern(&set, &pi);
            assert_eq!(found.is_some(), pi.is_identity(), "{pi}");
        }
    }

    #[test]
    fn legged_search_respects_candidate_sets() {
        let left = PointSet::new(vec![Point::new(0, 5.0), Point::new(1, 1.0)]);
        let right = PointSet::new(vec![Point::new(3, 2.0)]);
        let w = find_legged(&[&left, &right], &p("2,1")).unwrap();
        assert_eq!(w, vec![Point::new(0, 5.0), Point::new(3, 2.0)]);
        assert!(find_legged(&[&right, &left], &p("2,1")).is_none());
    }

    #[test]
    fn shared_index_coordinates_are_never_combined() {
        let set = PointSet::new(vec![Point::new(0, 2.0), Point::new(0, 1.0)]);
        assert!(find_pattern(&set, &p("2,1")).is_none());
        assert!(find_pattern(&set, &p("1,2")).is_none());
    }

    #[test]
    fn large_candidate_ranges_use_tree_nodes() {
        let mut values: Vec<f64> = (0..200).map(f64::from).collect();
        values.push(-1.0);
        let w = find_pattern(&pts(&values), &p("3,1,2")).is_none();
        assert!(w);
        let w = find_pattern(&pts(&values), &p("2,3,1")).unwrap();
        check(&w, &p("2,3,1"));
    }
}
