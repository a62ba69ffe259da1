//! Exact brute-force reference algorithms for small inputs.
//!
//! These are the ground truth that the randomized tester is checked against: appearance
//! search, deletion and Hamming distances, greedy matchings, and the fill-in construction
//! showing that deleting a set of indices can always be replaced by rewriting them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pattern::{Pattern, Semantics};

/// Largest input accepted by appearance search, matching and generalized search.
pub const BRUTE_FORCE_CAP: usize = 64;
/// Largest input accepted by the exact deletion-distance search.
pub const DISTANCE_CAP: usize = 30;
/// Largest input accepted by the exhaustive Hamming repair search.
pub const HAMMING_CAP: usize = 8;

/// Exact distances of a sequence to pattern-freeness, with the sets that realize them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceReport {
    pub deletion_distance: usize,
    pub hamming_distance: usize,
    /// Indices whose removal leaves a pattern-free sequence (0-based, increasing).
    pub deletion_set: Vec<usize>,
    /// The input rewritten on `deletion_set` so that it is pattern-free.
    pub repaired_function: Vec<f64>,
}

fn check_cap(len: usize, cap: usize) -> Result<()> {
    if len > cap {
        Err(Error::CapExceeded { len, cap })
    } else {
        Ok(())
    }
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Lexicographically first appearance among positions in `alive`, as positions into `values`.
fn first_appearance(
    values: &[Option<f64>],
    alive: u64,
    pattern: &Pattern,
    semantics: Semantics,
) -> Option<Vec<usize>> {
    let k = pattern.len();
    let pv = pattern.values();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);

    fn consistent(a: f64, b: f64, pa: u8, pb: u8, semantics: Semantics) -> bool {
        match semantics {
            Semantics::Strict => (pa < pb) == (a < b) && (pb < pa) == (b < a),
            Semantics::Weak => {
                if pa < pb {
                    a <= b
                } else {
                    b <= a
                }
            }
        }
    }

    fn rec(
        values: &[Option<f64>],
        alive: u64,
        pv: &[u8],
        semantics: Semantics,
        start: usize,
        chosen: &mut Vec<usize>,
    ) -> bool {
        let t = chosen.len();
        if t == pv.len() {
            return true;
        }
        let remaining = pv.len() - t;
        for i in start..values.len() {
            if values.len() - i < remaining {
                break;
            }
            if alive >> i & 1 == 0 {
                continue;
            }
            let Some(v) = values[i] else { continue };
            let ok = chosen.iter().enumerate().all(|(s, &j)| {
                consistent(values[j].unwrap(), v, pv[s], pv[t], semantics)
            });
            if ok {
                chosen.push(i);
                if rec(values, alive, pv, semantics, i + 1, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    rec(values, alive, pv, semantics, 0, &mut chosen).then_some(chosen)
}

fn present(f: &[f64]) -> Vec<Option<f64>> {
    f.iter().copied().map(Some).collect()
}

/// Lexicographically first strict appearance of `pattern` in `f` (0-based indices).
pub fn find_appearance_bruteforce(f: &[f64], pattern: &Pattern) -> Result<Option<Vec<usize>>> {
    find_appearance_in(&present(f), pattern, Semantics::Strict)
}

/// Appearance search over a sequence with erased entries (`None`), which are skipped.
pub fn find_appearance_in(
    entries: &[Option<f64>],
    pattern: &Pattern,
    semantics: Semantics,
) -> Result<Option<Vec<usize>>> {
    check_cap(entries.len(), BRUTE_FORCE_CAP)?;
    Ok(first_appearance(entries, full_mask(entries.len()), pattern, semantics))
}

/// Appearance search under weak-inequality semantics.
pub fn find_generalized_appearance(f: &[f64], pattern: &Pattern) -> Result<Option<Vec<usize>>> {
    find_appearance_in(&present(f), pattern, Semantics::Weak)
}

/// Greedy maximal set of index-disjoint strict appearances.
pub fn greedy_matching(f: &[f64], pattern: &Pattern) -> Result<Vec<Vec<usize>>> {
    greedy_matching_with(f, pattern, Semantics::Strict)
}

pub fn greedy_matching_with(
    f: &[f64],
    pattern: &Pattern,
    semantics: Semantics,
) -> Result<Vec<Vec<usize>>> {
    check_cap(f.len(), BRUTE_FORCE_CAP)?;
    Ok(greedy_in_mask(&present(f), full_mask(f.len()), pattern, semantics))
}

fn greedy_in_mask(
    values: &[Option<f64>],
    mut alive: u64,
    pattern: &Pattern,
    semantics: Semantics,
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    while let Some(t) = first_appearance(values, alive, pattern, semantics) {
        for &i in &t {
            alive &= !(1u64 << i);
        }
        out.push(t);
    }
    out
}

/// Largest index subset whose induced subsequence is free of strict appearances.
///
/// Returns the subset size and its members; the deletion distance is `n - size`.
pub fn max_pattern_free_subsequence(f: &[f64], pattern: &Pattern) -> Result<(usize, Vec<usize>)> {
    max_pattern_free_subsequence_with(f, pattern, Semantics::Strict)
}

pub fn max_pattern_free_subsequence_with(
    f: &[f64],
    pattern: &Pattern,
    semantics: Semantics,
) -> Result<(usize, Vec<usize>)> {
    check_cap(f.len(), DISTANCE_CAP)?;
    let deleted = min_deletion_mask(&present(f), pattern, semantics);
    let kept: Vec<usize> = (0..f.len()).filter(|&i| deleted >> i & 1 == 0).collect();
    Ok((kept.len(), kept))
}

/// Branch and bound over hitting sets of appearances. Returns the deleted-position mask.
fn min_deletion_mask(values: &[Option<f64>], pattern: &Pattern, semantics: Semantics) -> u64 {
    struct Bb<'a> {
        values: &'a [Option<f64>],
        pattern: &'a Pattern,
        semantics: Semantics,
        best: (u32, u64),
    }

    impl Bb<'_> {
        fn rec(&mut self, alive: u64, keep: u64, deleted: u64) {
            let count = deleted.count_ones();
            if count >= self.best.0 {
                return;
            }
            let Some(t) = first_appearance(self.values, alive, self.pattern, self.semantics)
            else {
                self.best = (count, deleted);
                return;
            };
            let lower = greedy_in_mask(self.values, alive, self.pattern, self.semantics).len();
            if count + lower as u32 >= self.best.0 {
                return;
            }
            let mut keep = keep;
            for &i in &t {
                let bit = 1u64 << i;
                if keep & bit == 0 {
                    self.rec(alive & !bit, keep, deleted | bit);
                }
                keep |= bit;
            }
        }
    }

    let n = values.len();
    let all = full_mask(n);
    let mut bb = Bb { values, pattern, semantics, best: (n as u32 + 1, all) };
    bb.rec(all, 0, 0);
    bb.best.1
}

/// Rewrites the entries of `f` at `deletion_set` so that the result is pattern-free.
///
/// Each rewritten index takes the value of the largest surviving index below it, or of the
/// smallest surviving index when none lies below. When `f` restricted to the survivors is
/// pattern-free, so is the output. For inputs within [`BRUTE_FORCE_CAP`] the output is checked
/// and an error is returned if the survivors were not pattern-free to begin with.
pub fn fill_deletion_set(f: &[f64], deletion_set: &[usize], pattern: &Pattern) -> Result<Vec<f64>> {
    fill_deletion_set_with(f, deletion_set, pattern, Semantics::Strict)
}

pub fn fill_deletion_set_with(
    f: &[f64],
    deletion_set: &[usize],
    pattern: &Pattern,
    semantics: Semantics,
) -> Result<Vec<f64>> {
    let n = f.len();
    let mut deleted = vec![false; n];
    for &i in deletion_set {
        *deleted.get_mut(i).ok_or(Error::IndexOutOfRange { index: i, len: n })? = true;
    }
    let first_survivor = (0..n).find(|&i| !deleted[i]).ok_or(Error::NoSurvivingIndex)?;
    let out = match semantics {
        Semantics::Strict => {
            let mut out = f.to_vec();
            let mut anchor = first_survivor;
            for i in 0..n {
                if deleted[i] {
                    out[i] = f[anchor];
                } else {
                    anchor = i;
                }
            }
            out
        }
        Semantics::Weak => fill_weak(f, &deleted, pattern)?,
    };
    if n <= BRUTE_FORCE_CAP {
        if let Some(t) = find_appearance_in(&present(&out), pattern, semantics)? {
            return Err(Error::InvalidArgument(format!(
                "survivors are not pattern-free: filled sequence contains {pattern} at {t:?}"
            )));
        }
    }
    Ok(out)
}

/// Weak-semantics fill: rewrites deleted entries one at a time, right to left, placing each
/// just above or just below the value of its nearest defined neighbour (ties would create weak
/// appearances, so plain copying does not work here). The side is chosen by brute-force check.
fn fill_weak(f: &[f64], deleted: &[bool], pattern: &Pattern) -> Result<Vec<f64>> {
    let n = f.len();
    check_cap(n, BRUTE_FORCE_CAP)?;
    let mut cur: Vec<Option<f64>> =
        (0..n).map(|i| (!deleted[i]).then_some(f[i])).collect();
    for x in (0..n).rev().filter(|&x| deleted[x]) {
        let neighbour = (x + 1..n)
            .find(|&i| cur[i].is_some())
            .or_else(|| (0..x).rev().find(|&i| cur[i].is_some()))
            .ok_or(Error::NoSurvivingIndex)?;
        let anchor = cur[neighbour].expect("defined neighbour");
        let mut defined: Vec<f64> = cur.iter().flatten().copied().collect();
        defined.sort_by(f64::total_cmp);
        defined.dedup();
        let gap = defined
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(1.0f64, f64::min);
        let delta = gap / 4.0;
        let mut placed = false;
        for candidate in [anchor - delta, anchor + delta] {
            cur[x] = Some(candidate);
            if first_appearance(&cur, full_mask(n), pattern, Semantics::Weak).is_none() {
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::InvalidArgument(format!(
                "no weak fill for index {x}: survivors are not pattern-free"
            )));
        }
    }
    Ok(cur.into_iter().map(|v| v.expect("every entry filled")).collect())
}

/// Exact deletion distance, a minimum deletion set, and its fill-in repair.
pub fn distance_report(f: &[f64], pattern: &Pattern) -> Result<DistanceReport> {
    distance_report_with(f, pattern, Semantics::Strict)
}

pub fn distance_report_with(
    f: &[f64],
    pattern: &Pattern,
    semantics: Semantics,
) -> Result<DistanceReport> {
    let (size, kept) = max_pattern_free_subsequence_with(f, pattern, semantics)?;
    let deletion_set: Vec<usize> = (0..f.len()).filter(|i| kept.binary_search(i).is_err()).collect();
    if size == 0 && !f.is_empty() {
        return Err(Error::Refused(format!(
            "every nonempty sequence contains {pattern}, no rewrite is pattern-free"
        )));
    }
    let repaired_function = fill_deletion_set_with(f, &deletion_set, pattern, semantics)
        .or_else(|e| if f.is_empty() { Ok(Vec::new()) } else { Err(e) })?;
    let hamming_distance = f.iter().zip(&repaired_function).filter(|(a, b)| a != b).count();
    Ok(DistanceReport {
        deletion_distance: f.len() - size,
        hamming_distance,
        deletion_set,
        repaired_function,
    })
}

/// Exhaustive minimum-change repair search, independent of the fill-in construction.
///
/// Tries change sets `T` of increasing size whose complement is already free (a necessary
/// condition) and searches replacement values over a grid that realizes every relative order
/// of the changed entries against the unchanged ones, ties included. Returns the minimum number
/// of changes and one repaired sequence (in rescaled coordinates).
pub fn hamming_distance_exhaustive(
    f: &[f64],
    pattern: &Pattern,
    semantics: Semantics,
) -> Result<(usize, Vec<f64>)> {
    let n = f.len();
    check_cap(n, HAMMING_CAP)?;
    let values = present(f);
    for d in 0..=n {
        for t in combinations(n, d) {
            let t_mask = t.iter().fold(0u64, |m, &i| m | 1u64 << i);
            let keep = full_mask(n) & !t_mask;
            if first_appearance(&values, keep, pattern, semantics).is_some() {
                continue;
            }
            if let Some(repaired) = repair_on(f, &t, keep, pattern, semantics) {
                return Ok((d, repaired));
            }
        }
    }
    Err(Error::Internal("no repair found even after rewriting every entry".into()))
}

fn repair_on(
    f: &[f64],
    t: &[usize],
    keep: u64,
    pattern: &Pattern,
    semantics: Semantics,
) -> Option<Vec<f64>> {
    let n = f.len();
    let d = t.len();
    let mut distinct: Vec<f64> = (0..n).filter(|&i| keep >> i & 1 == 1).map(|i| f[i]).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let scale = (d + 1) as f64;
    let mut cur: Vec<Option<f64>> = (0..n)
        .map(|i| {
            (keep >> i & 1 == 1).then(|| {
                let rank = distinct.partition_point(|&x| x < f[i]);
                scale * (rank + 1) as f64
            })
        })
        .collect();
    let top = (d + 1) * (distinct.len() + 1);

    fn rec(
        cur: &mut Vec<Option<f64>>,
        t: &[usize],
        j: usize,
        top: usize,
        pattern: &Pattern,
        semantics: Semantics,
    ) -> bool {
        if j == t.len() {
            return true;
        }
        for c in 0..=top {
            cur[t[j]] = Some(c as f64);
            let mask = full_mask(cur.len());
            if first_appearance(cur, mask, pattern, semantics).is_none()
                && rec(cur, t, j + 1, top, pattern, semantics)
            {
                return true;
            }
        }
        cur[t[j]] = None;
        false
    }

    rec(&mut cur, t, 0, top, pattern, semantics)
        .then(|| cur.into_iter().map(|v| v.expect("assigned")).collect())
}

fn combinations(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(d);
    fn rec(n: usize, d: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < d - cur.len() {
                break;
            }
            cur.push(i);
            rec(n, d, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, d, 0, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Pattern {
        s.parse().unwrap()
    }

    #[test]
    fn find_examples() {
        assert_eq!(find_appearance_bruteforce(&[1.0, 2.0, 3.0, 4.0], &p("2,1")).unwrap(), None);
        assert_eq!(
            find_appearance_bruteforce(&[3.0, 2.0, 1.0, 4.0], &p("3,2,1,4")).unwrap(),
            Some(vec![0, 1, 2, 3])
        );
        assert_eq!(
            find_appearance_bruteforce(&[2.0, 4.0, 1.0, 3.0], &p("1,3,2")).unwrap(),
            Some(vec![0, 1, 3])
        );
    }

    #[test]
    fn find_skips_erased_entries() {
        let entries = [Some(2.0), None, Some(1.0)];
        assert_eq!(
            find_appearance_in(&entries, &p("2,1"), Semantics::Strict).unwrap(),
            Some(vec![0, 2])
        );
        let entries = [Some(2.0), None, Some(3.0)];
        assert_eq!(find_appearance_in(&entries, &p("2,1"), Semantics::Strict).unwrap(), None);
    }

    #[test]
    fn caps_are_enforced() {
        let f = vec![0.0; BRUTE_FORCE_CAP + 1];
        assert!(matches!(
            find_appearance_bruteforce(&f, &p("2,1")),
            Err(Error::CapExceeded { .. })
        ));
        let f = vec![0.0; DISTANCE_CAP + 1];
        assert!(max_pattern_free_subsequence(&f, &p("2,1")).is_err());
        let f = vec![0.0; HAMMING_CAP + 1];
        assert!(hamming_distance_exhaustive(&f, &p("2,1"), Semantics::Strict).is_err());
    }

    #[test]
    fn max_free_subsequence_examples() {
        assert_eq!(max_pattern_free_subsequence(&[1.0, 2.0, 3.0], &p("1,2")).unwrap().0, 1);
        let (size, kept) = max_pattern_free_subsequence(&[2.0, 1.0, 4.0, 3.0], &p("2,1")).unwrap();
        assert_eq!(size, 2);
        assert_eq!(find_appearance_bruteforce(&[2.0, 1.0, 4.0, 3.0], &p("2,1")).unwrap().map(|_| ()), Some(()));
        let sub: Vec<f64> = kept.iter().map(|&i| [2.0, 1.0, 4.0, 3.0][i]).collect();
        assert!(find_appearance_bruteforce(&sub, &p("2,1")).unwrap().is_none());
        assert_eq!(max_pattern_free_subsequence(&[7.0], &p("2,1")).unwrap().0, 1);
        assert_eq!(max_pattern_free_subsequence(&[7.0, 8.0], &p("1")).unwrap().0, 0);
    }

    #[test]
    fn fill_examples() {
        assert_eq!(fill_deletion_set(&[5.0, 1.0, 2.0], &[0], &p("2,1")).unwrap(), vec![1.0, 1.0, 2.0]);
        assert_eq!(
            fill_deletion_set(&[1.0, 9.0, 2.0, 3.0], &[1], &p("2,1")).unwrap(),
            vec![1.0, 1.0, 2.0, 3.0]
        );
        assert_eq!(fill_deletion_set(&[1.0, 2.0, 3.0], &[], &p("3,2,1")).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(fill_deletion_set(&[1.0, 2.0], &[0, 1], &p("2,1")), Err(Error::NoSurvivingIndex));
        assert!(fill_deletion_set(&[2.0, 1.0, 0.0], &[2], &p("2,1")).is_err());
    }

    #[test]
    fn matching_examples() {
        assert_eq!(
            greedy_matching(&[2.0, 1.0, 4.0, 3.0], &p("2,1")).unwrap(),
            vec![vec![0, 1], vec![2, 3]]
        );
        assert!(greedy_matching(&[1.0, 2.0, 3.0], &p("2,1")).unwrap().is_empty());
        assert_eq!(greedy_matching(&[3.0, 2.0, 1.0, 4.0], &p("3,2,1,4")).unwrap().len(), 1);
    }

    #[test]
    fn generalized_examples() {
        assert_eq!(find_generalized_appearance(&[5.0, 5.0], &p("1,2")).unwrap(), Some(vec![0, 1]));
        assert_eq!(find_generalized_appearance(&[5.0, 5.0], &p("2,1")).unwrap(), Some(vec![0, 1]));
        assert_eq!(find_generalized_appearance(&[3.0, 1.0, 2.0], &p("1,3,2")).unwrap(), None);
    }

    #[test]
    fn distance_report_is_consistent() {
        let f = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let r = distance_report(&f, &p("2,1")).unwrap();
        assert_eq!(r.deletion_distance, r.hamming_distance);
        assert_eq!(r.deletion_set.len(), r.deletion_distance);
        assert!(find_appearance_bruteforce(&r.repaired_function, &p("2,1")).unwrap().is_none());
        // Longest non-decreasing subsequence has length 4, e.g. 1,1,2,6 or 3,4,5,9.
        assert_eq!(r.deletion_distance, 8 - 4);
    }

    #[test]
    fn exhaustive_hamming_matches_known_values() {
        let (d, repaired) =
            hamming_distance_exhaustive(&[2.0, 1.0, 4.0, 3.0], &p("2,1"), Semantics::Strict).unwrap();
        assert_eq!(d, 2);
        assert!(find_appearance_bruteforce(&repaired, &p("2,1")).unwrap().is_none());
        let (d, _) =
            hamming_distance_exhaustive(&[1.0, 2.0, 3.0], &p("2,1"), Semantics::Strict).unwrap();
        assert_eq!(d, 0);
        let (d, _) = hamming_distance_exhaustive(&[5.0, 5.0], &p("1,2"), Semantics::Weak).unwrap();
        assert_eq!(d, 1);
    }

    #[test]
    fn combinations_enumerates_subsets() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
    }
}
