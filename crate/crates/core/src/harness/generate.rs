//! Instance generators: pattern-free sequences, sequences far from freeness, random sequences.

use std::ops::Range;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracle::find_appearance_bruteforce;
use crate::pattern::Pattern;

/// Sizes up to which jittered free sequences are re-checked by exhaustive search.
pub const VERIFY_FREE_CAP: usize = 20;
/// Spacing between consecutive backbone values.
const SPACING: f64 = 10.0;

/// A monotone backbone: increasing, or decreasing when `pattern` is the identity.
fn backbone(n: usize, pattern: &Pattern) -> Vec<f64> {
    if pattern.is_identity() {
        (0..n).map(|i| SPACING * (n - 1 - i) as f64).collect()
    } else {
        (0..n).map(|i| SPACING * i as f64).collect()
    }
}

fn refuse_single_leg(pattern: &Pattern) -> Result<()> {
    if pattern.len() == 1 {
        return Err(Error::Refused("every nonempty sequence contains a length-1 pattern".into()));
    }
    Ok(())
}

/// A sequence with no appearance of `pattern`.
///
/// The sequence is strictly increasing, or strictly decreasing for the identity pattern, so
/// it only contains one order type. Each value is shifted by a seeded jitter that keeps the
/// order. Short outputs are re-checked by exhaustive search and redrawn if needed.
pub fn generate_free(n: usize, pattern: &Pattern, seed: u64) -> Result<Vec<f64>> {
    generate_free_with(n, pattern, seed, true)
}

/// [`generate_free`] with the jitter switchable.
pub fn generate_free_with(n: usize, pattern: &Pattern, seed: u64, jitter: bool) -> Result<Vec<f64>> {
    refuse_single_leg(pattern)?;
    let base = backbone(n, pattern);
    if !jitter {
        return Ok(base);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..64 {
        let values: Vec<f64> = base.iter().map(|v| v + rng.random_range(0.0..SPACING * 0.9)).collect();
        if n > VERIFY_FREE_CAP || find_appearance_bruteforce(&values, pattern)?.is_none() {
            return Ok(values);
        }
    }
    Ok(base)
}

/// Number of windows planted for distance parameter `epsilon`: `ceil(epsilon * n / k)`.
pub fn planted_window_count(n: usize, k: usize, epsilon: f64) -> Result<usize> {
    let target = epsilon * n as f64 / k as f64;
    if target.is_nan() || target < 1.0 {
        return Err(Error::Refused(format!(
            "epsilon * n / k = {target} is below one, so no appearance can be planted"
        )));
    }
    let count = target.ceil() as usize;
    if count * k > n {
        return Err(Error::Refused(format!("{count} disjoint windows of length {k} do not fit in {n}")));
    }
    Ok(count)
}

/// Uniformly random disjoint windows of `k` consecutive indices, sorted by start.
pub fn planted_windows(n: usize, k: usize, epsilon: f64, seed: u64) -> Result<Vec<Range<usize>>> {
    let count = planted_window_count(n, k, epsilon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Choosing `count` slots among `n - count(k-1)` and stretching each chosen slot to length
    // `k` gives a uniform choice of disjoint windows.
    let slots = n - count * (k - 1);
    let mut starts = sample(&mut rng, slots, count).into_vec();
    starts.sort_unstable();
    Ok(starts.iter().enumerate().map(|(j, &s)| s + j * (k - 1)).map(|a| a..a + k).collect())
}

/// A sequence holding `ceil(epsilon * n / k)` disjoint appearances of `pattern`.
pub fn generate_planted_far(n: usize, pattern: &Pattern, epsilon: f64, seed: u64) -> Result<Vec<f64>> {
    let windows = planted_windows(n, pattern.len(), epsilon, seed)?;
    Ok(plant(n, pattern, &windows))
}

/// Rewrites each window of a monotone backbone so that it realizes `pattern`.
///
/// A window keeps its own backbone values and only reorders them, so windows occupy disjoint
/// value ranges and the appearances are index- and value-disjoint.
pub fn plant(n: usize, pattern: &Pattern, windows: &[Range<usize>]) -> Vec<f64> {
    let mut values = backbone(n, pattern);
    for w in windows {
        let mut local: Vec<f64> = values[w.clone()].to_vec();
        local.sort_by(f64::total_cmp);
        for (j, i) in w.clone().enumerate() {
            values[i] = local[pattern.value(j) as usize - 1];
        }
    }
    values
}

/// A uniformly random permutation of `0..n`, as values.
pub fn generate_random(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<f64> = (0..n).map(|i| i as f64).collect();
    values.shuffle(&mut rng);
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{greedy_matching, max_pattern_free_subsequence};

    fn p(s: &str) -> Pattern {
        s.parse().unwrap()
    }

    #[test]
    fn free_for_a_descent_is_increasing() {
        let f = generate_free(5, &p("2,1"), 1).unwrap();
        assert!(f.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(find_appearance_bruteforce(&f, &p("2,1")).unwrap(), None);
    }

    #[test]
    fn free_for_identity_is_decreasing() {
        let f = generate_free(5, &p("1,2"), 1).unwrap();
        assert!(f.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn jittered_free_is_verified() {
        for seed in 0..20 {
            let f = generate_free(12, &p("1,3,2"), seed).unwrap();
            assert_eq!(find_appearance_bruteforce(&f, &p("1,3,2")).unwrap(), None);
        }
        assert_ne!(generate_free(12, &p("1,3,2"), 1).unwrap(), generate_free(12, &p("1,3,2"), 2).unwrap());
    }

    #[test]
    fn free_refuses_single_leg() {
        assert!(matches!(generate_free(5, &p("1"), 0), Err(Error::Refused(_))));
    }

    #[test]
    fn planted_inversions_have_deletion_distance() {
        let f = generate_planted_far(16, &p("2,1"), 0.5, 7).unwrap();
        let (size, _) = max_pattern_free_subsequence(&f, &p("2,1")).unwrap();
        assert!(16 - size >= 4);
        assert!(greedy_matching(&f, &p("2,1")).unwrap().len() >= 4);
    }

    #[test]
    fn single_planted_window_is_found() {
        let pi = p("3,2,1,4");
        let f = generate_planted_far(8, &pi, 0.5, 3).unwrap();
        assert!(find_appearance_bruteforce(&f, &pi).unwrap().is_some());
    }

    #[test]
    fn planted_refuses_zero_epsilon() {
        assert!(matches!(generate_planted_far(100, &p("1,3,2"), 0.0, 0), Err(Error::Refused(_))));
        assert!(matches!(generate_planted_far(4, &p("1,3,2"), 0.5, 0), Err(Error::Refused(_))));
    }

    #[test]
    fn planted_windows_are_disjoint_and_in_range() {
        for seed in 0..50 {
            let w = planted_windows(100, 4, 0.9, seed).unwrap();
            assert_eq!(w.len(), 23);
            assert!(w.windows(2).all(|p| p[0].end <= p[1].start));
            assert!(w.last().unwrap().end <= 100);
        }
    }

    #[test]
    fn planted_matching_meets_window_count_at_small_scale() {
        for pat in ["1,3,2", "3,2,1,4", "1,2,3"] {
            let pi = p(pat);
            for seed in 0..20 {
                let f = generate_planted_far(40, &pi, 0.3, seed).unwrap();
                let need = planted_window_count(40, pi.len(), 0.3).unwrap();
                assert!(greedy_matching(&f, &pi).unwrap().len() >= need, "{pat} seed {seed}");
            }
        }
    }

    #[test]
    fn random_is_a_permutation() {
        let mut f = generate_random(50, 9);
        f.sort_by(f64::total_cmp);
        assert_eq!(f, (0..50).map(|i| i as f64).collect::<Vec<_>>());
    }
}
