//! Permutation patterns and order-isomorphism checks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest pattern length accepted by [`Pattern::new`].
pub const MAX_PATTERN_LEN: usize = 6;

/// How ties between values are treated when matching a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Semantics {
    /// `pi(s) < pi(t)` iff `f(i_s) < f(i_t)`; ties never match.
    Strict,
    /// `pi(s) < pi(t)` implies `f(i_s) <= f(i_t)`; ties match either orientation.
    Weak,
}

/// A permutation `pi` of `{1..k}` stored as its value sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct Pattern {
    values: Vec<u8>,
}

impl Pattern {
    /// Builds a pattern from 1-based values, validating that they form a permutation.
    pub fn new(values: Vec<u8>) -> Result<Self> {
        let k = values.len();
        if k == 0 {
            return Err(Error::InvalidPattern("empty pattern".into()));
        }
        if k > MAX_PATTERN_LEN {
            return Err(Error::InvalidPattern(format!(
                "length {k} exceeds the maximum of {MAX_PATTERN_LEN}"
            )));
        }
        let mut seen = vec![false; k];
        for &v in &values {
            let v = v as usize;
            if v == 0 || v > k || seen[v - 1] {
                return Err(Error::InvalidPattern(format!(
                    "{values:?} is not a permutation of 1..={k}"
                )));
            }
            seen[v - 1] = true;
        }
        Ok(Self { values })
    }

    /// The identity pattern `(1, 2, ..., k)`.
    pub fn identity(k: usize) -> Result<Self> {
        Self::new((1..=k as u8).collect())
    }

    /// Every pattern of length `k`, in lexicographic order.
    pub fn all_of_length(k: usize) -> Vec<Pattern> {
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(k);
        let mut used = vec![false; k];
        fn rec(k: usize, current: &mut Vec<u8>, used: &mut [bool], out: &mut Vec<Pattern>) {
            if current.len() == k {
                out.push(Pattern { values: current.clone() });
                return;
            }
            for v in 0..k {
                if !used[v] {
                    used[v] = true;
                    current.push(v as u8 + 1);
                    rec(k, current, used, out);
                    current.pop();
                    used[v] = false;
                }
            }
        }
        if k > 0 && k <= MAX_PATTERN_LEN {
            rec(k, &mut current, &mut used, &mut out);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The 1-based values `pi(1), ..., pi(k)`.
    pub fn values(&self) -> &[u8] {
        &self.values
    }

    /// The value of leg `leg` (0-based leg, 1-based value).
    pub fn value(&self, leg: usize) -> u8 {
        self.values[leg]
    }

    pub fn is_identity(&self) -> bool {
        self.values.iter().enumerate().all(|(i, &v)| v as usize == i + 1)
    }

    /// Legs ordered by increasing value: `legs_by_value()[v - 1]` is the leg holding value `v`.
    pub fn legs_by_value(&self) -> Vec<usize> {
        let mut legs = vec![0; self.len()];
        for (leg, &v) in self.values.iter().enumerate() {
            legs[v as usize - 1] = leg;
        }
        legs
    }

    /// Number of legs that form an inversion with `leg`.
    pub fn inversions_at(&self, leg: usize) -> usize {
        let v = self.values[leg];
        let before = self.values[..leg].iter().filter(|&&w| w > v).count();
        let after = self.values[leg + 1..].iter().filter(|&&w| w < v).count();
        before + after
    }

    /// The pattern induced by the given legs (in increasing leg order), renormalized to `1..=r`.
    pub fn sub_pattern(&self, legs: &[usize]) -> Pattern {
        let picked: Vec<u8> = legs.iter().map(|&l| self.values[l]).collect();
        let values = picked
            .iter()
            .map(|&v| picked.iter().filter(|&&w| w <= v).count() as u8)
            .collect();
        Pattern { values }
    }

    /// Whether `values` realizes this pattern under the given semantics.
    pub fn matches(&self, values: &[f64], semantics: Semantics) -> bool {
        if values.len() != self.len() {
            return false;
        }
        let k = self.len();
        for s in 0..k {
            for t in 0..k {
                if self.values[s] < self.values[t] {
                    let ok = match semantics {
                        Semantics::Strict => values[s] < values[t],
                        Semantics::Weak => values[s] <= values[t],
                    };
                    if !ok {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Whether `values` has exactly the strict order type of `pattern`.
pub fn order_isomorphic(values: &[f64], pattern: &Pattern) -> Result<bool> {
    if values.len() != pattern.len() {
        return Err(Error::LengthMismatch { expected: pattern.len(), actual: values.len() });
    }
    Ok(pattern.matches(values, Semantics::Strict))
}

/// Weak-inequality variant of [`order_isomorphic`].
pub fn weakly_order_isomorphic(values: &[f64], pattern: &Pattern) -> Result<bool> {
    if values.len() != pattern.len() {
        return Err(Error::LengthMismatch { expected: pattern.len(), actual: values.len() });
    }
    Ok(pattern.matches(values, Semantics::Weak))
}

impl FromStr for Pattern {
    type Err = Error;

    /// Parses comma- or whitespace-separated values such as `"3,2,1,4"` or `"(3 2 1 4)"`.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let values = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<u8>()
                    .map_err(|_| Error::InvalidPattern(format!("cannot parse {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Pattern::new(values)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl TryFrom<Vec<u8>> for Pattern {
    type Error = Error;
    fn try_from(values: Vec<u8>) -> Result<Self> {
        Pattern::new(values)
    }
}

impl From<Pattern> for Vec<u8> {
    fn from(p: Pattern) -> Vec<u8> {
        p.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Pattern {
        s.parse().unwrap()
    }

    #[test]
    fn order_isomorphic_examples() {
        assert!(order_isomorphic(&[3.0, 2.0, 1.0, 4.0], &p("3,2,1,4")).unwrap());
        assert!(!order_isomorphic(&[5.0, 5.0, 7.0], &p("1,2,3")).unwrap());
        assert!(order_isomorphic(&[2.0, 9.0, 4.0], &p("1,3,2")).unwrap());
    }

    #[test]
    fn order_isomorphic_rejects_length_mismatch() {
        assert_eq!(
            order_isomorphic(&[1.0, 2.0], &p("1,2,3")),
            Err(Error::LengthMismatch { expected: 3, actual: 2 })
        );
    }

    #[test]
    fn weak_semantics_accept_ties_both_ways() {
        assert!(weakly_order_isomorphic(&[5.0, 5.0], &p("1,2")).unwrap());
        assert!(weakly_order_isomorphic(&[5.0, 5.0], &p("2,1")).unwrap());
        assert!(!weakly_order_isomorphic(&[3.0, 1.0, 2.0], &p("1,3,2")).unwrap());
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(Pattern::new(vec![1, 1]).is_err());
        assert!(Pattern::new(vec![0, 1]).is_err());
        assert!(Pattern::new(vec![]).is_err());
        assert!(Pattern::new(vec![1, 2, 3, 4, 5, 6, 7]).is_err());
        assert!("1,x".parse::<Pattern>().is_err());
    }

    #[test]
    fn parses_and_displays() {
        assert_eq!(p("(3 2 1 4)"), p("3,2,1,4"));
        assert_eq!(p("2,4,1,3").to_string(), "(2,4,1,3)");
    }

    #[test]
    fn all_of_length_counts() {
        assert_eq!(Pattern::all_of_length(3).len(), 6);
        assert_eq!(Pattern::all_of_length(4).len(), 24);
        assert_eq!(Pattern::all_of_length(3)[0], p("1,2,3"));
    }

    #[test]
    fn sub_pattern_renormalizes() {
        let pi = p("3,2,1,4");
        assert_eq!(pi.sub_pattern(&[0, 3]), p("1,2"));
        assert_eq!(pi.sub_pattern(&[0, 1, 2]), p("3,2,1"));
        assert_eq!(p("2,4,1,3").sub_pattern(&[1, 2, 3]), p("3,1,2"));
    }

    #[test]
    fn inversion_counts() {
        let pi = p("2,4,1,3");
        let inv: Vec<usize> = (0..4).map(|l| pi.inversions_at(l)).collect();
        assert_eq!(inv, vec![1, 2, 2, 1]);
        assert_eq!(pi.legs_by_value(), vec![2, 0, 3, 1]);
    }

    #[test]
    fn serde_round_trip_validates() {
        let json = serde_json::to_string(&p("1,3,2")).unwrap();
        assert_eq!(json, "[1,3,2]");
        assert_eq!(serde_json::from_str::<Pattern>(&json).unwrap(), p("1,3,2"));
        assert!(serde_json::from_str::<Pattern>("[1,1]").is_err());
    }
}
