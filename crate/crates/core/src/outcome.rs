//! Tester outcomes and witness verification.

use serde::{Deserialize, Serialize};

use crate::pattern::{Pattern, Semantics};
use crate::sequence::{Point, SequenceOracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    /// An unrestricted appearance of the top-level pattern was found.
    FoundPi,
    /// A leg-restricted appearance of the current sub-pattern was found.
    FoundRestrictedNu,
    NotFound,
    /// The query budget ran out before the test finished.
    BudgetExceeded,
}

/// Result of a test, with a concrete witness whenever something was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub kind: OutcomeKind,
    /// Witness points in increasing index order (empty unless found).
    pub witness: Vec<Point>,
    /// Distinct oracle queries charged to this test.
    pub queries_used: u64,
    /// Deepest recursion level reached (0 for the top-level call).
    pub depth_max: usize,
}

impl TestOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self.kind, OutcomeKind::FoundPi | OutcomeKind::FoundRestrictedNu)
    }
}

/// Checks a witness against the sequence without charging queries: indices strictly
/// increasing, values equal to the stored entries, and the strict order type equal to `pattern`.
pub fn verify_witness(oracle: &SequenceOracle, witness: &[Point], pattern: &Pattern) -> bool {
    if witness.len() != pattern.len() || !witness.windows(2).all(|w| w[0].index < w[1].index) {
        return false;
    }
    let entries = oracle.entries();
    let stored_match = witness
        .iter()
        .all(|p| entries.get(p.index).copied().flatten() == Some(p.value));
    let values: Vec<f64> = witness.iter().map(|p| p.value).collect();
    stored_match && pattern.matches(&values, Semantics::Strict)
}
