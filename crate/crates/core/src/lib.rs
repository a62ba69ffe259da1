//! Sublinear-query testing of forbidden order patterns in numeric sequences.
//!
//! A sequence `f` contains a pattern `pi` (a permutation of `1..=k`) when some `k` entries at
//! increasing indices have exactly the relative order of `pi`. This crate provides an adaptive
//! randomized tester with one-sided error (it only ever rejects with a verified appearance in
//! hand), exact brute-force reference algorithms, and an experiment harness.
//!
//! Indices are 0-based throughout.
//!
//! ```
//! use pifree::{test_freeness, OutcomeKind, Pattern, SequenceOracle, TesterConfig};
//!
//! let pi: Pattern = "1,3,2".parse()?;
//! let mut oracle = SequenceOracle::with_erasures((0..4096).map(f64::from).collect(), 0.1, 7)?;
//! let cfg = TesterConfig::new(pi, 0.2).with_m(64).with_kappa(8).with_seed(1);
//! let outcome = test_freeness(&mut oracle, &cfg)?;
//! assert_eq!(outcome.kind, OutcomeKind::NotFound);
//! # Ok::<(), pifree::Error>(())
//! ```

pub mod error;
pub mod grid;
pub mod gridding;
pub mod harness;
pub mod oracle;
pub mod outcome;
pub mod pattern;
pub mod region;
pub mod search;
pub mod sequence;
pub mod tester;

pub use error::{Error, Result};
pub use grid::{detect_components, Cell, CellTag, Component, GridDecomposition};
pub use harness::{run_experiment, ExperimentReport, InstanceKind, InstanceSpec};
pub use outcome::{verify_witness, OutcomeKind, TestOutcome};
pub use pattern::{order_isomorphic, Pattern, Semantics};
pub use region::{BoxRegion, IndexSet, ValueSet};
pub use sequence::{Point, QueryAccess, SequenceOracle};
pub use tester::{test_freeness, RestrictedInstance, TesterConfig};
