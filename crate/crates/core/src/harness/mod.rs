//! Seeded experiments: instance generation, repeated tester runs, aggregated reports.
//!
//! Every trial derives its instance seed and tester seed from the experiment seeds and the
//! trial index, so a report depends only on `(spec.seed, cfg.seed, trials)`. Trials run on the
//! rayon pool and are collected in trial order.

pub mod generate;

use std::fmt::Write as _;
use std::io::Write;
use std::ops::Range;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outcome::{verify_witness, OutcomeKind};
use crate::pattern::Pattern;
use crate::sequence::{load_sequence, Point, SequenceOracle};
use crate::tester::{test_freeness, TesterConfig};

pub use generate::{
    generate_free, generate_free_with, generate_planted_far, generate_random, plant, planted_window_count,
    planted_windows,
};

/// How the values of an instance are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    /// A sequence with no appearance of the pattern.
    Free,
    /// `ceil(epsilon * n / k)` disjoint planted appearances on a monotone backbone.
    PlantedFar(f64),
    /// A uniformly random permutation.
    Random,
    /// Values read from a file; `n` is ignored.
    FromFile { path: PathBuf, column: Option<String> },
}

/// Description of the instances used by an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: usize,
    pub pattern: Pattern,
    pub kind: InstanceKind,
    /// Fraction of positions erased uniformly at random after generation.
    pub erasure_fraction: f64,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(n: usize, pattern: Pattern, kind: InstanceKind) -> Self {
        Self { n, pattern, kind, erasure_fraction: 0.0, seed: 0 }
    }

    pub fn with_erasure(mut self, alpha: f64) -> Self {
        self.erasure_fraction = alpha;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.erasure_fraction) {
            return Err(Error::InvalidArgument(format!(
                "erasure fraction {} not in [0,1)",
                self.erasure_fraction
            )));
        }
        if let InstanceKind::PlantedFar(eps) = self.kind {
            planted_window_count(self.n, self.pattern.len(), eps)?;
        }
        Ok(())
    }
}

/// One generated instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub oracle: SequenceOracle,
    /// Planted windows, for planted instances.
    pub windows: Option<Vec<Range<usize>>>,
}

impl Instance {
    /// Number of planted windows containing at least one erased position.
    pub fn windows_hit(&self) -> Option<usize> {
        let entries = self.oracle.entries();
        self.windows
            .as_ref()
            .map(|ws| ws.iter().filter(|w| entries[(*w).clone()].iter().any(Option::is_none)).count())
    }
}

/// Generates the instance for one seed. File-backed specs reuse `file_entries`.
pub fn build_instance(spec: &InstanceSpec, seed: u64, file_entries: Option<&[Option<f64>]>) -> Result<Instance> {
    let erase_seed = derive_seed(seed, 1);
    let (entries, windows) = match &spec.kind {
        InstanceKind::Free => (present(generate_free(spec.n, &spec.pattern, seed)?), None),
        InstanceKind::PlantedFar(eps) => {
            let windows = planted_windows(spec.n, spec.pattern.len(), *eps, seed)?;
            (present(plant(spec.n, &spec.pattern, &windows)), Some(windows))
        }
        InstanceKind::Random => (present(generate_random(spec.n, seed)), None),
        InstanceKind::FromFile { path, column } => match file_entries {
            Some(e) => (e.to_vec(), None),
            None => (load_sequence(path, column.as_deref())?, None),
        },
    };
    let oracle = SequenceOracle::entries_with_erasures(entries, spec.erasure_fraction, erase_seed)?;
    Ok(Instance { oracle, windows })
}

fn present(values: Vec<f64>) -> Vec<Option<f64>> {
    values.into_iter().map(Some).collect()
}

/// Mixes a base seed with a stream index (SplitMix64 finalizer).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Result of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub instance_seed: u64,
    pub tester_seed: u64,
    pub outcome: OutcomeKind,
    pub queries: u64,
    pub depth_max: usize,
    pub witness: Vec<Point>,
    /// Whether the witness is an appearance of the pattern in a fresh copy of the instance.
    pub witness_valid: bool,
    /// Planted windows touched by erasures (planted instances only).
    pub planted_windows_hit: Option<usize>,
}

/// Aggregate of a seeded experiment on one instance size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: InstanceSpec,
    pub config: TesterConfig,
    /// Sequence length actually tested.
    pub n: usize,
    /// Grid parameter used at the top level.
    pub m: usize,
    pub trials: usize,
    /// Trials that returned a verified appearance.
    pub rejections: usize,
    pub rejection_rate: f64,
    pub budget_exceeded: usize,
    pub mean_queries: f64,
    pub max_queries: u64,
    /// `mean_queries / n`.
    pub query_fraction: f64,
    /// Rejections of a pattern-free instance plus witnesses that failed re-verification.
    pub soundness_violations: usize,
    pub invalid_witnesses: usize,
    pub records: Vec<TrialRecord>,
}

/// Runs `trials` independent seeded trials of the tester.
pub fn run_experiment(spec: &InstanceSpec, cfg: &TesterConfig, trials: usize) -> Result<ExperimentReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    if spec.pattern != cfg.pattern {
        return Err(Error::InvalidArgument(format!(
            "instance pattern {} differs from tester pattern {}",
            spec.pattern, cfg.pattern
        )));
    }
    spec.validate()?;
    cfg.validate()?;
    let file_entries = match &spec.kind {
        InstanceKind::FromFile { path, column } => Some(load_sequence(path, column.as_deref())?),
        _ => None,
    };
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(spec, cfg, t, file_entries.as_deref()))
        .collect::<Result<_>>()?;
    let n = match &file_entries {
        Some(e) => e.len(),
        None => spec.n,
    };
    Ok(summarize(spec, cfg, n, records))
}

fn run_trial(
    spec: &InstanceSpec,
    cfg: &TesterConfig,
    trial: usize,
    file_entries: Option<&[Option<f64>]>,
) -> Result<TrialRecord> {
    let instance_seed = derive_seed(spec.seed, trial as u64);
    let tester_seed = derive_seed(cfg.seed, trial as u64);
    let instance = build_instance(spec, instance_seed, file_entries)?;
    let fresh = SequenceOracle::from_entries(instance.oracle.entries().to_vec())?;
    let mut oracle = instance.oracle.clone();
    let out = test_freeness(&mut oracle, &cfg.clone().with_seed(tester_seed))?;
    let witness_valid = out.is_found() && verify_witness(&fresh, &out.witness, &cfg.pattern);
    Ok(TrialRecord {
        trial,
        instance_seed,
        tester_seed,
        outcome: out.kind,
        queries: out.queries_used,
        depth_max: out.depth_max,
        witness: out.witness,
        witness_valid,
        planted_windows_hit: instance.windows_hit(),
    })
}

fn summarize(spec: &InstanceSpec, cfg: &TesterConfig, n: usize, records: Vec<TrialRecord>) -> ExperimentReport {
    let trials = records.len();
    let found = records.iter().filter(|r| r.outcome == OutcomeKind::FoundPi).count();
    let rejections = records.iter().filter(|r| r.witness_valid).count();
    let invalid_witnesses = found - rejections;
    let false_rejections = if spec.kind == InstanceKind::Free { rejections } else { 0 };
    let total: u64 = records.iter().map(|r| r.queries).sum();
    let mean_queries = total as f64 / trials as f64;
    ExperimentReport {
        spec: spec.clone(),
        config: cfg.clone(),
        n,
        m: cfg.m_for(n),
        trials,
        rejections,
        rejection_rate: rejections as f64 / trials as f64,
        budget_exceeded: records.iter().filter(|r| r.outcome == OutcomeKind::BudgetExceeded).count(),
        mean_queries,
        max_queries: records.iter().map(|r| r.queries).max().unwrap_or(0),
        query_fraction: if n == 0 { 0.0 } else { mean_queries / n as f64 },
        soundness_violations: false_rejections + invalid_witnesses,
        invalid_witnesses,
        records,
    }
}

/// One row of the query-complexity table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRow {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub mean_queries: f64,
    pub max_queries: u64,
    pub query_fraction: f64,
    pub rejection_rate: f64,
    pub soundness_violations: usize,
}

impl From<&ExperimentReport> for QueryRow {
    fn from(r: &ExperimentReport) -> Self {
        Self {
            n: r.n,
            m: r.m,
            trials: r.trials,
            mean_queries: r.mean_queries,
            max_queries: r.max_queries,
            query_fraction: r.query_fraction,
            rejection_rate: r.rejection_rate,
            soundness_violations: r.soundness_violations,
        }
    }
}

/// Experiments over several instance sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<QueryRow>,
    pub experiments: Vec<ExperimentReport>,
}

impl BenchReport {
    pub fn soundness_violations(&self) -> usize {
        self.rows.iter().map(|r| r.soundness_violations).sum()
    }
}

/// Runs [`run_experiment`] for every size in `sizes`, using `spec` as the template.
pub fn bench(spec: &InstanceSpec, cfg: &TesterConfig, sizes: &[usize], trials: usize) -> Result<BenchReport> {
    let experiments = sizes
        .iter()
        .map(|&n| run_experiment(&InstanceSpec { n, ..spec.clone() }, cfg, trials))
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchReport { rows: experiments.iter().map(QueryRow::from).collect(), experiments })
}

/// Aligned text table of query rows.
pub fn format_table(rows: &[QueryRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>8} {:>5} {:>7} {:>14} {:>10} {:>10} {:>10} {:>9}",
        "n", "m", "trials", "mean_queries", "max", "queries/n", "reject", "unsound"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>8} {:>5} {:>7} {:>14.1} {:>10} {:>10.4} {:>10.3} {:>9}",
            r.n, r.m, r.trials, r.mean_queries, r.max_queries, r.query_fraction, r.rejection_rate, r.soundness_violations
        );
    }
    out
}

/// Writes query rows as CSV with a header line.
pub fn write_csv<W: Write>(rows: &[QueryRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
