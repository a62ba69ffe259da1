//! Query-counted access to a numeric sequence with optional erasures.

use std::io::Read;
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point `(i, f(i))` of the grid view of a sequence. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(usize, f64)", into = "(usize, f64)")]
pub struct Point {
    pub index: usize,
    pub value: f64,
}

impl Point {
    pub fn new(index: usize, value: f64) -> Self {
        Self { index, value }
    }
}

impl From<(usize, f64)> for Point {
    fn from((index, value): (usize, f64)) -> Self {
        Point { index, value }
    }
}

impl From<Point> for (usize, f64) {
    fn from(p: Point) -> Self {
        (p.index, p.value)
    }
}

/// Read access to sequence values through counted queries.
///
/// Implemented by [`SequenceOracle`] and by the tester's memoizing session, so the gridding
/// procedures can run against either.
pub trait QueryAccess {
    /// Length `n` of the underlying sequence.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Queries index `index`; `None` means the entry is erased.
    fn query(&mut self, index: usize) -> Result<Option<f64>>;
}

/// Query-counted access to `f: [n] -> R`, where some entries may be erased.
#[derive(Debug, Clone)]
pub struct SequenceOracle {
    entries: Vec<Option<f64>>,
    query_count: u64,
    rng_seed: u64,
}

impl SequenceOracle {
    /// Wraps a fully present sequence. Rejects NaN and infinite values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::from_entries(values.into_iter().map(Some).collect())
    }

    /// Wraps a sequence in which `None` marks an erased entry.
    pub fn from_entries(entries: Vec<Option<f64>>) -> Result<Self> {
        if let Some(index) = entries.iter().position(|e| matches!(e, Some(v) if !v.is_finite())) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(Self { entries, query_count: 0, rng_seed: 0 })
    }

    /// Erases `floor(alpha * n)` uniformly chosen positions of `values`.
    pub fn with_erasures(values: Vec<f64>, alpha: f64, seed: u64) -> Result<Self> {
        Self::entries_with_erasures(values.into_iter().map(Some).collect(), alpha, seed)
    }

    /// Erases `floor(alpha * n)` uniformly chosen positions of `entries`; positions that are
    /// already erased may be chosen again.
    pub fn entries_with_erasures(entries: Vec<Option<f64>>, alpha: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("erasure fraction {alpha} not in [0,1)")));
        }
        let mut oracle = Self::from_entries(entries)?;
        let n = oracle.entries.len();
        let count = (alpha * n as f64).floor() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in sample(&mut rng, n, count) {
            oracle.entries[i] = None;
        }
        oracle.rng_seed = seed;
        Ok(oracle)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Returns `f(index)` or `None` if erased, and charges one query.
    pub fn value_at(&mut self, index: usize) -> Result<Option<f64>> {
        let entry = *self
            .entries
            .get(index)
            .ok_or(Error::IndexOutOfRange { index, len: self.entries.len() })?;
        self.query_count += 1;
        Ok(entry)
    }

    /// Number of queries charged so far, erased responses included.
    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    pub fn reset_query_count(&mut self) {
        self.query_count = 0;
    }

    /// Seed used for erasure injection (0 when no erasures were injected).
    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    /// Uncharged view of all entries, for audits and reference computations.
    pub fn entries(&self) -> &[Option<f64>] {
        &self.entries
    }

    /// Uncharged list of all nonerased points.
    pub fn nonerased_points(&self) -> Vec<Point> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.map(|v| Point::new(i, v)))
            .collect()
    }
}

impl QueryAccess for SequenceOracle {
    fn len(&self) -> usize {
        self.entries.len()
    }

    fn query(&mut self, index: usize) -> Result<Option<f64>> {
        self.value_at(index)
    }
}

/// Parses one value per line; the token `*` marks an erased entry. Blank lines are skipped.
pub fn parse_sequence(text: &str) -> Result<Vec<Option<f64>>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let token = line.trim();
        if token.is_empty() {
            continue;
        }
        out.push(parse_token(token, lineno + 1)?);
    }
    Ok(out)
}

/// Reads column `column` (a header name, or a 0-based position if numeric) of a CSV file.
pub fn parse_csv_column<R: Read>(reader: R, column: &str) -> Result<Vec<Option<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
    let col = match headers.iter().position(|h| h.trim() == column) {
        Some(c) => c,
        None => column.parse::<usize>().map_err(|_| {
            Error::InvalidArgument(format!("no CSV column named {column:?}"))
        })?,
    };
    let mut out = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Io(e.to_string()))?;
        let field = record.get(col).ok_or_else(|| Error::Parse {
            line: row + 2,
            message: format!("missing column {col}"),
        })?;
        out.push(parse_token(field.trim(), row + 2)?);
    }
    Ok(out)
}

/// Loads a sequence file. Files ending in `.csv` are read as CSV using `column`
/// (default: the first column); everything else as one value per line.
pub fn load_sequence(path: &Path, column: Option<&str>) -> Result<Vec<Option<f64>>> {
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv || column.is_some() {
        let file = std::fs::File::open(path)?;
        parse_csv_column(file, column.unwrap_or("0"))
    } else {
        parse_sequence(&std::fs::read_to_string(path)?)
    }
}

fn parse_token(token: &str, line: usize) -> Result<Option<f64>> {
    if token == "*" {
        return Ok(None);
    }
    let v: f64 = token
        .parse()
        .map_err(|_| Error::Parse { line, message: format!("cannot parse {token:?}") })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, message: format!("non-finite value {token:?}") });
    }
    Ok(Some(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_every_query_including_erased() {
        let mut o = SequenceOracle::from_entries(vec![Some(1.0), None, Some(3.0)]).unwrap();
        assert_eq!(o.value_at(0).unwrap(), Some(1.0));
        assert_eq!(o.value_at(1).unwrap(), None);
        assert_eq!(o.value_at(0).unwrap(), Some(1.0));
        assert_eq!(o.query_count(), 3);
        assert!(o.value_at(3).is_err());
        assert_eq!(o.query_count(), 3);
    }

    #[test]
    fn rejects_non_finite_values() {
        assert_eq!(
            SequenceOracle::new(vec![1.0, f64::NAN]).unwrap_err(),
            Error::NonFiniteValue { index: 1 }
        );
        assert!(SequenceOracle::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn erasure_injection_is_seeded_and_exact() {
        let values: Vec<f64> = (0..100).map(f64::from).collect();
        let a = SequenceOracle::with_erasures(values.clone(), 0.25, 9).unwrap();
        let b = SequenceOracle::with_erasures(values, 0.25, 9).unwrap();
        assert_eq!(a.entries(), b.entries());
        assert_eq!(a.entries().iter().filter(|e| e.is_none()).count(), 25);
        assert_eq!(a.nonerased_points().len(), 75);
    }

    #[test]
    fn parses_lines_with_erasures() {
        let parsed = parse_sequence("1\n*\n\n2.5\n").unwrap();
        assert_eq!(parsed, vec![Some(1.0), None, Some(2.5)]);
        assert!(matches!(parse_sequence("1\nabc"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_sequence("inf").is_err());
    }

    #[test]
    fn parses_csv_column_by_name_and_position() {
        let csv = "t,x\n0,4\n1,*\n2,6\n";
        assert_eq!(
            parse_csv_column(csv.as_bytes(), "x").unwrap(),
            vec![Some(4.0), None, Some(6.0)]
        );
        assert_eq!(
            parse_csv_column(csv.as_bytes(), "0").unwrap(),
            vec![Some(0.0), Some(1.0), Some(2.0)]
        );
        assert!(parse_csv_column(csv.as_bytes(), "y").is_err());
    }

    #[test]
    fn point_serializes_as_pair() {
        let json = serde_json::to_string(&Point::new(3, 1.5)).unwrap();
        assert_eq!(json, "[3,1.5]");
    }
}
