//! Command-line front end: run the tester, the exact reference algorithms, the gridding
//! routine, or a multi-size benchmark.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use pifree::gridding::gridding;
use pifree::harness::{bench, format_table, run_experiment, write_csv, QueryRow};
use pifree::oracle::{distance_report_with, find_appearance_in, greedy_matching_with};
use pifree::sequence::{load_sequence, parse_sequence};
use pifree::{BoxRegion, InstanceKind, InstanceSpec, Pattern, SequenceOracle, Semantics, TesterConfig};

#[derive(Parser)]
#[command(name = "pifree", version, about = "Sublinear-query testing of forbidden order patterns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tester on a file or on generated instances.
    Test(TestArgs),
    /// Run an exact reference algorithm on a short sequence.
    Oracle(OracleArgs),
    /// Compute a grid decomposition of a sequence and print it as JSON.
    Grid(GridArgs),
    /// Measure query counts over several sequence lengths.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Free,
    Planted,
    Random,
}

#[derive(Args)]
struct SourceArgs {
    /// Values as a comma-separated list; `*` marks an erased entry.
    #[arg(long, conflicts_with = "input")]
    values: Option<String>,
    /// File with one value per line, or a CSV file when `--column` is given.
    #[arg(long)]
    input: Option<PathBuf>,
    /// CSV column name or 0-based position.
    #[arg(long, requires = "input")]
    column: Option<String>,
}

impl SourceArgs {
    fn entries(&self) -> Result<Vec<Option<f64>>> {
        if let Some(v) = &self.values {
            return Ok(parse_sequence(&v.replace(',', "\n"))?);
        }
        let Some(path) = &self.input else { bail!("one of --values or --input is required") };
        load_sequence(path, self.column.as_deref()).with_context(|| format!("reading {}", path.display()))
    }
}

#[derive(Args)]
struct TesterArgs {
    /// Forbidden pattern, e.g. `1,3,2`.
    #[arg(long)]
    pattern: Pattern,
    /// Distance parameter of the tester.
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    /// Grid exponent: m = ceil(n^eta).
    #[arg(long, conflicts_with = "m")]
    eta: Option<f64>,
    /// Fixed grid parameter.
    #[arg(long)]
    m: Option<usize>,
    /// Replaces the published marked-cell threshold.
    #[arg(long)]
    kappa_override: Option<u64>,
    /// Maximum number of distinct queries per run.
    #[arg(long)]
    budget: Option<u64>,
    /// Tester seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl TesterArgs {
    fn config(&self) -> TesterConfig {
        let mut cfg = TesterConfig::new(self.pattern.clone(), self.epsilon).with_seed(self.seed).with_budget(self.budget);
        if let Some(m) = self.m {
            cfg = cfg.with_m(m);
        }
        if let Some(eta) = self.eta {
            cfg = cfg.with_eta(eta);
        }
        if let Some(k) = self.kappa_override {
            cfg = cfg.with_kappa(k);
        }
        cfg
    }
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance family for generated inputs.
    #[arg(long, value_enum, default_value_t = Generator::Planted)]
    generate: Generator,
    /// Distance parameter of planted instances.
    #[arg(long, default_value_t = 0.2)]
    far_epsilon: f64,
    /// Fraction of positions erased after generation.
    #[arg(long, default_value_t = 0.0)]
    erasure: f64,
    /// Instance seed.
    #[arg(long, default_value_t = 0)]
    instance_seed: u64,
}

impl InstanceArgs {
    fn kind(&self) -> InstanceKind {
        match self.generate {
            Generator::Free => InstanceKind::Free,
            Generator::Planted => InstanceKind::PlantedFar(self.far_epsilon),
            Generator::Random => InstanceKind::Random,
        }
    }
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    tester: TesterArgs,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Read the sequence from this file instead of generating it.
    #[arg(long)]
    input: Option<PathBuf>,
    /// CSV column name or 0-based position.
    #[arg(long, requires = "input")]
    column: Option<String>,
    /// Length of generated instances.
    #[arg(long, default_value_t = 4096)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Print the full report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleOp {
    Find,
    Distance,
    Matching,
    Generalized,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    pattern: Pattern,
    #[arg(long, value_enum, default_value_t = OracleOp::Find)]
    op: OracleOp,
    /// Use weak inequalities (ties allowed) for `distance` and `matching`.
    #[arg(long)]
    weak: bool,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 8)]
    m: usize,
    /// Density threshold for dense cells.
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    tester: TesterArgs,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Comma-separated sequence lengths.
    #[arg(long, value_delimiter = ',', default_value = "1024,4096,16384")]
    n_list: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the per-size query table here as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Oracle(a) => cmd_oracle(a).map(|()| ExitCode::SUCCESS),
        Command::Grid(a) => cmd_grid(a).map(|()| ExitCode::SUCCESS),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn soundness_exit(violations: usize) -> ExitCode {
    if violations > 0 {
        eprintln!("soundness violations detected: {violations}");
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_test(a: TestArgs) -> Result<ExitCode> {
    let cfg = a.tester.config();
    let kind = match &a.input {
        Some(path) => InstanceKind::FromFile { path: path.clone(), column: a.column.clone() },
        None => a.instance.kind(),
    };
    let spec = InstanceSpec::new(a.n, cfg.pattern.clone(), kind)
        .with_erasure(a.instance.erasure)
        .with_seed(a.instance.instance_seed);
    let report = run_experiment(&spec, &cfg, a.trials)?;
    let mut out = io::stdout().lock();
    if a.json {
        serde_json::to_writer_pretty(&mut out, &report)?;
        writeln!(out)?;
    } else {
        for r in &report.records {
            writeln!(out, "trial {}: {:?}, {} queries, depth {}", r.trial, r.outcome, r.queries, r.depth_max)?;
            if !r.witness.is_empty() {
                let w: Vec<String> = r.witness.iter().map(|p| format!("({}, {})", p.index, p.value)).collect();
                writeln!(out, "  witness: {}", w.join(" "))?;
            }
        }
        write!(out, "{}", format_table(&[QueryRow::from(&report)]))?;
    }
    Ok(soundness_exit(report.soundness_violations))
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    let entries = a.source.entries()?;
    let semantics = if a.weak { Semantics::Weak } else { Semantics::Strict };
    let full = || -> Result<Vec<f64>> {
        entries.iter().map(|e| e.context("this operation needs a sequence without erasures")).collect()
    };
    let value = match a.op {
        OracleOp::Find => json!({ "appearance": find_appearance_in(&entries, &a.pattern, semantics)? }),
        OracleOp::Generalized => {
            json!({ "appearance": find_appearance_in(&entries, &a.pattern, Semantics::Weak)? })
        }
        OracleOp::Matching => {
            let m = greedy_matching_with(&full()?, &a.pattern, semantics)?;
            json!({ "size": m.len(), "matching": m })
        }
        OracleOp::Distance => serde_json::to_value(distance_report_with(&full()?, &a.pattern, semantics)?)?,
    };
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

fn cmd_grid(a: GridArgs) -> Result<()> {
    let mut oracle = SequenceOracle::from_entries(a.source.entries()?)?;
    if oracle.is_empty() {
        bail!("the sequence is empty");
    }
    let region = BoxRegion::full(oracle.len());
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let grid = gridding(&mut oracle, &region, a.m, a.beta, &mut rng)?;
    let value = json!({ "oracle_calls": oracle.query_count(), "grid": grid });
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<ExitCode> {
    let mut cfg = a.tester.config();
    if a.tester.eta.is_none() && a.tester.m.is_none() {
        cfg = cfg.with_eta(1.0 / 3.0);
    }
    let spec = InstanceSpec::new(0, cfg.pattern.clone(), a.instance.kind())
        .with_erasure(a.instance.erasure)
        .with_seed(a.instance.instance_seed);
    let report = bench(&spec, &cfg, &a.n_list, a.trials)?;
    print!("{}", format_table(&report.rows));
    if let Some(path) = &a.out {
        let w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        serde_json::to_writer_pretty(w, &report)?;
    }
    if let Some(path) = &a.csv {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_csv(&report.rows, f)?;
    }
    Ok(soundness_exit(report.soundness_violations()))
}
