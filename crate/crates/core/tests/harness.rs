//! Experiment-level guarantees: determinism, one-sided error under erasures, file inputs.

use pifree::harness::{bench, build_instance};
use pifree::{run_experiment, InstanceKind, InstanceSpec, OutcomeKind, Pattern, TesterConfig};

fn p(s: &str) -> Pattern {
    s.parse().unwrap()
}

#[test]
fn identical_seeds_give_identical_reports() {
    let spec = InstanceSpec::new(2048, p("3,2,1,4"), InstanceKind::PlantedFar(0.2)).with_erasure(0.1).with_seed(11);
    let cfg = TesterConfig::new(p("3,2,1,4"), 0.2).with_m(16).with_kappa(8).with_seed(12);
    let a = serde_json::to_vec(&run_experiment(&spec, &cfg, 10).unwrap()).unwrap();
    let b = serde_json::to_vec(&run_experiment(&spec, &cfg, 10).unwrap()).unwrap();
    assert_eq!(a, b);
    let c = serde_json::to_vec(&run_experiment(&spec.with_seed(13), &cfg, 10).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn erasures_never_cause_false_rejections() {
    for pat in ["1,3,2", "3,2,1,4", "2,4,1,3", "1,2,3"] {
        for alpha in [0.0, 0.1, 0.25] {
            let spec = InstanceSpec::new(2048, p(pat), InstanceKind::Free).with_erasure(alpha).with_seed(5);
            let cfg = TesterConfig::new(p(pat), 0.2).with_m(16).with_kappa(8);
            let report = run_experiment(&spec, &cfg, 20).unwrap();
            assert_eq!(report.rejections, 0, "{pat} alpha {alpha}");
            assert_eq!(report.soundness_violations, 0);
        }
    }
}

#[test]
fn planted_far_rejected_at_scale() {
    let spec = InstanceSpec::new(4096, p("3,2,1,4"), InstanceKind::PlantedFar(0.2)).with_seed(1);
    let cfg = TesterConfig::new(p("3,2,1,4"), 0.2).with_m(64).with_kappa(8).with_seed(2);
    let report = run_experiment(&spec, &cfg, 30).unwrap();
    assert!(report.rejection_rate >= 2.0 / 3.0);
    assert_eq!(report.invalid_witnesses, 0);
    for r in report.records.iter().filter(|r| r.outcome == OutcomeKind::FoundPi) {
        assert!(r.witness_valid);
    }
}

#[test]
fn file_instances_are_loaded_once_and_erased_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("series.csv");
    let mut text = String::from("time,value\n");
    for i in 0..500 {
        text.push_str(&format!("{i},{}\n", (i * 37) % 101));
    }
    std::fs::write(&path, text).unwrap();
    let kind = InstanceKind::FromFile { path: path.clone(), column: Some("value".into()) };
    let spec = InstanceSpec::new(0, p("1,3,2"), kind).with_erasure(0.2);
    let a = build_instance(&spec, 1, None).unwrap();
    let b = build_instance(&spec, 2, None).unwrap();
    assert_eq!(a.oracle.len(), 500);
    assert_ne!(a.oracle.entries(), b.oracle.entries());
    let cfg = TesterConfig::new(p("1,3,2"), 0.2).with_m(8).with_kappa(8);
    let report = run_experiment(&spec, &cfg, 5).unwrap();
    assert_eq!(report.n, 500);
    assert_eq!(report.rejections, 5);
}

#[test]
fn bench_query_fraction_falls_with_n() {
    let spec = InstanceSpec::new(0, p("3,2,1,4"), InstanceKind::PlantedFar(0.25)).with_seed(3);
    let cfg = TesterConfig::new(p("3,2,1,4"), 0.25).with_eta(1.0 / 3.0);
    let report = bench(&spec, &cfg, &[1 << 12, 1 << 14], 5).unwrap();
    assert!(report.rows[1].query_fraction < report.rows[0].query_fraction);
}
