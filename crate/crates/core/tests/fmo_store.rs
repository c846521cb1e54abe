use std::fs;

use spinnet_core::fmo::{
    bare_maximum, enumerate_even_distributions, sweep, sweep_to_store, RecordStore, SweepConfig, FMO_SITES,
};
use spinnet_core::{Error, TimeWindow};

fn small_config() -> SweepConfig {
    SweepConfig {
        total_spins: 4,
        gammas: vec![0.0, 20.0, 32.0],
        window: TimeWindow::with_points(0.3, 601),
        ..SweepConfig::new(0, 2)
    }
}

#[test]
fn record_count_and_gamma_zero_column() {
    let config = small_config();
    let records = sweep(&config).unwrap();
    let dists = enumerate_even_distributions(4, FMO_SITES).unwrap();
    assert_eq!(records.len(), dists.len() * 3);
    let bare = bare_maximum(&config).unwrap();
    for r in records.iter().filter(|r| r.gamma == 0.0) {
        assert!((r.max_probability - bare.probability).abs() < 1e-12, "{}", r.distribution);
    }
    for r in &records {
        assert!((0.0..=1.0 + 1e-9).contains(&r.max_probability));
        assert!((0.0..=0.3 + 1e-12).contains(&r.argmax_time_ps));
    }
}

#[test]
fn identical_runs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    let a = RecordStore::new(dir.path().join("a.jsonl"));
    let b = RecordStore::new(dir.path().join("b.jsonl"));
    sweep_to_store(&config, &a, |_, _| {}).unwrap();
    sweep_to_store(&config, &b, |_, _| {}).unwrap();
    assert_eq!(fs::read(a.path()).unwrap(), fs::read(b.path()).unwrap());
}

#[test]
fn resume_after_interruption_matches_clean_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    let clean = RecordStore::new(dir.path().join("clean.jsonl"));
    let all = sweep_to_store(&config, &clean, |_, _| {}).unwrap();
    let full = fs::read_to_string(clean.path()).unwrap();

    // keep the first 10 lines and half of the 11th, as a crash mid-write would
    let lines: Vec<&str> = full.lines().collect();
    let mut partial = lines[..10].join("\n");
    partial.push('\n');
    partial.push_str(&lines[10][..lines[10].len() / 2]);
    let resumed = RecordStore::new(dir.path().join("resumed.jsonl"));
    fs::write(resumed.path(), partial).unwrap();

    let mut calls = Vec::new();
    let again = sweep_to_store(&config, &resumed, |done, total| calls.push((done, total))).unwrap();
    assert_eq!(calls[0], (10, all.len()));
    assert_eq!(again, all);
    assert_eq!(fs::read_to_string(resumed.path()).unwrap(), full);

    // a finished store is left alone
    sweep_to_store(&config, &resumed, |_, _| {}).unwrap();
    assert_eq!(fs::read_to_string(resumed.path()).unwrap(), full);
}

#[test]
fn mismatched_store_reports_record_key() {
    let dir = tempfile::tempdir().unwrap();
    let store = RecordStore::new(dir.path().join("r.jsonl"));
    let config = small_config();
    sweep_to_store(&config, &store, |_, _| {}).unwrap();
    let other = SweepConfig {
        temperature_k: 77.0,
        ..small_config()
    };
    match sweep_to_store(&other, &store, |_, _| {}) {
        Err(Error::Persistence { key, .. }) => assert!(key.contains("(4,0,0,0,0,0,0)"), "{key}"),
        other => panic!("expected a persistence error, got {other:?}"),
    }
}

#[test]
fn corrupt_line_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let store = RecordStore::new(dir.path().join("r.jsonl"));
    fs::write(store.path(), "not json\n").unwrap();
    match store.load() {
        Err(Error::Persistence { key, .. }) => assert_eq!(key, "line 1"),
        other => panic!("expected a persistence error, got {other:?}"),
    }
}

#[test]
fn unwritable_store_fails() {
    let dir = tempfile::tempdir().unwrap();
    let store = RecordStore::new(dir.path().join("missing").join("r.jsonl"));
    let err = sweep_to_store(&small_config(), &store, |_, _| {}).unwrap_err();
    assert!(matches!(err, Error::Persistence { .. }), "{err:?}");
}
