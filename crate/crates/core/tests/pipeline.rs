use codedshard::ledger::io::read_fixture;
use codedshard::ledger::{Block, StripShape};
use codedshard::sim::{export_metrics, run_simulation, write_fixtures, SimConfig, Simulation, CSV_COLUMNS};
use codedshard::FieldConfig;

fn cfg() -> SimConfig {
    SimConfig {
        epochs: 2,
        invalid_rate: 0.15,
        adversaries: Some(1),
        stragglers: Some(2),
        seed: 3,
        ..SimConfig::default()
    }
}

#[test]
fn export_is_deterministic() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let out = run_simulation(&cfg(), false).unwrap();
        assert!(out.verdict.consistent);
        export_metrics(&cfg(), &out, d.path()).unwrap();
    }
    let read = |d: &tempfile::TempDir, f| std::fs::read(d.path().join(f)).unwrap();
    assert_eq!(read(&dirs[0], "metrics.csv"), read(&dirs[1], "metrics.csv"));
    assert_eq!(read(&dirs[0], "summary.json"), read(&dirs[1], "summary.json"));

    let csv = String::from_utf8(read(&dirs[0], "metrics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), CSV_COLUMNS.len());
        // ci_rate = abandoned / (Q K^2)
        let abandoned: f64 = f[8].parse().unwrap();
        let rate: f64 = f[9].parse().unwrap();
        assert!((rate - abandoned / 32.0).abs() < 1e-12);
    }

    let summary: serde_json::Value = serde_json::from_slice(&read(&dirs[0], "summary.json")).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["config"]["K"], 4);
    assert_eq!(summary["epochs"].as_array().unwrap().len(), 2);
    assert_eq!(summary["verdict"]["consistent"], true);
}

#[test]
fn unwritable_path_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    std::fs::write(&file, b"x").unwrap();
    let out = run_simulation(&SimConfig { epochs: 0, ..cfg() }, false).unwrap();
    let err = export_metrics(&cfg(), &out, &file.join("sub")).unwrap_err();
    assert!(matches!(err, codedshard::Error::Io(_)));
}

#[test]
fn fixtures_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg();
    let paths = write_fixtures(&c, false, dir.path()).unwrap();
    assert_eq!(paths.len(), c.shards + 1);

    let mut sim = Simulation::new(c.clone(), false).unwrap();
    let (side, elems) = read_fixture(&dir.path().join("block.bin")).unwrap();
    assert_eq!(side.element_count, elems.len());
    let layout = sim.scheme().layout();
    let shape = StripShape {
        shards: c.shards,
        slots: c.slots,
        tx_len: layout.r_len(),
    };
    let block = Block::from_flat(shape, elems).unwrap();
    assert_eq!(block, sim.preview_block().unwrap());
    for (k, shard) in sim.reference_shards().iter().enumerate() {
        let (_, elems) = read_fixture(&dir.path().join(format!("shard_{k}.bin"))).unwrap();
        assert_eq!(elems, shard.data());
        assert!(elems.iter().all(|e| e.field() == FieldConfig::default()));
    }
}

#[test]
fn stragglers_and_adversaries_together() {
    // threshold 6*3 + 4 + 2*2 + 1 = 27
    let c = SimConfig {
        nodes: 27,
        adversaries: Some(2),
        stragglers: Some(4),
        invalid_rate: 0.3,
        epochs: 3,
        seed: 19,
        ..SimConfig::default()
    };
    assert_eq!(c.recovery_threshold(), 27);
    let out = run_simulation(&c, false).unwrap();
    assert!(out.completed && out.verdict.consistent);
    assert!(out.reports.iter().all(|r| r.indicators_agree));
}
