use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

use super::{EpochReport, SimConfig, SimOutcome};

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 12] = [
    "epoch",
    "stage1_rounds",
    "stage2_rounds",
    "stage3_rounds",
    "total_rounds",
    "leader_download_strips",
    "nonleader_download_strips",
    "invalid_count",
    "abandoned_count",
    "ci_rate",
    "indicators_agree",
    "decode_ok",
];

fn csv_row(r: &EpochReport) -> Vec<String> {
    let ci = *r.ci_rate.numer() as f64 / *r.ci_rate.denom() as f64;
    vec![
        r.epoch.to_string(),
        r.stage_rounds[0].to_string(),
        r.stage_rounds[1].to_string(),
        r.stage_rounds[2].to_string(),
        r.total_rounds().to_string(),
        r.leader_download_strips.to_string(),
        r.nonleader_download_strips.to_string(),
        r.invalid_count.to_string(),
        r.abandoned_count.to_string(),
        ci.to_string(),
        r.indicators_agree.to_string(),
        r.decode_ok.to_string(),
    ]
}

pub fn metrics_csv(reports: &[EpochReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in reports {
        w.write_record(csv_row(r))?;
    }
    w.flush()?;
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

#[derive(Serialize)]
struct Derived {
    adversaries: usize,
    stragglers: usize,
    decoder_radius: usize,
    final_deg_f: usize,
    recovery_threshold: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    schema_version: u32,
    config: &'a SimConfig,
    derived: Derived,
    completed: bool,
    verdict: &'a super::Verdict,
    epochs: &'a [EpochReport],
}

pub fn summary_json(cfg: &SimConfig, outcome: &SimOutcome) -> Result<String> {
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        config: cfg,
        derived: Derived {
            adversaries: cfg.adversary_count(),
            stragglers: cfg.straggler_count(),
            decoder_radius: cfg.radius(),
            final_deg_f: cfg.final_degrees().deg_f(),
            recovery_threshold: cfg.recovery_threshold(),
        },
        completed: outcome.completed,
        verdict: &outcome.verdict,
        epochs: &outcome.reports,
    };
    Ok(serde_json::to_string_pretty(&summary)? + "\n")
}

/// Writes `metrics.csv` and `summary.json` into `dir`, creating it if needed.
pub fn export_metrics(cfg: &SimConfig, outcome: &SimOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("metrics.csv"), metrics_csv(&outcome.reports)?)?;
    fs::write(dir.join("summary.json"), summary_json(cfg, outcome)?)?;
    Ok(())
}
