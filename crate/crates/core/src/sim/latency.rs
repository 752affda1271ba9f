use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ff::FieldConfig;
use crate::lcc::EvaluationPoints;
use crate::ledger::{Block, StripShape};
use crate::propnet::{headline_rounds, predicted_stage_rounds, run_propagation, NetConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyRow {
    #[serde(rename = "K")]
    pub shards: usize,
    #[serde(rename = "N")]
    pub nodes: usize,
    #[serde(rename = "D")]
    pub capacity: usize,
    pub measured: [usize; 3],
    pub measured_total: usize,
    pub stagewise: [usize; 3],
    pub stagewise_total: usize,
    pub headline: f64,
    /// Largest download of any non-leader, in strips.
    pub nonleader_download_strips: f64,
}

impl LatencyRow {
    pub fn matches_stagewise(&self) -> bool {
        self.measured == self.stagewise
    }

    /// Whether the headline closed form disagrees with the measured total.
    pub fn headline_differs(&self) -> bool {
        (self.headline - self.measured_total as f64).abs() > 1e-9
    }
}

/// `N in {K, (D+1)K, (D+1)^2 K}` for each `(K, D)`.
pub fn default_nodes(shards: usize, capacity: usize) -> Vec<usize> {
    vec![shards, (capacity + 1) * shards, (capacity + 1).pow(2) * shards]
}

/// Measures one propagation with a small random block.
pub fn measure(shards: usize, nodes: usize, capacity: usize) -> Result<LatencyRow> {
    let field = FieldConfig::default();
    let cfg = NetConfig::new(nodes, shards, capacity)?;
    let points = EvaluationPoints::standard(field, shards, nodes)?;
    let shape = StripShape {
        shards,
        slots: 1,
        tx_len: 2,
    };
    let mut rng = ChaCha8Rng::seed_from_u64((shards * 1_000_003 + nodes * 31 + capacity) as u64);
    let block = Block::from_flat(shape, field.random_vec(&mut rng, shards * shape.strip_len()))?;
    let p = run_propagation(&cfg, &points, &block)?;
    p.log.check_capacity()?;
    let stagewise = predicted_stage_rounds(nodes, shards, capacity);
    let per = p.log.drops_per_strip() as f64;
    let nonleader = (shards..nodes)
        .map(|i| p.log.received_drops(i) as f64 / per)
        .fold(0.0, f64::max);
    Ok(LatencyRow {
        shards,
        nodes,
        capacity,
        measured: p.stage_rounds,
        measured_total: p.total_rounds(),
        stagewise,
        stagewise_total: stagewise.iter().sum(),
        headline: headline_rounds(nodes, shards, capacity),
        nonleader_download_strips: nonleader,
    })
}

/// One row per `(K, N, D)`; `nodes = None` uses [`default_nodes`].
pub fn latency_table(shards: &[usize], nodes: Option<&[usize]>, capacities: &[usize]) -> Result<Vec<LatencyRow>> {
    let mut rows = Vec::new();
    for &k in shards {
        for &d in capacities {
            let ns = nodes.map(<[usize]>::to_vec).unwrap_or_else(|| default_nodes(k, d));
            for n in ns {
                rows.push(measure(k, n, d)?);
            }
        }
    }
    Ok(rows)
}
