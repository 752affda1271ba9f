use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::FieldElement;
use crate::lcc::{decode_codeword, Codeword};
use crate::ledger::{Shard, Strip, TxScheme};

use super::{verify_strip, ResultMatrix};

/// What one node holds during an epoch: its coded shard and, once
/// propagation has finished, its coded outgoing and incoming strips.
#[derive(Clone, Debug)]
pub struct CodedNode {
    pub index: usize,
    pub alpha: FieldElement,
    pub shard: Shard,
    pub outgoing: Option<Strip>,
    pub incoming: Option<Strip>,
}

impl CodedNode {
    pub fn new(index: usize, alpha: FieldElement, shard: Shard) -> Self {
        Self {
            index,
            alpha,
            shard,
            outgoing: None,
            incoming: None,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.outgoing.is_some() && self.incoming.is_some()
    }
}

/// `F(h_i, V_i)` on the node's coded inputs, through the same code path as
/// uncoded verification.
pub fn coded_verify(scheme: &TxScheme, node: &CodedNode) -> Result<ResultMatrix> {
    let strip = node.outgoing.as_ref().ok_or(Error::IncompleteNode(node.index))?;
    verify_strip(scheme, strip, &node.shard)
}

/// Degree of `F` in its inputs and of the coded results in `z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeLedger {
    /// Current shard log-size `T`.
    pub log_size: usize,
    /// Hash degree `d`.
    pub hash_degree: usize,
    pub shards: usize,
}

impl DegreeLedger {
    pub fn new(log_size: usize, hash_degree: usize, shards: usize) -> Self {
        Self {
            log_size,
            hash_degree,
            shards,
        }
    }

    /// `max(T + 1, d, 3)`: fetch is multilinear in `T` rows of `u` times the
    /// shard, and `f_MQ` is cubic jointly in `(p, s)`.
    pub fn deg_f(&self) -> usize {
        (self.log_size + 1).max(self.hash_degree).max(3)
    }

    pub fn deg_in_z(&self) -> usize {
        self.deg_f() * self.shards.saturating_sub(1)
    }

    /// Responses needed with `stragglers` silent and `adversaries` lying.
    pub fn recovery_threshold(&self, stragglers: usize, adversaries: usize) -> usize {
        self.deg_in_z() + stragglers + 2 * adversaries + 1
    }
}

/// Recovers the uncoded result matrices `R_1..R_K` from coded responses
/// `(alpha_i, R~_i)`, tolerating up to `max_errors` wrong responses.
pub fn decode_results(
    responses: &[(FieldElement, ResultMatrix)],
    degrees: &DegreeLedger,
    max_errors: usize,
    omegas: &[FieldElement],
) -> Result<Vec<ResultMatrix>> {
    let (rows, cols) = match responses.first() {
        Some((_, m)) => (m.rows(), m.cols()),
        None => {
            return Err(Error::InsufficientData {
                needed: degrees.deg_in_z() + 2 * max_errors + 1,
                got: 0,
            })
        }
    };
    let mut cw = Codeword::new(rows * cols);
    for (i, (alpha, m)) in responses.iter().enumerate() {
        if (m.rows(), m.cols()) != (rows, cols) {
            return Err(Error::Shape("responses disagree in shape".into()));
        }
        cw.insert(i, *alpha, m.data().to_vec())?;
    }
    let polys = decode_codeword(&cw, degrees.deg_in_z(), max_errors).map_err(|e| match e {
        Error::DecodingFailure { max_errors, .. } => Error::AdversaryThresholdExceeded { max_errors },
        other => other,
    })?;
    omegas
        .iter()
        .map(|&w| ResultMatrix::from_flat(rows, cols, polys.iter().map(|p| p.eval(w)).collect()))
        .collect()
}

/// Per-transaction validity bits of one outgoing strip; `true` means the
/// result column was all zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndicatorVector(pub Vec<bool>);

impl IndicatorVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_valid(&self, j: usize) -> bool {
        self.0[j]
    }

    pub fn invalid_count(&self) -> usize {
        self.0.iter().filter(|&&v| !v).count()
    }
}

pub fn indicators_from(results: &[ResultMatrix]) -> Vec<IndicatorVector> {
    results
        .iter()
        .map(|m| IndicatorVector((0..m.cols()).map(|j| m.column(j).iter().all(|x| x.is_zero())).collect()))
        .collect()
}

// (k, s) positions whose transaction to some receiver was invalid. Entry j of
// indicator k refers to receiver j / Q, slot j % Q.
fn abandoned_positions(indicators: &[IndicatorVector], slots: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (k, e) in indicators.iter().enumerate() {
        for s in 0..slots {
            if (0..e.len() / slots.max(1)).any(|r| !e.is_valid(r * slots + s)) {
                out.push((k, s));
            }
        }
    }
    out
}

/// Zeroes, in an incoming strip (coded or not), the transaction at tiny block
/// `k`, slot `s` whenever the sender-`k` slot-`s` transaction to any receiver
/// was invalid. Returns how many positions were zeroed.
pub fn filter_strip(strip: &mut Strip, indicators: &[IndicatorVector]) -> Result<usize> {
    let shape = strip.shape();
    if indicators.len() != shape.shards {
        return Err(Error::IncompleteDecode {
            expected: shape.shards,
            got: indicators.len(),
        });
    }
    if indicators.iter().any(|e| e.len() != shape.tx_count()) {
        return Err(Error::Shape("indicator length does not match the strip".into()));
    }
    let positions = abandoned_positions(indicators, shape.slots);
    for &(k, s) in &positions {
        strip.zero_tx(k * shape.slots + s);
    }
    Ok(positions.len())
}

/// Filters the node's coded incoming strip and appends it to its coded shard.
pub fn coded_append(node: &mut CodedNode, indicators: &[IndicatorVector]) -> Result<()> {
    let mut strip = node.incoming.clone().ok_or(Error::IncompleteNode(node.index))?;
    filter_strip(&mut strip, indicators)?;
    node.shard.append(&strip)
}

/// Collateral invalidation for one epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiStats {
    pub shards: usize,
    pub slots: usize,
    pub invalid: usize,
    /// Transactions dropped from the incoming strips, invalid ones included.
    pub abandoned: usize,
}

impl CiStats {
    /// Abandoned fraction of the epoch's `Q K^2` transactions.
    pub fn ci_rate(&self) -> Ratio<u64> {
        let total = (self.slots * self.shards * self.shards) as u64;
        if total == 0 {
            return Ratio::from_integer(0);
        }
        Ratio::new(self.abandoned as u64, total)
    }
}

pub fn ci_stats(indicators: &[IndicatorVector], slots: usize) -> CiStats {
    let shards = indicators.len();
    CiStats {
        shards,
        slots,
        invalid: indicators.iter().map(IndicatorVector::invalid_count).sum(),
        abandoned: shards * abandoned_positions(indicators, slots).len(),
    }
}

/// One invalid transaction in a Polyshard block costs the sender's whole
/// block: a fraction `1/K` of the epoch.
pub fn polyshard_ci_rate(shards: usize) -> Ratio<u64> {
    Ratio::new(1, shards.max(1) as u64)
}
