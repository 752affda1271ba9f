use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::DEFAULT_MODULUS;
use crate::ledger::log_size;
use crate::verifier::DegreeLedger;

/// Everything that determines a simulation run. Serialized as JSON with the
/// same keys the command line uses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub q: u64,
    #[serde(rename = "K")]
    pub shards: usize,
    #[serde(rename = "N")]
    pub nodes: usize,
    #[serde(rename = "Q")]
    pub slots: usize,
    /// Per-round node capacity in strips.
    #[serde(rename = "D")]
    pub capacity: usize,
    pub epochs: usize,
    #[serde(rename = "Tmax")]
    pub t_max: usize,
    /// Hash degree.
    pub d: usize,
    /// Adversarial fraction; `A = floor(beta N)`.
    pub beta: f64,
    /// Fraction of responses awaited; `S = N - ceil(gamma N)`.
    pub gamma: f64,
    /// Probability that a generated transaction is replaced by an invalid one.
    pub invalid_rate: f64,
    /// Exact number of invalid transactions per epoch; overrides the rate.
    pub invalid_count: Option<usize>,
    /// Explicit `A`; overrides `beta`.
    pub adversaries: Option<usize>,
    /// Explicit `S`; overrides `gamma`.
    pub stragglers: Option<usize>,
    /// Error radius honest nodes decode with; defaults to `A`.
    pub decoder_radius: Option<usize>,
    pub wallets_per_community: usize,
    /// Address length `C`.
    pub address_len: usize,
    pub vinegar: usize,
    /// Oil variables, equal to the signed message length `E`.
    pub oil: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            q: DEFAULT_MODULUS,
            shards: 4,
            nodes: 40,
            slots: 2,
            capacity: 1,
            epochs: 3,
            t_max: 6,
            d: 3,
            beta: 0.0,
            gamma: 1.0,
            invalid_rate: 0.0,
            invalid_count: None,
            adversaries: None,
            stragglers: None,
            decoder_radius: None,
            wallets_per_community: 2,
            address_len: 2,
            vinegar: 4,
            oil: 2,
            seed: 0,
        }
    }
}

// Guards the float-to-count conversions against representation error, so
// that e.g. 0.3 * 10 counts as 3.
const EPS: f64 = 1e-9;

impl SimConfig {
    pub fn adversary_count(&self) -> usize {
        self.adversaries
            .unwrap_or_else(|| (self.beta * self.nodes as f64 + EPS).floor().max(0.0) as usize)
    }

    pub fn straggler_count(&self) -> usize {
        self.stragglers.unwrap_or_else(|| {
            let awaited = (self.gamma * self.nodes as f64 - EPS).ceil().max(0.0) as usize;
            self.nodes.saturating_sub(awaited)
        })
    }

    pub fn radius(&self) -> usize {
        self.decoder_radius.unwrap_or_else(|| self.adversary_count())
    }

    /// Shard size when epoch `e` (1-based) is verified: the genesis strip
    /// plus `e - 1` appended strips.
    pub fn shard_len_at(&self, epoch: usize) -> usize {
        self.shards * self.slots * epoch
    }

    /// Degree bookkeeping for the last (largest) epoch.
    pub fn final_degrees(&self) -> DegreeLedger {
        DegreeLedger::new(log_size(self.shard_len_at(self.epochs.max(1))), self.d, self.shards)
    }

    pub fn recovery_threshold(&self) -> usize {
        self.final_degrees()
            .recovery_threshold(self.straggler_count(), self.adversary_count())
    }

    /// Parameter combinations that cannot run at all.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.shards == 0 || self.slots == 0 || self.capacity == 0 {
            return bad("K, Q and D must be positive".into());
        }
        if self.nodes < self.shards {
            return bad(format!("N = {} is smaller than K = {}", self.nodes, self.shards));
        }
        if !(0.0..=1.0).contains(&self.beta) || !(0.0..=1.0).contains(&self.gamma) {
            return bad("beta and gamma must lie in [0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.invalid_rate) {
            return bad("invalid rate must lie in [0, 1]".into());
        }
        if self.invalid_count.is_some_and(|c| c > self.shards * self.shards * self.slots) {
            return bad("more invalid transactions than block slots".into());
        }
        if self.wallets_per_community == 0 {
            return bad("each community needs a wallet".into());
        }
        if self.stragglers.is_some_and(|s| s >= self.nodes) {
            return bad("every node straggles".into());
        }
        Ok(())
    }

    /// Violations of the conditions under which the coded pipeline is
    /// guaranteed to agree with the uncoded one. Empty when feasible.
    pub fn feasibility_problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let threshold = self.recovery_threshold();
        if threshold > self.nodes {
            out.push(format!(
                "recovery threshold {threshold} exceeds N = {} (deg_f = {}, S = {}, A = {})",
                self.nodes,
                self.final_degrees().deg_f(),
                self.straggler_count(),
                self.adversary_count()
            ));
        }
        let needed = self.shard_len_at(self.epochs + 1);
        if self.t_max >= usize::BITS as usize || needed > 1usize << self.t_max {
            out.push(format!(
                "shards reach {needed} entries, beyond 2^Tmax = 2^{}",
                self.t_max
            ));
        }
        if self.q <= (self.nodes + self.shards) as u64 {
            out.push(format!("q = {} leaves no room for N + K distinct points", self.q));
        }
        if self.adversary_count() > self.nodes - self.shards {
            out.push("more adversaries than non-leader nodes".into());
        }
        out
    }

    pub fn check_feasible(&self, force: bool) -> Result<()> {
        self.validate()?;
        let problems = self.feasibility_problems();
        if problems.is_empty() || force {
            Ok(())
        } else {
            Err(Error::Infeasible(problems.join("; ")))
        }
    }
}
