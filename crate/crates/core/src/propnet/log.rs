use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    One,
    Two,
    Three,
}

impl Stage {
    pub fn number(self) -> u8 {
        match self {
            Stage::One => 1,
            Stage::Two => 2,
            Stage::Three => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transfer {
    pub round: usize,
    pub sender: usize,
    pub receiver: usize,
    pub size_drops: usize,
    pub stage: Stage,
}

#[derive(Serialize)]
struct Line {
    round: usize,
    sender: usize,
    receiver: usize,
    size_strips: f64,
    stage: u8,
}

/// Every transfer of a propagation run. Rounds are numbered from 1 across
/// all stages.
#[derive(Clone, Debug)]
pub struct RoundLog {
    drops_per_strip: usize,
    capacity_drops: usize,
    transfers: Vec<Transfer>,
    rounds: usize,
    stage: Option<Stage>,
    sent: BTreeMap<usize, usize>,
    received: BTreeMap<usize, usize>,
}

impl RoundLog {
    pub fn new(shards: usize, capacity_strips: usize) -> Self {
        Self {
            drops_per_strip: shards,
            capacity_drops: shards * capacity_strips,
            transfers: Vec::new(),
            rounds: 0,
            stage: None,
            sent: BTreeMap::new(),
            received: BTreeMap::new(),
        }
    }

    pub(super) fn begin_round(&mut self, stage: Stage) {
        self.rounds += 1;
        self.stage = Some(stage);
        self.sent.clear();
        self.received.clear();
    }

    pub(super) fn send(&mut self, sender: usize, receiver: usize, size_drops: usize) -> Result<()> {
        let stage = self
            .stage
            .ok_or_else(|| Error::Protocol("transfer outside a round".into()))?;
        let s = self.sent.entry(sender).or_default();
        *s += size_drops;
        let r = self.received.entry(receiver).or_default();
        *r += size_drops;
        if *s > self.capacity_drops || *r > self.capacity_drops {
            return Err(Error::Protocol(format!(
                "round {}: capacity exceeded on {sender} -> {receiver}",
                self.rounds
            )));
        }
        self.transfers.push(Transfer {
            round: self.rounds,
            sender,
            receiver,
            size_drops,
            stage,
        });
        Ok(())
    }

    pub(super) fn end_round(&mut self) -> Result<()> {
        self.stage = None;
        Ok(())
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn transfers(&self) -> &[Transfer] {
        &self.transfers
    }

    pub fn drops_per_strip(&self) -> usize {
        self.drops_per_strip
    }

    /// Number of distinct rounds in which `stage` moved data.
    pub fn stage_rounds(&self, stage: Stage) -> usize {
        let mut rounds: Vec<_> = self.transfers.iter().filter(|t| t.stage == stage).map(|t| t.round).collect();
        rounds.dedup();
        rounds.len()
    }

    pub fn received_drops(&self, node: usize) -> usize {
        self.transfers.iter().filter(|t| t.receiver == node).map(|t| t.size_drops).sum()
    }

    pub fn sent_drops(&self, node: usize) -> usize {
        self.transfers.iter().filter(|t| t.sender == node).map(|t| t.size_drops).sum()
    }

    /// Re-derives per-round, per-node totals from the transfers and checks
    /// them against the capacity.
    pub fn check_capacity(&self) -> Result<()> {
        let mut sent: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut received: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for t in &self.transfers {
            *sent.entry((t.round, t.sender)).or_default() += t.size_drops;
            *received.entry((t.round, t.receiver)).or_default() += t.size_drops;
        }
        let over = sent.iter().chain(&received).find(|(_, &v)| v > self.capacity_drops);
        match over {
            Some(((round, node), v)) => Err(Error::Protocol(format!(
                "node {node} moved {v} drops in round {round}"
            ))),
            None => Ok(()),
        }
    }

    /// One JSON object per transfer:
    /// `{"round", "sender", "receiver", "size_strips", "stage"}`.
    pub fn write_json_lines<W: Write>(&self, mut w: W) -> Result<()> {
        for t in &self.transfers {
            let line = Line {
                round: t.round,
                sender: t.sender,
                receiver: t.receiver,
                size_strips: t.size_drops as f64 / self.drops_per_strip as f64,
                stage: t.stage.number(),
            };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}
