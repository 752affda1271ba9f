use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{FieldConfig, FieldElement};

use super::{log_size, Transaction, TxLayout};

/// Dimensions shared by every strip of a system: `K` tiny blocks of `Q`
/// transactions, each `R` field elements long.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripShape {
    pub shards: usize,
    pub slots: usize,
    pub tx_len: usize,
}

impl StripShape {
    pub fn tx_count(&self) -> usize {
        self.shards * self.slots
    }

    pub fn tiny_len(&self) -> usize {
        self.slots * self.tx_len
    }

    pub fn strip_len(&self) -> usize {
        self.shards * self.tiny_len()
    }
}

/// `K` tiny blocks laid end to end. Transaction `j` sits in tiny block
/// `j / Q`, slot `j % Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strip {
    shape: StripShape,
    data: Vec<FieldElement>,
}

impl Strip {
    pub fn from_flat(shape: StripShape, data: Vec<FieldElement>) -> Result<Self> {
        if data.len() != shape.strip_len() {
            return Err(Error::Shape(format!(
                "strip of length {} (expected {})",
                data.len(),
                shape.strip_len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(field: FieldConfig, shape: StripShape) -> Self {
        Self {
            shape,
            data: field.zeros(shape.strip_len()),
        }
    }

    pub fn shape(&self) -> StripShape {
        self.shape
    }

    pub fn data(&self) -> &[FieldElement] {
        &self.data
    }

    pub fn into_data(self) -> Vec<FieldElement> {
        self.data
    }

    pub fn tx_count(&self) -> usize {
        self.shape.tx_count()
    }

    pub fn tx(&self, j: usize) -> &[FieldElement] {
        let r = self.shape.tx_len;
        &self.data[j * r..(j + 1) * r]
    }

    pub fn tiny_block(&self, t: usize) -> &[FieldElement] {
        let n = self.shape.tiny_len();
        &self.data[t * n..(t + 1) * n]
    }

    pub fn transactions(&self) -> impl Iterator<Item = &[FieldElement]> {
        self.data.chunks_exact(self.shape.tx_len.max(1))
    }

    /// Overwrites transaction `j` with zeros.
    pub fn zero_tx(&mut self, j: usize) {
        let r = self.shape.tx_len;
        let zero = self.data[0].field().zero();
        self.data[j * r..(j + 1) * r].fill(zero);
    }
}

/// The `K x K` grid of tiny blocks for one epoch; tiny block `(k, r)` holds
/// transactions from community `k` to community `r`. Stored row-major by
/// `(k, r, slot)` so that an outgoing strip is a contiguous slice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    shape: StripShape,
    data: Vec<FieldElement>,
}

impl Block {
    pub fn from_flat(shape: StripShape, data: Vec<FieldElement>) -> Result<Self> {
        if data.len() != shape.shards * shape.strip_len() {
            return Err(Error::Shape(format!(
                "block of length {} (expected {})",
                data.len(),
                shape.shards * shape.strip_len()
            )));
        }
        Ok(Self { shape, data })
    }

    /// Reassembles a block from its outgoing strips `h_1..h_K`.
    pub fn from_outgoing(strips: &[Strip]) -> Result<Self> {
        let shape = strips
            .first()
            .ok_or_else(|| Error::Shape("no strips".into()))?
            .shape();
        if strips.len() != shape.shards || strips.iter().any(|s| s.shape() != shape) {
            return Err(Error::Shape("outgoing strips do not form a block".into()));
        }
        Self::from_flat(shape, strips.iter().flat_map(|s| s.data().iter().copied()).collect())
    }

    pub fn shape(&self) -> StripShape {
        self.shape
    }

    pub fn data(&self) -> &[FieldElement] {
        &self.data
    }

    fn check(&self, k: usize) -> Result<()> {
        if k >= self.shape.shards {
            return Err(Error::IndexOutOfRange {
                index: k,
                bound: self.shape.shards,
            });
        }
        Ok(())
    }

    pub fn tiny_block(&self, k: usize, r: usize) -> Result<&[FieldElement]> {
        self.check(k)?;
        self.check(r)?;
        let n = self.shape.tiny_len();
        let start = (k * self.shape.shards + r) * n;
        Ok(&self.data[start..start + n])
    }

    /// `h_k`: every transaction spending shard-`k` outputs.
    pub fn outgoing_strip(&self, k: usize) -> Result<Strip> {
        self.check(k)?;
        let n = self.shape.strip_len();
        Strip::from_flat(self.shape, self.data[k * n..(k + 1) * n].to_vec())
    }

    /// `v_r`: every transaction creating shard-`r` outputs, ordered by sender.
    pub fn incoming_strip(&self, r: usize) -> Result<Strip> {
        self.check(r)?;
        let mut data = Vec::with_capacity(self.shape.strip_len());
        for k in 0..self.shape.shards {
            data.extend_from_slice(self.tiny_block(k, r)?);
        }
        Strip::from_flat(self.shape, data)
    }

    pub fn outgoing_strips(&self) -> Vec<Strip> {
        (0..self.shape.shards)
            .map(|k| self.outgoing_strip(k).expect("index in range"))
            .collect()
    }

    pub fn incoming_strips(&self) -> Vec<Strip> {
        (0..self.shape.shards)
            .map(|r| self.incoming_strip(r).expect("index in range"))
            .collect()
    }
}

/// Assembles an epoch block from `pairs[k][r]`, the transactions sent from
/// community `k` to community `r`. Tiny blocks with fewer than `slots`
/// transactions are padded with null transactions.
pub fn build_block(field: FieldConfig, layout: TxLayout, slots: usize, pairs: &[Vec<Vec<Transaction>>]) -> Result<Block> {
    let shards = pairs.len();
    let shape = StripShape {
        shards,
        slots,
        tx_len: layout.r_len(),
    };
    let mut data = Vec::with_capacity(shards * shape.strip_len());
    let null = Transaction::null(field, layout);
    for (k, row) in pairs.iter().enumerate() {
        if row.len() != shards {
            return Err(Error::Shape(format!("sender {k} has {} receivers (expected {shards})", row.len())));
        }
        for (r, txs) in row.iter().enumerate() {
            if txs.len() > slots {
                return Err(Error::Capacity(format!(
                    "{} transactions from {k} to {r} exceed {slots} slots",
                    txs.len()
                )));
            }
            for tx in txs {
                if tx.layout() != layout {
                    return Err(Error::Shape("transaction layout mismatch".into()));
                }
                data.extend_from_slice(tx.flat());
            }
            for _ in txs.len()..slots {
                data.extend_from_slice(null.flat());
            }
        }
    }
    Block::from_flat(shape, data)
}

/// An append-only sequence of incoming strips for one community (or its
/// coded counterpart). Entry `m` is the `m`-th transaction in epoch order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shard {
    tx_len: usize,
    capacity: usize,
    data: Vec<FieldElement>,
}

impl Shard {
    pub fn new(tx_len: usize, t_max: usize) -> Self {
        Self {
            tx_len,
            capacity: 1usize << t_max,
            data: Vec::new(),
        }
    }

    pub fn from_entries(tx_len: usize, t_max: usize, data: Vec<FieldElement>) -> Result<Self> {
        let shard = Self {
            tx_len,
            capacity: 1usize << t_max,
            data,
        };
        if tx_len == 0 || !shard.data.len().is_multiple_of(tx_len) {
            return Err(Error::Shape("shard data is not a whole number of transactions".into()));
        }
        if shard.len() > shard.capacity {
            return Err(Error::Capacity(format!("{} entries exceed {}", shard.len(), shard.capacity)));
        }
        Ok(shard)
    }

    pub fn tx_len(&self) -> usize {
        self.tx_len
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// `M`, the number of transaction slots held.
    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.tx_len).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// `T = ceil(log2 M)`, the tensor dimension of the shard.
    pub fn log_size(&self) -> usize {
        log_size(self.len())
    }

    pub fn data(&self) -> &[FieldElement] {
        &self.data
    }

    pub fn entry(&self, m: usize) -> Result<&[FieldElement]> {
        if m >= self.len() {
            return Err(Error::IndexOutOfRange { index: m, bound: self.len() });
        }
        Ok(&self.data[m * self.tx_len..(m + 1) * self.tx_len])
    }

    pub fn append(&mut self, strip: &Strip) -> Result<()> {
        if strip.shape().tx_len != self.tx_len {
            return Err(Error::Shape(format!(
                "strip transactions of length {} (shard expects {})",
                strip.shape().tx_len,
                self.tx_len
            )));
        }
        let after = self.len() + strip.tx_count();
        if after > self.capacity {
            return Err(Error::Capacity(format!(
                "appending {} transactions to {} exceeds capacity {}",
                strip.tx_count(),
                self.len(),
                self.capacity
            )));
        }
        self.data.extend_from_slice(strip.data());
        Ok(())
    }
}
