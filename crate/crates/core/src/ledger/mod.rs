//! Two-dimensional sharded data model: transactions, tiny blocks, epoch
//! blocks, strips, and append-only shards.

mod block;
pub mod io;
mod wallet;

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{FieldConfig, FieldElement};

pub use block::{build_block, Block, Shard, Strip, StripShape};
pub use wallet::{make_invalid_transaction, make_transaction, InvalidKind, SchemeParams, TxScheme, UtxoRef, Wallet};

/// Segment lengths of a flat transaction `(u, p, a, s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxLayout {
    pub t_max: usize,
    pub b_len: usize,
    pub c_len: usize,
    pub ds_len: usize,
}

impl TxLayout {
    pub fn a_len(&self) -> usize {
        2 * self.t_max
    }

    /// Total transaction length `R`.
    pub fn r_len(&self) -> usize {
        self.a_len() + self.b_len + self.c_len + self.ds_len
    }

    pub fn u_range(&self) -> Range<usize> {
        0..self.a_len()
    }

    pub fn p_range(&self) -> Range<usize> {
        let start = self.a_len();
        start..start + self.b_len
    }

    pub fn a_range(&self) -> Range<usize> {
        let start = self.a_len() + self.b_len;
        start..start + self.c_len
    }

    pub fn s_range(&self) -> Range<usize> {
        let start = self.a_len() + self.b_len + self.c_len;
        start..start + self.ds_len
    }

    /// Largest number of transactions a shard may hold.
    pub fn capacity(&self) -> u128 {
        1u128 << self.t_max
    }
}

/// One transaction, stored flat as `u || p || a || s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transaction {
    layout: TxLayout,
    flat: Vec<FieldElement>,
}

impl Transaction {
    pub fn from_parts(
        layout: TxLayout,
        u: &[FieldElement],
        p: &[FieldElement],
        a: &[FieldElement],
        s: &[FieldElement],
    ) -> Result<Self> {
        let lens = [u.len(), p.len(), a.len(), s.len()];
        let want = [layout.a_len(), layout.b_len, layout.c_len, layout.ds_len];
        if lens != want {
            return Err(Error::Shape(format!("segment lengths {lens:?} (expected {want:?})")));
        }
        Self::from_flat(layout, [u, p, a, s].concat())
    }

    pub fn from_flat(layout: TxLayout, flat: Vec<FieldElement>) -> Result<Self> {
        if flat.len() != layout.r_len() {
            return Err(Error::Shape(format!(
                "transaction of length {} (expected {})",
                flat.len(),
                layout.r_len()
            )));
        }
        Ok(Self { layout, flat })
    }

    /// The designated null transaction used to pad under-full tiny blocks.
    pub fn null(field: FieldConfig, layout: TxLayout) -> Self {
        Self {
            layout,
            flat: field.zeros(layout.r_len()),
        }
    }

    pub fn layout(&self) -> TxLayout {
        self.layout
    }

    pub fn flat(&self) -> &[FieldElement] {
        &self.flat
    }

    pub fn into_flat(self) -> Vec<FieldElement> {
        self.flat
    }

    pub fn u(&self) -> &[FieldElement] {
        &self.flat[self.layout.u_range()]
    }

    pub fn p(&self) -> &[FieldElement] {
        &self.flat[self.layout.p_range()]
    }

    pub fn a(&self) -> &[FieldElement] {
        &self.flat[self.layout.a_range()]
    }

    pub fn s(&self) -> &[FieldElement] {
        &self.flat[self.layout.s_range()]
    }

    pub fn flat_mut(&mut self) -> &mut [FieldElement] {
        &mut self.flat
    }
}

/// Number of tensor dimensions needed to index `m` entries: `ceil(log2 m)`,
/// and 0 for `m <= 1`.
pub fn log_size(m: usize) -> usize {
    if m <= 1 {
        0
    } else {
        (usize::BITS - (m - 1).leading_zeros()) as usize
    }
}

/// The flattened `t_max x 2` lookup matrix selecting index `m` of a `t`-bit
/// tensor. Row `j < t` is the one-hot of bit `t-1-j` of `m` (row 0 holds the
/// most significant bit, and a bit `b` sets column `b`); rows `t..t_max` are
/// the one-hot of 0.
pub fn lookup_matrix_for(field: FieldConfig, m: u64, t: usize, t_max: usize) -> Result<Vec<FieldElement>> {
    if t > t_max || t >= 64 {
        return Err(Error::Shape(format!("{t} index bits with only {t_max} rows")));
    }
    if m >= 1u64 << t {
        return Err(Error::IndexOutOfRange {
            index: m as usize,
            bound: 1usize << t,
        });
    }
    let mut u = field.zeros(2 * t_max);
    for row in 0..t_max {
        let bit = if row < t { (m >> (t - 1 - row)) & 1 } else { 0 };
        u[2 * row + bit as usize] = field.one();
    }
    Ok(u)
}

/// Inverse of [`lookup_matrix_for`] on well-formed one-hot matrices.
pub fn index_of(u: &[FieldElement], t: usize) -> Result<u64> {
    if !u.len().is_multiple_of(2) || u.len() / 2 < t {
        return Err(Error::Shape(format!("lookup matrix of length {} for {t} bits", u.len())));
    }
    let mut m = 0u64;
    for row in u.chunks_exact(2) {
        if !matches!((row[0].value(), row[1].value()), (1, 0) | (0, 1)) {
            return Err(Error::Shape("lookup matrix row is not one-hot".into()));
        }
    }
    for row in u.chunks_exact(2).take(t) {
        m = (m << 1) | row[1].value();
    }
    Ok(m)
}
