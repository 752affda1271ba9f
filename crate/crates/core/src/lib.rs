//! Coded verification for a 2-dimensionally sharded UTXO ledger.
//!
//! Transactions of one epoch form a `K x K` grid of tiny blocks. Row `k` (the
//! outgoing strip) holds everything spending coins of shard `k`; column `r`
//! (the incoming strip) holds everything creating coins in shard `r`. Each of
//! `N` nodes stores a Lagrange-coded combination of all shards, verifies a
//! coded outgoing strip against it with a low-degree polynomial, and the
//! uncoded verdicts are recovered by Reed-Solomon decoding even when some
//! nodes straggle or lie.
//!
//! Module map:
//!
//! * [`ff`]: prime field arithmetic and dense linear algebra.
//! * [`poly`]: univariate polynomials over the field.
//! * [`lcc`]: Lagrange coding, interpolation and Berlekamp-Welch decoding.
//! * [`mqcrypto`]: oil-and-vinegar signatures and seeded polynomial hashes.
//! * [`ledger`]: transactions, blocks, strips, shards and wallets.
//! * [`verifier`]: the polynomial verification pipeline, coded and uncoded.
//! * [`propnet`]: round-synchronous propagation of coded strips.
//! * [`sim`]: multi-epoch simulation, security bounds and metrics export.

pub mod error;
pub mod ff;
pub mod lcc;
pub mod ledger;
pub mod mqcrypto;
pub mod poly;
pub mod propnet;
pub mod sim;
pub mod verifier;

pub use error::{Error, Result};
pub use ff::{FieldConfig, FieldElement};
