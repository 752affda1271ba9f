//! Flat binary fixtures: field elements as little-endian `u64`s, with a JSON
//! sidecar describing how to read them.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{FieldConfig, FieldElement};

use super::TxLayout;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sidecar {
    pub q: u64,
    #[serde(rename = "K")]
    pub shards: usize,
    #[serde(rename = "Q")]
    pub slots: usize,
    #[serde(rename = "R")]
    pub tx_len: usize,
    pub layout: TxLayout,
    /// What the elements form, e.g. `"block"` or `"shard"`.
    pub kind: String,
    pub element_count: usize,
    pub element_bytes: usize,
    pub byte_order: String,
}

impl Sidecar {
    pub fn new(q: u64, shards: usize, slots: usize, layout: TxLayout, kind: &str, element_count: usize) -> Self {
        Self {
            q,
            shards,
            slots,
            tx_len: layout.r_len(),
            layout,
            kind: kind.to_string(),
            element_count,
            element_bytes: 8,
            byte_order: "little".into(),
        }
    }
}

pub fn encode_elements(elems: &[FieldElement]) -> Vec<u8> {
    elems.iter().flat_map(|e| e.value().to_le_bytes()).collect()
}

pub fn decode_elements(field: FieldConfig, bytes: &[u8]) -> Result<Vec<FieldElement>> {
    if !bytes.len().is_multiple_of(8) {
        return Err(Error::Shape(format!("{} bytes is not a whole number of elements", bytes.len())));
    }
    bytes
        .chunks_exact(8)
        .map(|c| {
            let v = u64::from_le_bytes(c.try_into().expect("8-byte chunk"));
            if v >= field.modulus() {
                return Err(Error::Shape(format!("value {v} is not reduced mod {}", field.modulus())));
            }
            Ok(field.elem(v))
        })
        .collect()
}

pub fn sidecar_path(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

/// Writes `bin` and its sidecar next to it (same stem, `.json`).
pub fn write_fixture(bin: &Path, elems: &[FieldElement], sidecar: &Sidecar) -> Result<()> {
    if sidecar.element_count != elems.len() {
        return Err(Error::Shape("sidecar element count disagrees with data".into()));
    }
    fs::write(bin, encode_elements(elems))?;
    fs::write(sidecar_path(bin), serde_json::to_string_pretty(sidecar)? + "\n")?;
    Ok(())
}

pub fn read_fixture(bin: &Path) -> Result<(Sidecar, Vec<FieldElement>)> {
    let sidecar: Sidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(bin))?)?;
    if sidecar.element_bytes != 8 || sidecar.byte_order != "little" {
        return Err(Error::Config("unsupported element encoding".into()));
    }
    let field = FieldConfig::new(sidecar.q)?;
    let elems = decode_elements(field, &fs::read(bin)?)?;
    if elems.len() != sidecar.element_count {
        return Err(Error::Shape(format!(
            "{} elements on disk, sidecar says {}",
            elems.len(),
            sidecar.element_count
        )));
    }
    Ok((sidecar, elems))
}
