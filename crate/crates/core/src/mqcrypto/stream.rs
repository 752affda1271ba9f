use sha2::{Digest, Sha256};

use crate::ff::{FieldConfig, FieldElement};

const TAG: &[u8] = b"codedshard/field-stream/v1";

/// Counter-mode stream of field elements: block `i` is
/// `SHA-256(tag || len(label) || label || seed || i)`, cut into four 64-bit
/// little-endian words. Words at or above the largest multiple of `q` below
/// `2^64` are rejected so the output is unbiased.
#[derive(Clone, Debug)]
pub struct FieldStream {
    field: FieldConfig,
    label: Vec<u8>,
    seed: u64,
    counter: u64,
    words: Vec<u64>,
    limit: u128,
}

impl FieldStream {
    pub fn new(field: FieldConfig, label: &[u8], seed: u64) -> Self {
        let q = field.modulus() as u128;
        let limit = (1u128 << 64) / q * q;
        Self {
            field,
            label: label.to_vec(),
            seed,
            counter: 0,
            words: Vec::new(),
            limit,
        }
    }

    fn refill(&mut self) {
        let mut h = Sha256::new();
        h.update(TAG);
        h.update((self.label.len() as u64).to_le_bytes());
        h.update(&self.label);
        h.update(self.seed.to_le_bytes());
        h.update(self.counter.to_le_bytes());
        self.counter += 1;
        let digest = h.finalize();
        // pop() takes from the back; store reversed so words come out in order
        self.words = digest
            .chunks_exact(8)
            .rev()
            .map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
    }

    pub fn next_element(&mut self) -> FieldElement {
        loop {
            let Some(w) = self.words.pop() else {
                self.refill();
                continue;
            };
            if (w as u128) < self.limit {
                return self.field.elem(w);
            }
        }
    }

    pub fn take_vec(&mut self, len: usize) -> Vec<FieldElement> {
        (0..len).map(|_| self.next_element()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_label_separated() {
        let f = FieldConfig::new(97).unwrap();
        let a = FieldStream::new(f, b"x", 1).take_vec(50);
        let b = FieldStream::new(f, b"x", 1).take_vec(50);
        let c = FieldStream::new(f, b"y", 1).take_vec(50);
        let d = FieldStream::new(f, b"x", 2).take_vec(50);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn roughly_uniform_mod_small_prime() {
        let f = FieldConfig::new(7).unwrap();
        let mut s = FieldStream::new(f, b"uniform", 0);
        let mut counts = [0usize; 7];
        for _ in 0..70_000 {
            counts[s.next_element().value() as usize] += 1;
        }
        for c in counts {
            assert!((9_400..10_600).contains(&c), "{counts:?}");
        }
    }
}
