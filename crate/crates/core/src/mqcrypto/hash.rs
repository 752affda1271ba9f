use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{FieldConfig, FieldElement};

use super::stream::FieldStream;

pub const DEFAULT_PRODUCT_TERMS: usize = 4;

/// Parameters that pin down a [`PolyHash`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyHashSpec {
    pub seed: u64,
    pub degree: usize,
    pub input_len: usize,
    pub output_len: usize,
    pub product_terms: usize,
}

/// A seeded polynomial map `F_q^n -> F_q^m` of total degree `d`.
///
/// Output `o` is
///
/// ```text
/// c_o + <b_o, x> + sum_{j < J} prod_{t < d} (<w_{o,j,t}, x> + s_{o,j,t})
/// ```
///
/// i.e. an affine part plus `J` products of `d` affine forms. Evaluation costs
/// `O(m J d n)`, far below a dense degree-`d` expansion. All coefficients come
/// from a [`FieldStream`] in the order: constants, linear parts, then product
/// factors by `(o, j, t)`, each factor's weights followed by its offset.
///
/// This is a stand-in with the right algebraic shape. It is not claimed to be
/// collision resistant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyHash {
    spec: PolyHashSpec,
    constants: Vec<FieldElement>,
    linear: Vec<FieldElement>,
    factors: Vec<FieldElement>,
}

impl PolyHash {
    pub fn new(field: FieldConfig, spec: PolyHashSpec) -> Result<Self> {
        if spec.degree == 0 {
            return Err(Error::Config("hash degree must be at least 1".into()));
        }
        if spec.product_terms == 0 {
            return Err(Error::Config("hash needs at least one product term".into()));
        }
        let mut stream = FieldStream::new(field, b"poly-hash", spec.seed);
        let constants = stream.take_vec(spec.output_len);
        let linear = stream.take_vec(spec.output_len * spec.input_len);
        let factors = stream.take_vec(
            spec.output_len * spec.product_terms * spec.degree * (spec.input_len + 1),
        );
        Ok(Self {
            spec,
            constants,
            linear,
            factors,
        })
    }

    pub fn spec(&self) -> &PolyHashSpec {
        &self.spec
    }

    pub fn degree(&self) -> usize {
        self.spec.degree
    }

    pub fn input_len(&self) -> usize {
        self.spec.input_len
    }

    pub fn output_len(&self) -> usize {
        self.spec.output_len
    }

    pub fn constant(&self, out: usize) -> FieldElement {
        self.constants[out]
    }

    pub fn linear(&self, out: usize) -> &[FieldElement] {
        let n = self.spec.input_len;
        &self.linear[out * n..(out + 1) * n]
    }

    /// Weights and offset of factor `t` in product term `j` of output `out`.
    pub fn factor(&self, out: usize, term: usize, t: usize) -> (&[FieldElement], FieldElement) {
        let stride = self.spec.input_len + 1;
        let idx = (out * self.spec.product_terms + term) * self.spec.degree + t;
        let f = &self.factors[idx * stride..(idx + 1) * stride];
        (&f[..self.spec.input_len], f[self.spec.input_len])
    }

    pub fn eval(&self, x: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if x.len() != self.spec.input_len {
            return Err(Error::Shape(format!(
                "hash input of length {} (expected {})",
                x.len(),
                self.spec.input_len
            )));
        }
        let affine = |w: &[FieldElement], s: FieldElement| {
            w.iter().zip(x).fold(s, |acc, (&wi, &xi)| acc + wi * xi)
        };
        Ok((0..self.spec.output_len)
            .map(|o| {
                let mut acc = affine(self.linear(o), self.constant(o));
                for j in 0..self.spec.product_terms {
                    let mut prod = None::<FieldElement>;
                    for t in 0..self.spec.degree {
                        let (w, s) = self.factor(o, j, t);
                        let v = affine(w, s);
                        prod = Some(prod.map_or(v, |p| p * v));
                    }
                    acc += prod.expect("degree >= 1");
                }
                acc
            })
            .collect())
    }
}
