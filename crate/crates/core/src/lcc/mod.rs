//! Lagrange coding over `F_q`.
//!
//! Shard `k` is pinned to a point `omega_k` and node `i` to a point
//! `alpha_i`. A node's coded payload is the Lagrange polynomial through the
//! `K` uncoded payloads, evaluated at `alpha_i`; any polynomial computation on
//! coded payloads therefore lands on a polynomial in `z` whose values at the
//! `omega_k` are the uncoded answers. Decoding recovers that polynomial from
//! node responses, tolerating missing responses (just omit them) and up to a
//! chosen number of wrong ones.

mod decode;
mod interp;

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::ff::{axpy, FieldConfig, FieldElement, Matrix};

pub use decode::{decode_codeword, decode_with_errors};
pub use interp::{interpolate, interpolate_codeword, LagrangeBasis};

/// Shard points `omega_1..omega_K` and node points `alpha_1..alpha_N`, all
/// pairwise distinct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationPoints {
    omegas: Vec<FieldElement>,
    alphas: Vec<FieldElement>,
}

impl EvaluationPoints {
    pub fn new(omegas: Vec<FieldElement>, alphas: Vec<FieldElement>) -> Result<Self> {
        ensure_distinct(omegas.iter().chain(&alphas))?;
        Ok(Self { omegas, alphas })
    }

    /// `omega_k = k` and `alpha_i = K + i`, both 1-based, so the points are
    /// `1..=K+N`. Needs `q > K + N`.
    pub fn standard(field: FieldConfig, shards: usize, nodes: usize) -> Result<Self> {
        let top = (shards + nodes) as u64;
        if top >= field.modulus() {
            return Err(Error::Config(format!(
                "q = {} leaves no room for {} distinct evaluation points",
                field.modulus(),
                top
            )));
        }
        let omegas = (1..=shards as u64).map(|k| field.elem(k)).collect();
        let alphas = (1..=nodes as u64).map(|i| field.elem(shards as u64 + i)).collect();
        Self::new(omegas, alphas)
    }

    pub fn omegas(&self) -> &[FieldElement] {
        &self.omegas
    }

    pub fn alphas(&self) -> &[FieldElement] {
        &self.alphas
    }

    pub fn shards(&self) -> usize {
        self.omegas.len()
    }

    pub fn nodes(&self) -> usize {
        self.alphas.len()
    }

    pub fn coding_vector(&self, node: usize) -> Result<CodingVector> {
        let alpha = *self.alphas.get(node).ok_or(Error::IndexOutOfRange {
            index: node,
            bound: self.alphas.len(),
        })?;
        coding_vector(alpha, &self.omegas)
    }
}

fn ensure_distinct<'a>(points: impl IntoIterator<Item = &'a FieldElement>) -> Result<()> {
    let mut seen = HashSet::new();
    for p in points {
        if !seen.insert(*p) {
            return Err(Error::DegeneratePoints);
        }
    }
    Ok(())
}

/// `(l_1(alpha), .., l_K(alpha))` for the Lagrange basis on the shard points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodingVector(Vec<FieldElement>);

impl CodingVector {
    pub fn coefficients(&self) -> &[FieldElement] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<FieldElement>> for CodingVector {
    fn from(v: Vec<FieldElement>) -> Self {
        Self(v)
    }
}

pub fn coding_vector(alpha: FieldElement, omegas: &[FieldElement]) -> Result<CodingVector> {
    ensure_distinct(omegas)?;
    let coeffs = omegas
        .iter()
        .enumerate()
        .map(|(k, &wk)| {
            let (num, den) = omegas
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .fold((alpha.field().one(), alpha.field().one()), |(n, d), (_, &wj)| {
                    (n * (alpha - wj), d * (wk - wj))
                });
            Ok(num * den.inv()?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CodingVector(coeffs))
}

/// Componentwise `sum_k l_k * rows[k]`.
pub fn encode<R: AsRef<[FieldElement]>>(rows: &[R], l: &CodingVector) -> Result<Vec<FieldElement>> {
    if rows.len() != l.len() {
        return Err(Error::Shape(format!(
            "{} rows against a coding vector of length {}",
            rows.len(),
            l.len()
        )));
    }
    let Some(first) = rows.first() else {
        return Err(Error::Shape("nothing to encode".into()));
    };
    let width = first.as_ref().len();
    if rows.iter().any(|r| r.as_ref().len() != width) {
        return Err(Error::Shape("ragged rows".into()));
    }
    let field = l.0[0].field();
    let mut out = field.zeros(width);
    for (row, &c) in rows.iter().zip(&l.0) {
        axpy(&mut out, c, row.as_ref());
    }
    Ok(out)
}

/// Payloads held by a set of nodes, keyed by node index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codeword {
    width: usize,
    entries: BTreeMap<usize, (FieldElement, Vec<FieldElement>)>,
}

impl Codeword {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, node: usize, alpha: FieldElement, payload: Vec<FieldElement>) -> Result<()> {
        if payload.len() != self.width {
            return Err(Error::Shape(format!(
                "payload of width {} in a codeword of width {}",
                payload.len(),
                self.width
            )));
        }
        self.entries.insert(node, (alpha, payload));
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, FieldElement, &[FieldElement])> {
        self.entries.iter().map(|(&i, (a, p))| (i, *a, p.as_slice()))
    }

    pub(crate) fn alphas(&self) -> Vec<FieldElement> {
        self.entries.values().map(|(a, _)| *a).collect()
    }

    pub(crate) fn column(&self, coord: usize) -> Vec<(FieldElement, FieldElement)> {
        self.entries.values().map(|(a, p)| (*a, p[coord])).collect()
    }
}

/// The `K x K` matrix whose rows are the coding vectors of `alphas`, and its
/// inverse. Distinct points make it invertible, so a singular result means
/// the caller broke an invariant.
pub fn leader_matrix(omegas: &[FieldElement], alphas: &[FieldElement]) -> Result<(Matrix, Matrix)> {
    if alphas.len() != omegas.len() {
        return Err(Error::Shape(format!(
            "{} node points for {} shards",
            alphas.len(),
            omegas.len()
        )));
    }
    ensure_distinct(omegas.iter().chain(alphas))?;
    let field = omegas
        .first()
        .ok_or_else(|| Error::Shape("no shards".into()))?
        .field();
    let rows = alphas
        .iter()
        .map(|&a| coding_vector(a, omegas).map(|l| l.0))
        .collect::<Result<Vec<_>>>()?;
    let m = Matrix::from_rows(field, &rows)?;
    let inv = m.inverse().map_err(|e| match e {
        Error::SingularMatrix => Error::Protocol("coding-vector matrix is singular".into()),
        other => other,
    })?;
    Ok((m, inv))
}

/// Minimum number of nodes for correct decoding: `deg_f (K-1) + S + 2A + 1`.
pub fn recovery_threshold(shards: usize, deg_f: usize, stragglers: usize, adversaries: usize) -> usize {
    deg_f * shards.saturating_sub(1) + stragglers + 2 * adversaries + 1
}
