//! The polynomial verification function `F` and everything around running it
//! on coded data: degree bookkeeping, decoding of coded results, indicator
//! extraction and the filtered append.

mod coded;

use crate::error::{Error, Result};
use crate::ff::FieldElement;
use crate::ledger::{Shard, Strip, TxScheme};
use crate::mqcrypto::f_mq_eval;

pub use coded::{
    ci_stats, coded_append, coded_verify, decode_results, filter_strip, indicators_from, polyshard_ci_rate, CiStats,
    CodedNode, DegreeLedger, IndicatorVector,
};

/// `(C + E) x QK` results for one strip; column `j` belongs to transaction
/// `j`. Stored column-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultMatrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl ResultMatrix {
    pub fn from_columns(rows: usize, columns: Vec<Vec<FieldElement>>) -> Result<Self> {
        let cols = columns.len();
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Shape(format!("result columns must have length {rows}")));
        }
        Ok(Self {
            rows,
            cols,
            data: columns.concat(),
        })
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<FieldElement>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!("{} entries for a {rows}x{cols} result", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> FieldElement {
        self.data[col * self.rows + row]
    }

    pub fn column(&self, j: usize) -> &[FieldElement] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn data(&self) -> &[FieldElement] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }
}

/// Multilinear lookup: `sum_i (prod_j u[j][i_j]) V[i]` over all `T`-bit
/// indices, MSB first, with entries at or beyond `M` taken as zero. Computed
/// by contracting one row of `u` at a time.
pub fn f_fetch(u: &[FieldElement], shard: &Shard) -> Result<Vec<FieldElement>> {
    if shard.is_empty() {
        return Err(Error::EmptyShard);
    }
    let t = shard.log_size();
    if u.len() < 2 * t {
        return Err(Error::Shape(format!("lookup matrix of length {} for {t} index bits", u.len())));
    }
    let r = shard.tx_len();
    let zero = shard.data()[0].field().zero();
    let mut buf = shard.data().to_vec();
    buf.resize((1usize << t) * r, zero);
    for row in u.chunks_exact(2).take(t) {
        let half = buf.len() / 2;
        let (lo, hi) = buf.split_at(half);
        buf = lo.iter().zip(hi).map(|(&a, &b)| row[0] * a + row[1] * b).collect();
    }
    Ok(buf)
}

/// `hash1(p) - a_old`.
pub fn f_check_addr(scheme: &TxScheme, p: &[FieldElement], a_old: &[FieldElement]) -> Result<Vec<FieldElement>> {
    if a_old.len() != scheme.layout().c_len {
        return Err(Error::Shape(format!("address of length {}", a_old.len())));
    }
    Ok(scheme.address(p)?.into_iter().zip(a_old).map(|(h, &a)| h - a).collect())
}

/// `f_MQ(p, s) - hash2(u, p, a)` for a flat transaction `x`.
pub fn f_check_sig(scheme: &TxScheme, x: &[FieldElement]) -> Result<Vec<FieldElement>> {
    let layout = scheme.layout();
    if x.len() != layout.r_len() {
        return Err(Error::Shape(format!("transaction of length {}", x.len())));
    }
    let (u, p, a, s) = (
        &x[layout.u_range()],
        &x[layout.p_range()],
        &x[layout.a_range()],
        &x[layout.s_range()],
    );
    let lhs = f_mq_eval(scheme.shape(), p, s)?;
    let rhs = scheme.message(u, p, a)?;
    Ok(lhs.into_iter().zip(rhs).map(|(l, r)| l - r).collect())
}

/// `f(x, V) = (r1, r2)`; zero exactly when the transaction is valid.
pub fn verify_tx(scheme: &TxScheme, x: &[FieldElement], shard: &Shard) -> Result<Vec<FieldElement>> {
    let layout = scheme.layout();
    if x.len() != layout.r_len() {
        return Err(Error::Shape(format!("transaction of length {}", x.len())));
    }
    let fetched = f_fetch(&x[layout.u_range()], shard)?;
    let mut r = f_check_addr(scheme, &x[layout.p_range()], &fetched[layout.a_range()])?;
    r.extend(f_check_sig(scheme, x)?);
    Ok(r)
}

/// `F(h, V)`: one result column per transaction of the strip.
pub fn verify_strip(scheme: &TxScheme, strip: &Strip, shard: &Shard) -> Result<ResultMatrix> {
    let rows = scheme.layout().c_len + scheme.shape().n_eqs();
    let columns = strip
        .transactions()
        .map(|x| verify_tx(scheme, x, shard))
        .collect::<Result<Vec<_>>>()?;
    ResultMatrix::from_columns(rows, columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::FieldConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn shard_from(f: FieldConfig, entries: &[Vec<u64>], t_max: usize) -> Shard {
        let r = entries[0].len();
        let data: Vec<_> = entries.iter().flat_map(|e| f.elems(e)).collect();
        Shard::from_entries(r, t_max, data).unwrap()
    }

    // Direct expansion over all 2^T index tuples.
    fn fetch_oracle(u: &[FieldElement], shard: &Shard) -> Vec<FieldElement> {
        let t = shard.log_size();
        let f = u[0].field();
        let mut out = f.zeros(shard.tx_len());
        for m in 0..shard.len() {
            let mut w = f.one();
            for j in 0..t {
                let bit = (m >> (t - 1 - j)) & 1;
                w *= u[2 * j + bit];
            }
            for (o, &x) in out.iter_mut().zip(shard.entry(m).unwrap()) {
                *o += w * x;
            }
        }
        out
    }

    #[test]
    fn fetch_selects_and_blends() {
        let f = FieldConfig::new(97).unwrap();
        let shard = shard_from(f, &[vec![3, 4], vec![10, 20]], 2);
        assert_eq!(f_fetch(&f.elems(&[1, 0, 1, 0]), &shard).unwrap(), f.elems(&[3, 4]));
        assert_eq!(f_fetch(&f.elems(&[0, 1, 1, 0]), &shard).unwrap(), f.elems(&[10, 20]));
        // rows (a, 1 - a): a X_0 + (1 - a) X_1
        let a = f.elem(5);
        let u = [a, f.one() - a];
        let want: Vec<_> = [(3, 10), (4, 20)]
            .iter()
            .map(|&(x0, x1)| a * f.elem(x0) + (f.one() - a) * f.elem(x1))
            .collect();
        assert_eq!(f_fetch(&u, &shard).unwrap(), want);
        assert!(matches!(f_fetch(&u, &Shard::new(2, 2)), Err(Error::EmptyShard)));
    }

    #[test]
    fn fetch_matches_expansion_oracle() {
        let f = FieldConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in 1..=9usize {
            let data = f.random_vec(&mut rng, m * 3);
            let shard = Shard::from_entries(3, 4, data).unwrap();
            let u = f.random_vec(&mut rng, 8);
            assert_eq!(f_fetch(&u, &shard).unwrap(), fetch_oracle(&u, &shard), "m={m}");
        }
    }

    #[test]
    fn result_matrix_layout() {
        let f = FieldConfig::new(7).unwrap();
        let m = ResultMatrix::from_columns(2, vec![f.elems(&[1, 2]), f.elems(&[0, 0]), f.elems(&[3, 4])]).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 3));
        assert_eq!(m.get(1, 2), f.elem(4));
        assert_eq!(m.column(1), f.zeros(2).as_slice());
        assert!(ResultMatrix::from_columns(2, vec![f.elems(&[1])]).is_err());
    }
}
