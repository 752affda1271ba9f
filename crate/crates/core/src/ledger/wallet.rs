use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{FieldConfig, FieldElement};
use crate::mqcrypto::{keygen, sign, MqPublicKey, MqSecretKey, MqShape, PolyHash, PolyHashSpec, DEFAULT_PRODUCT_TERMS};

use super::{lookup_matrix_for, Shard, Transaction, TxLayout};

/// System-wide transaction parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub t_max: usize,
    /// Address length `C`.
    pub c_len: usize,
    pub vinegar: usize,
    /// Oil variables, equal to the message length `E`.
    pub oil: usize,
    /// Hash degree `d`.
    pub degree: usize,
    pub seed: u64,
}

impl Default for SchemeParams {
    fn default() -> Self {
        Self {
            t_max: 6,
            c_len: 2,
            vinegar: 4,
            oil: 2,
            degree: 3,
            seed: 0,
        }
    }
}

/// Transaction layout plus the public hash functions:
/// `hash1: F_q^B -> F_q^C` derives addresses from public keys and
/// `hash2: F_q^{A+B+C} -> F_q^E` derives the signed message from `(u, p, a)`.
#[derive(Clone, Debug)]
pub struct TxScheme {
    field: FieldConfig,
    params: SchemeParams,
    shape: MqShape,
    layout: TxLayout,
    hash1: PolyHash,
    hash2: PolyHash,
}

impl TxScheme {
    pub fn new(field: FieldConfig, params: SchemeParams) -> Result<Self> {
        let shape = MqShape::new(params.vinegar, params.oil)?;
        if params.t_max == 0 || params.t_max >= 48 {
            return Err(Error::Config(format!("t_max = {} out of range", params.t_max)));
        }
        if params.c_len == 0 {
            return Err(Error::Config("address length must be positive".into()));
        }
        let layout = TxLayout {
            t_max: params.t_max,
            b_len: shape.public_len(),
            c_len: params.c_len,
            ds_len: shape.n_vars(),
        };
        let spec = |seed, input_len, output_len| PolyHashSpec {
            seed,
            degree: params.degree,
            input_len,
            output_len,
            product_terms: DEFAULT_PRODUCT_TERMS,
        };
        let hash1 = PolyHash::new(field, spec(params.seed.wrapping_mul(2), layout.b_len, layout.c_len))?;
        let hash2 = PolyHash::new(
            field,
            spec(
                params.seed.wrapping_mul(2).wrapping_add(1),
                layout.a_len() + layout.b_len + layout.c_len,
                shape.n_eqs(),
            ),
        )?;
        Ok(Self {
            field,
            params,
            shape,
            layout,
            hash1,
            hash2,
        })
    }

    pub fn field(&self) -> FieldConfig {
        self.field
    }

    pub fn params(&self) -> SchemeParams {
        self.params
    }

    pub fn shape(&self) -> MqShape {
        self.shape
    }

    pub fn layout(&self) -> TxLayout {
        self.layout
    }

    pub fn hash1(&self) -> &PolyHash {
        &self.hash1
    }

    pub fn hash2(&self) -> &PolyHash {
        &self.hash2
    }

    pub fn address(&self, p: &[FieldElement]) -> Result<Vec<FieldElement>> {
        self.hash1.eval(p)
    }

    pub fn message(&self, u: &[FieldElement], p: &[FieldElement], a: &[FieldElement]) -> Result<Vec<FieldElement>> {
        self.hash2.eval(&[u, p, a].concat())
    }
}

/// A spendable output: entry `index` of shard `shard`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UtxoRef {
    pub shard: usize,
    pub index: usize,
}

#[derive(Clone, Debug)]
pub struct Wallet {
    community: usize,
    pk: MqPublicKey,
    sk: MqSecretKey,
    address: Vec<FieldElement>,
}

impl Wallet {
    pub fn generate<R: Rng + ?Sized>(scheme: &TxScheme, community: usize, rng: &mut R) -> Result<Self> {
        let (pk, sk) = keygen(scheme.field, scheme.shape, rng)?;
        let address = scheme.address(pk.coeffs())?;
        Ok(Self {
            community,
            pk,
            sk,
            address,
        })
    }

    pub fn community(&self) -> usize {
        self.community
    }

    pub fn public_key(&self) -> &MqPublicKey {
        &self.pk
    }

    pub fn secret_key(&self) -> &MqSecretKey {
        &self.sk
    }

    pub fn address(&self) -> &[FieldElement] {
        &self.address
    }
}

fn signed<R: Rng + ?Sized>(
    scheme: &TxScheme,
    pk: &MqPublicKey,
    sk: &MqSecretKey,
    u: Vec<FieldElement>,
    receiver: &[FieldElement],
    rng: &mut R,
) -> Result<Transaction> {
    let w = scheme.message(&u, pk.coeffs(), receiver)?;
    let s = sign(sk, &w, rng)?;
    Transaction::from_parts(scheme.layout, &u, pk.coeffs(), receiver, &s)
}

fn spent_entry<'a>(scheme: &TxScheme, utxo: UtxoRef, shard: &'a Shard) -> Result<(&'a [FieldElement], Vec<FieldElement>)> {
    let entry = shard.entry(utxo.index)?;
    let u = lookup_matrix_for(scheme.field, utxo.index as u64, shard.log_size(), scheme.layout.t_max)?;
    Ok((&entry[scheme.layout.a_range()], u))
}

/// Signs a transaction moving `utxo` (an entry of `shard`, which must be the
/// wallet's own community shard) to `receiver`. The lookup matrix is sized
/// for the shard as it stands, i.e. for verification in the coming epoch.
pub fn make_transaction<R: Rng + ?Sized>(
    scheme: &TxScheme,
    wallet: &Wallet,
    utxo: UtxoRef,
    shard: &Shard,
    receiver: &[FieldElement],
    rng: &mut R,
) -> Result<Transaction> {
    let (a_old, u) = spent_entry(scheme, utxo, shard)?;
    if utxo.shard != wallet.community || a_old != wallet.address.as_slice() {
        return Err(Error::Ownership {
            shard: utxo.shard,
            index: utxo.index,
        });
    }
    signed(scheme, &wallet.pk, &wallet.sk, u, receiver, rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvalidKind {
    /// Owner's key and address, but a signature that does not solve the
    /// public system.
    BadSignature,
    /// Correctly signed under a key whose address is not the spent output's.
    WrongAddress,
    /// Honest lookup matrix, uniformly random `p`, `a`, `s`.
    Garbage,
}

/// Builds a transaction spending `utxo` that is certain to fail verification:
/// candidates are resampled until the targeted check is nonzero.
pub fn make_invalid_transaction<R: Rng + ?Sized>(
    scheme: &TxScheme,
    kind: InvalidKind,
    wallet: &Wallet,
    utxo: UtxoRef,
    shard: &Shard,
    receiver: &[FieldElement],
    rng: &mut R,
) -> Result<Transaction> {
    let f = scheme.field;
    let layout = scheme.layout;
    match kind {
        InvalidKind::BadSignature => {
            let mut tx = make_transaction(scheme, wallet, utxo, shard, receiver, rng)?;
            let w = scheme.message(tx.u(), tx.p(), tx.a())?;
            loop {
                let i = layout.s_range().start + rng.gen_range(0..layout.ds_len);
                let mut cand = tx.clone();
                cand.flat_mut()[i] += f.random_nonzero(rng);
                if wallet.pk.eval(cand.s())? != w {
                    tx = cand;
                    break;
                }
            }
            Ok(tx)
        }
        InvalidKind::WrongAddress => {
            let (a_old, u) = spent_entry(scheme, utxo, shard)?;
            loop {
                let other = Wallet::generate(scheme, utxo.shard, rng)?;
                if other.address != a_old {
                    return signed(scheme, &other.pk, &other.sk, u, receiver, rng);
                }
            }
        }
        InvalidKind::Garbage => {
            let (a_old, u) = spent_entry(scheme, utxo, shard)?;
            loop {
                let p = f.random_vec(rng, layout.b_len);
                let a = f.random_vec(rng, layout.c_len);
                let s = f.random_vec(rng, layout.ds_len);
                let pk = MqPublicKey::new(scheme.shape, p.clone())?;
                let bad_addr = scheme.address(&p)? != a_old;
                let bad_sig = pk.eval(&s)? != scheme.message(&u, &p, &a)?;
                if bad_addr || bad_sig {
                    return Transaction::from_parts(layout, &u, &p, &a, &s);
                }
            }
        }
    }
}
