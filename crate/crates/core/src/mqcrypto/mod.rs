//! Multivariate primitives: a seeded polynomial hash and an oil-vinegar
//! signature whose public map is quadratic.

mod hash;
mod stream;
mod uov;

pub use hash::{PolyHash, PolyHashSpec, DEFAULT_PRODUCT_TERMS};
pub use stream::FieldStream;
pub use uov::{
    f_mq_eval, keygen, keygen_from_seed, sign, verify_sig, MqPublicKey, MqSecretKey, MqShape,
    MAX_SIGN_ATTEMPTS,
};
