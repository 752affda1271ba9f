use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{FieldConfig, FieldElement, Matrix};

pub const MAX_SIGN_ATTEMPTS: usize = 256;

/// Dimensions of an unbalanced oil-vinegar scheme. The signature has
/// `vinegar + oil` coordinates and the message (public map output) has `oil`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MqShape {
    pub vinegar: usize,
    pub oil: usize,
}

impl MqShape {
    pub fn new(vinegar: usize, oil: usize) -> Result<Self> {
        if oil == 0 || vinegar == 0 {
            return Err(Error::Config("oil and vinegar counts must be positive".into()));
        }
        Ok(Self { vinegar, oil })
    }

    pub fn n_vars(&self) -> usize {
        self.vinegar + self.oil
    }

    pub fn n_eqs(&self) -> usize {
        self.oil
    }

    pub fn monomials(&self) -> usize {
        let n = self.n_vars();
        n * (n + 1) / 2 + n + 1
    }

    /// Length of a flattened public key.
    pub fn public_len(&self) -> usize {
        self.n_eqs() * self.monomials()
    }
}

/// Evaluates a flattened quadratic map at `s`.
///
/// `p` is monomial-major: quadratic monomials `s_i s_j` (`i <= j`, in
/// lexicographic order), then `s_0 .. s_{n-1}`, then the constant; each
/// monomial carries `n_eqs` contiguous coefficients, one per output.
pub fn f_mq_eval(shape: MqShape, p: &[FieldElement], s: &[FieldElement]) -> Result<Vec<FieldElement>> {
    let n = shape.n_vars();
    let e = shape.n_eqs();
    if p.len() != shape.public_len() {
        return Err(Error::Shape(format!("public key of length {} (expected {})", p.len(), shape.public_len())));
    }
    if s.len() != n {
        return Err(Error::Shape(format!("signature of length {} (expected {n})", s.len())));
    }
    let field = s.first().map(|x| x.field()).unwrap_or_else(|| p[0].field());
    let mut out = field.zeros(e);
    let mut chunks = p.chunks_exact(e);
    let mut add = |m: FieldElement, chunk: &[FieldElement]| {
        if !m.is_zero() {
            for (o, &c) in out.iter_mut().zip(chunk) {
                *o += c * m;
            }
        }
    };
    for i in 0..n {
        for j in i..n {
            add(s[i] * s[j], chunks.next().expect("length checked"));
        }
    }
    for &si in s {
        add(si, chunks.next().expect("length checked"));
    }
    add(field.one(), chunks.next().expect("length checked"));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MqPublicKey {
    shape: MqShape,
    coeffs: Vec<FieldElement>,
}

impl MqPublicKey {
    pub fn new(shape: MqShape, coeffs: Vec<FieldElement>) -> Result<Self> {
        if coeffs.len() != shape.public_len() {
            return Err(Error::Shape(format!(
                "public key of length {} (expected {})",
                coeffs.len(),
                shape.public_len()
            )));
        }
        Ok(Self { shape, coeffs })
    }

    pub fn shape(&self) -> MqShape {
        self.shape
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn eval(&self, s: &[FieldElement]) -> Result<Vec<FieldElement>> {
        f_mq_eval(self.shape, &self.coeffs, s)
    }
}

// One central equation: x^T Q x + <lin, x> + c with Q upper triangular and
// zero on the oil-oil block.
#[derive(Clone, Debug)]
struct Central {
    quad: Matrix,
    lin: Vec<FieldElement>,
    constant: FieldElement,
}

impl Central {
    fn eval(&self, x: &[FieldElement]) -> FieldElement {
        let n = x.len();
        let mut acc = self.constant;
        for i in 0..n {
            acc += self.lin[i] * x[i];
            for j in i..n {
                acc += self.quad.get(i, j) * x[i] * x[j];
            }
        }
        acc
    }
}

/// Secret trapdoor: the oil-vinegar central map and the invertible change of
/// variables `T`, so that `P(s) = F(T s)`.
#[derive(Clone, Debug)]
pub struct MqSecretKey {
    shape: MqShape,
    t: Matrix,
    t_inv: Matrix,
    central: Vec<Central>,
}

impl MqSecretKey {
    pub fn shape(&self) -> MqShape {
        self.shape
    }

    fn central_eval(&self, x: &[FieldElement]) -> Vec<FieldElement> {
        self.central.iter().map(|c| c.eval(x)).collect()
    }
}

pub fn keygen<R: Rng + ?Sized>(field: FieldConfig, shape: MqShape, rng: &mut R) -> Result<(MqPublicKey, MqSecretKey)> {
    if field.modulus() < 3 {
        return Err(Error::Config("key generation needs q >= 3".into()));
    }
    let n = shape.n_vars();
    let v = shape.vinegar;
    let (t, t_inv) = loop {
        let rows: Vec<_> = (0..n).map(|_| field.random_vec(rng, n)).collect();
        let t = Matrix::from_rows(field, &rows)?;
        if let Ok(inv) = t.inverse() {
            break (t, inv);
        }
    };
    let central: Vec<Central> = (0..shape.n_eqs())
        .map(|_| {
            let mut quad = Matrix::zeros(field, n, n);
            for i in 0..v {
                for j in i..n {
                    quad.set(i, j, field.random(rng));
                }
            }
            Central {
                quad,
                lin: field.random_vec(rng, n),
                constant: field.random(rng),
            }
        })
        .collect();

    // Compose: A = T^T Q T, b = lin^T T.
    let e = shape.n_eqs();
    let mut coeffs = field.zeros(shape.public_len());
    let tt = t.transpose();
    for (k, c) in central.iter().enumerate() {
        let a = tt.mul(&c.quad)?.mul(&t)?;
        let mut m = 0;
        for i in 0..n {
            for j in i..n {
                let v = if i == j { a.get(i, i) } else { a.get(i, j) + a.get(j, i) };
                coeffs[m * e + k] = v;
                m += 1;
            }
        }
        let b = tt.mul_vec(&c.lin)?;
        for bi in b {
            coeffs[m * e + k] = bi;
            m += 1;
        }
        coeffs[m * e + k] = c.constant;
    }

    let pk = MqPublicKey { shape, coeffs };
    let sk = MqSecretKey {
        shape,
        t,
        t_inv,
        central,
    };
    self_check(&pk, &sk)?;
    Ok((pk, sk))
}

pub fn keygen_from_seed(field: FieldConfig, shape: MqShape, seed: u64) -> Result<(MqPublicKey, MqSecretKey)> {
    keygen(field, shape, &mut ChaCha8Rng::seed_from_u64(seed))
}

// Two quadratic maps that agree on {0, e_i, 2e_i, e_i + e_j} are equal
// (needs q >= 3 so that e_i and 2e_i differ).
fn self_check(pk: &MqPublicKey, sk: &MqSecretKey) -> Result<()> {
    let field = sk.t.field();
    let n = sk.shape.n_vars();
    let unit = |i: usize, c: u64| {
        let mut x = field.zeros(n);
        x[i] = field.elem(c);
        x
    };
    let mut points = vec![field.zeros(n)];
    for i in 0..n {
        points.push(unit(i, 1));
        points.push(unit(i, 2));
        for j in i + 1..n {
            let mut x = unit(i, 1);
            x[j] = field.one();
            points.push(x);
        }
    }
    for s in points {
        let x = sk.t.mul_vec(&s)?;
        if pk.eval(&s)? != sk.central_eval(&x) {
            return Err(Error::Protocol("public key does not match the secret map".into()));
        }
    }
    Ok(())
}

/// Finds `s` with `P(s) = w`, retrying fresh vinegar values up to
/// [`MAX_SIGN_ATTEMPTS`] times.
pub fn sign<R: Rng + ?Sized>(sk: &MqSecretKey, w: &[FieldElement], rng: &mut R) -> Result<Vec<FieldElement>> {
    let o = sk.shape.oil;
    let v = sk.shape.vinegar;
    if w.len() != o {
        return Err(Error::Shape(format!("message of length {} (expected {o})", w.len())));
    }
    let field = sk.t.field();
    for _ in 0..MAX_SIGN_ATTEMPTS {
        let xv = field.random_vec(rng, v);
        // With vinegar fixed every central equation is affine in the oil.
        let mut m = Matrix::zeros(field, o, o);
        let mut rhs = Vec::with_capacity(o);
        for (k, c) in sk.central.iter().enumerate() {
            for j in 0..o {
                let col = v + j;
                let coef = (0..v).fold(c.lin[col], |acc, i| acc + c.quad.get(i, col) * xv[i]);
                m.set(k, j, coef);
            }
            let mut fixed = c.constant;
            for i in 0..v {
                fixed += c.lin[i] * xv[i];
                for i2 in i..v {
                    fixed += c.quad.get(i, i2) * xv[i] * xv[i2];
                }
            }
            rhs.push(w[k] - fixed);
        }
        let Ok(inv) = m.inverse() else { continue };
        let mut x = xv;
        x.extend(inv.mul_vec(&rhs)?);
        return sk.t_inv.mul_vec(&x);
    }
    Err(Error::SigningFailure {
        attempts: MAX_SIGN_ATTEMPTS,
    })
}

pub fn verify_sig(pk: &MqPublicKey, s: &[FieldElement], w: &[FieldElement]) -> Result<bool> {
    Ok(pk.eval(s)? == w)
}
