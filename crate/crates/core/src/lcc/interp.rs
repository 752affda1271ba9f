use crate::error::{Error, Result};
use crate::ff::FieldElement;
use crate::poly::Poly;

use super::{ensure_distinct, Codeword};

/// Lagrange basis polynomials for a fixed set of distinct nodes, reusable
/// across many value vectors.
#[derive(Clone, Debug)]
pub struct LagrangeBasis {
    xs: Vec<FieldElement>,
    basis: Vec<Poly>,
}

impl LagrangeBasis {
    pub fn new(xs: &[FieldElement]) -> Result<Self> {
        ensure_distinct(xs)?;
        let field = xs
            .first()
            .ok_or(Error::InsufficientData { needed: 1, got: 0 })?
            .field();
        let master = xs
            .iter()
            .fold(Poly::constant(field.one()), |acc, &x| acc.mul(&Poly::linear_root(x)));
        let basis = xs
            .iter()
            .map(|&x| {
                let (num, _) = master.div_rem(&Poly::linear_root(x))?;
                let scale = num.eval(x).inv()?;
                Ok(num.scale(scale))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { xs: xs.to_vec(), basis })
    }

    pub fn nodes(&self) -> &[FieldElement] {
        &self.xs
    }

    /// The interpolant through `(xs[i], ys[i])`.
    pub fn combine(&self, ys: &[FieldElement]) -> Result<Poly> {
        if ys.len() != self.xs.len() {
            return Err(Error::Shape(format!("{} values for {} nodes", ys.len(), self.xs.len())));
        }
        let field = self.xs[0].field();
        let width = self.xs.len();
        let mut coeffs = field.zeros(width);
        for (b, &y) in self.basis.iter().zip(ys) {
            if y.is_zero() {
                continue;
            }
            for (c, &bc) in coeffs.iter_mut().zip(b.coeffs()) {
                *c += y * bc;
            }
        }
        Ok(Poly::new(field, coeffs))
    }
}

/// The unique polynomial of degree at most `degree_bound` through `points`.
///
/// Uses the first `degree_bound + 1` points and checks the rest against the
/// result.
pub fn interpolate(points: &[(FieldElement, FieldElement)], degree_bound: usize) -> Result<Poly> {
    let needed = degree_bound + 1;
    if points.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: points.len(),
        });
    }
    ensure_distinct(points.iter().map(|(x, _)| x))?;
    let xs: Vec<_> = points[..needed].iter().map(|p| p.0).collect();
    let ys: Vec<_> = points[..needed].iter().map(|p| p.1).collect();
    let poly = LagrangeBasis::new(&xs)?.combine(&ys)?;
    if points[needed..].iter().any(|&(x, y)| poly.eval(x) != y) {
        return Err(Error::Inconsistent { degree_bound });
    }
    Ok(poly)
}

/// Coordinate-wise [`interpolate`] over every payload in the codeword.
pub fn interpolate_codeword(cw: &Codeword, degree_bound: usize) -> Result<Vec<Poly>> {
    let needed = degree_bound + 1;
    if cw.len() < needed {
        return Err(Error::InsufficientData { needed, got: cw.len() });
    }
    let alphas = cw.alphas();
    ensure_distinct(&alphas)?;
    let basis = LagrangeBasis::new(&alphas[..needed])?;
    let payloads: Vec<&[FieldElement]> = cw.iter().map(|(_, _, p)| p).collect();
    (0..cw.width())
        .map(|c| {
            let ys: Vec<_> = payloads[..needed].iter().map(|p| p[c]).collect();
            let poly = basis.combine(&ys)?;
            let consistent = alphas[needed..]
                .iter()
                .zip(&payloads[needed..])
                .all(|(&a, p)| poly.eval(a) == p[c]);
            if consistent {
                Ok(poly)
            } else {
                Err(Error::Inconsistent { degree_bound })
            }
        })
        .collect()
}
