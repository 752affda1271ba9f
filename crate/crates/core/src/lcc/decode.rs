//! Berlekamp-Welch decoding at arbitrary evaluation points.

use crate::error::{Error, Result};
use crate::ff::{FieldElement, Matrix};
use crate::poly::Poly;

use super::interp::{interpolate, LagrangeBasis};
use super::{ensure_distinct, Codeword};

/// Recovers the polynomial of degree at most `degree_bound` that agrees with
/// all but at most `max_errors` of `points`.
pub fn decode_with_errors(
    points: &[(FieldElement, FieldElement)],
    degree_bound: usize,
    max_errors: usize,
) -> Result<Poly> {
    let needed = degree_bound + 2 * max_errors + 1;
    if points.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: points.len(),
        });
    }
    ensure_distinct(points.iter().map(|(x, _)| x))?;
    let failure = Error::DecodingFailure {
        degree_bound,
        max_errors,
    };
    if max_errors == 0 {
        return interpolate(points, degree_bound).map_err(|e| match e {
            Error::Inconsistent { .. } => failure,
            other => other,
        });
    }

    // Unknowns: Q(z) of degree P+A, and the non-leading coefficients of the
    // monic error locator E(z) of degree A. Each point gives
    //   Q(x) - y * (e_0 + .. + e_{A-1} x^{A-1}) = y * x^A.
    let field = points[0].0.field();
    let q_len = degree_bound + max_errors + 1;
    let mut system = Matrix::zeros(field, points.len(), q_len + max_errors);
    let mut rhs = Vec::with_capacity(points.len());
    for (row, &(x, y)) in points.iter().enumerate() {
        // q_len > max_errors, so this table also covers x^A
        let powers: Vec<_> = std::iter::successors(Some(field.one()), |&p| Some(p * x))
            .take(q_len)
            .collect();
        for (j, &xp) in powers.iter().enumerate() {
            system.set(row, j, xp);
        }
        for (j, &xp) in powers[..max_errors].iter().enumerate() {
            system.set(row, q_len + j, -(y * xp));
        }
        rhs.push(y * powers[max_errors]);
    }
    let Some(solution) = system.solve_any(&rhs)? else {
        return Err(failure);
    };

    let quotient = Poly::new(field, solution[..q_len].to_vec());
    let mut locator = solution[q_len..].to_vec();
    locator.push(field.one());
    let locator = Poly::new(field, locator);
    let (f, rem) = quotient.div_rem(&locator)?;
    if !rem.is_zero() || f.degree().is_some_and(|d| d > degree_bound) {
        return Err(failure);
    }
    let disagreements = points.iter().filter(|&&(x, y)| f.eval(x) != y).count();
    if disagreements > max_errors {
        return Err(failure);
    }
    Ok(f)
}

/// Decodes every coordinate of a codeword, assuming errors are per node.
///
/// The error locator is found once, from coordinate 0. Every coordinate is
/// then interpolated from nodes that agreed there and validated against all
/// of them; a coordinate that fails validation (an erroneous node that
/// happened to be right on coordinate 0) falls back to its own decode.
pub fn decode_codeword(cw: &Codeword, degree_bound: usize, max_errors: usize) -> Result<Vec<Poly>> {
    let needed = degree_bound + 2 * max_errors + 1;
    if cw.len() < needed {
        return Err(Error::InsufficientData { needed, got: cw.len() });
    }
    if cw.width() == 0 {
        return Ok(Vec::new());
    }
    let alphas = cw.alphas();
    ensure_distinct(&alphas)?;
    let payloads: Vec<&[FieldElement]> = cw.iter().map(|(_, _, p)| p).collect();

    let first = decode_with_errors(&cw.column(0), degree_bound, max_errors)?;
    let trusted: Vec<usize> = (0..alphas.len())
        .filter(|&i| first.eval(alphas[i]) == payloads[i][0])
        .collect();
    let anchor: Vec<_> = trusted[..degree_bound + 1].iter().map(|&i| alphas[i]).collect();
    let basis = LagrangeBasis::new(&anchor)?;

    let mut out = Vec::with_capacity(cw.width());
    out.push(first);
    for c in 1..cw.width() {
        let ys: Vec<_> = trusted[..degree_bound + 1]
            .iter()
            .map(|&i| payloads[i][c])
            .collect();
        let poly = basis.combine(&ys)?;
        let agrees = trusted[degree_bound + 1..]
            .iter()
            .all(|&i| poly.eval(alphas[i]) == payloads[i][c]);
        if agrees {
            out.push(poly);
        } else {
            out.push(decode_with_errors(&cw.column(c), degree_bound, max_errors)?);
        }
    }
    Ok(out)
}
