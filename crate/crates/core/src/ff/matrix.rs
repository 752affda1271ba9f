use crate::error::{Error, Result};

use super::{FieldConfig, FieldElement};

/// Dense row-major matrix over `F_q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    field: FieldConfig,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl Matrix {
    pub fn zeros(field: FieldConfig, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: field.zeros(rows * cols),
        }
    }

    pub fn identity(field: FieldConfig, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: FieldConfig, rows: &[Vec<FieldElement>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged matrix rows".into()));
        }
        Ok(Self {
            field,
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> FieldConfig {
        self.field
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: FieldElement) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[FieldElement] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(self.field.zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect())
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| self.get(i, j).value() == u64::from(i == j))
            })
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::Shape("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(self.field, n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a.get(r, col).is_zero())
                .ok_or(Error::SingularMatrix)?;
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let scale = a.get(col, col).inv()?;
            a.scale_row(col, scale);
            inv.scale_row(col, scale);
            for r in 0..n {
                if r != col {
                    let factor = a.get(r, col);
                    if !factor.is_zero() {
                        a.sub_row_multiple(r, col, factor);
                        inv.sub_row_multiple(r, col, factor);
                    }
                }
            }
        }
        Ok(inv)
    }

    pub fn determinant(&self) -> Result<FieldElement> {
        if self.rows != self.cols {
            return Err(Error::Shape("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = self.field.one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a.get(r, col).is_zero()) else {
                return Ok(self.field.zero());
            };
            if pivot != col {
                a.swap_rows(col, pivot);
                det = -det;
            }
            let p = a.get(col, col);
            det *= p;
            let p_inv = p.inv()?;
            for r in col + 1..n {
                let factor = a.get(r, col) * p_inv;
                if !factor.is_zero() {
                    a.sub_row_multiple(r, col, factor);
                }
            }
        }
        Ok(det)
    }

    /// Finds some `x` with `self * x = rhs`, setting free variables to zero.
    /// Returns `None` when the system is inconsistent.
    pub fn solve_any(&self, rhs: &[FieldElement]) -> Result<Option<Vec<FieldElement>>> {
        if rhs.len() != self.rows {
            return Err(Error::Shape(format!(
                "right-hand side of length {} for {} rows",
                rhs.len(),
                self.rows
            )));
        }
        let width = self.cols + 1;
        let mut aug = Self::zeros(self.field, self.rows, width);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, rhs[i]);
        }

        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !aug.get(r, col).is_zero()) else {
                continue;
            };
            aug.swap_rows(row, p);
            let scale = aug.get(row, col).inv()?;
            aug.scale_row(row, scale);
            for r in 0..self.rows {
                if r != row {
                    let factor = aug.get(r, col);
                    if !factor.is_zero() {
                        aug.sub_row_multiple(r, row, factor);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }

        if (row..self.rows).any(|r| !aug.get(r, self.cols).is_zero()) {
            return Ok(None);
        }
        let mut x = self.field.zeros(self.cols);
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(r, self.cols);
        }
        Ok(Some(x))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn scale_row(&mut self, r: usize, s: FieldElement) {
        for j in 0..self.cols {
            let v = self.get(r, j) * s;
            self.set(r, j, v);
        }
    }

    // row[target] -= factor * row[source]
    fn sub_row_multiple(&mut self, target: usize, source: usize, factor: FieldElement) {
        for j in 0..self.cols {
            let v = self.get(target, j) - factor * self.get(source, j);
            self.set(target, j, v);
        }
    }
}
