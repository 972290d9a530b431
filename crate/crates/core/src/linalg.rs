//! Dense matrices over a [`Field`] and Gaussian elimination.
//!
//! Pivoting always takes the first row (top to bottom) with a nonzero entry
//! in the current column, and columns are processed left to right, so every
//! elimination is a deterministic function of its input.

use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    entries: Vec<F::Elem>,
}

impl<F: Field> Matrix<F> {
    pub fn zeros(field: F, rows: usize, cols: usize) -> Self {
        let entries = vec![field.zero(); rows * cols];
        Matrix { field, rows, cols, entries }
    }

    pub fn identity(field: F, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.entries[i * n + i] = m.field.one();
        }
        m
    }

    /// Row-major entries; `entries.len()` must equal `rows * cols`.
    pub fn from_entries(field: F, rows: usize, cols: usize, entries: Vec<F::Elem>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Matrix { field, rows, cols, entries })
    }

    pub fn from_rows(field: F, rows: Vec<Vec<F::Elem>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_entries(field, r, c, rows.into_iter().flatten().collect())
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> &F::Elem {
        &self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: F::Elem) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[F::Elem] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<F::Elem> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn entries(&self) -> &[F::Elem] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<F::Elem>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field.clone(), self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    /// Submatrix made of the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.field.clone(), self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.set(r, j, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            entries.extend_from_slice(self.row(r));
        }
        Matrix { field: self.field.clone(), rows: rows.len(), cols: self.cols, entries }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Self::zeros(f.clone(), self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if f.is_zero(a) {
                    continue;
                }
                for c in 0..other.cols {
                    let v = f.add(out.get(r, c), &f.mul(a, other.get(k, c)));
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[F::Elem]) -> Result<Vec<F::Elem>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let f = &self.field;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)))
            })
            .collect())
    }

    /// Reduce `self` in place to reduced row echelon form, applying the same
    /// row operations to `aug` (which must have as many rows). Returns the
    /// pivot columns.
    fn eliminate(&mut self, mut aug: Option<&mut Self>) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in 0..self.cols {
            if next == self.rows {
                break;
            }
            let Some(p) = (next..self.rows).find(|&r| !f.is_zero(self.get(r, c))) else {
                continue;
            };
            self.swap_rows(p, next);
            if let Some(a) = aug.as_deref_mut() {
                a.swap_rows(p, next);
            }
            let inv = f.inv(self.get(next, c)).expect("pivot is nonzero");
            self.scale_row(next, &inv);
            if let Some(a) = aug.as_deref_mut() {
                a.scale_row(next, &inv);
            }
            for r in 0..self.rows {
                if r == next {
                    continue;
                }
                let factor = self.get(r, c).clone();
                if f.is_zero(&factor) {
                    continue;
                }
                self.sub_scaled_row(r, next, &factor);
                if let Some(a) = aug.as_deref_mut() {
                    a.sub_scaled_row(r, next, &factor);
                }
            }
            pivots.push(c);
            next += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, k: &F::Elem) {
        for c in 0..self.cols {
            let v = self.field.mul(self.get(r, c), k);
            self.set(r, c, v);
        }
    }

    /// row[target] -= k * row[source]
    fn sub_scaled_row(&mut self, target: usize, source: usize, k: &F::Elem) {
        for c in 0..self.cols {
            let v = self.field.sub(self.get(target, c), &self.field.mul(k, self.get(source, c)));
            self.set(target, c, v);
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().eliminate(None).len()
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "inverse of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let mut work = self.clone();
        let mut inv = Self::identity(self.field.clone(), self.rows);
        if work.eliminate(Some(&mut inv)).len() < self.rows {
            return Err(Error::SingularSystem);
        }
        Ok(inv)
    }

    /// Solve `self * x = b` for square nonsingular `self`.
    pub fn solve(&self, b: &[F::Elem]) -> Result<Vec<F::Elem>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "solve with a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} for {} equations",
                b.len(),
                self.rows
            )));
        }
        let mut work = self.clone();
        let mut rhs = Matrix::from_entries(self.field.clone(), self.rows, 1, b.to_vec())?;
        if work.eliminate(Some(&mut rhs)).len() < self.rows {
            return Err(Error::SingularSystem);
        }
        Ok(rhs.entries)
    }
}
