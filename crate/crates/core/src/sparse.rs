//! Compressed-row sparse operators over real or complex scalars.

use std::io::Write;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

/// Scalar field of an operator.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + 'static
{
    const ZERO: Self;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn abs(self) -> f64;
    fn to_complex(self) -> Complex64;
    fn write_value<W: Write>(self, w: &mut W) -> std::io::Result<()>;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn write_value<W: Write>(self, w: &mut W) -> std::io::Result<()> {
        write!(w, "{self:.17e}")
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn write_value<W: Write>(self, w: &mut W) -> std::io::Result<()> {
        write!(w, "{:.17e} {:.17e}", self.re, self.im)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator<T> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseOperator<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseOperator {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, dim, (0..dim).map(|i| (i, i, T::from_real(1.0))))
    }

    /// Duplicates are summed, exact zeros dropped.
    pub fn from_triplets<I>(rows: usize, cols: usize, entries: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let mut per_row: Vec<Vec<(usize, T)>> = vec![Vec::new(); rows];
        for (r, c, v) in entries {
            assert!(r < rows && c < cols, "entry ({r},{c}) outside {rows}x{cols}");
            per_row[r].push((c, v));
        }
        Self::from_rows(cols, per_row)
    }

    /// Builds from unsorted per-row entry lists.
    pub fn from_rows(cols: usize, mut per_row: Vec<Vec<(usize, T)>>) -> Self {
        let rows = per_row.len();
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in per_row.iter_mut() {
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut acc = row[k].1;
                k += 1;
                while k < row.len() && row[k].0 == c {
                    acc += row[k].1;
                    k += 1;
                }
                if acc != T::ZERO {
                    col_idx.push(c);
                    values.push(acc);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseOperator {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Builds from per-column images, the natural output of acting on basis states.
    pub fn from_columns(rows: usize, columns: Vec<Vec<(usize, T)>>) -> Self {
        let cols = columns.len();
        let mut per_row: Vec<Vec<(usize, T)>> = vec![Vec::new(); rows];
        for (c, col) in columns.into_iter().enumerate() {
            for (r, v) in col {
                per_row[r].push((c, v));
            }
        }
        Self::from_rows(cols, per_row)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.row(r).find(|e| e.0 == c).map_or(T::ZERO, |e| e.1)
    }

    /// y = A x.
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        let work = |(r, out): (usize, &mut T)| {
            let mut acc = T::ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        };
        if self.nnz() > 1 << 15 {
            y.par_iter_mut().enumerate().for_each(work);
        } else {
            y.iter_mut().enumerate().for_each(work);
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::ZERO; self.rows];
        self.apply(x, &mut y);
        y
    }

    /// y += alpha A x.
    pub fn apply_add(&self, alpha: T, x: &[T], y: &mut [T]) {
        let ax = self.mul_vec(x);
        for (yi, a) in y.iter_mut().zip(ax) {
            *yi += alpha * a;
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut per_row: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.cols];
        for (r, c, v) in self.triplets() {
            per_row[c].push((r, v.conj()));
        }
        Self::from_rows(self.rows, per_row)
    }

    pub fn transpose(&self) -> Self {
        let mut per_row: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.cols];
        for (r, c, v) in self.triplets() {
            per_row[c].push((r, v));
        }
        Self::from_rows(self.rows, per_row)
    }

    pub fn scale(&self, alpha: T) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = alpha * *v;
        }
        out.purge();
        out
    }

    /// alpha A + beta B.
    pub fn combine(&self, alpha: T, other: &Self, beta: T) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut per_row: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.rows];
        for (r, c, v) in self.triplets() {
            per_row[r].push((c, alpha * v));
        }
        for (r, c, v) in other.triplets() {
            per_row[r].push((c, beta * v));
        }
        Self::from_rows(self.cols, per_row)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let per_row: Vec<Vec<(usize, T)>> = (0..self.rows)
            .map(|r| {
                let mut acc = Vec::new();
                for (k, a) in self.row(r) {
                    for (c, b) in other.row(k) {
                        acc.push((c, a * b));
                    }
                }
                acc
            })
            .collect();
        Self::from_rows(other.cols, per_row)
    }

    fn purge(&mut self) {
        let per_row: Vec<Vec<(usize, T)>> = (0..self.rows).map(|r| self.row(r).collect()).collect();
        *self = Self::from_rows(self.cols, per_row);
    }

    /// Largest absolute entry of A - B.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.combine(T::from_real(1.0), other, T::from_real(-1.0))
            .values
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_complex(&self) -> SparseOperator<Complex64> {
        SparseOperator {
            rows: self.rows,
            cols: self.cols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|v| v.to_complex()).collect(),
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::ZERO; self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v;
        }
        d
    }

    /// Coordinate text dump: `row col value` per line, zero-based.
    pub fn dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# {} {} {}", self.rows, self.cols, self.nnz())?;
        for (r, c, v) in self.triplets() {
            write!(w, "{r} {c} ")?;
            v.write_value(&mut w)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assembly_merges_and_purges() {
        let a = SparseOperator::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, 1.0), (1, 0, -1.0)]);
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 0), 0.0);
    }

    #[test]
    fn adjoint_conjugates() {
        let i = Complex64::new(0.0, 1.0);
        let a = SparseOperator::from_triplets(2, 3, vec![(0, 2, i), (1, 0, Complex64::new(2.0, 0.0))]);
        let h = a.adjoint();
        assert_eq!((h.rows(), h.cols()), (3, 2));
        assert_eq!(h.get(2, 0), -i);
    }

    #[test]
    fn matmul_and_apply_agree() {
        let a = SparseOperator::from_triplets(2, 2, vec![(0, 1, 1.0), (1, 0, 1.0)]);
        let aa = a.matmul(&a);
        assert_eq!(aa.max_abs_diff(&SparseOperator::identity(2)), 0.0);
        assert_eq!(a.mul_vec(&[1.0, 2.0]), vec![2.0, 1.0]);
    }

    #[test]
    fn dump_format() {
        let a = SparseOperator::from_triplets(1, 1, vec![(0, 0, 0.5)]);
        let mut out = Vec::new();
        a.dump(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.starts_with("# 1 1 1\n0 0 5.0"));
    }
}
