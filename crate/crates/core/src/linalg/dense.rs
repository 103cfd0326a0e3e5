use faer::linalg::solvers::Solve;
use faer::Mat;

use super::C64;
use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

pub fn to_dense_matrix(a: &SparseOperator<C64>) -> Mat<C64> {
    let mut m = Mat::<C64>::zeros(a.rows(), a.cols());
    for (r, c, v) in a.triplets() {
        m[(r, c)] = v;
    }
    m
}

pub struct DenseEigen {
    pub values: Vec<C64>,
    pub vectors: Mat<C64>,
}

impl DenseEigen {
    /// Column `k` as a unit vector.
    pub fn vector(&self, k: usize) -> Vec<C64> {
        let mut v: Vec<C64> = (0..self.vectors.nrows()).map(|i| self.vectors[(i, k)]).collect();
        super::normalize(&mut v);
        v
    }

    /// Column `k` as stored, so that rows of V^{-1} stay biorthogonal to it.
    pub fn vector_raw(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.nrows()).map(|i| self.vectors[(i, k)]).collect()
    }
}

pub fn dense_eigen(a: &SparseOperator<C64>) -> Result<DenseEigen> {
    let m = to_dense_matrix(a);
    let eig = m
        .eigen()
        .map_err(|e| Error::NoConvergence(format!("dense eigendecomposition: {e:?}")))?;
    let s = eig.S();
    let values: Vec<C64> = s.column_vector().iter().copied().collect();
    Ok(DenseEigen {
        values,
        vectors: eig.U().to_owned(),
    })
}

/// Solves A x = b by partial-pivot LU.
pub fn dense_solve(a: &Mat<C64>, b: &[C64]) -> Vec<C64> {
    let lu = a.partial_piv_lu();
    let mut rhs = Mat::<C64>::zeros(b.len(), 1);
    for (i, v) in b.iter().enumerate() {
        rhs[(i, 0)] = *v;
    }
    lu.solve_in_place(&mut rhs);
    (0..b.len()).map(|i| rhs[(i, 0)]).collect::<Vec<_>>()
}
