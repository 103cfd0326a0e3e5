//! Dense and iterative linear algebra on complex vectors.
//!
//! Reductions over long vectors are split into fixed chunks whose partial
//! sums are combined in order, so results do not depend on the thread count.

mod arnoldi;
mod dense;
mod gmres;

pub use arnoldi::{smallest_real_part, ArnoldiOptions};
pub use dense::{dense_eigen, dense_solve, to_dense_matrix, DenseEigen};
pub use gmres::{gmres, GmresOptions, GmresReport};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::sparse::SparseOperator;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

const CHUNK: usize = 1 << 12;

/// Σ conj(x_k) y_k.
pub fn dotc(x: &[C64], y: &[C64]) -> C64 {
    assert_eq!(x.len(), y.len());
    if x.len() <= CHUNK {
        return x.iter().zip(y).fold(ZERO, |acc, (a, b)| acc + a.conj() * b);
    }
    let partial: Vec<C64> = x
        .par_chunks(CHUNK)
        .zip(y.par_chunks(CHUNK))
        .map(|(a, b)| a.iter().zip(b).fold(ZERO, |acc, (u, v)| acc + u.conj() * v))
        .collect();
    partial.into_iter().fold(ZERO, |a, b| a + b)
}

pub fn norm(x: &[C64]) -> f64 {
    dotc(x, x).re.max(0.0).sqrt()
}

/// y += alpha x.
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    assert_eq!(x.len(), y.len());
    if x.len() <= CHUNK {
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += alpha * xi;
        }
    } else {
        y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi += alpha * xi);
    }
}

pub fn scale(alpha: C64, x: &mut [C64]) {
    for v in x.iter_mut() {
        *v *= alpha;
    }
}

/// Normalizes in place and returns the former norm.
pub fn normalize(x: &mut [C64]) -> f64 {
    let n = norm(x);
    if n > 0.0 {
        scale(C64::new(1.0 / n, 0.0), x);
    }
    n
}

/// Deterministic pseudo-random start vector.
pub fn start_vector(dim: usize, seed: u64) -> Vec<C64> {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xD1B5_4A32_D192_ED03;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut v: Vec<C64> = (0..dim).map(|_| C64::new(next(), next())).collect();
    normalize(&mut v);
    v
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: C64,
    pub vector: Vec<C64>,
    /// ‖A v - λ v‖ / ‖v‖ evaluated explicitly.
    pub residual: f64,
}

/// r = ‖A v - λ v‖ / ‖v‖.
pub fn eigen_residual(a: &SparseOperator<C64>, value: C64, v: &[C64]) -> f64 {
    let mut r = a.mul_vec(v);
    axpy(-value, v, &mut r);
    norm(&r) / norm(v)
}

/// Eigenpairs of smallest real part, dense below `dense_limit`.
pub fn lowest_eigenpairs(a: &SparseOperator<C64>, nev: usize, dense_limit: usize) -> Result<Vec<EigenPair>> {
    let dim = a.rows();
    let nev = nev.min(dim);
    if dim <= dense_limit {
        let eig = dense_eigen(a)?;
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| eig.values[i].re.total_cmp(&eig.values[j].re));
        Ok(order
            .into_iter()
            .take(nev)
            .map(|k| {
                let v = eig.vector(k);
                let residual = eigen_residual(a, eig.values[k], &v);
                EigenPair {
                    value: eig.values[k],
                    vector: v,
                    residual,
                }
            })
            .collect())
    } else {
        let opts = ArnoldiOptions::for_nev(nev);
        smallest_real_part(dim, |x, y| a.apply(x, y), &opts).map(|pairs| {
            pairs
                .into_iter()
                .map(|mut p| {
                    p.residual = eigen_residual(a, p.value, &p.vector);
                    p
                })
                .collect()
        })
    }
}

/// The left eigenvector for `value`: the eigenvector of A† at conj(value).
pub fn left_eigenvector(a: &SparseOperator<C64>, value: C64, nev: usize, dense_limit: usize) -> Result<EigenPair> {
    let ah = a.adjoint();
    let pairs = lowest_eigenpairs(&ah, nev, dense_limit)?;
    pairs
        .into_iter()
        .min_by(|p, q| (p.value - value.conj()).norm().total_cmp(&(q.value - value.conj()).norm()))
        .ok_or_else(|| crate::Error::Numerical("empty spectrum".into()))
}
