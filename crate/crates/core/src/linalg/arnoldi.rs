//! Restarted Arnoldi for the eigenvalues of smallest real part.
//!
//! Each cycle extends a Krylov decomposition A V_k = V_k M + v_k b† to m
//! columns, diagonalizes the projected matrix, and restarts from an
//! orthonormal basis of the wanted Ritz vectors. The projected matrix after a
//! restart is full rather than Hessenberg, which the dense eigensolver does
//! not mind.

use faer::Mat;
use rayon::prelude::*;

use super::{axpy, dotc, norm, normalize, start_vector, EigenPair, C64, ZERO};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct ArnoldiOptions {
    pub nev: usize,
    /// Krylov basis size per cycle.
    pub ncv: usize,
    /// Relative residual target.
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl ArnoldiOptions {
    pub fn for_nev(nev: usize) -> Self {
        ArnoldiOptions {
            nev,
            ncv: (3 * nev + 20).max(40),
            tol: 1e-12,
            max_restarts: 2000,
            seed: 7,
        }
    }
}

/// `apply(x, y)` must write y = A x.
pub fn smallest_real_part<F>(dim: usize, apply: F, opts: &ArnoldiOptions) -> Result<Vec<EigenPair>>
where
    F: Fn(&[C64], &mut [C64]),
{
    let nev = opts.nev.min(dim);
    let m = opts.ncv.min(dim.saturating_sub(1));
    if nev == 0 {
        return Ok(Vec::new());
    }
    if m <= nev + 1 {
        return Err(Error::invalid(format!(
            "Krylov basis of {m} too small for {nev} eigenvalues in dimension {dim}"
        )));
    }
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
    basis.push(start_vector(dim, opts.seed));
    // proj[(i, j)] = coefficient of v_i in A v_j
    let mut proj = Mat::<C64>::zeros(m + 1, m);
    let mut k = 0usize;
    let mut w = vec![ZERO; dim];
    let mut fresh_seed = opts.seed;

    for restart in 0..=opts.max_restarts {
        for j in k..m {
            apply(&basis[j], &mut w);
            let mut beta = orthogonalize(&basis, &mut w, |i, h| proj[(i, j)] += h);
            if beta < 1e-13 * (1.0 + column_norm(&proj, j)) {
                // invariant subspace: continue with a fresh direction
                beta = 0.0;
                let mut found = false;
                for _ in 0..8 {
                    fresh_seed += 1;
                    w = start_vector(dim, fresh_seed);
                    orthogonalize(&basis, &mut w, |_, _| {});
                    if normalize(&mut w) > 1e-8 {
                        found = true;
                        break;
                    }
                }
                if !found {
                    return Err(Error::Numerical("Arnoldi could not extend the Krylov basis".into()));
                }
            }
            if beta != 0.0 {
                proj[(j + 1, j)] = C64::new(beta, 0.0);
                normalize(&mut w);
            }
            basis.truncate(j + 1);
            basis.push(w.clone());
        }

        let small = proj.submatrix(0, 0, m, m).to_owned();
        let eig = small
            .eigen()
            .map_err(|e| Error::NoConvergence(format!("projected eigenproblem: {e:?}")))?;
        let values: Vec<C64> = eig.S().column_vector().iter().copied().collect();
        let y = eig.U();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| values[a].re.total_cmp(&values[b].re));

        let residual_of = |col: usize| {
            let ny: f64 = (0..m).map(|i| y[(i, col)].norm_sqr()).sum::<f64>().sqrt();
            let r: C64 = (0..m).fold(ZERO, |acc, i| acc + proj[(m, i)] * y[(i, col)]);
            r.norm() / ny
        };
        let converged = order[..nev]
            .iter()
            .all(|&c| residual_of(c) <= opts.tol * values[c].norm().max(1.0));

        if converged || restart == opts.max_restarts {
            if !converged {
                let worst = order[..nev].iter().map(|&c| residual_of(c)).fold(0.0, f64::max);
                return Err(Error::NoConvergence(format!(
                    "Arnoldi: {nev} eigenvalues not converged after {restart} restarts (worst residual {worst:.3e})"
                )));
            }
            return Ok(order[..nev]
                .iter()
                .map(|&c| {
                    let coeffs: Vec<C64> = (0..m).map(|i| y[(i, c)]).collect();
                    let mut v = combine(&basis[..m], &coeffs);
                    normalize(&mut v);
                    EigenPair {
                        value: values[c],
                        vector: v,
                        residual: residual_of(c),
                    }
                })
                .collect());
        }

        // keep the wanted Ritz vectors plus a buffer; the buffer speeds convergence
        let keep = (nev + (m - nev) / 2).min(m - 1);
        let mut ritz = Mat::<C64>::zeros(m, keep);
        for (col, &c) in order[..keep].iter().enumerate() {
            for i in 0..m {
                ritz[(i, col)] = y[(i, c)];
            }
        }
        let q = orthonormal_columns(&ritz);
        let keep = q.ncols();
        let beta_row: Vec<C64> = (0..m).map(|i| proj[(m, i)]).collect();

        let new_vectors: Vec<Vec<C64>> = (0..keep)
            .map(|c| {
                let coeffs: Vec<C64> = (0..m).map(|i| q[(i, c)]).collect();
                combine(&basis[..m], &coeffs)
            })
            .collect();
        let residual_vector = basis[m].clone();

        // M = Q† H Q, b_c = Σ_i beta_i q_ic
        let hq = &small * &q;
        let mut next = Mat::<C64>::zeros(m + 1, m);
        for r in 0..keep {
            for c in 0..keep {
                let mut acc = ZERO;
                for i in 0..m {
                    acc += q[(i, r)].conj() * hq[(i, c)];
                }
                next[(r, c)] = acc;
            }
        }
        for c in 0..keep {
            next[(keep, c)] = (0..m).fold(ZERO, |acc, i| acc + beta_row[i] * q[(i, c)]);
        }
        proj = next;
        basis = new_vectors;
        basis.push(residual_vector);
        k = keep;
    }
    unreachable!()
}

fn column_norm(m: &Mat<C64>, j: usize) -> f64 {
    (0..m.nrows()).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt()
}

/// Two passes of classical Gram-Schmidt; reports coefficients through `record`.
fn orthogonalize(basis: &[Vec<C64>], w: &mut [C64], mut record: impl FnMut(usize, C64)) -> f64 {
    for _ in 0..2 {
        let h: Vec<C64> = basis.par_iter().map(|v| dotc(v, w)).collect();
        for (i, (v, hi)) in basis.iter().zip(&h).enumerate() {
            axpy(-*hi, v, w);
            record(i, *hi);
        }
    }
    norm(w)
}

/// Σ_i coeffs_i v_i.
fn combine(vs: &[Vec<C64>], coeffs: &[C64]) -> Vec<C64> {
    let dim = vs[0].len();
    let mut out = vec![ZERO; dim];
    out.par_chunks_mut(1 << 12).enumerate().for_each(|(chunk, o)| {
        let start = chunk << 12;
        let len = o.len();
        for (v, &c) in vs.iter().zip(coeffs) {
            if c == ZERO {
                continue;
            }
            for (x, &vi) in o.iter_mut().zip(&v[start..start + len]) {
                *x += c * vi;
            }
        }
    });
    out
}

/// Modified Gram-Schmidt on the columns, dropping numerically dependent ones.
fn orthonormal_columns(a: &Mat<C64>) -> Mat<C64> {
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for c in 0..a.ncols() {
        let mut v: Vec<C64> = (0..a.nrows()).map(|i| a[(i, c)]).collect();
        let n0 = norm(&v);
        for _ in 0..2 {
            for u in &cols {
                let h = dotc(u, &v);
                axpy(-h, u, &mut v);
            }
        }
        if norm(&v) > 1e-10 * n0 {
            normalize(&mut v);
            cols.push(v);
        }
    }
    let mut q = Mat::<C64>::zeros(a.nrows(), cols.len());
    for (c, v) in cols.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            q[(i, c)] = *x;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_eigen;
    use crate::sparse::SparseOperator;

    fn test_matrix(n: usize) -> SparseOperator<C64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, C64::new(i as f64 * 0.37 + (i % 7) as f64, 0.1 * (i % 3) as f64)));
            t.push((i, (i + 1) % n, C64::new(-1.0, 0.2)));
            t.push(((i + 3) % n, i, C64::new(0.5, 0.0)));
        }
        SparseOperator::from_triplets(n, n, t)
    }

    #[test]
    fn matches_dense_spectrum() {
        let a = test_matrix(300);
        let pairs = smallest_real_part(300, |x, y| a.apply(x, y), &ArnoldiOptions::for_nev(4)).unwrap();
        let mut exact = dense_eigen(&a).unwrap().values;
        exact.sort_by(|x, y| x.re.total_cmp(&y.re));
        for (p, e) in pairs.iter().zip(&exact) {
            assert!((p.value - e).norm() < 1e-9, "{} vs {}", p.value, e);
            assert!(crate::linalg::eigen_residual(&a, p.value, &p.vector) < 1e-9);
        }
    }
}
