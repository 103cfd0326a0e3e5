//! Restarted GMRES with Givens rotations.

use super::{axpy, dotc, norm, C64, ZERO};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iters: usize,
    /// Target on ‖b - A x‖ / ‖b‖.
    pub tol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            restart: 80,
            max_iters: 20_000,
            tol: 1e-13,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GmresReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves A x = b from x = 0; `apply(x, y)` writes y = A x.
pub fn gmres<F>(dim: usize, apply: F, b: &[C64], opts: &GmresOptions) -> Result<(Vec<C64>, GmresReport)>
where
    F: Fn(&[C64], &mut [C64]),
{
    let bnorm = norm(b);
    let mut x = vec![ZERO; dim];
    if bnorm == 0.0 {
        return Ok((x, GmresReport { iterations: 0, relative_residual: 0.0 }));
    }
    let mut total = 0;
    let mut tmp = vec![ZERO; dim];
    loop {
        // true residual at the start of each cycle
        apply(&x, &mut tmp);
        let mut r: Vec<C64> = b.iter().zip(&tmp).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        let rel = beta / bnorm;
        if rel <= opts.tol {
            return Ok((x, GmresReport { iterations: total, relative_residual: rel }));
        }
        if total >= opts.max_iters {
            return Err(Error::NoConvergence(format!(
                "GMRES stalled at relative residual {rel:.3e} after {total} iterations"
            )));
        }
        for v in r.iter_mut() {
            *v /= beta;
        }
        let m = opts.restart;
        let mut vs: Vec<Vec<C64>> = vec![r];
        let mut h = vec![vec![ZERO; m]; m + 1];
        let mut cs = vec![ZERO; m];
        let mut sn = vec![ZERO; m];
        let mut g = vec![ZERO; m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut used = 0;
        for j in 0..m {
            let mut w = vec![ZERO; dim];
            apply(&vs[j], &mut w);
            for _ in 0..2 {
                for (i, v) in vs.iter().enumerate() {
                    let hij = dotc(v, &w);
                    h[i][j] += hij;
                    axpy(-hij, v, &mut w);
                }
            }
            let hn = norm(&w);
            h[j + 1][j] = C64::new(hn, 0.0);
            for i in 0..j {
                let t = cs[i].conj() * h[i][j] + sn[i].conj() * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let (c, s, rr) = givens(h[j][j], h[j + 1][j]);
            cs[j] = c;
            sn[j] = s;
            h[j][j] = rr;
            h[j + 1][j] = ZERO;
            g[j + 1] = -s * g[j];
            g[j] = c.conj() * g[j];
            used = j + 1;
            total += 1;
            if g[j + 1].norm() / bnorm <= 0.1 * opts.tol || hn == 0.0 || total >= opts.max_iters {
                break;
            }
            for v in w.iter_mut() {
                *v /= hn;
            }
            vs.push(w);
        }
        // back substitution
        let mut yv = vec![ZERO; used];
        for i in (0..used).rev() {
            let mut acc = g[i];
            for k in i + 1..used {
                acc -= h[i][k] * yv[k];
            }
            yv[i] = acc / h[i][i];
        }
        for (v, yi) in vs.iter().zip(&yv) {
            axpy(*yi, v, &mut x);
        }
    }
}

/// Rotation (c, s) with conj(c) a + conj(s) b = r and -s a + c b = 0; c is real.
fn givens(a: C64, b: C64) -> (C64, C64, C64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (C64::new(1.0, 0.0), ZERO, a);
    }
    if na == 0.0 {
        return (ZERO, C64::new(1.0, 0.0), b);
    }
    let r = na.hypot(nb);
    let c = na / r;
    let s = b / a * c;
    (C64::new(c, 0.0), s, a / na * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseOperator;

    #[test]
    fn solves_nonsymmetric_system() {
        let n = 200;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, C64::new(4.0 + (i % 5) as f64, 0.3)));
            t.push((i, (i + 1) % n, C64::new(-1.0, 0.5)));
            t.push(((i + 7) % n, i, C64::new(0.7, -0.2)));
        }
        let a = SparseOperator::from_triplets(n, n, t);
        let xt: Vec<C64> = (0..n).map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let b = a.mul_vec(&xt);
        let opts = GmresOptions { restart: 30, ..Default::default() };
        let (x, rep) = gmres(n, |u, v| a.apply(u, v), &b, &opts).unwrap();
        assert!(rep.relative_residual < 1e-12);
        let err: f64 = x.iter().zip(&xt).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }
}
