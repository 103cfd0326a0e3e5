//! Extraction of the rank-2 cell (H - E_T) t = A T at spin 2.
//!
//! T lives in the vacuum block. Its partner has a leading component in the
//! sector with `partner_lines` through-lines, degenerate with T in the
//! standard action, and lower components obtained by solving down the
//! grading. A = 2 · 2π v_F / (2N) is the normalization that makes the cell
//! read like L0 + L̄0 acting on (T, t).

use num_complex::Complex64 as C64;

use super::momentum::{block_hamiltonian_with, flip_operator, OrbitBasis};
use super::{partner_lines, scaled_gap, GroundState, Lattice, DENSE_EIGEN_LIMIT, DENSE_SOLVE_LIMIT};
use crate::error::{Error, Result};
use crate::graded::{Contraction, Weighting};
use crate::model::ModelKind;
use crate::linalg::{self, dense_solve, dotc, gmres, norm, EigenPair, GmresOptions, ONE, ZERO};
use crate::sparse::SparseOperator;

/// Spin of the stress-tensor state.
pub const STRESS_SPIN: i64 = 2;
/// Relative tolerance for the degeneracy of T with the partner sector.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Spin-2 blocks of the graded space, top level first.
#[derive(Clone, Debug)]
pub struct GradedBlock {
    pub levels: Vec<OrbitBasis>,
    /// blocks[r][c]: map from level c into level r (r >= c).
    pub blocks: Vec<Vec<Option<SparseOperator<C64>>>>,
    /// Arrow reversal on the top level, when its lines carry arrows.
    pub flip: Option<SparseOperator<C64>>,
}

impl GradedBlock {
    /// Dense levels carry arrowed lines joined with `Contraction::Arrowed`;
    /// the dilute levels are joined with weight one.
    pub fn new(lat: &Lattice, spin: i64, weight: Weighting) -> Result<Self> {
        let top = partner_lines(lat.spec.kind);
        let arrowed = lat.spec.kind == ModelKind::Dense;
        let levels = (0..=top)
            .rev()
            .step_by(2)
            .map(|l| {
                if arrowed && l > 0 {
                    // both arrow classes; F exchanges them
                    let seed = lat.model.arrowed_seed(l)?;
                    OrbitBasis::by_closure_from(&lat.model, &[seed, seed.flip_arrows()], spin)
                } else {
                    lat.orbits(l, spin)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let joining = if arrowed {
            Contraction::Arrowed
        } else {
            Contraction::Graded
        };
        let mut blocks = vec![vec![None; levels.len()]; levels.len()];
        for c in 0..levels.len() {
            for r in c..levels.len() {
                let b = block_hamiltonian_with(&lat.model, &levels[c], &levels[r], weight, joining)?;
                if r == c || b.nnz() > 0 {
                    blocks[r][c] = Some(b);
                }
            }
        }
        let flip = if arrowed { Some(flip_operator(&levels[0])?) } else { None };
        Ok(GradedBlock { levels, blocks, flip })
    }

    pub fn bottom(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn diagonal(&self, k: usize) -> &SparseOperator<C64> {
        self.blocks[k][k].as_ref().expect("diagonal block")
    }

    /// (H - shift) x on the graded block.
    pub fn apply_shifted(&self, shift: C64, x: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let mut out: Vec<Vec<C64>> = self.levels.iter().map(|l| vec![ZERO; l.dim()]).collect();
        for (r, row) in self.blocks.iter().enumerate() {
            for (c, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    b.apply_add(ONE, &x[c], &mut out[r]);
                }
            }
            linalg::axpy(-shift, &x[r], &mut out[r]);
        }
        out
    }
}

/// A vacuum spin-2 eigenstate considered for T.
#[derive(Clone, Copy, Debug)]
pub struct Candidate {
    pub energy: C64,
    pub delta: f64,
    /// |expansion coefficient| of H_{-2}|0> on this (unit) eigenvector.
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct JordanPair {
    pub e0: f64,
    pub e_t: f64,
    pub e_x: f64,
    /// Scaled gap of T.
    pub delta_n: f64,
    /// ‖(H - E_T) t - A T‖ / ‖A T‖ on the whole graded block.
    pub cell_residual: f64,
    /// ‖(H - E_T) T‖ / ‖T‖.
    pub eigen_residual: f64,
    /// A = 2 · 2π v_F / (2N).
    pub coupling: f64,
    /// Off-diagonal element found before normalization (T, partner unit-normalized).
    pub raw_coupling: C64,
    /// T on the vacuum spin-2 block, scaled so the cell has coupling A.
    pub t_state: Vec<C64>,
    /// Left eigenvector of the vacuum block at E_T.
    pub t_left: Vec<C64>,
    /// Partner t on the graded block, top level first.
    pub partner: Vec<Vec<C64>>,
    /// Right and left eigenvectors at E_X of the state carrying most of the
    /// partner, for Hellmann-Feynman derivatives.
    pub x_right: Vec<C64>,
    pub x_left: Vec<C64>,
    /// Weights of the degenerate top-level states in the partner.
    pub partner_weights: Vec<C64>,
    /// H_{-2}|0> projected on the vacuum spin-2 block.
    pub source: Vec<C64>,
    /// ‖y - P y‖ / ‖y‖ for the spin-2 projection of H_{-2}|0>.
    pub source_leakage: f64,
    pub candidates: Vec<Candidate>,
    pub block: GradedBlock,
}

impl JordanPair {
    pub fn vacuum_orbits(&self) -> &OrbitBasis {
        &self.block.levels[self.block.bottom()]
    }

    pub fn partner_orbits(&self) -> &OrbitBasis {
        &self.block.levels[0]
    }

    /// The three candidates with scaled gaps nearest 2.
    pub fn nearest_to_two(&self) -> Vec<Candidate> {
        let mut c = self.candidates.clone();
        c.sort_by(|a, b| (a.delta - 2.0).abs().total_cmp(&(b.delta - 2.0).abs()));
        c.truncate(3);
        c
    }
}

fn eigensystem(a: &SparseOperator<C64>, nev: usize) -> Result<(Vec<EigenPair>, Vec<EigenPair>)> {
    let right = linalg::lowest_eigenpairs(a, nev, DENSE_EIGEN_LIMIT)?;
    let left = linalg::lowest_eigenpairs(&a.adjoint(), nev, DENSE_EIGEN_LIMIT)?;
    Ok((right, left))
}

fn matching_left(left: &[EigenPair], value: C64) -> Result<&EigenPair> {
    left.iter()
        .min_by(|p, q| (p.value.conj() - value).norm().total_cmp(&(q.value.conj() - value).norm()))
        .ok_or_else(|| Error::Numerical("no left eigenvectors".into()))
}

/// x with (A - shift) x = b, A - shift assumed regular.
fn solve_regular(a: &SparseOperator<C64>, shift: C64, b: &[C64]) -> Result<Vec<C64>> {
    let dim = a.rows();
    if dim <= DENSE_SOLVE_LIMIT {
        let mut m = linalg::to_dense_matrix(a);
        for i in 0..dim {
            m[(i, i)] -= shift;
        }
        Ok(dense_solve(&m, b))
    } else {
        let (x, _) = gmres(dim, |u, v| shifted_apply(a, shift, u, v), b, &GmresOptions::default())?;
        Ok(x)
    }
}

/// Minimum-norm x with (A - shift) x = b when the kernel is spanned by the
/// orthonormal columns `null` and b lies in the range.
fn solve_min_norm(a: &SparseOperator<C64>, shift: C64, null: &[Vec<C64>], b: &[C64]) -> Result<Vec<C64>> {
    let dim = a.rows();
    let k = null.len();
    let mut x = if dim < DENSE_SOLVE_LIMIT {
        // bordered system [[A - shift, N], [N†, 0]]
        let mut m = faer::Mat::<C64>::zeros(dim + k, dim + k);
        for (r, c, v) in a.triplets() {
            m[(r, c)] = v;
        }
        for i in 0..dim {
            m[(i, i)] -= shift;
            for (j, v) in null.iter().enumerate() {
                m[(i, dim + j)] = v[i];
                m[(dim + j, i)] = v[i].conj();
            }
        }
        let mut rhs = b.to_vec();
        rhs.resize(dim + k, ZERO);
        let mut x = dense_solve(&m, &rhs);
        x.truncate(dim);
        x
    } else {
        let (x, _) = gmres(dim, |u, v| shifted_apply(a, shift, u, v), b, &GmresOptions::default())?;
        x
    };
    for v in null {
        let h = dotc(v, &x);
        linalg::axpy(-h, v, &mut x);
    }
    Ok(x)
}

fn shifted_apply(a: &SparseOperator<C64>, shift: C64, u: &[C64], v: &mut [C64]) {
    a.apply(u, v);
    linalg::axpy(-shift, u, v);
}

/// Locates T among the vacuum spin-2 eigenstates and builds its partner.
///
/// T is the dominant eigencomponent of `y = H_{-2}|0>` (full vacuum basis).
/// A missing degenerate partner or a vanishing coupling is reported as
/// `Error::NoJordanCell` together with the nearest spectral data.
pub fn find_jordan_pair(lat: &Lattice, ground: &GroundState, y: &[C64], n: f64) -> Result<JordanPair> {
    let spec = &lat.spec;
    let block = GradedBlock::new(lat, STRESS_SPIN, Weighting::At(n))?;
    let bottom = block.bottom();
    let vac = &block.levels[bottom];
    let h00 = block.diagonal(bottom);

    let source = vac.project(&lat.vacuum, y);
    let back = vac.expand(&lat.vacuum, &source);
    let leak: Vec<C64> = y.iter().zip(&back).map(|(a, b)| a - b).collect();
    let source_leakage = norm(&leak) / norm(y).max(f64::MIN_POSITIVE);

    // eigen-expansion of the source; `t_space` holds every eigenvector at E_T
    let (candidates, t_space) = if vac.dim() <= DENSE_EIGEN_LIMIT {
        let eig = linalg::dense_eigen(h00)?;
        let d = vac.dim();
        let coeffs = dense_solve(&eig.vectors, &source);
        let cands: Vec<Candidate> = (0..d)
            .map(|k| Candidate {
                energy: eig.values[k],
                delta: scaled_gap(spec, eig.values[k].re, ground.energy),
                weight: coeffs[k].norm() * norm(&eig.vector_raw(k)),
            })
            .collect();
        let e = cands[argmax(&cands)].energy;
        let adj = eig.vectors.adjoint().to_owned();
        let space: Vec<Dual> = (0..d)
            .filter(|&k| near(eig.values[k], e))
            .map(|k| {
                // row k of V^{-1}, conjugated: the biorthogonal left vector
                let mut unit = vec![ZERO; d];
                unit[k] = ONE;
                Dual {
                    right: eig.vector_raw(k),
                    left: dense_solve(&adj, &unit),
                }
            })
            .collect();
        (cands, space)
    } else {
        let (right, left) = eigensystem(h00, 8)?;
        let e = {
            let weights: Vec<f64> = right
                .iter()
                .map(|p| {
                    let l = matching_left(&left, p.value).expect("left vectors");
                    (dotc(&l.vector, &source) / dotc(&l.vector, &p.vector)).norm()
                })
                .collect();
            right[weights.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty").0].value
        };
        let rs: Vec<&EigenPair> = right.iter().filter(|p| near(p.value, e)).collect();
        let ls: Vec<&EigenPair> = left.iter().filter(|p| near(p.value.conj(), e)).collect();
        let space = biorthogonalize(&rs, &ls)?;
        let cands: Vec<Candidate> = right
            .iter()
            .map(|p| {
                let weight = if near(p.value, e) {
                    space.iter().map(|d| dotc(&d.left, &source).norm_sqr()).sum::<f64>().sqrt() / (space.len() as f64).sqrt()
                } else {
                    let l = matching_left(&left, p.value).expect("left vectors");
                    (dotc(&l.vector, &source) / dotc(&l.vector, &p.vector)).norm()
                };
                Candidate {
                    energy: p.value,
                    delta: scaled_gap(spec, p.value.re, ground.energy),
                    weight,
                }
            })
            .collect();
        (cands, space)
    };
    let e_t_c = candidates[argmax(&candidates)].energy;
    let shift = e_t_c;

    // T = projection of the source on the E_T eigenspace, unit norm; its
    // coordinates tau in the biorthogonal basis and the dual left vector
    let mut tau: Vec<C64> = t_space.iter().map(|d| dotc(&d.left, &source)).collect();
    let mut t_right = vec![ZERO; vac.dim()];
    for (d, c) in t_space.iter().zip(&tau) {
        linalg::axpy(*c, &d.right, &mut t_right);
    }
    let t_norm = norm(&t_right);
    if !(t_norm > 0.0) {
        return Err(Error::NoJordanCell(format!("H_-2|0> has no component at E_T = {e_t_c:.12}")));
    }
    linalg::scale(C64::new(1.0 / t_norm, 0.0), &mut t_right);
    tau.iter_mut().for_each(|c| *c /= t_norm);
    let mut t_left = vec![ZERO; vac.dim()];
    for (d, c) in t_space.iter().zip(&tau) {
        linalg::axpy(*c, &d.left, &mut t_left);
    }
    let eigen_residual = linalg::eigen_residual(h00, e_t_c, &t_right);
    let t_null = orthonormal(t_space.iter().map(|d| d.right.clone()).collect());

    // degenerate states of the partner level, over all arrow-reversal sectors
    let sectors = partner_sectors(&block, e_t_c)?;
    let Some(nearest) = sectors.iter().map(|x| x.right.value).min_by(|p, q| (p - e_t_c).norm().total_cmp(&(q - e_t_c).norm())) else {
        return Err(Error::NoJordanCell("partner sector is empty".into()));
    };
    let gap = (nearest - e_t_c).norm();
    if gap > DEGENERACY_TOL * e_t_c.norm() {
        return Err(Error::NoJordanCell(format!(
            "E_T = {e_t_c:.12} (Δ = {:.6}) has no partner within {DEGENERACY_TOL:e}; nearest E_X = {nearest:.12}, |E_X - E_T| = {gap:.3e}",
            scaled_gap(spec, e_t_c.re, ground.energy),
        )));
    }
    let degenerate: Vec<&SectorState> = sectors.iter().filter(|x| near(x.right.value, e_t_c)).collect();

    // solve down the grading for each X_k: (H_jj - E) t_j = -Σ_{c<j} H_jc t_c
    let mut chains = Vec::with_capacity(degenerate.len());
    for x in &degenerate {
        let mut chain: Vec<Vec<C64>> = vec![x.right.vector.clone()];
        for k in 1..=bottom {
            let mut rhs = vec![ZERO; block.levels[k].dim()];
            for (c, tc) in chain.iter().enumerate() {
                if let Some(b) = &block.blocks[k][c] {
                    b.apply_add(-ONE, tc, &mut rhs);
                }
            }
            if k < bottom {
                chain.push(solve_regular(block.diagonal(k), shift, &rhs)?);
            } else {
                chain.push(rhs);
            }
        }
        chains.push(chain);
    }

    // solvability at the bottom: W_j† (Σ_k c_k rhs_k + α T) = 0 for every j.
    // M_jk = W_j† rhs_k; the partner combination is c = M⁺ tau, then M c = -α tau.
    let m: Vec<Vec<C64>> = t_space
        .iter()
        .map(|d| chains.iter().map(|ch| dotc(&d.left, ch.last().expect("bottom level"))).collect())
        .collect();
    let scale_ref = chains.iter().map(|ch| norm(ch.last().expect("bottom"))).fold(0.0, f64::max).max(1e-300);
    let m_max = m.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    if m_max < 1e-10 * scale_ref {
        return Err(Error::NoJordanCell(format!(
            "partner at E = {nearest:.12} does not couple to T ({} candidate state(s))",
            chains.len()
        )));
    }
    let mut c = pseudo_solve(&m, &tau)?;
    let mc: Vec<C64> = m.iter().map(|row| row.iter().zip(&c).map(|(a, b)| a * b).sum()).collect();
    let mismatch: f64 = mc
        .iter()
        .zip(&tau)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if mismatch > 1e-6 {
        return Err(Error::NoJordanCell(format!(
            "no partner combination reproduces T (mismatch {mismatch:.3e})"
        )));
    }
    // unit top component
    let mut partner: Vec<Vec<C64>> = block.levels.iter().map(|l| vec![ZERO; l.dim()]).collect();
    for (chain, ck) in chains.iter().zip(&c) {
        for (dst, src) in partner.iter_mut().zip(chain) {
            linalg::axpy(*ck, src, dst);
        }
    }
    let top = norm(&partner[0]);
    for v in partner.iter_mut() {
        linalg::scale(C64::new(1.0 / top, 0.0), v);
    }
    c.iter_mut().for_each(|v| *v /= top);
    // M c = tau after rescaling by 1/top means α = -1/top
    let alpha = C64::new(-1.0 / top, 0.0);
    let dominant = (0..c.len()).max_by(|&i, &j| c[i].norm().total_cmp(&c[j].norm())).expect("nonempty");
    let x_state = degenerate[dominant];

    let rhs = partner.pop().expect("bottom level");
    let mut full_rhs = rhs;
    linalg::axpy(alpha, &t_right, &mut full_rhs);
    partner.push(solve_min_norm(h00, shift, &t_null, &full_rhs)?);

    let coupling = 2.0 * spec.gap_scale();
    // rescale T so that (H - E) t = A T
    let mut t_state = t_right.clone();
    linalg::scale(alpha / coupling, &mut t_state);
    let mut image = block.apply_shifted(shift, &partner);
    linalg::axpy(C64::new(-coupling, 0.0), &t_state, &mut image[bottom]);
    let res: f64 = image.iter().map(|v| norm(v).powi(2)).sum::<f64>().sqrt();
    let cell_residual = res / (coupling * norm(&t_state));
    Ok(JordanPair {
        e0: ground.energy,
        e_t: e_t_c.re,
        e_x: x_state.right.value.re,
        delta_n: scaled_gap(spec, e_t_c.re, ground.energy),
        cell_residual,
        eigen_residual,
        coupling,
        raw_coupling: alpha,
        t_state,
        t_left,
        partner,
        x_right: x_state.right.vector.clone(),
        x_left: x_state.left.clone(),
        partner_weights: c,
        source,
        source_leakage,
        candidates,
        block,
    })
}

fn near(a: C64, b: C64) -> bool {
    (a - b).norm() <= DEGENERACY_TOL * b.norm().max(1.0)
}

/// Right eigenvector with its biorthogonal left partner.
struct Dual {
    right: Vec<C64>,
    left: Vec<C64>,
}

/// Dual bases with W†V = I from right and left eigenvectors of one eigenvalue.
fn biorthogonalize(right: &[&EigenPair], left: &[&EigenPair]) -> Result<Vec<Dual>> {
    let k = right.len();
    if k == 0 || left.len() != k {
        return Err(Error::Numerical(format!(
            "{k} right but {} left eigenvectors at the same eigenvalue",
            left.len()
        )));
    }
    // S = W†V; W' = W S^{-†}
    let s = faer::Mat::<C64>::from_fn(k, k, |i, j| dotc(&left[i].vector, &right[j].vector));
    let s_adj = s.adjoint().to_owned();
    let mut duals = Vec::with_capacity(k);
    for (j, r) in right.iter().enumerate() {
        let mut unit = vec![ZERO; k];
        unit[j] = ONE;
        let coef = dense_solve(&s_adj, &unit);
        let mut l = vec![ZERO; r.vector.len()];
        for (i, ci) in coef.iter().enumerate() {
            linalg::axpy(*ci, &left[i].vector, &mut l);
        }
        duals.push(Dual {
            right: r.vector.clone(),
            left: l,
        });
    }
    Ok(duals)
}

/// Gram-Schmidt (twice) on a few vectors.
fn orthonormal(mut vs: Vec<Vec<C64>>) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(vs.len());
    for v in vs.iter_mut() {
        for _ in 0..2 {
            for u in &out {
                let h = dotc(u, v);
                linalg::axpy(-h, u, v);
            }
        }
        if linalg::normalize(v) > 1e-12 {
            out.push(std::mem::take(v));
        }
    }
    out
}

/// Minimum-norm least-squares solution of M c = rhs for a small dense M.
fn pseudo_solve(m: &[Vec<C64>], rhs: &[C64]) -> Result<Vec<C64>> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    // c = M† (M M†)^{-1} rhs, M of full row rank
    let mm = faer::Mat::<C64>::from_fn(rows, rows, |i, j| (0..cols).map(|k| m[i][k] * m[j][k].conj()).sum());
    let sv = mm
        .singular_values()
        .map_err(|e| Error::Numerical(format!("svd failed: {e:?}")))?;
    if !(sv[rows - 1] > 1e-14 * sv[0]) {
        return Err(Error::NoJordanCell(format!(
            "partner states reach only part of the E_T eigenspace (singular values {:.3e} .. {:.3e})",
            sv[0],
            sv[rows - 1]
        )));
    }
    let y = dense_solve(&mm, rhs);
    Ok((0..cols).map(|k| (0..rows).map(|i| m[i][k].conj() * y[i]).sum()).collect())
}

/// Eigenstate of the top level within one arrow-reversal sector.
struct SectorState {
    right: EigenPair,
    left: Vec<C64>,
}

/// For each sector of the arrow reversal F, the top-level eigenstates nearest
/// `target`. A sector is isolated by lifting the other one: H + Λ (1 ∓ F)/2
/// with Λ above the spectral radius. Without arrows there is a single sector.
fn partner_sectors(block: &GradedBlock, target: C64) -> Result<Vec<SectorState>> {
    let h = block.diagonal(0);
    let lifted: Vec<SparseOperator<C64>> = match &block.flip {
        None => vec![h.clone()],
        Some(f) => {
            let lambda = 2.0 * row_sum_norm(h) + 1.0;
            let id = SparseOperator::<C64>::identity(h.rows());
            [1.0, -1.0]
                .iter()
                .map(|&sign| {
                    // keep F = sign, lift F = -sign
                    let p = id.combine(C64::new(0.5, 0.0), f, C64::new(-0.5 * sign, 0.0));
                    h.combine(ONE, &p, C64::new(lambda, 0.0))
                })
                .collect()
        }
    };
    let mut out = Vec::with_capacity(lifted.len());
    for a in &lifted {
        let (right, left) = if a.rows() <= DENSE_EIGEN_LIMIT {
            (
                linalg::lowest_eigenpairs(a, a.rows(), DENSE_EIGEN_LIMIT)?,
                linalg::lowest_eigenpairs(&a.adjoint(), a.rows(), DENSE_EIGEN_LIMIT)?,
            )
        } else {
            eigensystem(a, 8)?
        };
        let Some(best) = right.iter().map(|p| p.value).min_by(|p, q| (p - target).norm().total_cmp(&(q - target).norm())) else {
            continue;
        };
        // the nearest state, and anything degenerate with it
        for p in right.into_iter().filter(|p| near(p.value, best)) {
            let l = matching_left(&left, p.value)?.vector.clone();
            out.push(SectorState { right: p, left: l });
        }
    }
    Ok(out)
}

fn row_sum_norm(a: &SparseOperator<C64>) -> f64 {
    (0..a.rows()).map(|r| a.row(r).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn argmax(c: &[Candidate]) -> usize {
    c.iter()
        .enumerate()
        .max_by(|a, b| a.1.weight.total_cmp(&b.1.weight))
        .map(|p| p.0)
        .expect("nonempty candidate list")
}
