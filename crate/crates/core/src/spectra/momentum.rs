//! Momentum blocks under the two-site translation u².
//!
//! For an orbit representative r of length d the block basis vector is
//! |r,k> = (√d / N) Σ_{m<N} e^{-ikm} u^{2m} |r>, which is a unit vector with
//! amplitude e^{-ikm}/√d on u^{2m} r. It exists only when e^{ikd} = 1.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::graded::{Contraction, Model, Weighting};
use crate::linkstate::{LinkPattern, SectorBasis};
use crate::sparse::SparseOperator;

/// Orbit representatives of one sector that survive at spin `s`.
#[derive(Clone, Debug)]
pub struct OrbitBasis {
    len: usize,
    lines: usize,
    spin: i64,
    reps: Vec<LinkPattern>,
    orbit: Vec<usize>,
    index: FxHashMap<u128, usize>,
}

impl OrbitBasis {
    /// From an enumerated sector.
    pub fn from_sector(basis: &SectorBasis, spin: i64) -> Self {
        let mut reps = Vec::new();
        for p in basis.patterns() {
            let (rep, m, d) = p.canonical_rotation();
            if m == 0 && rep == *p {
                reps.push((rep, d));
            }
        }
        Self::from_reps(basis.sites(), basis.lines(), spin, reps)
    }

    /// Closure over orbits from the seed orbit; never stores whole orbits.
    pub fn by_closure(model: &Model, lines: usize, spin: i64) -> Result<Self> {
        Self::by_closure_from(model, &[model.seed(lines)?], spin)
    }

    /// Orbit closure from arbitrary seeds with a common line count (arrows
    /// are kept).
    pub fn by_closure_from(model: &Model, seeds: &[LinkPattern], spin: i64) -> Result<Self> {
        let lines = seeds.first().ok_or_else(|| Error::invalid("no seed patterns"))?.lines();
        if seeds.iter().any(|s| s.lines() != lines) {
            return Err(Error::invalid("seeds with different line counts"));
        }
        let mut seen: FxHashMap<u128, ()> = FxHashMap::default();
        let mut stack = Vec::new();
        let mut reps = Vec::new();
        for seed in seeds {
            let (rep, _, d) = seed.canonical_rotation();
            if seen.insert(rep.encode(), ()).is_none() {
                stack.push(rep);
                reps.push((rep, d));
            }
        }
        let mut buf = Vec::new();
        while let Some(p) = stack.pop() {
            for i in 0..model.len() {
                buf.clear();
                model.act(i, &p, Contraction::Standard, &mut buf);
                for t in &buf {
                    if t.pattern.lines() != lines {
                        continue;
                    }
                    let (rep, _, d) = t.pattern.canonical_rotation();
                    if seen.insert(rep.encode(), ()).is_none() {
                        stack.push(rep);
                        reps.push((rep, d));
                    }
                }
            }
        }
        Ok(Self::from_reps(model.len(), lines, spin, reps))
    }

    fn from_reps(len: usize, lines: usize, spin: i64, mut reps: Vec<(LinkPattern, usize)>) -> Self {
        let half = (len / 2) as i64;
        reps.retain(|(_, d)| (spin * *d as i64).rem_euclid(half) == 0);
        reps.sort_by_key(|(p, _)| p.encode());
        let index = reps
            .iter()
            .enumerate()
            .map(|(k, (p, _))| (p.encode(), k))
            .collect();
        let (reps, orbit) = reps.into_iter().unzip();
        OrbitBasis {
            len,
            lines,
            spin,
            reps,
            orbit,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn lines(&self) -> usize {
        self.lines
    }

    pub fn spin(&self) -> i64 {
        self.spin
    }

    pub fn sites(&self) -> usize {
        self.len
    }

    pub fn momentum(&self) -> f64 {
        2.0 * PI * self.spin as f64 / (self.len / 2) as f64
    }

    pub fn reps(&self) -> &[LinkPattern] {
        &self.reps
    }

    pub fn orbit_len(&self, r: usize) -> usize {
        self.orbit[r]
    }

    /// Locates `q = u^{2m} rep`: returns (block index, m).
    pub fn locate(&self, q: &LinkPattern) -> Option<(usize, usize)> {
        let (rep, m, _) = q.canonical_rotation();
        self.index.get(&rep.encode()).map(|&r| (r, m))
    }

    fn phase(&self, m: usize) -> C64 {
        C64::from_polar(1.0, self.momentum() * m as f64)
    }

    /// Block coefficients to amplitudes on the full sector basis.
    pub fn expand(&self, full: &SectorBasis, coeffs: &[C64]) -> Vec<C64> {
        assert_eq!(coeffs.len(), self.dim());
        let mut out = vec![C64::new(0.0, 0.0); full.len()];
        for (r, rep) in self.reps.iter().enumerate() {
            let d = self.orbit[r];
            let amp = coeffs[r] / (d as f64).sqrt();
            let mut q = *rep;
            for m in 0..d {
                let k = full.index_of(&q).expect("orbit element missing from the sector basis");
                out[k] = amp * self.phase(m).conj();
                q = q.translate_two();
            }
        }
        out
    }

    /// Orthogonal projection of a full-basis vector onto the block.
    pub fn project(&self, full: &SectorBasis, v: &[C64]) -> Vec<C64> {
        self.reps
            .iter()
            .enumerate()
            .map(|(r, rep)| {
                let d = self.orbit[r];
                let mut q = *rep;
                let mut acc = C64::new(0.0, 0.0);
                for m in 0..d {
                    let k = full.index_of(&q).expect("orbit element missing from the sector basis");
                    acc += self.phase(m) * v[k];
                    q = q.translate_two();
                }
                acc / (d as f64).sqrt()
            })
            .collect()
    }

    /// Sparse left functional x ↦ conj(x) for the full-basis bilinear form:
    /// pairs (full index of rep, √d · conj(x_r)).
    pub fn left_functional(&self, full: &SectorBasis, coeffs: &[C64]) -> Vec<(usize, C64)> {
        self.reps
            .iter()
            .enumerate()
            .filter(|(r, _)| coeffs[*r].norm_sqr() != 0.0)
            .map(|(r, rep)| {
                let k = full.index_of(rep).expect("representative missing from the sector basis");
                (k, coeffs[r].conj() * (self.orbit[r] as f64).sqrt())
            })
            .collect()
    }
}

/// Block of Σ_i c_i e_i from `from` into `to`, with optional per-site factors c_i.
pub fn project_operator(
    model: &Model,
    from: &OrbitBasis,
    to: &OrbitBasis,
    weight: Weighting,
    mode: Contraction,
    site_factor: Option<&(dyn Fn(usize) -> C64 + Sync)>,
) -> Result<SparseOperator<C64>> {
    if from.spin != to.spin || from.len != to.len {
        return Err(Error::invalid("momentum blocks do not match"));
    }
    let columns: Vec<Vec<(usize, C64)>> = (0..from.dim())
        .into_par_iter()
        .map_init(Vec::new, |buf, c| {
            buf.clear();
            model.act_all(None, &from.reps[c], mode, buf);
            let dc = from.orbit[c] as f64;
            let mut col = Vec::new();
            for (site, t) in buf.iter() {
                if t.pattern.lines() != to.lines {
                    continue;
                }
                let w = weight.eval_complex(t);
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                if let Some((r, m)) = to.locate(&t.pattern) {
                    let mut v = to.phase(m) * w * (dc / to.orbit[r] as f64).sqrt();
                    if let Some(f) = site_factor {
                        v *= f(*site);
                    }
                    col.push((r, v));
                }
            }
            col
        })
        .collect();
    Ok(SparseOperator::from_columns(to.dim(), columns))
}

/// H = -Σ e_i restricted to a block (or to a cross-sector coupling with
/// plain line joining).
pub fn block_hamiltonian(model: &Model, from: &OrbitBasis, to: &OrbitBasis, weight: Weighting) -> Result<SparseOperator<C64>> {
    block_hamiltonian_with(model, from, to, weight, Contraction::Graded)
}

/// As `block_hamiltonian`, with `joining` used between different line counts.
pub fn block_hamiltonian_with(
    model: &Model,
    from: &OrbitBasis,
    to: &OrbitBasis,
    weight: Weighting,
    joining: Contraction,
) -> Result<SparseOperator<C64>> {
    let mode = if from.lines == to.lines {
        Contraction::Standard
    } else {
        joining
    };
    Ok(project_operator(model, from, to, weight, mode, None)?.scale(C64::new(-1.0, 0.0)))
}

/// The arrow reversal F on a block whose orbits are closed under it.
pub fn flip_operator(orbits: &OrbitBasis) -> Result<SparseOperator<C64>> {
    let mut trip = Vec::with_capacity(orbits.dim());
    for (c, rep) in orbits.reps.iter().enumerate() {
        let (r, m) = orbits
            .locate(&rep.flip_arrows())
            .ok_or_else(|| Error::invalid("orbit basis is not closed under arrow reversal"))?;
        let ratio = (orbits.orbit[c] as f64 / orbits.orbit[r] as f64).sqrt();
        trip.push((r, c, orbits.phase(m) * ratio));
    }
    Ok(SparseOperator::from_triplets(orbits.dim(), orbits.dim(), trip))
}
