//! Loop bilinear form: glue the mirror image of one pattern onto another and
//! weight the closed loops.

use num_complex::Complex64;
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::graded::Weighting;
use crate::linkstate::{LinkPattern, SectorBasis, Site};

/// Number of closed loops in the glued diagram, or `None` when the gluing
/// vanishes: occupations differ, line counts differ, or a through-line of
/// one pattern returns to the same pattern.
pub fn glue_loops(a: &LinkPattern, b: &LinkPattern) -> Option<u32> {
    let l = a.len();
    if l != b.len() || a.occupancy() != b.occupancy() || a.lines() != b.lines() {
        return None;
    }
    let mut visited = [false; crate::model::MAX_SITES];
    for start in 0..l {
        if a.site(start) != Site::Defect || visited[start] {
            continue;
        }
        // leave a's defect downwards into b
        let mut k = start;
        let mut on_b = true;
        loop {
            visited[k] = true;
            let s = if on_b { b.site(k) } else { a.site(k) };
            match s {
                Site::Defect => {
                    if !on_b {
                        return None;
                    }
                    break;
                }
                Site::Paired(m) => {
                    k = m as usize;
                    visited[k] = true;
                    on_b = !on_b;
                }
                Site::Empty => unreachable!("occupancies were checked"),
            }
        }
    }
    let mut loops = 0;
    for start in 0..l {
        if visited[start] || a.site(start) == Site::Empty {
            continue;
        }
        loops += 1;
        let mut k = start;
        let mut on_a = true;
        loop {
            visited[k] = true;
            let s = if on_a { a.site(k) } else { b.site(k) };
            match s {
                Site::Paired(m) => k = m as usize,
                _ => unreachable!("defect met on a closed loop"),
            }
            visited[k] = true;
            on_a = !on_a;
            if k == start && on_a {
                break;
            }
        }
    }
    Some(loops)
}

#[inline]
pub fn glue_weight(a: &LinkPattern, b: &LinkPattern, w: Weighting) -> f64 {
    glue_loops(a, b).map_or(0.0, |loops| w.eval_parts(1.0, loops))
}

/// Form value at loop weight `n`; patterns must belong to the same sector.
pub fn glue(a: &LinkPattern, b: &LinkPattern, n: f64) -> Result<f64> {
    if a.len() != b.len() || a.lines() != b.lines() {
        return Err(Error::invalid(format!("gluing across sectors: {a} | {b}")));
    }
    Ok(glue_weight(a, b, Weighting::At(n)))
}

/// Groups basis positions by occupied-site mask; the form vanishes between groups.
#[derive(Clone, Debug)]
pub struct OccupancyIndex {
    groups: FxHashMap<u32, Vec<usize>>,
}

impl OccupancyIndex {
    pub fn new(basis: &SectorBasis) -> Self {
        let mut groups: FxHashMap<u32, Vec<usize>> = FxHashMap::default();
        for (k, p) in basis.patterns().iter().enumerate() {
            groups.entry(p.occupancy()).or_default().push(k);
        }
        OccupancyIndex { groups }
    }

    pub fn partners(&self, p: &LinkPattern) -> &[usize] {
        self.groups.get(&p.occupancy()).map_or(&[], |v| v.as_slice())
    }
}

/// Dense Gram matrix of a sector.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    dim: usize,
    values: Vec<f64>,
}

impl GramMatrix {
    pub fn new(basis: &SectorBasis, w: Weighting) -> Self {
        let dim = basis.len();
        let values: Vec<f64> = (0..dim * dim)
            .into_par_iter()
            .map(|k| glue_weight(basis.pattern(k / dim), basis.pattern(k % dim), w))
            .collect();
        GramMatrix { dim, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.dim + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.dim..(r + 1) * self.dim]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|r| (0..r).all(|c| self.get(r, c) == self.get(c, r)))
    }
}

/// Σ_k coeff_k Σ_b G(a_k, b) y_b for a sparse left functional. The caller
/// supplies already conjugated coefficients.
pub fn contract_left(
    left: &[(usize, Complex64)],
    y: &[Complex64],
    basis: &SectorBasis,
    occ: &OccupancyIndex,
    w: Weighting,
) -> Complex64 {
    assert_eq!(y.len(), basis.len());
    // per-term values in parallel, summed in a fixed order for reproducibility
    let terms: Vec<Complex64> = left
        .par_iter()
        .map(|&(a, ca)| {
            let pa = basis.pattern(a);
            let mut acc = Complex64::new(0.0, 0.0);
            for &b in occ.partners(pa) {
                if y[b] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let g = glue_weight(pa, basis.pattern(b), w);
                if g != 0.0 {
                    acc += y[b] * g;
                }
            }
            ca * acc
        })
        .collect();
    terms.into_iter().fold(Complex64::new(0.0, 0.0), |x, y| x + y)
}

/// Conjugate-bilinear extension: Σ conj(x_a) G_ab y_b over one sector.
pub fn pair(x: &[Complex64], y: &[Complex64], basis: &SectorBasis, w: Weighting) -> Result<Complex64> {
    if x.len() != basis.len() || y.len() != basis.len() {
        return Err(Error::invalid(format!(
            "pairing vectors of length {} and {} over a basis of {}",
            x.len(),
            y.len(),
            basis.len()
        )));
    }
    let occ = OccupancyIndex::new(basis);
    let left: Vec<(usize, Complex64)> = x
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm_sqr() != 0.0)
        .map(|(k, v)| (k, v.conj()))
        .collect();
    Ok(contract_left(&left, y, basis, &occ, w))
}

/// Real bilinear form on real vectors.
pub fn pair_real(x: &[f64], y: &[f64], basis: &SectorBasis, w: Weighting) -> Result<f64> {
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let yc: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(pair(&xc, &yc, basis, w)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkstate::seed_pattern;

    #[test]
    fn small_gluings() {
        let arc = seed_pattern(2, 0).unwrap();
        assert_eq!(glue(&arc, &arc, 1.0).unwrap(), 1.0);
        assert_eq!(glue_loops(&arc, &arc), Some(1));
        let d = seed_pattern(2, 2).unwrap();
        assert_eq!(glue(&d, &d, 0.3).unwrap(), 1.0);
        assert!(glue(&d, &arc, 1.0).is_err());
    }

    #[test]
    fn returning_defect_kills_the_form() {
        let a = LinkPattern::from_arcs(4, &[(2, 3)], &[0, 1]).unwrap();
        let b = LinkPattern::from_arcs(4, &[(1, 2)], &[0, 3]).unwrap();
        assert_eq!(glue_loops(&a, &b), Some(0));
        let c = LinkPattern::from_arcs(4, &[(0, 1)], &[2, 3]).unwrap();
        assert_eq!(glue_loops(&a, &c), None);
    }

    #[test]
    fn occupancy_mismatch_vanishes() {
        let a = LinkPattern::from_arcs(4, &[(0, 1)], &[]).unwrap();
        let b = LinkPattern::from_arcs(4, &[(1, 2)], &[]).unwrap();
        assert_eq!(glue_loops(&a, &b), None);
    }
}
