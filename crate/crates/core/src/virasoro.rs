//! Lattice Virasoro modes from Fourier sums of the generators,
//! H_n = -(N/(π v_F)) Σ_{i=1}^{2N} e^{i n i π/N} (e_i - e_inf) + (c/12) δ_{n,0}.
//! Generator e_i acts on sites (i, i+1); in code site indices start at 0, so
//! the generator with zero-based index g carries the phase of i = g + 1.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::graded::{Contraction, GradedSpace, Model, Weighting};
use crate::linkstate::SectorBasis;
use crate::model::ModelSpec;
use crate::sparse::SparseOperator;

#[derive(Clone, Debug)]
pub struct LatticeVirasoro {
    pub mode: i64,
    pub matrix: SparseOperator<C64>,
}

/// Phase e^{i n i π / N} of the zero-based generator `g`.
pub fn mode_phase(spec: &ModelSpec, mode: i64, g: usize) -> C64 {
    let n_half = spec.n_half as f64;
    C64::from_polar(1.0, mode as f64 * PI * (g + 1) as f64 / n_half)
}

/// H_n on a graded space; `weight` fixes the loop weight of the generators.
pub fn build_hn(spec: &ModelSpec, model: &Model, space: &GradedSpace, mode: i64, weight: Weighting, contraction: Contraction) -> LatticeVirasoro {
    let columns: Vec<Vec<(usize, C64)>> = (0..space.dim())
        .into_par_iter()
        .map_init(Vec::new, |buf, col| {
            buf.clear();
            model.act_all(None, space.pattern(col), contraction, buf);
            buf.iter()
                .filter_map(|(g, t)| {
                    let w = weight.eval(t);
                    (w != 0.0).then(|| {
                        let row = space.global_index(&t.pattern).expect("pattern outside the space");
                        (row, mode_phase(spec, mode, *g) * w)
                    })
                })
                .collect()
        })
        .collect();
    let sum_e = SparseOperator::from_columns(space.dim(), columns);
    let prefactor = -(spec.n_half as f64) / (PI * spec.v_f);
    let phase_sum: C64 = (0..spec.l).map(|g| mode_phase(spec, mode, g)).sum();
    let mut diag = -phase_sum * spec.e_inf;
    if mode == 0 {
        diag += C64::new(spec.c / 12.0 / prefactor, 0.0);
    }
    // phase sums vanish up to roundoff for n ≠ 0 mod 2N; keep them exact zeros
    if diag.norm() < 1e-12 * spec.l as f64 {
        diag = C64::new(0.0, 0.0);
    }
    let id = SparseOperator::<C64>::identity(space.dim());
    let matrix = sum_e
        .combine(C64::new(1.0, 0.0), &id, diag)
        .scale(C64::new(prefactor, 0.0));
    LatticeVirasoro { mode, matrix }
}

/// H_{-2} applied to a vector on a single sector (standard action).
pub fn apply_hm2(spec: &ModelSpec, model: &Model, basis: &SectorBasis, weight: Weighting, v: &[C64]) -> Vec<C64> {
    let space = GradedSpace::from_sectors(vec![basis.clone()]);
    build_hn(spec, model, &space, -2, weight, Contraction::Standard).matrix.mul_vec(v)
}

/// (N/(π v_F)) (H + 2N e_inf) + c/12, the n = 0 mode written through H.
pub fn h0_from_hamiltonian(spec: &ModelSpec, h: &SparseOperator<f64>) -> SparseOperator<C64> {
    let pref = spec.n_half as f64 / (PI * spec.v_f);
    let id = SparseOperator::<f64>::identity(h.rows());
    h.combine(pref, &id, pref * spec.l as f64 * spec.e_inf + spec.c / 12.0)
        .to_complex()
}
