//! Named property checks shared by the test suite and `loopcell check`.
//!
//! Each check returns a `CheckOutcome` instead of panicking, so a run can
//! report every violation at once.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bilinear::{glue_weight, GramMatrix};
use crate::error::Result;
use crate::graded::{assemble_graded, assemble_graded_complex, assemble_sector, translation_operator, Contraction, GradedSpace, Model, Weighting};
use crate::linkstate::SectorBasis;
use crate::measure::measure;
use crate::model::{ModelKind, ModelSpec};
use crate::sparse::{Scalar, SparseOperator};
use crate::spectra::{central_charge_estimate, ground_state, Lattice};
use crate::virasoro::{build_hn, h0_from_hamiltonian};

/// Bound on the cell residual accepted by `jordan_cell`.
pub const CELL_RESIDUAL_TOL: f64 = 1e-8;
/// Tolerance for identities that involve irrational matrix entries.
pub const ROUNDOFF_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Largest violation found (0 for exact identities that hold).
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckOutcome {
    fn from_worst(name: impl Into<String>, worst: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            passed: worst <= tolerance,
            worst,
            tolerance,
            detail: detail.into(),
        }
    }

    fn failed(name: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            passed: false,
            worst: f64::INFINITY,
            tolerance: 0.0,
            detail: detail.into(),
        }
    }
}

/// e_i² = n e_i, e_i e_{i±1} e_i = e_i and far commutation, indices cyclic.
/// `tolerance = 0` asks for exact equality.
pub fn tl_relations<T: Scalar>(name: &str, gens: &[SparseOperator<T>], n: f64, tolerance: f64) -> CheckOutcome {
    let l = gens.len();
    let mut worst = 0.0f64;
    let mut where_ = String::new();
    let mut note = |v: f64, what: String| {
        if v > worst {
            worst = v;
            where_ = what;
        }
    };
    for i in 0..l {
        let ei = &gens[i];
        let sq = ei.matmul(ei);
        note(sq.max_abs_diff(&ei.scale(T::from_real(n))), format!("e_{i}^2"));
        for j in [(i + 1) % l, (i + l - 1) % l] {
            let ej = &gens[j];
            note(ei.matmul(ej).matmul(ei).max_abs_diff(ei), format!("e_{i} e_{j} e_{i}"));
        }
        for k in 0..l {
            let d = (i as isize - k as isize).rem_euclid(l as isize) as usize;
            if d >= 2 && d <= l - 2 {
                let ek = &gens[k];
                note(ei.matmul(ek).max_abs_diff(&ek.matmul(ei)), format!("[e_{i}, e_{k}]"));
            }
        }
    }
    let detail = if worst > tolerance {
        format!("{where_} off by {worst:.3e}")
    } else {
        format!("{l} generators")
    };
    CheckOutcome::from_worst(name, worst, tolerance, detail)
}

/// Generators e_0 .. e_{L-1} on a graded space.
pub fn generators(model: &Model, space: &GradedSpace, n: f64, mode: Contraction) -> Vec<SparseOperator<f64>> {
    (0..model.len())
        .map(|i| assemble_graded(model, space, Some(i), Weighting::At(n), mode))
        .collect()
}

pub fn generators_complex(model: &Model, space: &GradedSpace, n: f64, mode: Contraction) -> Vec<SparseOperator<C64>> {
    (0..model.len())
        .map(|i| assemble_graded_complex(model, space, Some(i), Weighting::At(n), mode))
        .collect()
}

/// G symmetric and glue(u²a, u²b) = glue(a, b), both exact.
pub fn gram_symmetry(basis: &SectorBasis, n: f64) -> CheckOutcome {
    let w = Weighting::At(n);
    let g = GramMatrix::new(basis, w);
    let mut worst = 0.0f64;
    for r in 0..g.dim() {
        for c in 0..r {
            worst = worst.max((g.get(r, c) - g.get(c, r)).abs());
        }
    }
    for r in 0..g.dim() {
        let a = basis.pattern(r).translate_two();
        for c in 0..g.dim() {
            let b = basis.pattern(c).translate_two();
            worst = worst.max((glue_weight(&a, &b, w) - g.get(r, c)).abs());
        }
    }
    CheckOutcome::from_worst(
        format!("gram_symmetry[lines={}]", basis.lines()),
        worst,
        0.0,
        format!("dim {}", g.dim()),
    )
}

/// G H = Hᵀ G on one sector, relative to the largest entry of G H.
pub fn gram_self_adjoint(model: &Model, basis: &SectorBasis, n: f64) -> CheckOutcome {
    let w = Weighting::At(n);
    let g = GramMatrix::new(basis, w);
    // rows of Hᵀ are the columns of H
    let ht = assemble_sector(model, basis, None, w).transpose();
    let d = g.dim();
    let (worst, scale) = (0..d)
        .into_par_iter()
        .map(|r| {
            let mut worst = 0.0f64;
            let mut scale = 0.0f64;
            for c in 0..d {
                let gh: f64 = ht.row(c).map(|(k, v)| g.get(r, k) * v).sum();
                let htg: f64 = ht.row(r).map(|(k, v)| v * g.get(k, c)).sum();
                worst = worst.max((gh - htg).abs());
                scale = scale.max(gh.abs());
            }
            (worst, scale)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    CheckOutcome::from_worst(
        format!("gram_self_adjoint[lines={}]", basis.lines()),
        worst / scale.max(1.0),
        ROUNDOFF_TOL,
        format!("dim {d}"),
    )
}

/// [H, u²] = 0 on the graded space. Exact for dense, whose entries are
/// small integers; the dilute entries are irrational and two sums in
/// different orders may differ in the last bit.
pub fn translation_commutes(model: &Model, space: &GradedSpace, n: f64) -> CheckOutcome {
    let h = assemble_graded(model, space, None, Weighting::At(n), Contraction::Graded);
    let u = translation_operator(space);
    let worst = h.matmul(&u).max_abs_diff(&u.matmul(&h));
    let tol = match model.kind() {
        ModelKind::Dense => 0.0,
        ModelKind::Dilute => ROUNDOFF_TOL * h.max_abs(),
    };
    CheckOutcome::from_worst("translation_commutes", worst, tol, format!("dim {}", space.dim()))
}

/// u² H_m u⁻² = e^{-2πim/N} H_m for a few modes.
pub fn virasoro_momentum(spec: &ModelSpec, model: &Model, space: &GradedSpace) -> CheckOutcome {
    let u = translation_operator(space).to_complex();
    let u_inv = u.adjoint();
    let mut worst = 0.0f64;
    for m in [-2i64, -1, 1, 2] {
        let hm = build_hn(spec, model, space, m, Weighting::At(spec.n), Contraction::Graded).matrix;
        let phase = C64::from_polar(1.0, -2.0 * PI * m as f64 / spec.n_half as f64);
        let lhs = u.matmul(&hm).matmul(&u_inv);
        worst = worst.max(lhs.max_abs_diff(&hm.scale(phase)) / hm.max_abs().max(1.0));
    }
    CheckOutcome::from_worst("virasoro_momentum", worst, ROUNDOFF_TOL, "modes ±1, ±2")
}

/// H_0 built from its Fourier sum equals the affine function of H.
pub fn h0_identity(spec: &ModelSpec, model: &Model, space: &GradedSpace) -> CheckOutcome {
    let w = Weighting::At(spec.n);
    let h = assemble_graded(model, space, None, w, Contraction::Graded).scale(-1.0);
    let direct = build_hn(spec, model, space, 0, w, Contraction::Graded).matrix;
    let affine = h0_from_hamiltonian(spec, &h);
    let worst = direct.max_abs_diff(&affine) / affine.max_abs().max(1.0);
    CheckOutcome::from_worst("h0_identity", worst, ROUNDOFF_TOL, format!("dim {}", space.dim()))
}

/// E0/L and the central-charge estimate against the known bulk values.
pub fn ground_anchors(spec: &ModelSpec) -> Vec<CheckOutcome> {
    let (e_tol, c_tol) = match spec.kind {
        ModelKind::Dense => (1e-2, 0.1),
        ModelKind::Dilute => (2e-2, 0.2),
    };
    let run = || -> Result<(f64, f64)> {
        let lat = Lattice::new(spec)?;
        let g = ground_state(&lat, spec.n)?;
        Ok((g.energy / spec.l as f64, central_charge_estimate(spec, g.energy)))
    };
    match run() {
        Ok((e, c)) => vec![
            CheckOutcome::from_worst("ground_energy_density", (e + spec.e_inf).abs(), e_tol, format!("E0/L = {e:.9}")),
            CheckOutcome::from_worst("central_charge", c.abs(), c_tol, format!("c = {c:.3e}")),
        ],
        Err(e) => vec![CheckOutcome::failed("ground_energy_density", e.to_string())],
    }
}

/// The Jordan cell exists and closes to `CELL_RESIDUAL_TOL`.
pub fn jordan_cell(spec: &ModelSpec) -> CheckOutcome {
    match measure(spec) {
        Ok(m) => CheckOutcome::from_worst(
            "jordan_cell",
            m.record.cell_residual,
            CELL_RESIDUAL_TOL,
            format!("b = {:.6}, Δ = {:.6}", m.record.b_n, m.record.delta_n),
        ),
        Err(e) => CheckOutcome::failed("jordan_cell", e.to_string()),
    }
}

/// Every check for one model and size. TL relations run only for dense,
/// whose generators form a Temperley-Lieb algebra; the algebraic checks use
/// the graded space with up to `min(L, 4)` lines.
pub fn suite(spec: &ModelSpec) -> Result<Vec<CheckOutcome>> {
    let model = Model::for_spec(spec);
    let top = match spec.kind {
        ModelKind::Dense => spec.l.min(4),
        ModelKind::Dilute => 2,
    };
    let space = GradedSpace::new(&model, top)?;
    let mut out = Vec::new();
    if spec.kind == ModelKind::Dense {
        out.push(tl_relations("tl_relations", &generators(&model, &space, spec.n, Contraction::Graded), spec.n, 0.0));
        let arrowed = GradedSpace::arrowed(&model, top)?;
        out.push(tl_relations(
            "tl_relations_arrowed",
            &generators_complex(&model, &arrowed, spec.n, Contraction::Arrowed),
            spec.n,
            ROUNDOFF_TOL,
        ));
    }
    for basis in space.sectors() {
        out.push(gram_symmetry(basis, spec.n));
        out.push(gram_self_adjoint(&model, basis, spec.n));
    }
    out.push(translation_commutes(&model, &space, spec.n));
    out.push(virasoro_momentum(spec, &model, &space));
    out.push(h0_identity(spec, &model, &space));
    out.extend(ground_anchors(spec));
    out.push(jordan_cell(spec));
    Ok(out)
}
