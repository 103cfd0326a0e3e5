//! Ground-state anchors and Jordan cells at small and moderate sizes.

use loopcell::checks::{ground_anchors, jordan_cell, CELL_RESIDUAL_TOL};
use loopcell::measure::measure;
use loopcell::spectra::{find_jordan_pair, ground_state, scaled_gap, Lattice};
use loopcell::virasoro::apply_hm2;
use loopcell::{make_spec, ModelKind, Weighting};

#[test]
fn dense_ground_state_is_exactly_minus_l_at_c_zero() {
    // E0 = -L for percolation at every even size
    for l in [4usize, 6, 8, 10, 12] {
        let spec = make_spec(ModelKind::Dense, l).unwrap();
        let g = ground_state(&Lattice::new(&spec).unwrap(), spec.n).unwrap();
        assert!((g.energy + l as f64).abs() < 1e-10, "L={l}: {}", g.energy);
        assert!(g.residual < 1e-8);
    }
}

#[test]
fn ground_anchors_hold() {
    for (kind, l) in [(ModelKind::Dense, 16usize), (ModelKind::Dilute, 14)] {
        for out in ground_anchors(&make_spec(kind, l).unwrap()) {
            assert!(out.passed, "{kind} L={l} {}: {} ({})", out.name, out.worst, out.detail);
        }
    }
}

#[test]
fn jordan_cells_close_at_small_sizes() {
    for (kind, l) in [
        (ModelKind::Dense, 6usize),
        (ModelKind::Dense, 8),
        (ModelKind::Dense, 10),
        (ModelKind::Dilute, 6),
        (ModelKind::Dilute, 8),
        (ModelKind::Dilute, 10),
    ] {
        let out = jordan_cell(&make_spec(kind, l).unwrap());
        assert!(out.passed, "{kind} L={l}: {:.3e} {}", out.worst, out.detail);
        assert!(out.worst <= CELL_RESIDUAL_TOL);
    }
}

#[test]
fn jordan_pair_is_consistent() {
    let spec = make_spec(ModelKind::Dense, 10).unwrap();
    let lat = Lattice::new(&spec).unwrap();
    let ground = ground_state(&lat, spec.n).unwrap();
    let y = apply_hm2(&spec, &lat.model, &lat.vacuum, Weighting::At(spec.n), &ground.vector);
    let jp = find_jordan_pair(&lat, &ground, &y, spec.n).unwrap();
    // T and X are degenerate and the gap of T approaches 2
    assert!((jp.e_t - jp.e_x).abs() < 1e-8);
    assert!((jp.delta_n - scaled_gap(&spec, jp.e_t, jp.e0)).abs() < 1e-12);
    assert!(jp.delta_n > 1.7 && jp.delta_n < 2.0, "Δ = {}", jp.delta_n);
    assert!(jp.eigen_residual < 1e-10);
    assert!((jp.coupling - 2.0 * spec.gap_scale()).abs() < 1e-12);
    assert!(jp.raw_coupling.norm() > 1e-6);
    assert_eq!(jp.partner_orbits().lines(), 4);
    assert_eq!(jp.vacuum_orbits().lines(), 0);
    let near = jp.nearest_to_two();
    assert!(!near.is_empty() && near.len() <= 3);
}

#[test]
fn measured_gaps_grow_towards_two() {
    let mut last = 0.0;
    for l in [8usize, 10, 12] {
        let m = measure(&make_spec(ModelKind::Dense, l).unwrap()).unwrap();
        assert!(m.record.delta_n > last && m.record.delta_n < 2.0);
        assert!(m.record.c_estimate.abs() < 1e-8);
        last = m.record.delta_n;
    }
}
