//! The gluing form: closed examples, symmetry, invariance, self-adjointness.

use loopcell::bilinear::{glue, glue_loops, pair_real, GramMatrix};
use loopcell::checks::{gram_self_adjoint, gram_symmetry};
use loopcell::graded::Model;
use loopcell::{make_spec, LinkPattern, ModelKind, Weighting};

fn model(kind: ModelKind, l: usize) -> Model {
    Model::for_spec(&make_spec(kind, l).unwrap())
}

#[test]
fn dense_four_site_vacuum_gram_is_all_ones_at_unit_weight() {
    let basis = model(ModelKind::Dense, 4).enumerate(0).unwrap();
    let g = GramMatrix::new(&basis, Weighting::At(1.0));
    assert_eq!(g.dim(), 2);
    for r in 0..2 {
        assert!(g.row(r).iter().all(|&v| v == 1.0));
    }
}

#[test]
fn loop_counts_by_hand() {
    let a = LinkPattern::from_arcs(4, &[(0, 1), (2, 3)], &[]).unwrap();
    let b = LinkPattern::from_arcs(4, &[(1, 2), (0, 3)], &[]).unwrap();
    assert_eq!(glue_loops(&a, &a), Some(2));
    assert_eq!(glue_loops(&a, &b), Some(1));
    assert_eq!(glue(&a, &b, 0.5).unwrap(), 0.5);
    assert_eq!(glue(&a, &a, 0.5).unwrap(), 0.25);
    // through-lines must connect across the gluing
    let d = LinkPattern::from_arcs(4, &[(1, 2)], &[0, 3]).unwrap();
    let e = LinkPattern::from_arcs(4, &[(0, 1)], &[2, 3]).unwrap();
    assert_eq!(glue_loops(&d, &d), Some(1));
    assert_eq!(glue_loops(&d, &e), Some(0));
    // here the line from site 0 comes back through the arc of f to site 1
    let f = LinkPattern::from_arcs(4, &[(2, 3)], &[0, 1]).unwrap();
    assert_eq!(glue_loops(&f, &e), None);
    assert!(glue(&a, &d, 1.0).is_err());
}

#[test]
fn dense_gram_at_zero_weight_is_rank_one_on_the_vacuum() {
    // with n = 0 only gluings with no closed loop survive, and every vacuum
    // gluing closes at least one loop
    let basis = model(ModelKind::Dense, 8).enumerate(0).unwrap();
    let g = GramMatrix::new(&basis, Weighting::At(0.0));
    assert!((0..g.dim()).all(|r| g.row(r).iter().all(|&v| v == 0.0)));
    let d = GramMatrix::new(&basis, Weighting::Derivative(0.0));
    // d/dn n^k at 0 keeps exactly the single-loop gluings
    for r in 0..d.dim() {
        for c in 0..d.dim() {
            let one_loop = glue_loops(basis.pattern(r), basis.pattern(c)) == Some(1);
            assert_eq!(d.get(r, c), if one_loop { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn gram_is_symmetric_and_translation_invariant() {
    for (kind, sizes) in [(ModelKind::Dense, vec![4usize, 6, 8, 10]), (ModelKind::Dilute, vec![4, 6, 8])] {
        for l in sizes {
            let m = model(kind, l);
            for lines in [0usize, 2, 4] {
                if lines > l || (kind == ModelKind::Dilute && lines == 4) {
                    continue;
                }
                let basis = m.enumerate(lines).unwrap();
                for n in [0.5, 1.0, 2.0] {
                    let out = gram_symmetry(&basis, n);
                    assert!(out.passed, "{kind} L={l} lines={lines} n={n}: {}", out.worst);
                    assert!(GramMatrix::new(&basis, Weighting::At(n)).is_symmetric());
                }
            }
        }
    }
}

#[test]
fn hamiltonian_is_self_adjoint_for_the_form() {
    for (kind, l) in [(ModelKind::Dense, 8usize), (ModelKind::Dense, 10), (ModelKind::Dilute, 6), (ModelKind::Dilute, 8)] {
        let m = model(kind, l);
        for lines in [0usize, 2] {
            let basis = m.enumerate(lines).unwrap();
            for n in [0.0, 0.7, 1.0] {
                let out = gram_self_adjoint(&m, &basis, n);
                assert!(out.passed, "{kind} L={l} lines={lines} n={n}: {:.3e}", out.worst);
            }
        }
    }
}

#[test]
fn pairing_is_bilinear() {
    let basis = model(ModelKind::Dense, 6).enumerate(0).unwrap();
    let w = Weighting::At(0.5);
    let d = basis.len();
    let x: Vec<f64> = (0..d).map(|i| (i as f64) - 1.5).collect();
    let y: Vec<f64> = (0..d).map(|i| 1.0 / (i as f64 + 1.0)).collect();
    let z: Vec<f64> = (0..d).map(|i| ((i * 7) % 5) as f64).collect();
    let yz: Vec<f64> = y.iter().zip(&z).map(|(a, b)| 2.0 * a - b).collect();
    let lhs = pair_real(&x, &yz, &basis, w).unwrap();
    let rhs = 2.0 * pair_real(&x, &y, &basis, w).unwrap() - pair_real(&x, &z, &basis, w).unwrap();
    assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    let (xy, yx) = (pair_real(&x, &y, &basis, w).unwrap(), pair_real(&y, &x, &basis, w).unwrap());
    assert!((xy - yx).abs() < 1e-14 * xy.abs());
    assert!(pair_real(&x, &y[..d - 1], &basis, w).is_err());
}
