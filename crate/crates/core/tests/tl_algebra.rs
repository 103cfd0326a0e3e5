//! Temperley-Lieb relations and the structure of the assembled Hamiltonians.
//!
//! Loop weights are dyadic, so every matrix entry is a small dyadic rational
//! and f64 products are exact: the relations are checked with tolerance 0.

use loopcell::checks::{generators, generators_complex, tl_relations, translation_commutes};
use loopcell::graded::{assemble_graded, translation_operator, Contraction, GradedSpace, Model, Weighting};
use loopcell::linkstate::seed_pattern;
use loopcell::tl_dense::{act_e_dense, assemble_hamiltonian};
use loopcell::tl_dilute::assemble_hamiltonian_dilute;
use loopcell::{make_spec, LinkPattern, ModelKind, SparseOperator};

const DYADIC: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

fn dense_model(l: usize) -> Model {
    Model::for_spec(&make_spec(ModelKind::Dense, l).unwrap())
}

#[test]
fn relations_hold_exactly_on_single_sectors() {
    for l in [4usize, 6, 8, 10] {
        let model = dense_model(l);
        for lines in (0..=l.min(6)).step_by(2) {
            let space = GradedSpace::from_sectors(vec![model.enumerate(lines).unwrap()]);
            for n in DYADIC {
                let gens = generators(&model, &space, n, Contraction::Standard);
                let out = tl_relations("sector", &gens, n, 0.0);
                assert!(out.passed, "L={l} lines={lines} n={n}: {}", out.detail);
            }
        }
    }
}

#[test]
fn relations_hold_exactly_on_graded_spaces() {
    for l in [4usize, 6, 8, 10] {
        let model = dense_model(l);
        let space = GradedSpace::new(&model, l.min(6)).unwrap();
        for n in DYADIC {
            let gens = generators(&model, &space, n, Contraction::Graded);
            let out = tl_relations("graded", &gens, n, 0.0);
            assert!(out.passed, "L={l} n={n}: {}", out.detail);
        }
    }
}

#[test]
fn arrowed_joining_is_a_representation_too() {
    for l in [4usize, 6, 8] {
        let model = dense_model(l);
        let space = GradedSpace::arrowed(&model, 4.min(l)).unwrap();
        for n in [0.0, 0.5, 1.0, 1.5] {
            let gens = generators_complex(&model, &space, n, Contraction::Arrowed);
            let out = tl_relations("arrowed", &gens, n, 1e-12);
            assert!(out.passed, "L={l} n={n}: {}", out.detail);
        }
    }
}

#[test]
fn a_corrupted_generator_fails_with_the_named_check() {
    let model = dense_model(6);
    let space = GradedSpace::new(&model, 2).unwrap();
    let mut gens = generators(&model, &space, 1.0, Contraction::Graded);
    let (r, c, v) = gens[2].triplets().next().unwrap();
    let bump = SparseOperator::from_triplets(space.dim(), space.dim(), [(r, c, 0.5 * v + 0.25)]);
    gens[2] = gens[2].combine(1.0, &bump, 1.0);
    let out = tl_relations("tl_relations", &gens, 1.0, 0.0);
    assert!(!out.passed);
    assert_eq!(out.name, "tl_relations");
    assert!(out.detail.contains("e_2"), "{}", out.detail);
}

#[test]
fn small_examples_by_hand() {
    // e_0 on arcs (0,1),(2,3): n times the same pattern
    let p = LinkPattern::from_arcs(4, &[(0, 1), (2, 3)], &[]).unwrap();
    assert_eq!(act_e_dense(1.0, 0, &p, Contraction::Standard), vec![(p, 1.0)]);
    // e_1 recouples into (1,2),(3,0)
    let q = LinkPattern::from_arcs(4, &[(1, 2), (0, 3)], &[]).unwrap();
    assert_eq!(act_e_dense(1.0, 1, &p, Contraction::Standard), vec![(q, 1.0)]);
    // e_0 joins the two lines of L=2, j=1 in the graded space, vanishes otherwise
    let d = seed_pattern(2, 2).unwrap();
    let arc = LinkPattern::from_arcs(2, &[(0, 1)], &[]).unwrap();
    assert_eq!(act_e_dense(1.0, 0, &d, Contraction::Graded), vec![(arc, 1.0)]);
    assert!(act_e_dense(1.0, 0, &d, Contraction::Standard).is_empty());
}

#[test]
fn two_site_hamiltonian_is_minus_two() {
    // both generators act on the single arc of L=2 and give n each
    let model = Model::Dense(loopcell::tl_dense::DenseTl::new(2));
    let space = GradedSpace::new(&model, 0).unwrap();
    let h = assemble_graded(&model, &space, None, Weighting::At(1.0), Contraction::Graded).scale(-1.0);
    assert_eq!(h.to_dense(), vec![vec![-2.0]]);
}

#[test]
fn row_sums_at_n_one_equal_l() {
    let spec = make_spec(ModelKind::Dense, 4).unwrap();
    let (_, h) = assemble_hamiltonian(&spec, 0).unwrap();
    // at n = 1 each generator maps a pattern to one pattern; column sums of Σe are L
    let sum_e = h.scale(-1.0).transpose();
    for r in 0..sum_e.rows() {
        let s: f64 = sum_e.row(r).map(|(_, v)| v).sum();
        assert_eq!(s, 4.0);
    }
}

#[test]
fn graded_hamiltonian_is_block_lower_triangular() {
    let spec = make_spec(ModelKind::Dense, 10).unwrap();
    let (space, h) = assemble_hamiltonian(&spec, 4).unwrap();
    let level = |k: usize| (0..space.sectors().len()).find(|&s| space.block(s).contains(&k)).unwrap();
    for (r, c, _) in h.triplets() {
        // sectors ordered by decreasing line count: the map goes down or stays
        assert!(level(r) >= level(c), "entry ({r},{c}) maps lines {} up", space.sectors()[level(c)].lines());
        assert!(level(r) - level(c) <= 1);
    }
    let dilute = make_spec(ModelKind::Dilute, 6).unwrap();
    let (space, h) = assemble_hamiltonian_dilute(&dilute, 2).unwrap();
    for (r, c, _) in h.triplets() {
        let lr = (0..space.sectors().len()).find(|&s| space.block(s).contains(&r)).unwrap();
        let lc = (0..space.sectors().len()).find(|&s| space.block(s).contains(&c)).unwrap();
        assert!(lr >= lc);
    }
}

#[test]
fn hamiltonian_commutes_with_translation() {
    for l in [6usize, 8, 10] {
        let model = dense_model(l);
        let space = GradedSpace::new(&model, 4).unwrap();
        assert!(translation_commutes(&model, &space, 1.0).passed, "dense L={l}");
        let u = translation_operator(&space);
        assert_eq!(u.matmul(&u.transpose()), SparseOperator::identity(space.dim()));
    }
    let dilute = Model::for_spec(&make_spec(ModelKind::Dilute, 8).unwrap());
    let space = GradedSpace::new(&dilute, 2).unwrap();
    let out = translation_commutes(&dilute, &space, 0.0);
    assert!(out.passed, "dilute: {:.3e}", out.worst);
}
