//! Momentum blocks against the translation operator on the full sector.

use loopcell::graded::{assemble_sector, translation_operator};
use loopcell::linalg::{dense_eigen, norm};
use loopcell::spectra::{block_hamiltonian, OrbitBasis};
use loopcell::{make_spec, Complex64 as C64, GradedSpace, Model, ModelKind, Weighting};

fn sorted_re(mut v: Vec<C64>) -> Vec<f64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v.into_iter().map(|z| z.re).collect()
}

#[test]
fn block_dimensions_add_up_to_the_sector() {
    for (kind, l) in [(ModelKind::Dense, 8usize), (ModelKind::Dense, 12), (ModelKind::Dilute, 8)] {
        let model = Model::for_spec(&make_spec(kind, l).unwrap());
        for lines in [0usize, 2, 4] {
            if kind == ModelKind::Dilute && lines == 4 {
                continue;
            }
            let basis = model.enumerate(lines).unwrap();
            let total: usize = (0..(l / 2) as i64).map(|s| OrbitBasis::from_sector(&basis, s).dim()).sum();
            assert_eq!(total, basis.len(), "{kind} L={l} lines={lines}");
            for s in 0..(l / 2) as i64 {
                let closure = OrbitBasis::by_closure(&model, lines, s).unwrap();
                assert_eq!(closure.dim(), OrbitBasis::from_sector(&basis, s).dim());
            }
        }
    }
}

#[test]
fn expanded_block_vectors_are_translation_eigenvectors() {
    let l = 10;
    let model = Model::for_spec(&make_spec(ModelKind::Dense, l).unwrap());
    let basis = model.enumerate(2).unwrap();
    let u = translation_operator(&GradedSpace::from_sectors(vec![basis.clone()])).to_complex();
    for s in 0..5i64 {
        let orbits = OrbitBasis::from_sector(&basis, s);
        for r in 0..orbits.dim() {
            let mut e = vec![C64::new(0.0, 0.0); orbits.dim()];
            e[r] = C64::new(1.0, 0.0);
            let v = orbits.expand(&basis, &e);
            let uv = u.mul_vec(&v);
            // u² v = e^{ik} v with k = 2π s / N
            let phase = C64::from_polar(1.0, orbits.momentum());
            let diff: Vec<C64> = uv.iter().zip(&v).map(|(a, b)| a - phase * b).collect();
            let off = norm(&diff);
            assert!(off < 1e-12 * norm(&v), "spin {s} rep {r}: {off:.3e}");
            let back = orbits.project(&basis, &v);
            assert!((back[r] - 1.0).norm() < 1e-12);
        }
    }
}

#[test]
fn block_spectra_reassemble_the_sector_spectrum() {
    for (kind, l, lines) in [(ModelKind::Dense, 8usize, 0usize), (ModelKind::Dense, 8, 4), (ModelKind::Dilute, 6, 2)] {
        let spec = make_spec(kind, l).unwrap();
        let model = Model::for_spec(&spec);
        let basis = model.enumerate(lines).unwrap();
        let w = Weighting::At(spec.n);
        let full = assemble_sector(&model, &basis, None, w).scale(-1.0).to_complex();
        let want = sorted_re(dense_eigen(&full).unwrap().values);
        let mut got = Vec::new();
        for s in 0..(l / 2) as i64 {
            let orbits = OrbitBasis::from_sector(&basis, s);
            if orbits.dim() == 0 {
                continue;
            }
            let h = block_hamiltonian(&model, &orbits, &orbits, w).unwrap();
            got.extend(dense_eigen(&h).unwrap().values);
        }
        let got = sorted_re(got);
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-8, "{kind} L={l} lines={lines}: {a} vs {b}");
        }
    }
}
