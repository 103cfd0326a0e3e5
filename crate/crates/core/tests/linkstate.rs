//! Link-pattern bases against brute-force enumeration and closed forms.

use loopcell::graded::Model;
use loopcell::linkstate::seed_pattern;
use loopcell::{make_spec, LinkPattern, ModelKind, Site};
use proptest::prelude::*;

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Every assignment of empty / defect / partner to the sites, kept when valid.
fn brute_force(len: usize, lines: usize, allow_empty: bool) -> usize {
    fn go(sites: &mut [Site], i: usize, lines: usize, allow_empty: bool) -> usize {
        if i == sites.len() {
            let defects = sites.iter().filter(|s| **s == Site::Defect).count();
            return usize::from(defects == lines && LinkPattern::new(sites).is_ok());
        }
        if matches!(sites[i], Site::Paired(p) if (p as usize) < i) {
            return go(sites, i + 1, lines, allow_empty);
        }
        let mut count = 0;
        if allow_empty {
            sites[i] = Site::Empty;
            count += go(sites, i + 1, lines, allow_empty);
        }
        sites[i] = Site::Defect;
        count += go(sites, i + 1, lines, allow_empty);
        for j in i + 1..sites.len() {
            if sites[j] == Site::Empty {
                sites[i] = Site::Paired(j as u8);
                sites[j] = Site::Paired(i as u8);
                count += go(sites, i + 1, lines, allow_empty);
                sites[j] = Site::Empty;
            }
        }
        sites[i] = Site::Empty;
        count
    }
    go(&mut vec![Site::Empty; len], 0, lines, allow_empty)
}

#[test]
fn dense_sector_sizes_match_brute_force_and_binomials() {
    for l in [4usize, 6, 8, 10] {
        let model = Model::for_spec(&make_spec(ModelKind::Dense, l).unwrap());
        for lines in (0..=l).step_by(2) {
            let basis = model.enumerate(lines).unwrap();
            let n = l / 2;
            let expected = if lines == 0 {
                binom(2 * n, n) / (n + 1)
            } else {
                binom(l, n - lines / 2)
            };
            assert_eq!(basis.len(), expected, "dense L={l} lines={lines}");
            assert_eq!(basis.len(), brute_force(l, lines, false), "brute force L={l} lines={lines}");
        }
    }
}

#[test]
fn dilute_vacuum_contains_the_empty_pattern_and_matches_brute_force() {
    for l in [4usize, 6] {
        let model = Model::for_spec(&make_spec(ModelKind::Dilute, l).unwrap());
        for lines in [0usize, 2] {
            let basis = model.enumerate(lines).unwrap();
            assert_eq!(basis.len(), brute_force(l, lines, true), "dilute L={l} lines={lines}");
        }
        let empty = LinkPattern::new(&vec![Site::Empty; l]).unwrap();
        assert!(model.enumerate(0).unwrap().index_of(&empty).is_some());
    }
}

#[test]
fn planarity_rejects_crossing_and_separating_arcs() {
    assert!(LinkPattern::from_arcs(4, &[(0, 2), (1, 3)], &[]).is_err());
    assert!(LinkPattern::from_arcs(4, &[(1, 3)], &[0, 2]).is_err());
    assert!(LinkPattern::from_arcs(4, &[(0, 3), (1, 2)], &[]).is_ok());
    assert!(LinkPattern::from_arcs(6, &[(1, 2), (3, 4)], &[0, 5]).is_ok());
}

#[test]
fn translation_by_two_has_period_dividing_n() {
    let model = Model::for_spec(&make_spec(ModelKind::Dense, 10).unwrap());
    for lines in [0usize, 2, 4] {
        let basis = model.enumerate(lines).unwrap();
        for p in basis.patterns() {
            assert_eq!(p.rotate(10), *p);
            let mut q = *p;
            for _ in 0..5 {
                q = q.translate_two();
            }
            assert_eq!(q, *p);
            assert!(basis.index_of(&p.translate_two()).is_some());
        }
    }
}

#[test]
fn a_long_arc_moves_under_translation() {
    let p = LinkPattern::from_arcs(6, &[(0, 5), (1, 4), (2, 3)], &[]).unwrap();
    assert_ne!(p.translate_two(), p);
    assert_eq!(p.translate_two().translate_two().translate_two(), p);
}

#[test]
fn arrows_flip_and_stay_on_lines() {
    let seed = seed_pattern(8, 4).unwrap();
    let defects: Vec<usize> = (0..8).filter(|&i| seed.site(i) == Site::Defect).collect();
    let arrowed = seed.with_down_mask((1 << defects[1]) | (1 << defects[3])).unwrap();
    assert_eq!(arrowed.flip_arrows().flip_arrows(), arrowed);
    assert_ne!(arrowed.flip_arrows(), arrowed);
    assert_ne!(arrowed.encode(), seed.encode());
    let empty_site = (0..8).find(|&i| seed.site(i) != Site::Defect).unwrap();
    assert!(seed.with_down_mask(1 << empty_site).is_err());
}

proptest! {
    #[test]
    fn encode_decode_round_trips(l in 2usize..=6, lines in 0usize..=3, seed in any::<u64>()) {
        let l = 2 * l;
        let lines = (2 * lines).min(l);
        let model = Model::for_spec(&make_spec(ModelKind::Dense, l).unwrap());
        let basis = model.enumerate(lines).unwrap();
        let p = basis.pattern((seed % basis.len() as u64) as usize);
        prop_assert_eq!(LinkPattern::decode(l, p.encode()).unwrap(), *p);
        let (rep, m, d) = p.canonical_rotation();
        prop_assert_eq!(rep.rotate(2 * m), *p);
        prop_assert!(d >= 1 && (l / 2) % d == 0);
    }
}
