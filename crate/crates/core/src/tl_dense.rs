//! Periodic Temperley-Lieb action for dense loops.

use crate::error::Result;
use crate::graded::{assemble_graded, Contraction, GradedSpace, Junction, Model, Term, Weighting};
use crate::linkstate::{LinkPattern, Site};
use crate::model::{ModelKind, ModelSpec};
use crate::sparse::SparseOperator;

/// Cup-cap generators e_i acting on sites (i, i+1 mod L) of dense patterns.
#[derive(Clone, Copy, Debug)]
pub struct DenseTl {
    len: usize,
}

impl DenseTl {
    pub fn new(len: usize) -> Self {
        DenseTl { len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Appends the image of `p` under e_i. Closed loops are reported through
    /// `Term::loops`, so one table serves every loop weight.
    pub fn act(&self, i: usize, p: &LinkPattern, mode: Contraction, out: &mut Vec<Term>) {
        let a = i % self.len;
        let b = (i + 1) % self.len;
        let mut q = *p;
        match (p.site(a), p.site(b)) {
            (Site::Paired(x), _) if x as usize == b => {
                out.push(Term::new(q, 1.0, 1));
                return;
            }
            (Site::Paired(pa), Site::Paired(pb)) => {
                q.set(pa as usize, Site::Paired(pb));
                q.set(pb as usize, Site::Paired(pa));
            }
            (Site::Paired(pa), Site::Defect) => q.move_defect(b, pa as usize),
            (Site::Defect, Site::Paired(pb)) => q.move_defect(a, pb as usize),
            (Site::Defect, Site::Defect) => {
                let junction = match (mode, p.is_down(a), p.is_down(b)) {
                    (Contraction::Standard, ..) => return,
                    (Contraction::Graded, ..) => Junction::Plain,
                    (Contraction::Arrowed, false, true) => Junction::UpDown,
                    (Contraction::Arrowed, true, false) => Junction::DownUp,
                    (Contraction::Arrowed, ..) => return,
                };
                q.set(a, Site::Paired(b as u8));
                q.set(b, Site::Paired(a as u8));
                out.push(Term::joined(q, 1.0, junction));
                return;
            }
            _ => panic!("dense generator applied to a pattern with vacancies: {p}"),
        }
        q.set(a, Site::Paired(b as u8));
        q.set(b, Site::Paired(a as u8));
        debug_assert!(q.validate().is_ok(), "e_{i} produced invalid pattern from {p}");
        out.push(Term::new(q, 1.0, 0));
    }
}

/// Image of `p` under e_i at loop weight `n`, terms with zero weight dropped.
pub fn act_e_dense(n: f64, i: usize, p: &LinkPattern, mode: Contraction) -> Vec<(LinkPattern, f64)> {
    let mut terms = Vec::new();
    DenseTl::new(p.len()).act(i, p, mode, &mut terms);
    let w = Weighting::At(n);
    terms
        .into_iter()
        .map(|t| (t.pattern, w.eval(&t)))
        .filter(|t| t.1 != 0.0)
        .collect()
}

/// H = -Σ e_i on the graded space with through-line counts max_lines, max_lines-2, ..., 0.
pub fn assemble_hamiltonian(spec: &ModelSpec, max_lines: usize) -> Result<(GradedSpace, SparseOperator<f64>)> {
    debug_assert_eq!(spec.kind, ModelKind::Dense);
    let model = Model::for_spec(spec);
    let space = GradedSpace::new(&model, max_lines)?;
    let h = assemble_graded(&model, &space, None, Weighting::At(spec.n), Contraction::Graded).scale(-1.0);
    Ok((space, h))
}

/// Matrix of a single generator on the graded space.
pub fn assemble_generator(model: &Model, space: &GradedSpace, i: usize, n: f64, mode: Contraction) -> SparseOperator<f64> {
    assemble_graded(model, space, Some(i), Weighting::At(n), mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkstate::seed_pattern;

    #[test]
    fn generator_examples() {
        let p = seed_pattern(4, 0).unwrap();
        assert_eq!(act_e_dense(1.0, 0, &p, Contraction::Standard), vec![(p, 1.0)]);
        let q = LinkPattern::from_arcs(4, &[(1, 2), (3, 0)], &[]).unwrap();
        assert_eq!(act_e_dense(1.0, 1, &p, Contraction::Standard), vec![(q, 1.0)]);
        let d = seed_pattern(2, 2).unwrap();
        let arc = seed_pattern(2, 0).unwrap();
        assert_eq!(act_e_dense(1.0, 0, &d, Contraction::Graded), vec![(arc, 1.0)]);
        assert!(act_e_dense(1.0, 0, &d, Contraction::Standard).is_empty());
    }

    #[test]
    fn arrows_follow_their_line_and_fix_the_junction() {
        let p = LinkPattern::from_arcs(4, &[(1, 2)], &[0, 3]).unwrap().with_down_mask(1 << 3).unwrap();
        let mut out = Vec::new();
        DenseTl::new(4).act(2, &p, Contraction::Standard, &mut out);
        assert_eq!(out.len(), 1);
        assert!(out[0].pattern.is_down(1) && !out[0].pattern.is_down(3));
        out.clear();
        DenseTl::new(4).act(3, &p, Contraction::Arrowed, &mut out);
        assert_eq!(out[0].junction, Junction::DownUp);
        out.clear();
        DenseTl::new(4).act(3, &p.flip_arrows().with_down_mask(0).unwrap(), Contraction::Arrowed, &mut out);
        assert!(out.is_empty());
    }

    #[test]
    fn defect_relocates() {
        let p = LinkPattern::from_arcs(4, &[(1, 2)], &[0, 3]).unwrap();
        let out = act_e_dense(1.0, 0, &p, Contraction::Standard);
        let q = LinkPattern::from_arcs(4, &[(0, 1)], &[2, 3]).unwrap();
        assert_eq!(out, vec![(q, 1.0)]);
    }
}
