//! Two-site Hamiltonian density of the integrable dilute O(n) loop model.
//!
//! The coefficients come from the very anisotropic limit of the integrable
//! dilute face weights with spectral parameter λ, where n = -2 cos 4λ. The
//! polymer point n = 0 sits at λ = π/8 on the dilute branch. The table is
//! mirrored in `data/dilute_density.txt`.

use std::f64::consts::PI;

use crate::error::Result;
use crate::graded::{assemble_graded, Contraction, GradedSpace, Model, Term, Weighting};
use crate::linkstate::{LinkPattern, Site};
use crate::model::{ModelKind, ModelSpec};
use crate::sparse::SparseOperator;

/// Plain-text copy of the coefficient table.
pub const DENSITY_FIXTURE: &str = include_str!("../data/dilute_density.txt");

/// Channel coefficients of the density on sites (i, i+1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiluteDensity {
    /// Both sites empty, stay empty.
    pub empty: f64,
    /// Create or annihilate an arc on (i, i+1); the annihilated arc may be
    /// the recoupling of two longer strands.
    pub create: f64,
    /// One strand stays put.
    pub stay: f64,
    /// One strand hops to the neighbouring empty site.
    pub hop: f64,
    /// Two strands pass unchanged.
    pub identity: f64,
    /// Two strands recouple through a cup-cap.
    pub cupcap: f64,
}

impl DiluteDensity {
    pub fn at_lambda(lambda: f64) -> Self {
        let s2 = (2.0 * lambda).sin();
        let s3 = (3.0 * lambda).sin();
        DiluteDensity {
            empty: 1.0 / s2,
            create: 1.0 / s3,
            stay: -(3.0 * lambda).cos() / s3,
            hop: 1.0 / s2,
            identity: -(5.0 * lambda).sin() / (s2 * s3),
            cupcap: -lambda.sin() / (s2 * s3),
        }
    }

    /// The polymer point λ = π/8.
    pub fn polymer() -> Self {
        Self::at_lambda(PI / 8.0)
    }

    pub fn loop_weight_at(lambda: f64) -> f64 {
        -2.0 * (4.0 * lambda).cos()
    }

    /// Parses `name value` rows of the fixture, skipping comments.
    pub fn from_fixture(text: &str) -> Result<Self> {
        let mut d = DiluteDensity {
            empty: f64::NAN,
            create: f64::NAN,
            stay: f64::NAN,
            hop: f64::NAN,
            identity: f64::NAN,
            cupcap: f64::NAN,
        };
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let name = it.next().unwrap_or_default();
            let value: f64 = it
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| crate::Error::invalid(format!("bad fixture row '{line}'")))?;
            let slot = match name {
                "empty" => &mut d.empty,
                "create" => &mut d.create,
                "stay" => &mut d.stay,
                "hop" => &mut d.hop,
                "identity" => &mut d.identity,
                "cupcap" => &mut d.cupcap,
                other => return Err(crate::Error::invalid(format!("unknown channel '{other}'"))),
            };
            *slot = value;
        }
        let all = [d.empty, d.create, d.stay, d.hop, d.identity, d.cupcap];
        if all.iter().any(|v| v.is_nan()) {
            return Err(crate::Error::invalid("fixture misses a channel"));
        }
        Ok(d)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DiluteTl {
    len: usize,
    density: DiluteDensity,
}

impl DiluteTl {
    pub fn new(len: usize, density: DiluteDensity) -> Self {
        DiluteTl { len, density }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn density(&self) -> &DiluteDensity {
        &self.density
    }

    /// Seed: `lines` defects on the first sites, the rest empty.
    pub fn seed(&self, lines: usize) -> Result<LinkPattern> {
        if lines > self.len {
            return Err(crate::Error::invalid(format!(
                "{lines} through-lines on {} sites",
                self.len
            )));
        }
        let mut sites = vec![Site::Empty; self.len];
        sites[..lines].fill(Site::Defect);
        LinkPattern::new(&sites)
    }

    pub fn act(&self, i: usize, p: &LinkPattern, mode: Contraction, out: &mut Vec<Term>) {
        let w = &self.density;
        let a = i % self.len;
        let b = (i + 1) % self.len;
        let (sa, sb) = (p.site(a), p.site(b));
        match (sa == Site::Empty, sb == Site::Empty) {
            (true, true) => {
                out.push(Term::new(*p, w.empty, 0));
                let mut q = *p;
                q.set(a, Site::Paired(b as u8));
                q.set(b, Site::Paired(a as u8));
                out.push(Term::new(q, w.create, 0));
            }
            (false, true) | (true, false) => {
                out.push(Term::new(*p, w.stay, 0));
                let (src, dst) = if sa != Site::Empty { (a, b) } else { (b, a) };
                let mut q = *p;
                let s = p.site(src);
                q.set(dst, s);
                q.set(src, Site::Empty);
                if let Site::Paired(partner) = s {
                    q.set(partner as usize, Site::Paired(dst as u8));
                }
                out.push(Term::new(q, w.hop, 0));
            }
            (false, false) => {
                out.push(Term::new(*p, w.identity, 0));
                let mut q = *p;
                let loops = match (sa, sb) {
                    (Site::Paired(x), _) if x as usize == b => 1,
                    (Site::Paired(pa), Site::Paired(pb)) => {
                        q.set(pa as usize, Site::Paired(pb));
                        q.set(pb as usize, Site::Paired(pa));
                        0
                    }
                    (Site::Paired(pa), Site::Defect) => {
                        q.set(pa as usize, Site::Defect);
                        0
                    }
                    (Site::Defect, Site::Paired(pb)) => {
                        q.set(pb as usize, Site::Defect);
                        0
                    }
                    _ => {
                        if mode == Contraction::Standard {
                            return;
                        }
                        0
                    }
                };
                let mut gone = q;
                gone.set(a, Site::Empty);
                gone.set(b, Site::Empty);
                out.push(Term::new(gone, w.create, loops));
                q.set(a, Site::Paired(b as u8));
                q.set(b, Site::Paired(a as u8));
                out.push(Term::new(q, w.cupcap, loops));
            }
        }
    }
}

/// Image of `p` under the density at loop weight `n`, zero terms dropped.
pub fn act_e_dilute(n: f64, i: usize, p: &LinkPattern, mode: Contraction) -> Vec<(LinkPattern, f64)> {
    let mut terms = Vec::new();
    DiluteTl::new(p.len(), DiluteDensity::polymer()).act(i, p, mode, &mut terms);
    let w = Weighting::At(n);
    terms
        .into_iter()
        .map(|t| (t.pattern, w.eval(&t)))
        .filter(|t| t.1 != 0.0)
        .collect()
}

pub fn assemble_hamiltonian_dilute(spec: &ModelSpec, max_lines: usize) -> Result<(GradedSpace, SparseOperator<f64>)> {
    debug_assert_eq!(spec.kind, ModelKind::Dilute);
    let model = Model::for_spec(spec);
    let space = GradedSpace::new(&model, max_lines)?;
    let h = assemble_graded(&model, &space, None, Weighting::At(spec.n), Contraction::Graded).scale(-1.0);
    Ok((space, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_matches_closed_form() {
        let d = DiluteDensity::from_fixture(DENSITY_FIXTURE).unwrap();
        let p = DiluteDensity::polymer();
        for (x, y) in [
            (d.empty, p.empty),
            (d.create, p.create),
            (d.stay, p.stay),
            (d.hop, p.hop),
            (d.identity, p.identity),
            (d.cupcap, p.cupcap),
        ] {
            assert!((x - y).abs() < 1e-15, "{x} vs {y}");
        }
        assert!(DiluteDensity::loop_weight_at(PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn pair_creation_on_vacancies() {
        let p = DiluteTl::new(4, DiluteDensity::polymer()).seed(0).unwrap();
        let out = act_e_dilute(0.0, 0, &p, Contraction::Standard);
        let arc = LinkPattern::from_arcs(4, &[(0, 1)], &[]).unwrap();
        assert!(out.iter().any(|(q, w)| *q == arc && (*w - DiluteDensity::polymer().create).abs() < 1e-15));
    }

    #[test]
    fn short_arc_annihilation_vanishes_at_zero_weight() {
        let arc = LinkPattern::from_arcs(4, &[(0, 1)], &[]).unwrap();
        let empty = DiluteTl::new(4, DiluteDensity::polymer()).seed(0).unwrap();
        let out = act_e_dilute(0.0, 0, &arc, Contraction::Standard);
        assert!(out.iter().all(|(q, _)| *q != empty));
        let out = act_e_dilute(1.0, 0, &arc, Contraction::Standard);
        assert!(out.iter().any(|(q, _)| *q == empty));
    }
}
