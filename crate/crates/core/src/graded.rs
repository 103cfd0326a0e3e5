//! Model dispatch, weighted terms and the through-line graded space.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linkstate::{seed_pattern, LinkPattern, SectorBasis, Site};
use crate::model::{ModelKind, ModelSpec};
use crate::sparse::SparseOperator;
use crate::tl_dense::DenseTl;
use crate::tl_dilute::{DiluteDensity, DiluteTl};

/// What happens when a generator meets two through-lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Contraction {
    /// Standard module: the term vanishes.
    Standard,
    /// Graded space: the lines are joined and the state drops two lines.
    Graded,
    /// Graded, with the weight fixed by the arrows of the two lines:
    /// up-down gives q^{1/2}, down-up gives -q^{-1/2}, parallel arrows vanish.
    Arrowed,
}

impl Contraction {
    pub fn joins_lines(self) -> bool {
        self != Contraction::Standard
    }
}

/// Arrow pair met by a line-joining term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Junction {
    #[default]
    Plain,
    UpDown,
    DownUp,
}

impl Junction {
    /// Complex factor at loop weight n = q + 1/q, |n| <= 2, q = e^{iγ}.
    pub fn factor(self, n: f64) -> Complex64 {
        let gamma = (n / 2.0).clamp(-1.0, 1.0).acos();
        match self {
            Junction::Plain => Complex64::new(1.0, 0.0),
            Junction::UpDown => Complex64::from_polar(1.0, gamma / 2.0),
            Junction::DownUp => -Complex64::from_polar(1.0, -gamma / 2.0),
        }
    }
}

/// One output of a generator: `coeff * n^loops` times `pattern`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub pattern: LinkPattern,
    pub coeff: f64,
    pub loops: u8,
    pub junction: Junction,
}

impl Term {
    pub fn new(pattern: LinkPattern, coeff: f64, loops: u8) -> Self {
        Term {
            pattern,
            coeff,
            loops,
            junction: Junction::Plain,
        }
    }

    pub fn joined(pattern: LinkPattern, coeff: f64, junction: Junction) -> Self {
        Term {
            pattern,
            coeff,
            loops: 0,
            junction,
        }
    }
}

/// How a term is turned into a number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weighting {
    /// coeff * n^loops
    At(f64),
    /// d/dn of coeff * n^loops
    Derivative(f64),
}

impl Weighting {
    pub fn loop_weight(self) -> f64 {
        match self {
            Weighting::At(n) | Weighting::Derivative(n) => n,
        }
    }

    /// Complex value of a term, arrow junction included. The derivative
    /// weighting does not differentiate junction factors.
    #[inline]
    pub fn eval_complex(self, t: &Term) -> Complex64 {
        let w = self.eval(t);
        match t.junction {
            Junction::Plain => Complex64::new(w, 0.0),
            j => {
                debug_assert!(matches!(self, Weighting::At(_)), "junction factors are not differentiated");
                j.factor(self.loop_weight()) * w
            }
        }
    }

    #[inline]
    pub fn eval(self, t: &Term) -> f64 {
        self.eval_parts(t.coeff, t.loops as u32)
    }

    #[inline]
    pub fn eval_parts(self, coeff: f64, loops: u32) -> f64 {
        match self {
            Weighting::At(n) => coeff * n.powi(loops as i32),
            Weighting::Derivative(n) => {
                if loops == 0 {
                    0.0
                } else {
                    coeff * loops as f64 * n.powi(loops as i32 - 1)
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Model {
    Dense(DenseTl),
    Dilute(DiluteTl),
}

impl Model {
    pub fn for_spec(spec: &ModelSpec) -> Self {
        match spec.kind {
            ModelKind::Dense => Model::Dense(DenseTl::new(spec.l)),
            ModelKind::Dilute => Model::Dilute(DiluteTl::new(spec.l, DiluteDensity::polymer())),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Dense(_) => ModelKind::Dense,
            Model::Dilute(_) => ModelKind::Dilute,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Model::Dense(m) => m.len(),
            Model::Dilute(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn seed(&self, lines: usize) -> Result<LinkPattern> {
        match self {
            Model::Dense(m) => seed_pattern(m.len(), lines),
            Model::Dilute(m) => m.seed(lines),
        }
    }

    /// Dense seed with alternating arrows on its lines (up, down, up, ...).
    pub fn arrowed_seed(&self, lines: usize) -> Result<LinkPattern> {
        let seed = self.seed(lines)?;
        if self.kind() != ModelKind::Dense {
            return Ok(seed);
        }
        let defects: Vec<usize> = (0..self.len()).filter(|&i| seed.site(i) == Site::Defect).collect();
        let mask = defects.iter().skip(1).step_by(2).fold(0u32, |m, &i| m | 1 << i);
        seed.with_down_mask(mask)
    }

    #[inline]
    pub fn act(&self, i: usize, p: &LinkPattern, mode: Contraction, out: &mut Vec<Term>) {
        match self {
            Model::Dense(m) => m.act(i, p, mode, out),
            Model::Dilute(m) => m.act(i, p, mode, out),
        }
    }

    /// All terms of Σ_i e_i (or of e_site alone) applied to `p`, tagged by site.
    pub fn act_all(&self, site: Option<usize>, p: &LinkPattern, mode: Contraction, out: &mut Vec<(usize, Term)>) {
        let mut buf = Vec::with_capacity(4);
        let sites = match site {
            Some(i) => i..i + 1,
            None => 0..self.len(),
        };
        for i in sites {
            buf.clear();
            self.act(i, p, mode, &mut buf);
            out.extend(buf.iter().map(|t| (i, *t)));
        }
    }

    /// Orbit closure of the seed under the line-preserving part of the action.
    pub fn enumerate(&self, lines: usize) -> Result<SectorBasis> {
        self.enumerate_from(&[self.seed(lines)?])
    }

    /// Both arrow classes of the dense sector (plain sector for dilute or
    /// without lines).
    pub fn enumerate_arrowed(&self, lines: usize) -> Result<SectorBasis> {
        let seed = self.arrowed_seed(lines)?;
        self.enumerate_from(&[seed, seed.flip_arrows()])
    }

    /// Closure of seeds with a common line count under the line-preserving action.
    pub fn enumerate_from(&self, seeds: &[LinkPattern]) -> Result<SectorBasis> {
        let lines = seeds.first().ok_or_else(|| Error::invalid("no seed patterns"))?.lines();
        let mut buf = Vec::new();
        SectorBasis::closure(self.len(), lines, seeds, |p, out| {
            for i in 0..self.len() {
                buf.clear();
                self.act(i, p, Contraction::Standard, &mut buf);
                out.extend(buf.iter().map(|t| t.pattern));
            }
        })
    }
}

/// Basis of one sector for the model described by `spec`.
pub fn enumerate_sector(spec: &ModelSpec, lines: usize) -> Result<SectorBasis> {
    Model::for_spec(spec).enumerate(lines)
}

/// Direct sum of sectors with line counts max_lines, max_lines - 2, ..., in that order.
#[derive(Clone, Debug)]
pub struct GradedSpace {
    sectors: Vec<SectorBasis>,
    offsets: Vec<usize>,
    dim: usize,
}

impl GradedSpace {
    pub fn new(model: &Model, max_lines: usize) -> Result<Self> {
        Self::build(model, max_lines, |l| model.enumerate(l))
    }

    /// Graded space with arrowed lines in every sector (dense only).
    pub fn arrowed(model: &Model, max_lines: usize) -> Result<Self> {
        Self::build(model, max_lines, |l| model.enumerate_arrowed(l))
    }

    fn build(model: &Model, max_lines: usize, sector: impl Fn(usize) -> Result<SectorBasis>) -> Result<Self> {
        let parity_ok = model.kind() == ModelKind::Dilute || (model.len() - max_lines.min(model.len())).is_multiple_of(2);
        if max_lines > model.len() || !parity_ok {
            return Err(Error::invalid(format!(
                "{max_lines} through-lines on {} sites",
                model.len()
            )));
        }
        let lines: Vec<usize> = (0..=max_lines).rev().step_by(2).collect();
        let sectors = lines
            .into_iter()
            .map(sector)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_sectors(sectors))
    }

    pub fn from_sectors(sectors: Vec<SectorBasis>) -> Self {
        let mut offsets = Vec::with_capacity(sectors.len());
        let mut dim = 0;
        for s in &sectors {
            offsets.push(dim);
            dim += s.len();
        }
        GradedSpace {
            sectors,
            offsets,
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sectors(&self) -> &[SectorBasis] {
        &self.sectors
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn sector_position(&self, lines: usize) -> Option<usize> {
        self.sectors.iter().position(|s| s.lines() == lines)
    }

    pub fn global_index(&self, p: &LinkPattern) -> Option<usize> {
        let k = self.sector_position(p.lines())?;
        self.sectors[k].index_of(p).map(|i| self.offsets[k] + i)
    }

    pub fn pattern(&self, global: usize) -> &LinkPattern {
        let k = self.offsets.partition_point(|&o| o <= global) - 1;
        self.sectors[k].pattern(global - self.offsets[k])
    }

    /// Range of global indices of the sector at position `k`.
    pub fn block(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k] + self.sectors[k].len()
    }
}

/// Σ_i e_i (or e_site) on the graded space. With `Contraction::Standard` the
/// result is block diagonal.
pub fn assemble_graded(
    model: &Model,
    space: &GradedSpace,
    site: Option<usize>,
    weight: Weighting,
    mode: Contraction,
) -> SparseOperator<f64> {
    let columns: Vec<Vec<(usize, f64)>> = (0..space.dim())
        .into_par_iter()
        .map_init(Vec::new, |buf, col| {
            buf.clear();
            model.act_all(site, space.pattern(col), mode, buf);
            buf.iter()
                .filter_map(|(_, t)| {
                    let row = space
                        .global_index(&t.pattern)
                        .unwrap_or_else(|| panic!("pattern {} outside the graded space", t.pattern));
                    assert_eq!(t.junction, Junction::Plain, "arrowed terms need the complex assembly");
                    let w = weight.eval(t);
                    (w != 0.0).then_some((row, w))
                })
                .collect()
        })
        .collect();
    SparseOperator::from_columns(space.dim(), columns)
}

/// Complex version of `assemble_graded`, needed for arrowed contractions.
pub fn assemble_graded_complex(
    model: &Model,
    space: &GradedSpace,
    site: Option<usize>,
    weight: Weighting,
    mode: Contraction,
) -> SparseOperator<Complex64> {
    let columns: Vec<Vec<(usize, Complex64)>> = (0..space.dim())
        .into_par_iter()
        .map_init(Vec::new, |buf, col| {
            buf.clear();
            model.act_all(site, space.pattern(col), mode, buf);
            buf.iter()
                .filter_map(|(_, t)| {
                    let row = space
                        .global_index(&t.pattern)
                        .unwrap_or_else(|| panic!("pattern {} outside the graded space", t.pattern));
                    let w = weight.eval_complex(t);
                    (w != Complex64::new(0.0, 0.0)).then_some((row, w))
                })
                .collect()
        })
        .collect();
    SparseOperator::from_columns(space.dim(), columns)
}

/// Σ_i e_i (or e_site) on one sector, standard action.
pub fn assemble_sector(model: &Model, basis: &SectorBasis, site: Option<usize>, weight: Weighting) -> SparseOperator<f64> {
    let space = GradedSpace::from_sectors(vec![basis.clone()]);
    assemble_graded(model, &space, site, weight, Contraction::Standard)
}

/// Permutation matrix of u² on the graded space.
pub fn translation_operator(space: &GradedSpace) -> SparseOperator<f64> {
    let entries = (0..space.dim()).map(|c| {
        let q = space.pattern(c).translate_two();
        let r = space
            .global_index(&q)
            .expect("graded space not closed under translation");
        (r, c, 1.0)
    });
    SparseOperator::from_triplets(space.dim(), space.dim(), entries)
}
