//! Momentum projection, ground state, scaled gaps and the lattice Jordan cell.

mod jordan;
pub mod momentum;

pub use jordan::{find_jordan_pair, Candidate, GradedBlock, JordanPair};
pub use momentum::{block_hamiltonian, block_hamiltonian_with, flip_operator, project_operator, OrbitBasis};

use num_complex::Complex64 as C64;

use crate::bilinear::{self, OccupancyIndex};
use crate::error::{Error, Result};
use crate::graded::{Model, Weighting};
use crate::linalg::{self, EigenPair};
use crate::linkstate::SectorBasis;
use crate::model::{ModelKind, ModelSpec};

/// Blocks up to this size are diagonalized densely.
pub const DENSE_EIGEN_LIMIT: usize = 800;
/// Linear systems up to this size are solved by LU.
pub const DENSE_SOLVE_LIMIT: usize = 2500;

/// Number of through-lines of the sector holding the logarithmic partner.
pub fn partner_lines(kind: ModelKind) -> usize {
    match kind {
        ModelKind::Dense => 4,
        ModelKind::Dilute => 2,
    }
}

/// Everything about one system size that does not depend on the loop weight.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub spec: ModelSpec,
    pub model: Model,
    /// Full basis of the sector without through-lines.
    pub vacuum: SectorBasis,
    pub vacuum_occupancy: OccupancyIndex,
}

impl Lattice {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let model = Model::for_spec(spec);
        let vacuum = model.enumerate(0)?;
        let vacuum_occupancy = OccupancyIndex::new(&vacuum);
        Ok(Lattice {
            spec: *spec,
            model,
            vacuum,
            vacuum_occupancy,
        })
    }

    pub fn orbits(&self, lines: usize, spin: i64) -> Result<OrbitBasis> {
        if lines == 0 {
            Ok(OrbitBasis::from_sector(&self.vacuum, spin))
        } else {
            OrbitBasis::by_closure(&self.model, lines, spin)
        }
    }

    /// Bilinear form over the vacuum sector between two block vectors, or
    /// between a block vector and a full-basis vector when `right_full` is set.
    pub fn pair_block(&self, orbits: &OrbitBasis, left: &[C64], right_full: &[C64], w: Weighting) -> C64 {
        let functional = orbits.left_functional(&self.vacuum, left);
        bilinear::contract_left(&functional, right_full, &self.vacuum, &self.vacuum_occupancy, w)
    }
}

/// Δ = (2N / (2π v_F)) (E_phi - E0).
pub fn scaled_gap(spec: &ModelSpec, e_phi: f64, e0: f64) -> f64 {
    (e_phi - e0) / spec.gap_scale()
}

/// c from E0 = -e_inf L - π v_F c / (6 L).
pub fn central_charge_estimate(spec: &ModelSpec, e0: f64) -> f64 {
    let l = spec.l as f64;
    -6.0 * l * (e0 + spec.e_inf * l) / (std::f64::consts::PI * spec.v_f)
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    /// Coefficients on the spin-0 vacuum block.
    pub coeffs: Vec<C64>,
    /// Amplitudes on the full vacuum sector, normalized to <0|0> = 1.
    pub vector: Vec<C64>,
    pub residual: f64,
}

/// Lowest state of the vacuum spin-0 block at loop weight `n`.
pub fn ground_state(lat: &Lattice, n: f64) -> Result<GroundState> {
    let orbits = lat.orbits(0, 0)?;
    let h = block_hamiltonian(&lat.model, &orbits, &orbits, Weighting::At(n))?;
    let pairs = linalg::lowest_eigenpairs(&h, 4, DENSE_EIGEN_LIMIT)?;
    let EigenPair {
        value,
        vector,
        residual,
    } = pairs.into_iter().next().ok_or_else(|| Error::Numerical("empty vacuum block".into()))?;
    let mut full = orbits.expand(&lat.vacuum, &vector);
    let mut coeffs = vector;
    let norm = lat.pair_block(&orbits, &coeffs, &full, Weighting::At(n));
    if !(norm.re > 0.0) || norm.im.abs() > 1e-8 * norm.re {
        return Err(Error::Numerical(format!("ground state has <0|0> = {norm}")));
    }
    // fix the phase by the largest amplitude, then <0|0> = 1
    let big = *full
        .iter()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        .expect("nonempty");
    let phase = big.conj() / big.norm();
    let factor = phase / norm.re.sqrt();
    linalg::scale(factor, &mut full);
    linalg::scale(factor, &mut coeffs);
    Ok(GroundState {
        energy: value.re,
        coeffs,
        vector: full,
        residual,
    })
}
