//! Shared fixtures for the benchmarks in `benches/`.

use loopcell::linalg::start_vector;
use loopcell::spectra::{block_hamiltonian, Lattice, OrbitBasis};
use loopcell::{make_spec, Complex64, ModelKind, SparseOperator, Weighting};

/// Vacuum spin-2 block of one size at the physical loop weight.
pub struct BlockFixture {
    pub lattice: Lattice,
    pub orbits: OrbitBasis,
    pub h: SparseOperator<Complex64>,
    pub x: Vec<Complex64>,
}

pub fn block_fixture(kind: ModelKind, l: usize) -> BlockFixture {
    let spec = make_spec(kind, l).expect("valid size");
    let lattice = Lattice::new(&spec).expect("lattice");
    let orbits = lattice.orbits(0, 2).expect("orbits");
    let h = block_hamiltonian(&lattice.model, &orbits, &orbits, Weighting::At(spec.n)).expect("block");
    let x = start_vector(orbits.dim(), 7);
    BlockFixture { lattice, orbits, h, x }
}
