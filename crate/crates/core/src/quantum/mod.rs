//! Dense complex linear algebra over small multipartite Hilbert spaces.
//!
//! States are stored as flat amplitude vectors over an ordered list of
//! labelled subsystems, row-major with the leftmost subsystem most
//! significant. Operators act on named subsystems and are applied by
//! gathering and scattering blocks, never by building the global matrix.

mod entropy;
mod measure;
mod operator;
mod schmidt;
mod state;

pub use entropy::{entanglement_entropy, nonzero_spectrum, partial_trace, von_neumann_entropy};
pub use measure::{
    branch_probabilities, collapse, family_probabilities, gram_deviation, measure_computational,
    measure_with_rng, seeded_rng, MeasurementRecord, SimRng,
};
pub use operator::{
    apply_local, diagonal, kron, permutation_matrix, project, unitarity_deviation, LocalOperator,
};
pub use schmidt::{operator_schmidt_coefficients, operator_schmidt_rank, realign};
pub use state::{tensor, Party, StateVector, Subsystem};

pub type C64 = num_complex::Complex64;
pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;

/// Norm and trace tolerance.
pub const NORM_TOL: f64 = 1e-12;
/// Unitarity tolerance, ‖U†U − I‖_max.
pub const UNITARY_TOL: f64 = 1e-10;
/// Relative singular-value cutoff for rank decisions.
pub const RANK_RTOL: f64 = 1e-10;
/// Density-matrix eigenvalues below this count as zero in entropies.
pub const EIGEN_ZERO: f64 = 1e-14;
