//! Dense complex linear algebra for finite-dimensional quantum states.

mod density;
mod eigen;
mod info;
mod matrix;

pub use density::{
    partial_trace, validate_density, validate_density_with, DensityMatrix, PureState,
    SubsystemSplit, Tolerances,
};
pub use eigen::{eigh, eigvalsh};
pub use info::{fidelity_pure, overlap_norm, purity, von_neumann_entropy};
pub use matrix::{tensor_product, ComplexMatrix, MAX_TENSOR_ENTRIES};
