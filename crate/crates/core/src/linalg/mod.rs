//! Dense complex matrices and the rank machinery built on them.

mod matrix;
mod rank;
mod realign;

pub use matrix::{kron, kron_all, proportional, unvectorize, vectorize, ComplexMatrix, MAX_ENTRIES};
pub use rank::{
    leading_triplet, least_squares, numerical_rank, second_singular_ratio, singular_values,
    span_dimension, stack_vectorized, LeadingTriplet, TolerancePolicy,
};
pub use realign::{realign_bipartite, schmidt_rank, BipartiteDims};

pub(crate) use matrix::{ONE, ZERO};
