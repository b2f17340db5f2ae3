use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use super::rank::{numerical_rank, TolerancePolicy};
use crate::error::{Error, Result};

/// Local dimensions of a bipartite operator `A (x) B`, with `A` the slow tensor index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteDims {
    pub a_out: usize,
    pub a_in: usize,
    pub b_out: usize,
    pub b_in: usize,
}

impl BipartiteDims {
    pub fn new(a_out: usize, a_in: usize, b_out: usize, b_in: usize) -> Self {
        Self { a_out, a_in, b_out, b_in }
    }

    /// Dimensions of `a (x) b` for the given factor shapes.
    pub fn of(a: &ComplexMatrix, b: &ComplexMatrix) -> Self {
        Self::new(a.rows(), a.cols(), b.rows(), b.cols())
    }
}

/// Rearranges `s` so that every product `A (x) B` maps to `vec(B) vec(A)^T`.
///
/// Entry `((k, l), (m, n))` of the output is `S[(m, k), (n, l)]`, where the
/// row pair `(k, l)` and column pair `(m, n)` are ordered like column-stacked
/// `B` and `A` respectively. Sums `sum_j c_j A_j (x) B_j` therefore map to
/// `B diag(c) A^T` with `A`, `B` holding the vectorized factors as columns.
pub fn realign_bipartite(s: &ComplexMatrix, dims: BipartiteDims) -> Result<ComplexMatrix> {
    let BipartiteDims { a_out, a_in, b_out, b_in } = dims;
    if s.rows() != a_out * b_out || s.cols() != a_in * b_in {
        return Err(Error::Shape(format!(
            "{}x{} operator does not factor as ({a_out}x{a_in}) (x) ({b_out}x{b_in})",
            s.rows(),
            s.cols()
        )));
    }
    let mut out = ComplexMatrix::zeros(b_out * b_in, a_out * a_in);
    for m in 0..a_out {
        for k in 0..b_out {
            let row = m * b_out + k;
            for n in 0..a_in {
                for l in 0..b_in {
                    let col = n * b_in + l;
                    out.set(l * b_out + k, n * a_out + m, s.get(row, col));
                }
            }
        }
    }
    Ok(out)
}

/// Operator Schmidt rank of `s` across the `A | B` cut.
pub fn schmidt_rank(s: &ComplexMatrix, dims: BipartiteDims, tol: &TolerancePolicy) -> Result<usize> {
    numerical_rank(&realign_bipartite(s, dims)?, tol)
}
