use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{vectorize, ComplexMatrix};
use crate::error::{Error, Result};

/// Cutoff used to decide which singular values count as zero.
///
/// A singular value `s` is nonzero when
/// `s > max(relative * sigma_max, absolute_floor)`, where `relative` is
/// `relative_rank_threshold`, multiplied by `max(rows, cols)` when
/// `scale_by_dimension` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub relative_rank_threshold: f64,
    pub absolute_floor: f64,
    #[serde(default)]
    pub scale_by_dimension: bool,
}

impl Default for TolerancePolicy {
    /// `max(rows, cols) * 1e3 * 2^-52` relative, `1e-14` absolute.
    fn default() -> Self {
        Self {
            relative_rank_threshold: 1e3 * f64::EPSILON,
            absolute_floor: 1e-14,
            scale_by_dimension: true,
        }
    }
}

impl TolerancePolicy {
    /// Fixed relative threshold that does not grow with the matrix size.
    pub fn relative(threshold: f64) -> Result<Self> {
        let policy = Self {
            relative_rank_threshold: threshold,
            absolute_floor: 1e-14,
            scale_by_dimension: false,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        let rel = self.relative_rank_threshold;
        if !(0.0..1.0).contains(&rel) || !(0.0..).contains(&self.absolute_floor) {
            return Err(Error::Parameter(format!(
                "tolerance needs relative threshold in [0, 1) and nonnegative floor, got {rel} / {}",
                self.absolute_floor
            )));
        }
        Ok(())
    }

    /// Singular values at or below this value are treated as zero.
    pub fn cutoff(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        let mut rel = self.relative_rank_threshold;
        if self.scale_by_dimension {
            rel *= rows.max(cols) as f64;
        }
        (rel * sigma_max).max(self.absolute_floor)
    }
}

fn diagnostics(m: &ComplexMatrix) -> String {
    format!(
        "{}x{} matrix, Frobenius norm {:.3e}, max |entry| {:.3e}",
        m.rows(),
        m.cols(),
        m.frobenius_norm(),
        m.max_abs()
    )
}

/// Thin SVD `m = U diag(s) V^dagger`, singular values in descending order.
pub(crate) struct ThinSvd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

pub(crate) fn svd_of(m: &ComplexMatrix) -> Result<ThinSvd> {
    if !m.is_finite() {
        return Err(Error::Numeric(format!("non-finite input ({})", diagnostics(m))));
    }
    let svd = m
        .to_faer()
        .thin_svd()
        .map_err(|e| Error::Numeric(format!("SVD did not converge: {e:?} ({})", diagnostics(m))))?;
    let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    if s.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric(format!("non-finite SVD ({})", diagnostics(m))));
    }
    Ok(ThinSvd {
        u: ComplexMatrix::from_faer(svd.U()),
        s,
        v: ComplexMatrix::from_faer(svd.V()),
    })
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_finite() {
        return Err(Error::Numeric(format!("non-finite input ({})", diagnostics(m))));
    }
    let mut values = m
        .to_faer()
        .singular_values()
        .map_err(|e| Error::Numeric(format!("SVD did not converge: {e:?} ({})", diagnostics(m))))?;
    if values.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numeric(format!(
            "SVD produced non-finite singular values ({})",
            diagnostics(m)
        )));
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

pub fn numerical_rank(m: &ComplexMatrix, tol: &TolerancePolicy) -> Result<usize> {
    if m.is_zero() {
        return Ok(0);
    }
    let sv = singular_values(m)?;
    let cutoff = tol.cutoff(m.rows(), m.cols(), sv[0]);
    Ok(sv.iter().filter(|&&s| s > cutoff).count())
}

/// Leading singular triplet `(sigma_1, u_1, v_1)` with `m ~ sigma_1 u_1 v_1^dagger`,
/// together with `sigma_2` (zero when the matrix has a single singular value).
pub struct LeadingTriplet {
    pub sigma1: f64,
    pub sigma2: f64,
    pub left: Vec<Complex64>,
    pub right: Vec<Complex64>,
}

pub fn leading_triplet(m: &ComplexMatrix) -> Result<LeadingTriplet> {
    let svd = svd_of(m)?;
    Ok(LeadingTriplet {
        sigma1: svd.s[0],
        sigma2: svd.s.get(1).copied().unwrap_or(0.0),
        left: (0..svd.u.rows()).map(|i| svd.u.get(i, 0)).collect(),
        right: (0..svd.v.rows()).map(|i| svd.v.get(i, 0)).collect(),
    })
}

/// `sigma_2 / sigma_1`; zero for the zero matrix. Vanishes exactly on rank-one matrices.
pub fn second_singular_ratio(m: &ComplexMatrix) -> Result<f64> {
    if m.is_zero() {
        return Ok(0.0);
    }
    let sv = singular_values(m)?;
    Ok(sv.get(1).copied().unwrap_or(0.0) / sv[0])
}

/// Matrix whose columns are the vectorized members of `ms`.
pub fn stack_vectorized(ms: &[ComplexMatrix]) -> Result<Option<ComplexMatrix>> {
    let Some(first) = ms.first() else {
        return Ok(None);
    };
    if let Some(bad) = ms.iter().find(|m| m.shape() != first.shape()) {
        return Err(Error::Shape(format!(
            "span members must share a shape: {:?} vs {:?}",
            first.shape(),
            bad.shape()
        )));
    }
    let vecs: Vec<ComplexMatrix> = ms.iter().map(vectorize).collect();
    let cols: Vec<&[Complex64]> = vecs.iter().map(|v| v.data()).collect();
    ComplexMatrix::from_columns(&cols).map(Some)
}

/// Dimension of the linear span of `ms`.
pub fn span_dimension(ms: &[ComplexMatrix], tol: &TolerancePolicy) -> Result<usize> {
    match stack_vectorized(ms)? {
        None => Ok(0),
        Some(stack) => numerical_rank(&stack, tol),
    }
}

/// Minimum-norm least-squares solution of `a x = b` for a column vector `b`.
pub fn least_squares(a: &ComplexMatrix, b: &[Complex64], tol: &TolerancePolicy) -> Result<Vec<Complex64>> {
    if b.len() != a.rows() {
        return Err(Error::Shape(format!(
            "right-hand side of length {} for {} rows",
            b.len(),
            a.rows()
        )));
    }
    let svd = svd_of(a)?;
    let cutoff = tol.cutoff(a.rows(), a.cols(), svd.s[0]);
    let mut x = vec![Complex64::new(0.0, 0.0); a.cols()];
    for (k, &sk) in svd.s.iter().enumerate() {
        if sk <= cutoff {
            continue;
        }
        let proj: Complex64 = (0..a.rows()).map(|i| svd.u.get(i, k).conj() * b[i]).sum::<Complex64>() / sk;
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += svd.v.get(j, k) * proj;
        }
    }
    Ok(x)
}
