use std::fmt;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of entries any single matrix may hold.
pub const MAX_ENTRIES: usize = 1 << 26;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix stored in row-major order.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

fn checked_entries(rows: usize, cols: usize) -> Result<usize> {
    rows.checked_mul(cols)
        .filter(|&n| n <= MAX_ENTRIES)
        .ok_or_else(|| {
            Error::Size(format!(
                "{rows}x{cols} matrix exceeds the {MAX_ENTRIES}-entry budget"
            ))
        })
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        let n = checked_entries(rows, cols)?;
        if data.len() != n {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {n} entries, got {}",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numeric("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| ZERO)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    /// Column vector holding `entries`.
    pub fn column(entries: Vec<Complex64>) -> Result<Self> {
        let n = entries.len();
        Self::new(n, 1, entries)
    }

    /// `|i><j|` in a `rows x cols` space.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        Self::from_fn(rows, cols, |r, c| if r == i && c == j { ONE } else { ZERO })
    }

    /// Basis ket `|i>` of length `dim`.
    pub fn basis_ket(dim: usize, i: usize) -> Self {
        Self::unit(dim, 1, i, 0)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    fn ensure_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "{what}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: Complex64, other: &Self) -> Result<Self> {
        self.ensure_same_shape(other, "addition")?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + alpha * b)
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(ONE, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(-ONE, other)
    }

    /// In-place `self += alpha * other`.
    pub fn accumulate(&mut self, alpha: Complex64, other: &Self) -> Result<()> {
        self.ensure_same_shape(other, "accumulation")?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&z| z == ZERO)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Frobenius distance to `other`; shapes must agree.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.frobenius_norm())
    }

    /// Frobenius inner product `tr(self^dagger other)`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.ensure_same_shape(other, "inner product")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub(crate) fn to_faer(&self) -> Mat<Complex64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self.data[i * self.cols + j])
    }

    pub(crate) fn from_faer(m: faer::MatRef<'_, Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Matrix whose columns are the given equal-length column vectors.
    pub fn from_columns(columns: &[&[Complex64]]) -> Result<Self> {
        let Some(first) = columns.first() else {
            return Err(Error::Shape("no columns supplied".into()));
        };
        let rows = first.len();
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Shape("columns differ in length".into()));
        }
        let cols = columns.len();
        checked_entries(rows, cols)?;
        Ok(Self::from_fn(rows, cols, |i, j| columns[j][i]))
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self.get(i, j);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product with `a` as the slow index.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows.checked_mul(b.rows);
    let cols = a.cols.checked_mul(b.cols);
    let (Some(rows), Some(cols)) = (rows, cols) else {
        return Err(Error::Size("kronecker dimensions overflow".into()));
    };
    checked_entries(rows, cols)?;
    let mut data = vec![ZERO; rows * cols];
    for i1 in 0..a.rows {
        for j1 in 0..a.cols {
            let s = a.get(i1, j1);
            if s == ZERO {
                continue;
            }
            for i2 in 0..b.rows {
                let row = (i1 * b.rows + i2) * cols + j1 * b.cols;
                let src = &b.data[i2 * b.cols..(i2 + 1) * b.cols];
                for (d, &v) in data[row..row + b.cols].iter_mut().zip(src) {
                    *d = s * v;
                }
            }
        }
    }
    Ok(ComplexMatrix { rows, cols, data })
}

/// Kronecker product of a nonempty sequence, first factor slowest.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> Result<ComplexMatrix> {
    let mut iter = factors.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::Usage("kronecker product of an empty list".into()))?;
    iter.try_fold(first.clone(), |acc, m| kron(&acc, m))
}

/// Column-stacking vectorization.
pub fn vectorize(m: &ComplexMatrix) -> ComplexMatrix {
    let mut data = Vec::with_capacity(m.len());
    for j in 0..m.cols {
        for i in 0..m.rows {
            data.push(m.get(i, j));
        }
    }
    ComplexMatrix {
        rows: m.len(),
        cols: 1,
        data,
    }
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &[Complex64], rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if rows == 0 || cols == 0 || v.len() != rows * cols {
        return Err(Error::Shape(format!(
            "cannot fold {} entries into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| v[j * rows + i]))
}

/// Returns `lambda` with `a ~ lambda * b` to relative Frobenius tolerance `tol`.
///
/// The candidate scalar is read off the largest-magnitude entry of `b`.
pub fn proportional(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> Result<Option<Complex64>> {
    a.ensure_same_shape(b, "proportionality test")?;
    if a.is_zero() || b.is_zero() {
        return Err(Error::Degenerate(
            "proportionality is undefined for a zero matrix".into(),
        ));
    }
    let (k, _) = b
        .data
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best });
    let lambda = a.data[k] / b.data[k];
    let residual = a.add_scaled(-lambda, b)?.frobenius_norm();
    Ok((residual <= tol * a.frobenius_norm()).then_some(lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0., 1., 1., 0.]).unwrap()
    }

    fn sigma_y() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![ZERO, c(0., -1.), c(0., 1.), ZERO]).unwrap()
    }

    #[test]
    fn kron_identities() {
        assert_eq!(
            kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)).unwrap(),
            ComplexMatrix::identity(4)
        );
    }

    #[test]
    fn kron_pauli_x_is_antidiagonal() {
        let k = kron(&sigma_x(), &sigma_x()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i + j == 3 { ONE } else { ZERO };
                assert_eq!(k.get(i, j), expect);
            }
        }
    }

    #[test]
    fn kron_shape_and_index_order() {
        let a = ComplexMatrix::from_fn(2, 3, |i, j| c((i * 3 + j) as f64 + 1.0, 0.0));
        let b = ComplexMatrix::from_fn(4, 5, |i, j| c(0.0, (i * 5 + j) as f64 + 1.0));
        let k = kron(&a, &b).unwrap();
        assert_eq!(k.shape(), (8, 15));
        for (i1, i2, j1, j2) in [(0, 0, 0, 0), (1, 3, 2, 4), (1, 0, 0, 2), (0, 2, 1, 1)] {
            assert_eq!(k.get(i1 * 4 + i2, j1 * 5 + j2), a.get(i1, j1) * b.get(i2, j2));
        }
    }

    #[test]
    fn kron_rejects_oversized_results() {
        let big = ComplexMatrix::zeros(1 << 12, 1);
        let wide = ComplexMatrix::zeros(1, 1 << 14);
        assert!(kron(&big, &wide).is_ok());
        let tall = ComplexMatrix::zeros(1 << 14, 1);
        assert!(matches!(kron(&tall, &tall.transpose()), Err(Error::Size(_))));
    }

    #[test]
    fn vectorize_stacks_columns() {
        let m = ComplexMatrix::from_real(2, 2, &[1., 2., 3., 4.]).unwrap();
        let v = vectorize(&m);
        assert_eq!(v.shape(), (4, 1));
        let got: Vec<f64> = v.data().iter().map(|z| z.re).collect();
        assert_eq!(got, vec![1., 3., 2., 4.]);
        assert_eq!(unvectorize(v.data(), 2, 2).unwrap(), m);
    }

    #[test]
    fn vectorize_zero_and_scalar_kron() {
        assert!(vectorize(&ComplexMatrix::zeros(3, 2)).is_zero());
        let a = ComplexMatrix::new(1, 1, vec![c(2.0, -1.0)]).unwrap();
        let b = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64, j as f64));
        assert_eq!(vectorize(&kron(&a, &b).unwrap()), vectorize(&b).scale(c(2.0, -1.0)));
    }

    #[test]
    fn proportional_examples() {
        let x = sigma_x();
        let lambda = proportional(&x, &x.scale(c(0., 3.)), 1e-12).unwrap().unwrap();
        assert!((lambda - ONE / c(0., 3.)).norm() < 1e-15);
        assert_eq!(proportional(&x, &sigma_y(), 1e-12).unwrap(), None);

        let mu_sq = 0.25;
        let p1 = ComplexMatrix::from_real(2, 2, &[0., 0., 0., 1.]).unwrap();
        let p2 = ComplexMatrix::from_real(2, 2, &[1., 0., 0., mu_sq]).unwrap();
        assert_eq!(proportional(&p1, &p2, 1e-10).unwrap(), None);
    }

    #[test]
    fn proportional_rejects_zero() {
        let z = ComplexMatrix::zeros(2, 2);
        assert!(matches!(proportional(&z, &sigma_x(), 1e-12), Err(Error::Degenerate(_))));
        assert!(matches!(proportional(&sigma_x(), &z, 1e-12), Err(Error::Degenerate(_))));
    }

    #[test]
    fn construction_validates() {
        assert!(matches!(ComplexMatrix::new(2, 2, vec![ZERO; 3]), Err(Error::Shape(_))));
        assert!(matches!(ComplexMatrix::new(0, 2, vec![]), Err(Error::Shape(_))));
        assert!(matches!(
            ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.)]),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn matmul_and_adjoint() {
        let y = sigma_y();
        assert_eq!(y.matmul(&y).unwrap(), ComplexMatrix::identity(2));
        assert_eq!(y.adjoint(), y);
        assert!(matches!(
            y.matmul(&ComplexMatrix::zeros(3, 1)),
            Err(Error::Shape(_))
        ));
    }
}
