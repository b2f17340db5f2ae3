//! Seeded random draws: Gaussian matrices, Haar unitaries, unit coefficient vectors.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::ComplexMatrix;

pub fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Uniform point on the complex unit sphere in `n` dimensions.
pub fn unit_vector(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n).map(|_| gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Nonzero coefficients bounded away from zero: unit-modulus phases times magnitudes in `[0.5, 1.5)`.
pub fn nonzero_coefficients(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let r = rng.random_range(0.5..1.5);
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(r, theta)
        })
        .collect()
}

/// `rows x cols` matrix with orthonormal columns (`rows >= cols`), Haar distributed.
pub fn haar_isometry(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = gaussian_matrix(rng, rows, cols).to_faer();
    let qr = g.qr();
    let r = qr.thin_R();
    // Fix the phase ambiguity of the QR factorization so the result is Haar.
    let mut out = ComplexMatrix::from_faer(qr.compute_thin_Q().as_ref());
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..rows {
            out.set(i, j, out.get(i, j) * phase);
        }
    }
    out
}

pub fn haar_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    haar_isometry(rng, n, n)
}
