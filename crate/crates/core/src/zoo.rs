//! Generators for the worked examples: uniquely represented channels, a
//! non-unique projective measurement, and the family that saturates the
//! pairwise span bound.

use std::f64::consts::TAU;

use itertools::Itertools;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{proportional, span_dimension, ComplexMatrix, TolerancePolicy, ONE, ZERO};
use crate::product::{OperatorFamily, PartyDims, PartySpec, ProductOperator};
use crate::sample;

/// Largest `D` accepted by [`smallest_prime_exceeding`].
pub const PRIME_SEARCH_BUDGET: u64 = 1_000_000;

const UNITARY_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub mod pauli {
    use super::*;

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![ZERO, c(0., -1.), c(0., 1.), ZERO]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![ONE, ZERO, ZERO, -ONE]).unwrap()
    }
}

pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square()
        && m.adjoint()
            .matmul(m)
            .and_then(|g| g.distance(&ComplexMatrix::identity(m.rows())))
            .is_ok_and(|d| d <= tol * (m.rows() as f64).sqrt())
}

/// The `d^2` clock-and-shift unitaries `X^a Z^b`, ordered by `(a, b)`.
pub fn heisenberg_weyl(d: usize) -> Vec<ComplexMatrix> {
    let omega = |k: usize| Complex64::from_polar(1.0, TAU * k as f64 / d as f64);
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            // X^a Z^b |m> = omega^(b m) |m + a>
            out.push(ComplexMatrix::from_fn(d, d, |row, col| {
                if row == (col + a) % d {
                    omega((b * col) % d)
                } else {
                    ZERO
                }
            }));
        }
    }
    out
}

/// Two-qubit channel with three product Kraus operators
/// `|0><1| (x) (|0><0| + e^{i phi} sqrt(1-|mu|^2) |1><1|)`,
/// `(|0><0| + mu |1><1|) (x) |0><1|` and `|1><0| (x) |1><0|`.
pub fn three_kraus_qubit_channel(mu: Complex64, phi: f64) -> Result<OperatorFamily> {
    if !(..=1.0).contains(&mu.norm()) || !phi.is_finite() {
        return Err(Error::Parameter(format!(
            "need |mu| <= 1 and finite phi, got mu = {mu}, phi = {phi}"
        )));
    }
    let damp = Complex64::from_polar((1.0 - mu.norm_sqr()).max(0.0).sqrt(), phi);
    let k1 = ProductOperator::unweighted(vec![
        ComplexMatrix::unit(2, 2, 0, 1),
        ComplexMatrix::new(2, 2, vec![ONE, ZERO, ZERO, damp])?,
    ])?;
    let k2 = ProductOperator::unweighted(vec![
        ComplexMatrix::new(2, 2, vec![ONE, ZERO, ZERO, mu])?,
        ComplexMatrix::unit(2, 2, 0, 1),
    ])?;
    let k3 = ProductOperator::unweighted(vec![
        ComplexMatrix::unit(2, 2, 1, 0),
        ComplexMatrix::unit(2, 2, 1, 0),
    ])?;
    OperatorFamily::new(PartySpec::square(&[2, 2])?, vec![k1, k2, k3])
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// Smallest prime strictly greater than `d`, by trial division.
pub fn smallest_prime_exceeding(d: u64) -> Result<u64> {
    if d == 0 || d > PRIME_SEARCH_BUDGET {
        return Err(Error::Parameter(format!(
            "prime search needs 1 <= D <= {PRIME_SEARCH_BUDGET}, got {d}"
        )));
    }
    Ok((d + 1..).find(|&n| is_prime(n)).expect("primes are unbounded"))
}

/// Parameters of the phase-ket channel family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourierParams {
    pub dims: Vec<usize>,
    /// Number of Kraus operators: the smallest prime exceeding the total dimension.
    pub n: usize,
    /// Mixed-radix place values: `p[0] = 1`, `p[a] = d[0] * ... * d[a-1]`.
    pub p: Vec<usize>,
}

impl FourierParams {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Parameter("need at least two parties".into()));
        }
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::Parameter(format!("local dimensions must be >= 2, got {dims:?}")));
        }
        if dims.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Parameter(format!(
                "local dimensions must be nondecreasing, got {dims:?}"
            )));
        }
        let total = dims
            .iter()
            .try_fold(1u64, |acc, &d| acc.checked_mul(d as u64))
            .ok_or_else(|| Error::Size("total dimension overflows".into()))?;
        let n = smallest_prime_exceeding(total)? as usize;
        let mut p = Vec::with_capacity(dims.len());
        let mut place = 1;
        for &d in dims {
            p.push(place);
            place *= d;
        }
        Ok(Self { dims: dims.to_vec(), n, p })
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// `|psi_j(a)> = d_a^{-1/2} sum_{m=1}^{d_a} exp(2 pi i j p_a m / N) |m>`, for `j` in `1..=N`.
    pub fn local_ket(&self, party: usize, j: usize) -> ComplexMatrix {
        let d = self.dims[party];
        let scale = 1.0 / (d as f64).sqrt();
        let phase_step = (j * self.p[party]) % self.n;
        ComplexMatrix::from_fn(d, 1, |row, _| {
            let m = row + 1;
            let k = (phase_step * m) % self.n;
            Complex64::from_polar(scale, TAU * k as f64 / self.n as f64)
        })
    }
}

/// `K_j = sqrt(D/N) |Phi_j><psi_j(1) ... psi_j(P)|` for `j = 1..N`, with
/// `|Phi_j> = |0> (x) ... (x) |0> (x) |j-1>` and party `P` output dimension `N`.
pub fn fourier_channel(dims: &[usize]) -> Result<OperatorFamily> {
    let params = FourierParams::new(dims)?;
    let parties = dims.len();
    let mut spec = Vec::with_capacity(parties);
    for (a, &d) in dims.iter().enumerate() {
        let d_out = if a + 1 == parties { params.n } else { d };
        spec.push(PartyDims { d_in: d, d_out });
    }
    let spec = PartySpec::new(spec)?;
    let weight = c((params.total_dim() as f64 / params.n as f64).sqrt(), 0.0);

    let mut members = Vec::with_capacity(params.n);
    for j in 1..=params.n {
        let factors = (0..parties)
            .map(|a| {
                let bra = params.local_ket(a, j).adjoint();
                let out = if a + 1 == parties {
                    ComplexMatrix::basis_ket(params.n, j - 1)
                } else {
                    ComplexMatrix::basis_ket(dims[a], 0)
                };
                out.matmul(&bra)
            })
            .collect::<Result<Vec<_>>>()?;
        members.push(ProductOperator::new(weight, factors)?);
    }

    for i in 1..=params.n {
        for j in i + 1..=params.n {
            if proportional(&params.local_ket(0, i), &params.local_ket(0, j), 1e-10)?.is_some() {
                return Err(Error::Numeric(format!(
                    "first-party kets {i} and {j} came out proportional"
                )));
            }
        }
    }
    OperatorFamily::new(spec, members)
}

/// `K_j = sqrt(q_j) U_j(1) (x) ... (x) U_j(P)`; `locals[a][j]` is `U_j(a+1)`.
pub fn product_unitary_channel(locals: &[Vec<ComplexMatrix>], q: &[f64]) -> Result<OperatorFamily> {
    let n = q.len();
    if locals.is_empty() || n == 0 {
        return Err(Error::Parameter("need at least one party and one operator".into()));
    }
    if q.iter().any(|&x| !x.is_finite() || x <= 0.0) || (q.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::Parameter(format!("q must be positive and sum to 1, got {q:?}")));
    }
    let mut dims = Vec::with_capacity(locals.len());
    for (a, set) in locals.iter().enumerate() {
        if set.len() != n {
            return Err(Error::Parameter(format!(
                "party {} has {} unitaries, expected {n}",
                a + 1,
                set.len()
            )));
        }
        let d = set[0].rows();
        for (j, u) in set.iter().enumerate() {
            if u.shape() != (d, d) || !is_unitary(u, UNITARY_TOL) {
                return Err(Error::Parameter(format!(
                    "factor {} of party {} is not a {d}x{d} unitary",
                    j + 1,
                    a + 1
                )));
            }
        }
        dims.push(d);
    }
    let members = (0..n)
        .map(|j| {
            ProductOperator::new(
                c(q[j].sqrt(), 0.0),
                locals.iter().map(|set| set[j].clone()).collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    OperatorFamily::new(PartySpec::square(&dims)?, members)
}

/// Uniform mixture of the product unitaries `I(x)I`, `X(x)X`, `Y(x)Y`, `V(x)V`
/// with `V = (I + iX + iY)/sqrt(3)`.
pub fn pauli_example() -> OperatorFamily {
    let i = c(0., 1.);
    let v = pauli::identity()
        .add_scaled(i, &pauli::x())
        .and_then(|m| m.add_scaled(i, &pauli::y()))
        .expect("2x2 operands")
        .scale(c(1.0 / 3f64.sqrt(), 0.0));
    let set = vec![pauli::identity(), pauli::x(), pauli::y(), v];
    product_unitary_channel(&[set.clone(), set], &[0.25; 4]).expect("valid by construction")
}

/// Rank-one projectors `|ij><ij|` onto the standard product basis, `i` slow.
pub fn projective_basis(d1: usize, d2: usize) -> Result<OperatorFamily> {
    if d1 < 2 || d2 < 2 {
        return Err(Error::Parameter(format!("dimensions must be >= 2, got ({d1}, {d2})")));
    }
    let mut members = Vec::with_capacity(d1 * d2);
    for i in 0..d1 {
        for j in 0..d2 {
            members.push(ProductOperator::unweighted(vec![
                ComplexMatrix::unit(d1, d1, i, i),
                ComplexMatrix::unit(d2, d2, j, j),
            ])?);
        }
    }
    OperatorFamily::new(PartySpec::square(&[d1, d2])?, members)
}

fn check_unitary_list(list: &[ComplexMatrix], n: usize, which: &str) -> Result<usize> {
    if list.len() != n {
        return Err(Error::Parameter(format!(
            "{which}: {} unitaries for {n} members",
            list.len()
        )));
    }
    let d = list[0].rows();
    if list.iter().any(|u| u.shape() != (d, d) || !is_unitary(u, UNITARY_TOL)) {
        return Err(Error::Parameter(format!("{which}: every entry must be a {d}x{d} unitary")));
    }
    if span_dimension(list, &TolerancePolicy::default())? != n {
        return Err(Error::Parameter(format!("{which}: unitaries are linearly dependent")));
    }
    Ok(d)
}

/// Appends two parties acting with `u1[j]` and `u2[j]` on member `j`.
pub fn augment_channel(
    fam: &OperatorFamily,
    u1: &[ComplexMatrix],
    u2: &[ComplexMatrix],
) -> Result<OperatorFamily> {
    let n = fam.len();
    let d1 = check_unitary_list(u1, n, "first unitary list")?;
    let d2 = check_unitary_list(u2, n, "second unitary list")?;
    let mut parties = fam.spec().parties().to_vec();
    parties.push(PartyDims { d_in: d1, d_out: d1 });
    parties.push(PartyDims { d_in: d2, d_out: d2 });
    let members = fam
        .members()
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let mut factors = m.factors().to_vec();
            factors.push(u1[j].clone());
            factors.push(u2[j].clone());
            ProductOperator::new(m.weight(), factors)
        })
        .collect::<Result<Vec<_>>>()?;
    OperatorFamily::new(PartySpec::new(parties)?, members)
}

/// Smallest `d` whose clock-and-shift set holds `n` unitaries, and the first `n` of them.
pub fn heisenberg_weyl_for(n: usize) -> (usize, Vec<ComplexMatrix>) {
    let d = (1..).find(|d| d * d >= n).expect("unbounded");
    (d, heisenberg_weyl(d).into_iter().take(n).collect())
}

/// Family `{S, M_1, M_1, ..., M_n, M_n}` with coefficients `(1, 1, -1, ..., 1, -1)`
/// summing to the product `S`, on `parties` parties of local dimension `local_dim`.
pub fn tight_example(n: usize, parties: usize, local_dim: usize, seed: u64) -> Result<(OperatorFamily, Vec<Complex64>)> {
    if parties < 2 {
        return Err(Error::Parameter("need at least two parties".into()));
    }
    tight_example_with_dims(n, &vec![local_dim; parties], seed)
}

/// As [`tight_example`], with per-party square local dimensions.
pub fn tight_example_with_dims(n: usize, dims: &[usize], seed: u64) -> Result<(OperatorFamily, Vec<Complex64>)> {
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    if let Some(&d) = dims.iter().find(|&&d| d < n + 1) {
        return Err(Error::Parameter(format!(
            "local dimension {d} is below n + 1 = {}",
            n + 1
        )));
    }
    let spec = PartySpec::square(dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = TolerancePolicy::default();
    // locals[a] = [S(a), M_1(a), ..., M_n(a)], linearly independent per party.
    let mut locals = Vec::with_capacity(dims.len());
    for &d in dims {
        loop {
            let set: Vec<ComplexMatrix> = (0..=n).map(|_| sample::gaussian_matrix(&mut rng, d, d)).collect();
            if span_dimension(&set, &tol)? == n + 1 {
                locals.push(set);
                break;
            }
        }
    }
    let term = |k: usize| -> Result<ProductOperator> {
        ProductOperator::unweighted(locals.iter().map(|set| set[k].clone()).collect())
    };
    let mut members = vec![term(0)?];
    let mut coeffs = vec![ONE];
    for k in 1..=n {
        members.push(term(k)?);
        members.push(term(k)?);
        coeffs.push(ONE);
        coeffs.push(-ONE);
    }
    Ok((OperatorFamily::new(spec, members)?, coeffs))
}

/// Random product-unitary channel with Haar local unitaries and uniform weights.
pub fn random_product_unitary_channel(dims: &[usize], n: usize, seed: u64) -> Result<OperatorFamily> {
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let locals: Vec<Vec<ComplexMatrix>> = dims
        .iter()
        .map(|&d| (0..n).map(|_| sample::haar_unitary(&mut rng, d)).collect())
        .collect();
    product_unitary_channel(&locals, &vec![1.0 / n as f64; n])
}

/// `(theta, phi)` rotation `[[cos, -e^{-i phi} sin], [e^{i phi} sin, cos]]`.
pub fn mixing_unitary(theta: f64, phi: f64) -> [[Complex64; 2]; 2] {
    let (s, co) = theta.sin_cos();
    [
        [c(co, 0.0), -Complex64::from_polar(s, -phi)],
        [Complex64::from_polar(s, phi), c(co, 0.0)],
    ]
}

/// Splits a Haar isometry `d -> d m` into `m` blocks `E_k` with `sum_k E_k^dagger E_k = I`.
fn random_instrument(rng: &mut ChaCha8Rng, d: usize, m: usize) -> Vec<ComplexMatrix> {
    let v = sample::haar_isometry(rng, d * m, d);
    (0..m)
        .map(|k| ComplexMatrix::from_fn(d, d, |i, j| v.get(k * d + i, j)))
        .collect()
}

/// Complete product measurement built from independent local instruments:
/// party `a` has `outcomes[a]` outcomes and members run over all outcome tuples.
pub fn random_local_measurement(dims: &[usize], outcomes: &[usize], seed: u64) -> Result<OperatorFamily> {
    if dims.len() != outcomes.len() || dims.is_empty() {
        return Err(Error::Parameter("need one outcome count per party".into()));
    }
    if outcomes.contains(&0) || dims.contains(&0) {
        return Err(Error::Parameter("dimensions and outcome counts must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instruments: Vec<Vec<ComplexMatrix>> = dims
        .iter()
        .zip(outcomes)
        .map(|(&d, &m)| random_instrument(&mut rng, d, m))
        .collect();
    let members = instruments
        .iter()
        .map(|inst| inst.iter())
        .multi_cartesian_product()
        .map(|fs| ProductOperator::unweighted(fs.into_iter().cloned().collect()))
        .collect::<Result<Vec<_>>>()?;
    OperatorFamily::new(PartySpec::square(dims)?, members)
}

/// Two-party complete product measurement in which party 2's instrument
/// depends on party 1's outcome: members `E_k (x) F^(k)_l`.
pub fn random_conditioned_measurement(
    dims: (usize, usize),
    outcomes: (usize, usize),
    seed: u64,
) -> Result<OperatorFamily> {
    let (d1, d2) = dims;
    let (m1, m2) = outcomes;
    if d1 * d2 * m1 * m2 == 0 {
        return Err(Error::Parameter("dimensions and outcome counts must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = random_instrument(&mut rng, d1, m1);
    let mut members = Vec::with_capacity(m1 * m2);
    for e in &first {
        for f in random_instrument(&mut rng, d2, m2) {
            members.push(ProductOperator::unweighted(vec![e.clone(), f])?);
        }
    }
    OperatorFamily::new(PartySpec::square(&[d1, d2])?, members)
}

/// Three qubit-pair products whose six local positive parts `K^dagger K` are
/// linearly independent, so `delta_1 + delta_2 = 6 > N + 1`.
pub fn planted_violation(seed: u64) -> Result<OperatorFamily> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = TolerancePolicy::default();
    loop {
        let members = (0..3)
            .map(|_| {
                ProductOperator::unweighted(vec![
                    sample::gaussian_matrix(&mut rng, 2, 2),
                    sample::gaussian_matrix(&mut rng, 2, 2),
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        let fam = OperatorFamily::new(PartySpec::square(&[2, 2])?, members)?;
        let independent = (0..2).all(|a| {
            let parts: Vec<ComplexMatrix> = fam.members().iter().map(|m| m.local_positive_part(a)).collect();
            span_dimension(&parts, &tol).map(|d| d == 3).unwrap_or(false)
        });
        if independent {
            return Ok(fam);
        }
    }
}

/// `k` independent products `A_i (x) B_i (x) Z ...` followed by one more product
/// `S` in their span, with `S = sum_i c_i M_i` and every `c_i` nonzero.
///
/// The `A_i` share a two-dimensional span and the `B_i` a `(k-1)`-dimensional
/// one; parties beyond the second carry one shared random factor. Returns the
/// family and the coefficients `c`.
pub fn planted_dependent_family(k: usize, dims: &[usize], seed: u64) -> Result<(OperatorFamily, Vec<Complex64>)> {
    if k < 2 || dims.len() < 2 {
        return Err(Error::Parameter("need k >= 2 members and at least two parties".into()));
    }
    if dims[0] < 2 || dims[1] * dims[1] < k - 1 {
        return Err(Error::Parameter(format!(
            "dimensions {dims:?} too small for k = {k}"
        )));
    }
    let spec = PartySpec::square(dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (d0, d1) = (dims[0], dims[1]);
    let x1 = sample::gaussian_matrix(&mut rng, d0, d0);
    let x2 = sample::gaussian_matrix(&mut rng, d0, d0);
    let shared: Vec<ComplexMatrix> = dims[2..].iter().map(|&d| sample::gaussian_matrix(&mut rng, d, d)).collect();
    let coeffs = sample::nonzero_coefficients(&mut rng, k);
    let a: Vec<Complex64> = (0..k).map(|_| sample::gaussian(&mut rng)).collect();
    let a2: Vec<Complex64> = (0..k).map(|_| sample::gaussian(&mut rng)).collect();
    let lambda = sample::gaussian(&mut rng);
    let mut b: Vec<ComplexMatrix> = (0..k - 1).map(|_| sample::gaussian_matrix(&mut rng, d1, d1)).collect();
    // sum_i c_i (a2_i - lambda a_i) B_i = 0 fixes B_k.
    let mut acc = ComplexMatrix::zeros(d1, d1);
    for i in 0..k - 1 {
        acc.accumulate(coeffs[i] * (a2[i] - lambda * a[i]), &b[i])?;
    }
    let pivot = coeffs[k - 1] * (a2[k - 1] - lambda * a[k - 1]);
    b.push(acc.scale(-pivot.inv()));
    let member = |first: ComplexMatrix, second: ComplexMatrix| {
        let mut fs = vec![first, second];
        fs.extend(shared.iter().cloned());
        ProductOperator::unweighted(fs)
    };
    let mut members = Vec::with_capacity(k + 1);
    let mut s_second = ComplexMatrix::zeros(d1, d1);
    for i in 0..k {
        members.push(member(x1.scale(a[i]).add_scaled(a2[i], &x2)?, b[i].clone())?);
        s_second.accumulate(coeffs[i] * a[i], &b[i])?;
    }
    members.push(member(x1.add_scaled(lambda, &x2)?, s_second)?);
    Ok((OperatorFamily::new(spec, members)?, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use crate::cert::{gram_sum, verify_completeness, DEFAULT_RESIDUAL_TOL};
    use crate::product::party_span_dims;

    #[test]
    fn next_prime() {
        assert_eq!(smallest_prime_exceeding(4).unwrap(), 5);
        assert_eq!(smallest_prime_exceeding(8).unwrap(), 11);
        assert_eq!(smallest_prime_exceeding(1).unwrap(), 2);
        assert_eq!(smallest_prime_exceeding(6).unwrap(), 7);
        assert_eq!(smallest_prime_exceeding(13).unwrap(), 17);
        assert!(smallest_prime_exceeding(0).is_err());
    }

    #[test]
    fn fourier_params_place_values() {
        let p = FourierParams::new(&[2, 3]).unwrap();
        assert_eq!(p.n, 7);
        assert_eq!(p.p, vec![1, 2]);
        let p = FourierParams::new(&[2, 2, 2]).unwrap();
        assert_eq!((p.n, p.p.clone()), (11, vec![1, 2, 4]));
        assert!(FourierParams::new(&[3, 2]).is_err());
        assert!(FourierParams::new(&[4]).is_err());
    }

    #[test]
    fn fourier_completeness_matches_character_sum() {
        // Independent check: sum_j (D/N)|Psi_j><Psi_j| entry (m, m') is
        // (1/N) sum_{j=1}^{N} exp(2 pi i j (k(m) - k(m')) / N) with k the mixed-radix index.
        let fam = fourier_channel(&[2, 2]).unwrap();
        assert_eq!(fam.len(), 5);
        let g = gram_sum(&fam).unwrap();
        for m in 0..4usize {
            for mp in 0..4usize {
                let k = |x: usize| (x % 2 + 1) * 2 + (x / 2 + 1);
                let diff = k(m) as f64 - k(mp) as f64;
                let s: Complex64 = (1..=5)
                    .map(|j| Complex64::from_polar(1.0, TAU * j as f64 * diff / 5.0))
                    .sum::<Complex64>()
                    / 5.0;
                assert!((g.get(m, mp) - s).norm() < 1e-12, "entry ({m},{mp})");
            }
        }
        assert!(g.distance(&ComplexMatrix::identity(4)).unwrap() < 1e-12);
    }

    #[test]
    fn three_kraus_channel_is_complete() {
        for (mu, phi) in [(c(0.5, 0.), 0.0), (c(0., 0.), 0.0), (Complex64::from_polar(0.9, PI / 3.), PI / 7.), (c(1., 0.), 1.0)] {
            let fam = three_kraus_qubit_channel(mu, phi).unwrap();
            let r = verify_completeness(&fam, DEFAULT_RESIDUAL_TOL, &TolerancePolicy::default()).unwrap();
            assert!(r.is_complete, "mu = {mu}");
        }
        assert!(three_kraus_qubit_channel(c(1.1, 0.), 0.).is_err());
    }

    #[test]
    fn three_kraus_positive_parts() {
        let fam = three_kraus_qubit_channel(c(0.5, 0.), 0.0).unwrap();
        let p = |d0: f64, d1: f64| ComplexMatrix::from_real(2, 2, &[d0, 0., 0., d1]).unwrap();
        let expect = [
            (p(0., 1.), p(1., 0.75)),
            (p(1., 0.25), p(0., 1.)),
            (p(1., 0.), p(1., 0.)),
        ];
        for (m, (a, b)) in fam.members().iter().zip(expect) {
            assert!(m.local_positive_part(0).distance(&a).unwrap() < 1e-15);
            assert!(m.local_positive_part(1).distance(&b).unwrap() < 1e-15);
        }
    }

    #[test]
    fn pauli_fourth_factor_is_unitary_and_spans() {
        let fam = pauli_example();
        let tol = TolerancePolicy::default();
        assert_eq!(party_span_dims(&fam, &tol).unwrap(), vec![3, 3]);
        let r = verify_completeness(&fam, DEFAULT_RESIDUAL_TOL, &tol).unwrap();
        assert!(r.is_complete);
    }

    #[test]
    fn heisenberg_weyl_is_an_independent_unitary_basis() {
        for d in [2, 3] {
            let hw = heisenberg_weyl(d);
            assert!(hw.iter().all(|u| is_unitary(u, 1e-12)));
            assert_eq!(span_dimension(&hw, &TolerancePolicy::default()).unwrap(), d * d);
        }
    }

    #[test]
    fn augment_rejects_dependent_unitaries() {
        let fam = projective_basis(2, 2).unwrap();
        let hw = heisenberg_weyl(2);
        let dependent = vec![hw[0].clone(), hw[1].clone(), hw[0].clone(), hw[2].clone()];
        assert!(matches!(augment_channel(&fam, &hw, &dependent), Err(Error::Parameter(_))));
        let aug = augment_channel(&fam, &hw, &hw).unwrap();
        assert_eq!(aug.party_count(), 4);
    }

    #[test]
    fn tight_example_shape() {
        let (fam, coeffs) = tight_example(2, 2, 3, 7).unwrap();
        assert_eq!(fam.len(), 5);
        assert_eq!(coeffs.len(), 5);
        assert_eq!(party_span_dims(&fam, &TolerancePolicy::default()).unwrap(), vec![3, 3]);
        assert!(tight_example(3, 2, 3, 7).is_err());
    }

    #[test]
    fn product_unitary_validation() {
        let set = vec![pauli::identity(), pauli::x()];
        assert!(product_unitary_channel(&[set.clone(), set.clone()], &[0.5, 0.4]).is_err());
        let bad = vec![pauli::identity(), pauli::x().scale(c(2., 0.))];
        assert!(product_unitary_channel(&[set.clone(), bad], &[0.5, 0.5]).is_err());
        assert!(product_unitary_channel(&[set.clone(), set], &[0.5, 0.5]).is_ok());
    }

    #[test]
    fn mixing_unitary_is_unitary() {
        let u = mixing_unitary(0.3, 1.1);
        let m = ComplexMatrix::new(2, 2, vec![u[0][0], u[0][1], u[1][0], u[1][1]]).unwrap();
        assert!(is_unitary(&m, 1e-14));
    }

    #[test]
    fn random_measurements_are_complete() {
        let tol = TolerancePolicy::default();
        let local = random_local_measurement(&[2, 3], &[2, 3], 5).unwrap();
        assert_eq!(local.len(), 6);
        assert!(verify_completeness(&local, DEFAULT_RESIDUAL_TOL, &tol).unwrap().is_complete);
        let cond = random_conditioned_measurement((2, 2), (3, 2), 5).unwrap();
        assert_eq!(cond.len(), 6);
        assert!(verify_completeness(&cond, DEFAULT_RESIDUAL_TOL, &tol).unwrap().is_complete);
    }

    #[test]
    fn planted_violation_fails_both_checks() {
        let fam = planted_violation(3).unwrap();
        let report = verify_completeness(&fam, DEFAULT_RESIDUAL_TOL, &TolerancePolicy::default()).unwrap();
        assert_eq!(report.local_deltas, vec![3, 3]);
        assert!(!report.necessary_condition_holds);
        assert!(!report.is_complete);
    }

    #[test]
    fn planted_dependent_family_sums_to_its_last_member() {
        for dims in [vec![2, 2], vec![2, 3, 2]] {
            let (fam, coeffs) = planted_dependent_family(4, &dims, 11).unwrap();
            assert_eq!(fam.len(), 5);
            let mut sum = fam.member(0).assemble().unwrap().scale(coeffs[0]);
            for (j, &cj) in coeffs.iter().enumerate().skip(1) {
                sum.accumulate(cj, &fam.member(j).assemble().unwrap()).unwrap();
            }
            let s = fam.member(4).assemble().unwrap();
            assert!(sum.distance(&s).unwrap() < 1e-10 * s.frobenius_norm());
            assert!(coeffs.iter().all(|z| z.norm() >= 0.5));
        }
    }
}
