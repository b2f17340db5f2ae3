//! Numerical search for product operators in the span of a family, scans over
//! two-member mixings, and randomized checks of the Schmidt-rank span bound.
//!
//! The hunter is a falsifier: a hit is a constructive witness of another
//! product operator, a miss is only evidence.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    leading_triplet, least_squares, proportional, realign_bipartite, second_singular_ratio, span_dimension,
    unvectorize, vectorize, BipartiteDims, ComplexMatrix, TolerancePolicy, ONE, ZERO,
};
use crate::product::{
    check_subset, party_span_dims, schmidt_bound_report, Bipartition, OperatorFamily, PartySpec,
    ProductOperator,
};
use crate::sample;
use crate::zoo::{mixing_unitary, tight_example_with_dims};

/// Smallest admissible modulus of a coefficient after normalization.
pub const COEFFICIENT_FLOOR: f64 = 1e-6;

/// Restarts evaluated together before the stopping rule is consulted.
const RESTART_BATCH: usize = 8;

/// Combinations whose norm falls below this (unit coefficients, unit members) are
/// treated as vanishing rather than product.
const VANISHING_NORM: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HuntConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub threshold: f64,
    pub seed: u64,
    /// Stop a refinement once the objective improves by less than this.
    pub convergence: f64,
}

impl Default for HuntConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 500,
            threshold: 1e-8,
            seed: 0,
            convergence: 1e-12,
        }
    }
}

impl HuntConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Usage("restarts must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Usage("max_iters must be at least 1".into()));
        }
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(Error::Usage(format!("threshold must be positive, got {}", self.threshold)));
        }
        if !(self.convergence.is_finite() && self.convergence >= 0.0) {
            return Err(Error::Usage("convergence must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub found: bool,
    /// One entry per member of the searched subset, unit norm; zero outside `support`.
    pub coefficients: Vec<Complex64>,
    /// Largest `sigma_2 / sigma_1` of the realigned combination over all bipartitions.
    pub residual: f64,
    pub candidate: Option<ProductOperator>,
    pub novel: bool,
    pub restarts_used: usize,
    pub seed: u64,
    /// Family indices whose coefficients are nonzero.
    pub support: Vec<usize>,
    pub subset: Vec<usize>,
}

/// Peels `s` party by party with leading singular vectors and returns the
/// nearest-product factors; the overall scale is folded into the last factor.
pub fn nearest_product(s: &ComplexMatrix, spec: &PartySpec) -> Result<Vec<ComplexMatrix>> {
    if s.shape() != (spec.total_out(), spec.total_in()) {
        return Err(Error::Shape(format!(
            "operator is {:?}, spec needs {:?}",
            s.shape(),
            (spec.total_out(), spec.total_in())
        )));
    }
    let parties = spec.parties();
    let mut factors = Vec::with_capacity(parties.len());
    let mut rest = s.clone();
    for (a, p) in parties.iter().enumerate().take(parties.len() - 1) {
        let tail = &parties[a + 1..];
        let b_out = tail.iter().map(|q| q.d_out).product();
        let b_in = tail.iter().map(|q| q.d_in).product();
        let r = realign_bipartite(&rest, BipartiteDims::new(p.d_out, p.d_in, b_out, b_in))?;
        let t = leading_triplet(&r)?;
        let right: Vec<Complex64> = t.right.iter().map(|z| z.conj()).collect();
        factors.push(unvectorize(&right, p.d_out, p.d_in)?);
        let left: Vec<Complex64> = t.left.iter().map(|z| z * t.sigma1).collect();
        rest = unvectorize(&left, b_out, b_in)?;
    }
    factors.push(rest);
    Ok(factors)
}

/// Largest `sigma_2 / sigma_1` of the realignment of `s` over all bipartitions.
pub fn productness(s: &ComplexMatrix, spec: &PartySpec) -> Result<f64> {
    let mut worst = 0.0f64;
    for bp in Bipartition::all(spec.len()) {
        let reordered = reorder_to_split(s, spec, &bp)?;
        let r = realign_bipartite(&reordered, bp.dims(spec))?;
        worst = worst.max(second_singular_ratio(&r)?);
    }
    Ok(worst)
}

/// Permutes the tensor factors of `s` (party order) into `(side A)(side B)` order.
fn reorder_to_split(s: &ComplexMatrix, spec: &PartySpec, bp: &Bipartition) -> Result<ComplexMatrix> {
    let order: Vec<usize> = bp.side_a().iter().chain(bp.side_b()).copied().collect();
    if order.iter().enumerate().all(|(i, &a)| i == a) {
        return Ok(s.clone());
    }
    let parties = spec.parties();
    let outs: Vec<usize> = parties.iter().map(|p| p.d_out).collect();
    let ins: Vec<usize> = parties.iter().map(|p| p.d_in).collect();
    let permute = |idx: usize, dims: &[usize]| -> usize {
        let mut digits = vec![0; dims.len()];
        let mut rem = idx;
        for a in (0..dims.len()).rev() {
            digits[a] = rem % dims[a];
            rem /= dims[a];
        }
        order.iter().fold(0, |acc, &a| acc * dims[a] + digits[a])
    };
    let mut out = ComplexMatrix::zeros(s.rows(), s.cols());
    for i in 0..s.rows() {
        let pi = permute(i, &outs);
        for j in 0..s.cols() {
            out.set(pi, permute(j, &ins), s.get(i, j));
        }
    }
    Ok(out)
}

fn normalize(c: &mut [Complex64]) -> f64 {
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        c.iter_mut().for_each(|z| *z /= norm);
    }
    norm
}

/// Members of the searched subset, normalized and cached in the layouts the search needs.
struct SearchSpace {
    spec: PartySpec,
    /// Assembled members scaled to unit Frobenius norm.
    units: Vec<ComplexMatrix>,
    /// `units[j] = members[j] * scales[j]`.
    scales: Vec<f64>,
    /// Realigned unit members, per bipartition.
    realigned: Vec<Vec<ComplexMatrix>>,
}

impl SearchSpace {
    fn new(fam: &OperatorFamily, subset: &[usize]) -> Result<Self> {
        let spec = fam.spec().clone();
        let mut units = Vec::with_capacity(subset.len());
        let mut scales = Vec::with_capacity(subset.len());
        for &j in subset {
            let m = fam.member(j).assemble()?;
            let norm = m.frobenius_norm();
            scales.push(1.0 / norm);
            units.push(m.scale(Complex64::new(1.0 / norm, 0.0)));
        }
        let realigned = Bipartition::all(spec.len())
            .iter()
            .map(|bp| {
                units
                    .iter()
                    .map(|u| realign_bipartite(&reorder_to_split(u, &spec, bp)?, bp.dims(&spec)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { spec, units, scales, realigned })
    }

    fn combine(mats: &[ComplexMatrix], active: &[usize], c: &[Complex64]) -> Result<ComplexMatrix> {
        let mut acc = mats[active[0]].scale(c[0]);
        for (k, &j) in active.iter().enumerate().skip(1) {
            acc.accumulate(c[k], &mats[j])?;
        }
        Ok(acc)
    }

    /// Productness of `sum_k c_k units[active[k]]`; vanishing combinations score 1.
    fn objective(&self, active: &[usize], c: &[Complex64]) -> Result<f64> {
        if self.realigned.is_empty() {
            let s = Self::combine(&self.units, active, c)?;
            return Ok(if s.frobenius_norm() < VANISHING_NORM { 1.0 } else { 0.0 });
        }
        let mut worst = 0.0f64;
        for per_split in &self.realigned {
            let r = Self::combine(per_split, active, c)?;
            if r.frobenius_norm() < VANISHING_NORM {
                return Ok(1.0);
            }
            worst = worst.max(second_singular_ratio(&r)?);
        }
        Ok(worst)
    }

    /// One alternating step: nearest product target, then least-squares coefficients.
    fn refine(&self, active: &[usize], c: &[Complex64], tol: &TolerancePolicy) -> Result<Vec<Complex64>> {
        let s = Self::combine(&self.units, active, c)?;
        let target = crate::linalg::kron_all(&nearest_product(&s, &self.spec)?)?;
        let cols: Vec<ComplexMatrix> = active.iter().map(|&j| vectorize(&self.units[j])).collect();
        let col_refs: Vec<&[Complex64]> = cols.iter().map(|v| v.data()).collect();
        let g = ComplexMatrix::from_columns(&col_refs)?;
        least_squares(&g, vectorize(&target).data(), tol)
    }
}

#[derive(Debug, Clone)]
struct RestartOutcome {
    objective: f64,
    active: Vec<usize>,
    coefficients: Vec<Complex64>,
}

fn run_restart(
    space: &SearchSpace,
    config: &HuntConfig,
    initial: Vec<Complex64>,
) -> Result<Option<RestartOutcome>> {
    let tol = TolerancePolicy::default();
    let mut active: Vec<usize> = (0..initial.len()).collect();
    let mut c = initial;
    normalize(&mut c);
    let mut best: Option<RestartOutcome> = None;
    let mut previous = f64::INFINITY;
    for _ in 0..config.max_iters {
        let obj = space.objective(&active, &c)?;
        if best.as_ref().is_none_or(|b| obj < b.objective) {
            best = Some(RestartOutcome { objective: obj, active: active.clone(), coefficients: c.clone() });
        }
        if obj == 0.0 || previous - obj < config.convergence && obj <= previous {
            break;
        }
        previous = obj;
        let mut next = space.refine(&active, &c, &tol)?;
        if normalize(&mut next) == 0.0 || next.iter().any(|z| !z.is_finite()) {
            break;
        }
        let keep: Vec<usize> = (0..next.len()).filter(|&k| next[k].norm() >= COEFFICIENT_FLOOR).collect();
        if keep.len() < 2 {
            break;
        }
        if keep.len() < next.len() {
            active = keep.iter().map(|&k| active[k]).collect();
            c = keep.iter().map(|&k| next[k]).collect();
            normalize(&mut c);
            previous = f64::INFINITY;
        } else {
            c = next;
        }
    }
    Ok(best)
}

/// Searches the span of `fam[subset]` for a product combination with every
/// coefficient bounded away from zero.
///
/// `initial` seeds the first restart with coefficients on the original members.
pub fn hunt_product_seeded(
    fam: &OperatorFamily,
    subset: &[usize],
    config: &HuntConfig,
    initial: Option<&[Complex64]>,
) -> Result<SearchResult> {
    config.validate()?;
    check_subset(fam.len(), subset)?;
    if subset.len() < 2 {
        return Err(Error::Precondition("hunting needs a subset of at least two members".into()));
    }
    if let Some(init) = initial {
        if init.len() != subset.len() {
            return Err(Error::Precondition(format!(
                "{} initial coefficients for {} members",
                init.len(),
                subset.len()
            )));
        }
    }
    let space = SearchSpace::new(fam, subset)?;
    let n = subset.len();
    let start = |r: usize| -> Vec<Complex64> {
        match (r, initial) {
            (0, Some(init)) => init.iter().zip(&space.scales).map(|(z, s)| z / s).collect(),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(r as u64);
                sample::unit_vector(&mut rng, n)
            }
        }
    };

    let mut best: Option<(f64, usize, RestartOutcome)> = None;
    let mut used = 0;
    while used < config.restarts {
        let batch: Vec<usize> = (used..(used + RESTART_BATCH).min(config.restarts)).collect();
        let outcomes = batch
            .par_iter()
            .map(|&r| run_restart(&space, config, start(r)).map(|o| (r, o)))
            .collect::<Result<Vec<_>>>()?;
        used += batch.len();
        for (r, o) in outcomes.into_iter() {
            if let Some(o) = o {
                if best.as_ref().is_none_or(|(obj, idx, _)| (o.objective, r) < (*obj, *idx)) {
                    best = Some((o.objective, r, o));
                }
            }
        }
        if best.as_ref().is_some_and(|(obj, _, _)| *obj < config.threshold) {
            break;
        }
    }

    let mut coefficients = vec![ZERO; n];
    let (residual, support) = match &best {
        Some((obj, _, o)) => {
            for (&k, &z) in o.active.iter().zip(&o.coefficients) {
                coefficients[k] = z * space.scales[k];
            }
            normalize(&mut coefficients);
            (*obj, o.active.iter().map(|&k| subset[k]).collect())
        }
        None => (1.0, Vec::new()),
    };
    let found = residual < config.threshold && support.len() >= 2;
    let (candidate, novel) = if found {
        let ops: Vec<&ProductOperator> = subset.iter().map(|&j| fam.member(j)).collect();
        let mut s = ops[0].assemble()?.scale(coefficients[0]);
        for (op, &z) in ops.iter().zip(&coefficients).skip(1) {
            s.accumulate(z, &op.assemble()?)?;
        }
        let cand = product_from_factors(nearest_product(&s, fam.spec())?)?;
        let assembled = cand.assemble()?;
        let mut novel = true;
        for m in fam.members() {
            if proportional(&assembled, &m.assemble()?, config.threshold.sqrt())?.is_some() {
                novel = false;
                break;
            }
        }
        (Some(cand), novel)
    } else {
        (None, false)
    };
    Ok(SearchResult {
        found,
        coefficients,
        residual,
        candidate,
        novel,
        restarts_used: used,
        seed: config.seed,
        support,
        subset: subset.to_vec(),
    })
}

pub fn hunt_product(fam: &OperatorFamily, subset: &[usize], config: &HuntConfig) -> Result<SearchResult> {
    hunt_product_seeded(fam, subset, config, None)
}

/// Unit-norm factors with the overall scale and phase carried by the weight.
fn product_from_factors(factors: Vec<ComplexMatrix>) -> Result<ProductOperator> {
    let mut weight = ONE;
    let mut units = Vec::with_capacity(factors.len());
    for f in factors {
        let (k, _) = f
            .data()
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best });
        let pivot = f.data()[k];
        if pivot == ZERO {
            return Err(Error::Degenerate("product candidate has a zero factor".into()));
        }
        let phase = pivot / pivot.norm();
        let norm = f.frobenius_norm();
        weight *= phase * norm;
        units.push(f.scale(Complex64::new(1.0 / norm, 0.0) / phase));
    }
    ProductOperator::new(weight, units)
}

/// Parameter grid for two-member mixings `u(theta, phi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingGrid {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
}

impl MixingGrid {
    /// `angles` values of theta spanning `[0, pi/2]` and `phases` values of phi in `[0, 2 pi)`.
    pub fn uniform(angles: usize, phases: usize) -> Result<Self> {
        if angles < 2 || phases < 1 {
            return Err(Error::Usage("need at least two angles and one phase".into()));
        }
        let step = std::f64::consts::FRAC_PI_2 / (angles - 1) as f64;
        Ok(Self {
            thetas: (0..angles).map(|k| k as f64 * step).collect(),
            phis: (0..phases).map(|l| l as f64 * std::f64::consts::TAU / phases as f64).collect(),
        })
    }

    pub fn single(theta: f64, phi: f64) -> Self {
        Self { thetas: vec![theta], phis: vec![phi] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingPoint {
    pub theta: f64,
    pub phi: f64,
    pub unitary: [[Complex64; 2]; 2],
    /// Productness of the two mixed operators; `None` when that output vanishes.
    pub residuals: [Option<f64>; 2],
}

impl MixingPoint {
    pub fn is_trivial(&self, tol: f64) -> bool {
        let off = self.theta.sin().abs();
        let on = self.theta.cos().abs();
        off <= tol || on <= tol
    }
}

fn mixed_pair(fam: &OperatorFamily, pair: (usize, usize), u: &[[Complex64; 2]; 2]) -> Result<[ComplexMatrix; 2]> {
    let ki = fam.member(pair.0).assemble()?;
    let kj = fam.member(pair.1).assemble()?;
    Ok([
        ki.scale(u[0][0]).add_scaled(u[0][1], &kj)?,
        ki.scale(u[1][0]).add_scaled(u[1][1], &kj)?,
    ])
}

fn check_pair(fam: &OperatorFamily, pair: (usize, usize)) -> Result<()> {
    let (i, j) = pair;
    if i == j || i >= fam.len() || j >= fam.len() {
        return Err(Error::Usage(format!(
            "({}, {}) is not a pair of distinct members among {}",
            i + 1,
            j + 1,
            fam.len()
        )));
    }
    Ok(())
}

/// Scans `u(theta, phi)` mixings of members `i, j` and keeps the grid points where
/// both mixed operators are product (or vanish) to `tol`.
pub fn mixing_search(
    fam: &OperatorFamily,
    pair: (usize, usize),
    grid: &MixingGrid,
    tol: f64,
) -> Result<Vec<MixingPoint>> {
    check_pair(fam, pair)?;
    let scale = fam.member(pair.0).assemble()?.frobenius_norm().max(fam.member(pair.1).assemble()?.frobenius_norm());
    let points: Vec<(f64, f64)> = grid
        .thetas
        .iter()
        .flat_map(|&t| grid.phis.iter().map(move |&p| (t, p)))
        .collect();
    let scored = points
        .par_iter()
        .map(|&(theta, phi)| {
            let unitary = mixing_unitary(theta, phi);
            let mixed = mixed_pair(fam, pair, &unitary)?;
            let mut residuals = [None, None];
            for (slot, k) in residuals.iter_mut().zip(&mixed) {
                if k.frobenius_norm() > VANISHING_NORM * scale {
                    *slot = Some(productness(k, fam.spec())?);
                }
            }
            Ok(MixingPoint { theta, phi, unitary, residuals })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(scored
        .into_iter()
        .filter(|p| p.residuals.iter().all(|r| r.is_none_or(|v| v <= tol)))
        .collect())
}

/// Replaces members `i, j` by their `u`-mixing, dropping a vanishing output.
pub fn apply_mixing(fam: &OperatorFamily, pair: (usize, usize), u: &[[Complex64; 2]; 2]) -> Result<OperatorFamily> {
    check_pair(fam, pair)?;
    let scale = fam.member(pair.0).assemble()?.frobenius_norm().max(fam.member(pair.1).assemble()?.frobenius_norm());
    let mixed = mixed_pair(fam, pair, u)?;
    let mut members = Vec::with_capacity(fam.len());
    for (idx, m) in fam.members().iter().enumerate() {
        let slot = if idx == pair.0 {
            0
        } else if idx == pair.1 {
            1
        } else {
            members.push(m.clone());
            continue;
        };
        let k = &mixed[slot];
        if k.frobenius_norm() > VANISHING_NORM * scale {
            members.push(product_from_factors(nearest_product(k, fam.spec())?)?);
        }
    }
    OperatorFamily::new(fam.spec().clone(), members)
}

/// Aggregate statistics of a randomized check of `delta_A + delta_B <= N + r_s`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FuzzStats {
    pub trials: usize,
    /// Trials in which some bipartition broke the bound.
    pub violations: usize,
    /// Trials in which some bipartition met the bound with equality.
    pub equality_hits: usize,
    /// `delta_A + delta_B` over every examined (trial, bipartition).
    pub delta_sum_histogram: BTreeMap<usize, usize>,
    /// Trials whose combination is product with linearly independent members.
    pub conjecture_checked: usize,
    /// Of those, trials with `sum_a delta_a > N + P - 1`.
    pub conjecture_violations: usize,
    pub planted: usize,
    pub planted_equality_hits: usize,
}

impl FuzzStats {
    fn record(&mut self, fam: &OperatorFamily, coeffs: &[Complex64], tol: &TolerancePolicy) -> Result<bool> {
        let mut violated = false;
        let mut equal = false;
        let mut all_product = true;
        for bp in Bipartition::all(fam.party_count()) {
            let report = schmidt_bound_report(fam, coeffs, &bp, tol)?;
            *self.delta_sum_histogram.entry(report.delta_sum).or_default() += 1;
            violated |= !report.holds;
            equal |= report.is_equality();
            all_product &= report.schmidt_rank == 1;
        }
        self.trials += 1;
        self.violations += usize::from(violated);
        self.equality_hits += usize::from(equal);
        let members = fam.assembled()?;
        if all_product && span_dimension(&members, tol)? == fam.len() {
            let total: usize = party_span_dims(fam, tol)?.iter().sum();
            self.conjecture_checked += 1;
            self.conjecture_violations += usize::from(total > fam.len() + fam.party_count() - 1);
        }
        Ok(equal)
    }
}

/// Random Gaussian product families on square `dims` with `n` members and random
/// nonzero coefficients, checked across every bipartition.
pub fn fuzz_schmidt_bound(dims: &[usize], n: usize, trials: usize, seed: u64) -> Result<FuzzStats> {
    fuzz_schmidt_bound_with_planted(dims, n, trials, 0, seed)
}

/// As [`fuzz_schmidt_bound`], with `planted` saturating families interleaved.
pub fn fuzz_schmidt_bound_with_planted(
    dims: &[usize],
    n: usize,
    trials: usize,
    planted: usize,
    seed: u64,
) -> Result<FuzzStats> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    if n == 0 || dims.len() < 2 {
        return Err(Error::Precondition("need n >= 1 and at least two parties".into()));
    }
    let spec = PartySpec::square(dims)?;
    let tol = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = FuzzStats::default();
    let tight_n = dims.iter().copied().min().unwrap_or(1).saturating_sub(1);
    if planted > 0 && tight_n == 0 {
        return Err(Error::Precondition("planted instances need local dimension >= 2".into()));
    }
    let every = (trials / planted.max(1)).max(1);
    let mut injected = 0;
    for t in 0..trials {
        let members = (0..n)
            .map(|_| {
                ProductOperator::unweighted(
                    dims.iter().map(|&d| sample::gaussian_matrix(&mut rng, d, d)).collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let fam = OperatorFamily::new(spec.clone(), members)?;
        let coeffs = sample::nonzero_coefficients(&mut rng, n);
        stats.record(&fam, &coeffs, &tol)?;
        if injected < planted && (t + 1) % every == 0 {
            let (tight, tc) = tight_example_with_dims(tight_n, dims, rng.random())?;
            stats.planted += 1;
            stats.planted_equality_hits += usize::from(stats.record(&tight, &tc, &tol)?);
            injected += 1;
        }
    }
    Ok(stats)
}
