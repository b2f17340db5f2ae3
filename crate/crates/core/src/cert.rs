//! Uniqueness certificates for product Kraus sets and product ensembles,
//! completeness checks, and the local-positive-part necessary condition.
//!
//! A family is certified unique when every subset `T` of at least two members
//! is eliminated: some examined cut has `delta_A + delta_B > |T| + 1`, so the
//! span of `T` cannot contain a product operator built with all coefficients
//! nonzero. Subsets that survive every cut are reported as witnesses; they do
//! not prove non-uniqueness.

use std::fmt;

use itertools::Itertools;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    numerical_rank, proportional, span_dimension, vectorize, ComplexMatrix, TolerancePolicy,
};
use crate::product::{Cut, OperatorFamily};

/// Default limit on the number of members whose subsets are enumerated.
pub const DEFAULT_MAX_MEMBERS: usize = 20;

/// Default residual tolerance for completeness, per unit of `sqrt(dim)`.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Unique,
    Inconclusive,
}

/// Which cuts are examined for each subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Every pair of single parties.
    Pairs,
    /// Every split of the parties into two groups.
    AllBipartitions,
}

impl Strategy {
    /// Bipartitions up to six parties (31 cuts), pairs beyond.
    pub fn default_for(parties: usize) -> Self {
        if parties <= 6 {
            Strategy::AllBipartitions
        } else {
            Strategy::Pairs
        }
    }

    pub fn cuts(self, parties: usize) -> Vec<Cut> {
        match self {
            Strategy::Pairs => Cut::all_pairs(parties),
            Strategy::AllBipartitions => Cut::all_bipartitions(parties),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Pairs => "pairs",
            Strategy::AllBipartitions => "all_bipartitions",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutDeltas {
    pub cut: Cut,
    pub delta_a: usize,
    pub delta_b: usize,
}

impl CutDeltas {
    pub fn sum(&self) -> usize {
        self.delta_a + self.delta_b
    }
}

/// A subset that no examined cut eliminates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// Zero-based member indices, ascending.
    pub subset: Vec<usize>,
    pub deltas: Vec<CutDeltas>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub status: Status,
    pub witnesses: Vec<Witness>,
    pub strategy: Strategy,
    pub tol: TolerancePolicy,
    pub subsets_examined: u64,
    pub members: usize,
    pub parties: usize,
}

impl Certificate {
    pub fn is_unique(&self) -> bool {
        self.status == Status::Unique
    }

    /// True when `subset` (zero-based, any order) is among the witnesses.
    pub fn has_witness(&self, subset: &[usize]) -> bool {
        let mut s = subset.to_vec();
        s.sort_unstable();
        self.witnesses.iter().any(|w| w.subset == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    /// `None` picks [`Strategy::default_for`] the party count.
    pub strategy: Option<Strategy>,
    pub max_members: usize,
    /// Stop at the first witness instead of collecting all of them.
    pub fast_fail: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            strategy: None,
            max_members: DEFAULT_MAX_MEMBERS,
            fast_fail: false,
        }
    }
}

impl CertifyOptions {
    pub fn with_strategy(strategy: Strategy) -> Self {
        Self {
            strategy: Some(strategy),
            ..Self::default()
        }
    }
}

/// Vectorized grouped factors of every member, per cut and side.
struct CutColumns {
    cut: Cut,
    side_a: Vec<Vec<Complex64>>,
    side_b: Vec<Vec<Complex64>>,
}

impl CutColumns {
    fn build(fam: &OperatorFamily, cut: Cut) -> Result<Self> {
        let (a, b) = cut.sides();
        let column = |side: &[usize]| -> Result<Vec<Vec<Complex64>>> {
            fam.members()
                .iter()
                .map(|m| Ok(vectorize(&m.grouped_factor(side)?).into_data()))
                .collect()
        };
        Ok(Self {
            side_a: column(&a)?,
            side_b: column(&b)?,
            cut,
        })
    }

    fn span(columns: &[Vec<Complex64>], subset: &[usize], tol: &TolerancePolicy) -> Result<usize> {
        let cols: Vec<&[Complex64]> = subset.iter().map(|&j| columns[j].as_slice()).collect();
        numerical_rank(&ComplexMatrix::from_columns(&cols)?, tol)
    }

    fn deltas(&self, subset: &[usize], tol: &TolerancePolicy) -> Result<CutDeltas> {
        Ok(CutDeltas {
            cut: self.cut.clone(),
            delta_a: Self::span(&self.side_a, subset, tol)?,
            delta_b: Self::span(&self.side_b, subset, tol)?,
        })
    }
}

/// `Ok(None)` when some cut eliminates the subset, otherwise the witness.
fn evaluate_subset(
    cuts: &[CutColumns],
    subset: Vec<usize>,
    tol: &TolerancePolicy,
) -> Result<Option<Witness>> {
    let n = subset.len();
    let mut deltas = Vec::with_capacity(cuts.len());
    for cut in cuts {
        let d = cut.deltas(&subset, tol)?;
        if d.sum() > n + 1 {
            return Ok(None);
        }
        deltas.push(d);
    }
    Ok(Some(Witness { subset, deltas }))
}

fn certify_family(fam: &OperatorFamily, options: &CertifyOptions, tol: &TolerancePolicy) -> Result<Certificate> {
    tol.validate()?;
    let n = fam.len();
    if n > options.max_members {
        return Err(Error::Size(format!(
            "{n} members exceed the enumeration cap of {}; raise the cap or certify a smaller family",
            options.max_members
        )));
    }
    let parties = fam.party_count();
    let strategy = options.strategy.unwrap_or_else(|| Strategy::default_for(parties));
    let cuts = strategy
        .cuts(parties)
        .into_iter()
        .map(|cut| CutColumns::build(fam, cut))
        .collect::<Result<Vec<_>>>()?;

    let mut witnesses = Vec::new();
    let mut examined = 0u64;
    'sizes: for size in 2..=n {
        let batch: Vec<Vec<usize>> = (0..n).combinations(size).collect();
        let results = batch
            .into_par_iter()
            .map(|subset| evaluate_subset(&cuts, subset, tol))
            .collect::<Result<Vec<_>>>()?;
        for found in results {
            examined += 1;
            if let Some(w) = found {
                witnesses.push(w);
                if options.fast_fail {
                    break 'sizes;
                }
            }
        }
    }

    Ok(Certificate {
        status: if witnesses.is_empty() {
            Status::Unique
        } else {
            Status::Inconclusive
        },
        witnesses,
        strategy,
        tol: *tol,
        subsets_examined: examined,
        members: n,
        parties,
    })
}

/// Subset test on the local operator spans of a product Kraus set.
pub fn certify_unique(
    fam: &OperatorFamily,
    options: &CertifyOptions,
    tol: &TolerancePolicy,
) -> Result<Certificate> {
    certify_family(fam, options, tol)
}

/// Subset test on the local ket spans of a product pure-state ensemble.
pub fn certify_unique_ensemble(
    ens: &OperatorFamily,
    options: &CertifyOptions,
    tol: &TolerancePolicy,
) -> Result<Certificate> {
    if !ens.is_ket_family() {
        return Err(Error::Usage(
            "ensemble certification needs single-column (ket) factors".into(),
        ));
    }
    certify_family(ens, options, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSum {
    /// Zero-based party indices.
    pub parties: (usize, usize),
    pub delta_sum: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub is_complete: bool,
    /// `|| sum_j K_j^dagger K_j - I ||_F`.
    pub residual: f64,
    pub residual_tol: f64,
    pub necessary_condition_holds: bool,
    /// Span dimension of each party's `K^dagger K` over the whole family.
    pub local_deltas: Vec<usize>,
    pub pair_sums: Vec<PairSum>,
    pub members: usize,
    pub tol: TolerancePolicy,
}

/// Sum of `K_j^dagger K_j` over the family.
pub fn gram_sum(fam: &OperatorFamily) -> Result<ComplexMatrix> {
    let dim = fam.spec().total_in();
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for m in fam.members() {
        let k = m.assemble()?;
        acc.accumulate(Complex64::new(1.0, 0.0), &k.adjoint().matmul(&k)?)?;
    }
    Ok(acc)
}

fn local_positive_deltas(fam: &OperatorFamily, tol: &TolerancePolicy) -> Result<Vec<usize>> {
    (0..fam.party_count())
        .map(|a| {
            let parts: Vec<ComplexMatrix> =
                fam.members().iter().map(|m| m.local_positive_part(a)).collect();
            span_dimension(&parts, tol)
        })
        .collect()
}

/// Completeness residual plus the pairwise bound on local positive parts.
///
/// Complete means `residual <= residual_tol * sqrt(dim)` with `dim` the total input dimension.
pub fn verify_completeness(
    fam: &OperatorFamily,
    residual_tol: f64,
    tol: &TolerancePolicy,
) -> Result<CompletenessReport> {
    tol.validate()?;
    let dim = fam.spec().total_in();
    let residual = gram_sum(fam)?.sub(&ComplexMatrix::identity(dim))?.frobenius_norm();
    let local_deltas = local_positive_deltas(fam, tol)?;
    let n = fam.len();
    let mut pair_sums = Vec::new();
    for a in 0..local_deltas.len() {
        for b in a + 1..local_deltas.len() {
            pair_sums.push(PairSum {
                parties: (a, b),
                delta_sum: local_deltas[a] + local_deltas[b],
            });
        }
    }
    Ok(CompletenessReport {
        is_complete: residual <= residual_tol * (dim as f64).sqrt(),
        residual,
        residual_tol,
        necessary_condition_holds: pair_sums.iter().all(|p| p.delta_sum <= n + 1),
        local_deltas,
        pair_sums,
        members: n,
        tol: *tol,
    })
}

/// Necessary condition for a complete product Kraus set: for every party pair,
/// the spans of the local positive parts satisfy `delta_a + delta_b <= N + 1`.
pub fn necessary_condition(fam: &OperatorFamily, tol: &TolerancePolicy) -> Result<CompletenessReport> {
    verify_completeness(fam, DEFAULT_RESIDUAL_TOL, tol)
}

/// For each party, the member pairs `(i, j)`, `i < j`, whose local positive parts are proportional.
pub fn pairwise_proportionality_scan(fam: &OperatorFamily, tol: f64) -> Result<Vec<Vec<(usize, usize)>>> {
    (0..fam.party_count())
        .map(|a| {
            let parts: Vec<ComplexMatrix> =
                fam.members().iter().map(|m| m.local_positive_part(a)).collect();
            let mut pairs = Vec::new();
            for i in 0..parts.len() {
                for j in i + 1..parts.len() {
                    if proportional(&parts[i], &parts[j], tol)?.is_some() {
                        pairs.push((i, j));
                    }
                }
            }
            Ok(pairs)
        })
        .collect()
}
