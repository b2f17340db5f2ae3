//! Product operators over `P` parties and the span dimensions of their local factors.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    kron, kron_all, proportional, realign_bipartite, schmidt_rank, span_dimension,
    BipartiteDims, ComplexMatrix, TolerancePolicy, ZERO,
};

/// Upper bound on the total input (and output) dimension of a party spec.
pub const MAX_TOTAL_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartyDims {
    pub d_in: usize,
    pub d_out: usize,
}

/// Ordered local dimensions of the parties.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartySpec {
    parties: Vec<PartyDims>,
}

impl PartySpec {
    pub fn new(parties: Vec<PartyDims>) -> Result<Self> {
        if parties.is_empty() {
            return Err(Error::Parameter("at least one party is required".into()));
        }
        if let Some(p) = parties.iter().find(|p| p.d_in == 0 || p.d_out == 0) {
            return Err(Error::Parameter(format!(
                "party dimensions must be positive, got {}x{}",
                p.d_out, p.d_in
            )));
        }
        let total = |f: fn(&PartyDims) -> usize| {
            parties
                .iter()
                .try_fold(1usize, |acc, p| acc.checked_mul(f(p)).filter(|&t| t <= MAX_TOTAL_DIM))
        };
        if total(|p| p.d_in).is_none() || total(|p| p.d_out).is_none() {
            return Err(Error::Size(format!(
                "total dimension exceeds the budget of {MAX_TOTAL_DIM}"
            )));
        }
        Ok(Self { parties })
    }

    /// Square local operators of the given dimensions.
    pub fn square(dims: &[usize]) -> Result<Self> {
        Self::new(dims.iter().map(|&d| PartyDims { d_in: d, d_out: d }).collect())
    }

    /// Local kets of the given dimensions (`d_in = 1`).
    pub fn kets(dims: &[usize]) -> Result<Self> {
        Self::new(dims.iter().map(|&d| PartyDims { d_in: 1, d_out: d }).collect())
    }

    pub fn parties(&self) -> &[PartyDims] {
        &self.parties
    }

    pub fn len(&self) -> usize {
        self.parties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parties.is_empty()
    }

    pub fn total_in(&self) -> usize {
        self.parties.iter().map(|p| p.d_in).product()
    }

    pub fn total_out(&self) -> usize {
        self.parties.iter().map(|p| p.d_out).product()
    }

    pub fn is_ket(&self) -> bool {
        self.parties.iter().all(|p| p.d_in == 1)
    }

    fn grouped(&self, side: &[usize]) -> (usize, usize) {
        side.iter().fold((1, 1), |(o, i), &a| {
            (o * self.parties[a].d_out, i * self.parties[a].d_in)
        })
    }
}

/// `weight * M(1) (x) ... (x) M(P)` with every local factor nonzero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductOperator {
    weight: Complex64,
    factors: Vec<ComplexMatrix>,
}

impl ProductOperator {
    pub fn new(weight: Complex64, factors: Vec<ComplexMatrix>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Parameter("a product operator needs at least one factor".into()));
        }
        if !(weight.re.is_finite() && weight.im.is_finite()) || weight == ZERO {
            return Err(Error::Degenerate(format!("weight must be finite and nonzero, got {weight}")));
        }
        if let Some(k) = factors.iter().position(|f| f.is_zero()) {
            return Err(Error::Degenerate(format!("local factor {k} is zero")));
        }
        Ok(Self { weight, factors })
    }

    pub fn unweighted(factors: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(Complex64::new(1.0, 0.0), factors)
    }

    pub fn weight(&self) -> Complex64 {
        self.weight
    }

    pub fn factors(&self) -> &[ComplexMatrix] {
        &self.factors
    }

    pub fn factor(&self, party: usize) -> &ComplexMatrix {
        &self.factors[party]
    }

    pub fn party_count(&self) -> usize {
        self.factors.len()
    }

    pub fn with_weight(&self, weight: Complex64) -> Result<Self> {
        Self::new(weight, self.factors.clone())
    }

    pub fn conforms_to(&self, spec: &PartySpec) -> bool {
        self.factors.len() == spec.len()
            && self
                .factors
                .iter()
                .zip(spec.parties())
                .all(|(f, p)| f.shape() == (p.d_out, p.d_in))
    }

    /// Full operator: the weight times the Kronecker product of the factors in party order.
    pub fn assemble(&self) -> Result<ComplexMatrix> {
        Ok(kron_all(&self.factors)?.scale(self.weight))
    }

    /// Kronecker product of the factors on `side` in ascending party order, without the weight.
    pub fn grouped_factor(&self, side: &[usize]) -> Result<ComplexMatrix> {
        if side.is_empty() {
            return Err(Error::Usage("grouped factor of an empty side".into()));
        }
        let mut sorted = side.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(&bad) = sorted.iter().find(|&&a| a >= self.factors.len()) {
            return Err(Error::Usage(format!(
                "party {bad} out of range for {} parties",
                self.factors.len()
            )));
        }
        kron_all(sorted.iter().map(|&a| &self.factors[a]))
    }

    /// `K(a)^dagger K(a)` for party `a`.
    pub fn local_positive_part(&self, party: usize) -> ComplexMatrix {
        let f = &self.factors[party];
        f.adjoint().matmul(f).expect("adjoint product is always conformable")
    }
}

/// An ordered set of product operators sharing one party spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorFamily {
    spec: PartySpec,
    members: Vec<ProductOperator>,
}

impl OperatorFamily {
    pub fn new(spec: PartySpec, members: Vec<ProductOperator>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Parameter("a family needs at least one member".into()));
        }
        if let Some(j) = members.iter().position(|m| !m.conforms_to(&spec)) {
            return Err(Error::Shape(format!(
                "member {j} does not conform to the party spec"
            )));
        }
        Ok(Self { spec, members })
    }

    /// Family whose spec is inferred from the first member's factor shapes.
    pub fn from_members(members: Vec<ProductOperator>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::Parameter("a family needs at least one member".into()))?;
        let spec = PartySpec::new(
            first
                .factors()
                .iter()
                .map(|f| PartyDims { d_in: f.cols(), d_out: f.rows() })
                .collect(),
        )?;
        Self::new(spec, members)
    }

    pub fn spec(&self) -> &PartySpec {
        &self.spec
    }

    pub fn members(&self) -> &[ProductOperator] {
        &self.members
    }

    pub fn member(&self, j: usize) -> &ProductOperator {
        &self.members[j]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn party_count(&self) -> usize {
        self.spec.len()
    }

    pub fn is_ket_family(&self) -> bool {
        self.spec.is_ket()
    }

    pub fn into_members(self) -> Vec<ProductOperator> {
        self.members
    }

    /// Members at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        check_subset(self.len(), indices)?;
        Self::new(
            self.spec.clone(),
            indices.iter().map(|&j| self.members[j].clone()).collect(),
        )
    }

    /// Same members, permuted: member `k` of the result is member `order[k]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::Usage("permutation length differs from family size".into()));
        }
        self.subset(order)
    }

    /// Local factors of `party` for the members in `subset`.
    pub fn local_factors(&self, party: usize, subset: &[usize]) -> Vec<ComplexMatrix> {
        subset.iter().map(|&j| self.members[j].factor(party).clone()).collect()
    }

    pub fn assembled(&self) -> Result<Vec<ComplexMatrix>> {
        self.members.iter().map(ProductOperator::assemble).collect()
    }

    /// True when both families have the same length and each member of `self`
    /// is proportional to the member of `other` at the same position.
    pub fn equivalent_up_to_scale(&self, other: &Self, tol: f64) -> Result<bool> {
        if self.spec != other.spec || self.len() != other.len() {
            return Ok(false);
        }
        for (a, b) in self.members.iter().zip(&other.members) {
            if proportional(&a.assemble()?, &b.assemble()?, tol)?.is_none() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub(crate) fn check_subset(n: usize, indices: &[usize]) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::Usage("subset must be nonempty".into()));
    }
    if let Some(&bad) = indices.iter().find(|&&j| j >= n) {
        return Err(Error::Usage(format!("member index {bad} out of range for {n} members")));
    }
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Usage("subset contains a repeated index".into()));
    }
    Ok(())
}

/// Split of the parties into two nonempty complementary groups.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bipartition {
    side_a: Vec<usize>,
    side_b: Vec<usize>,
}

impl Bipartition {
    pub fn new(side_a: &[usize], parties: usize) -> Result<Self> {
        let mut a = side_a.to_vec();
        a.sort_unstable();
        a.dedup();
        if a.is_empty() || a.len() >= parties || a.iter().any(|&x| x >= parties) {
            return Err(Error::Usage(format!(
                "side {side_a:?} is not a proper nonempty subset of {parties} parties"
            )));
        }
        let b = (0..parties).filter(|x| !a.contains(x)).collect();
        Ok(Self { side_a: a, side_b: b })
    }

    /// Every unordered bipartition of `parties` parties, party 0 always on side A.
    pub fn all(parties: usize) -> Vec<Self> {
        if parties < 2 {
            return Vec::new();
        }
        (1u64..(1 << (parties - 1)))
            .map(|mask| {
                let side_b: Vec<usize> = (1..parties).filter(|&p| mask >> (p - 1) & 1 == 1).collect();
                let side_a = (0..parties).filter(|p| !side_b.contains(p)).collect();
                Self { side_a, side_b }
            })
            .collect()
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[usize] {
        &self.side_b
    }

    pub fn dims(&self, spec: &PartySpec) -> BipartiteDims {
        let (a_out, a_in) = spec.grouped(&self.side_a);
        let (b_out, b_in) = spec.grouped(&self.side_b);
        BipartiteDims { a_out, a_in, b_out, b_in }
    }

    /// `(weight * grouped A, grouped B)`; the weight sits on side A only.
    pub fn split(&self, op: &ProductOperator) -> Result<(ComplexMatrix, ComplexMatrix)> {
        Ok((
            op.grouped_factor(&self.side_a)?.scale(op.weight()),
            op.grouped_factor(&self.side_b)?,
        ))
    }

    /// The operator with tensor factors reordered as `(side A) (x) (side B)`.
    pub fn assemble_split(&self, op: &ProductOperator) -> Result<ComplexMatrix> {
        let (a, b) = self.split(op)?;
        kron(&a, &b)
    }

    /// `sum_j c_j M_j`, reordered as `(side A) (x) (side B)`.
    pub fn combine(&self, ops: &[&ProductOperator], coeffs: &[Complex64]) -> Result<ComplexMatrix> {
        let mut acc: Option<ComplexMatrix> = None;
        for (op, &c) in ops.iter().zip(coeffs) {
            let term = self.assemble_split(op)?;
            match acc.as_mut() {
                None => acc = Some(term.scale(c)),
                Some(s) => s.accumulate(c, &term)?,
            }
        }
        acc.ok_or_else(|| Error::Usage("empty combination".into()))
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |s: &[usize]| s.iter().map(|p| (p + 1).to_string()).collect::<Vec<_>>().join(",");
        write!(f, "{{{}}}|{{{}}}", side(&self.side_a), side(&self.side_b))
    }
}

/// Two disjoint groups of parties whose local spans are compared.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cut {
    Pair(usize, usize),
    Bipartition(Bipartition),
}

impl Cut {
    pub fn sides(&self) -> (Vec<usize>, Vec<usize>) {
        match self {
            Cut::Pair(a, b) => (vec![*a], vec![*b]),
            Cut::Bipartition(bp) => (bp.side_a.clone(), bp.side_b.clone()),
        }
    }

    /// All unordered party pairs.
    pub fn all_pairs(parties: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for a in 0..parties {
            for b in a + 1..parties {
                out.push(Cut::Pair(a, b));
            }
        }
        out
    }

    pub fn all_bipartitions(parties: usize) -> Vec<Self> {
        Bipartition::all(parties).into_iter().map(Cut::Bipartition).collect()
    }

    fn validate(&self, parties: usize) -> Result<()> {
        match self {
            Cut::Pair(a, b) if a == b || *a >= parties || *b >= parties => Err(Error::Usage(format!(
                "({}, {}) is not a pair of distinct parties among {parties}",
                a + 1,
                b + 1
            ))),
            Cut::Bipartition(bp) if bp.side_a.len() + bp.side_b.len() != parties => Err(
                Error::Usage(format!("bipartition {bp} does not cover {parties} parties")),
            ),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cut::Pair(a, b) => write!(f, "({},{})", a + 1, b + 1),
            Cut::Bipartition(bp) => bp.fmt(f),
        }
    }
}

/// Span dimensions `(delta_A, delta_B)` of the grouped local factors of `subset` across `cut`.
pub fn local_span_dims(
    fam: &OperatorFamily,
    subset: &[usize],
    cut: &Cut,
    tol: &TolerancePolicy,
) -> Result<(usize, usize)> {
    check_subset(fam.len(), subset)?;
    cut.validate(fam.party_count())?;
    let (side_a, side_b) = cut.sides();
    let span = |side: &[usize]| -> Result<usize> {
        let grouped = subset
            .iter()
            .map(|&j| fam.member(j).grouped_factor(side))
            .collect::<Result<Vec<_>>>()?;
        span_dimension(&grouped, tol)
    };
    Ok((span(&side_a)?, span(&side_b)?))
}

/// Local span dimension of each party over the whole family.
pub fn party_span_dims(fam: &OperatorFamily, tol: &TolerancePolicy) -> Result<Vec<usize>> {
    let all: Vec<usize> = (0..fam.len()).collect();
    (0..fam.party_count())
        .map(|a| span_dimension(&fam.local_factors(a, &all), tol))
        .collect()
}

/// Outcome of checking `delta_A + delta_B <= N + r_s` for one combination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchmidtBoundReport {
    pub delta_a: usize,
    pub delta_b: usize,
    pub delta_sum: usize,
    pub n: usize,
    pub schmidt_rank: usize,
    pub holds: bool,
}

impl SchmidtBoundReport {
    pub fn is_equality(&self) -> bool {
        self.delta_sum == self.n + self.schmidt_rank
    }
}

/// Builds `S = sum_j c_j M_j`, its Schmidt rank across `partition`, and the span
/// dimensions of the grouped factors on each side.
pub fn schmidt_bound_report(
    fam: &OperatorFamily,
    coeffs: &[Complex64],
    partition: &Bipartition,
    tol: &TolerancePolicy,
) -> Result<SchmidtBoundReport> {
    let n = fam.len();
    if coeffs.len() != n {
        return Err(Error::Precondition(format!(
            "{} coefficients for {n} members",
            coeffs.len()
        )));
    }
    if let Some(j) = coeffs.iter().position(|&c| c == ZERO) {
        return Err(Error::Precondition(format!("coefficient {j} is zero")));
    }
    let cut = Cut::Bipartition(partition.clone());
    let all: Vec<usize> = (0..n).collect();
    let (delta_a, delta_b) = local_span_dims(fam, &all, &cut, tol)?;
    let ops: Vec<&ProductOperator> = fam.members().iter().collect();
    let s = partition.combine(&ops, coeffs)?;
    let r_s = schmidt_rank(&s, partition.dims(fam.spec()), tol)?;
    let delta_sum = delta_a + delta_b;
    Ok(SchmidtBoundReport {
        delta_a,
        delta_b,
        delta_sum,
        n,
        schmidt_rank: r_s,
        holds: delta_sum <= n + r_s,
    })
}

/// Realignment of `sum_j c_j M_j` across `partition`.
pub fn realigned_combination(
    ops: &[&ProductOperator],
    coeffs: &[Complex64],
    partition: &Bipartition,
    spec: &PartySpec,
) -> Result<ComplexMatrix> {
    realign_bipartite(&partition.combine(ops, coeffs)?, partition.dims(spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0., 1., 1., 0.]).unwrap()
    }

    fn projector_family() -> OperatorFamily {
        let p = |i| ComplexMatrix::unit(2, 2, i, i);
        let members = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&(a, b)| ProductOperator::unweighted(vec![p(a), p(b)]).unwrap())
            .collect();
        OperatorFamily::new(PartySpec::square(&[2, 2]).unwrap(), members).unwrap()
    }

    #[test]
    fn assemble_examples() {
        let id = ProductOperator::unweighted(vec![ComplexMatrix::identity(2); 2]).unwrap();
        assert_eq!(id.assemble().unwrap(), ComplexMatrix::identity(4));

        let lower = ComplexMatrix::unit(2, 2, 1, 0);
        let k3 = ProductOperator::unweighted(vec![lower.clone(), lower]).unwrap();
        assert_eq!(k3.assemble().unwrap(), ComplexMatrix::unit(4, 4, 3, 0));

        let single = ProductOperator::new(c(2., 0.), vec![sigma_x()]).unwrap();
        assert_eq!(single.assemble().unwrap(), sigma_x().scale(c(2., 0.)));
    }

    #[test]
    fn zero_factor_and_weight_are_rejected() {
        let z = ComplexMatrix::zeros(2, 2);
        assert!(matches!(
            ProductOperator::unweighted(vec![sigma_x(), z]),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            ProductOperator::new(ZERO, vec![sigma_x()]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn grouped_factor_orders_parties_ascending() {
        let a = ComplexMatrix::unit(2, 2, 0, 1);
        let b = ComplexMatrix::identity(3);
        let d = sigma_x();
        let op = ProductOperator::new(c(0., 2.), vec![a.clone(), b.clone(), d.clone()]).unwrap();
        assert_eq!(op.grouped_factor(&[1]).unwrap(), b);
        assert_eq!(op.grouped_factor(&[2, 0]).unwrap(), kron(&a, &d).unwrap());
        assert_eq!(
            op.grouped_factor(&[0, 1, 2]).unwrap().scale(op.weight()),
            op.assemble().unwrap()
        );
        assert!(matches!(op.grouped_factor(&[]), Err(Error::Usage(_))));
        assert!(matches!(op.grouped_factor(&[3]), Err(Error::Usage(_))));
    }

    #[test]
    fn bipartitions_enumerate_unordered_splits() {
        assert_eq!(Bipartition::all(1).len(), 0);
        assert_eq!(Bipartition::all(2).len(), 1);
        assert_eq!(Bipartition::all(3).len(), 3);
        assert_eq!(Bipartition::all(4).len(), 7);
        for bp in Bipartition::all(4) {
            assert!(bp.side_a().contains(&0));
            let mut all: Vec<usize> = bp.side_a().iter().chain(bp.side_b()).copied().collect();
            all.sort_unstable();
            assert_eq!(all, vec![0, 1, 2, 3]);
        }
        assert!(Bipartition::new(&[0, 1], 2).is_err());
        assert!(Bipartition::new(&[], 2).is_err());
    }

    #[test]
    fn assemble_split_is_a_reordering() {
        // Reordering parties cannot change the Frobenius norm or the entry multiset.
        let op = ProductOperator::new(
            c(1., 1.),
            vec![ComplexMatrix::unit(2, 2, 0, 1), ComplexMatrix::identity(2), sigma_x()],
        )
        .unwrap();
        let bp = Bipartition::new(&[0, 2], 3).unwrap();
        let s = bp.assemble_split(&op).unwrap();
        assert!((s.frobenius_norm() - op.assemble().unwrap().frobenius_norm()).abs() < 1e-14);
        let (a, b) = bp.split(&op).unwrap();
        assert_eq!(b, ComplexMatrix::identity(2));
        assert_eq!(a, kron(&ComplexMatrix::unit(2, 2, 0, 1), &sigma_x()).unwrap().scale(c(1., 1.)));
    }

    #[test]
    fn projector_pair_span_dims() {
        let fam = projector_family();
        let tol = TolerancePolicy::default();
        assert_eq!(local_span_dims(&fam, &[0, 1], &Cut::Pair(0, 1), &tol).unwrap(), (1, 2));
        assert_eq!(local_span_dims(&fam, &[0, 3], &Cut::Pair(0, 1), &tol).unwrap(), (2, 2));
        assert!(local_span_dims(&fam, &[0, 0], &Cut::Pair(0, 1), &tol).is_err());
        assert!(local_span_dims(&fam, &[0, 1], &Cut::Pair(1, 1), &tol).is_err());
    }

    #[test]
    fn single_member_bound_is_tight() {
        let op = ProductOperator::unweighted(vec![sigma_x(), ComplexMatrix::identity(2)]).unwrap();
        let fam = OperatorFamily::from_members(vec![op]).unwrap();
        let bp = Bipartition::new(&[0], 2).unwrap();
        let report = schmidt_bound_report(&fam, &[ONE], &bp, &TolerancePolicy::default()).unwrap();
        assert_eq!(report.delta_sum, 2);
        assert_eq!(report.schmidt_rank, 1);
        assert!(report.holds && report.is_equality());
    }

    #[test]
    fn zero_coefficient_is_a_precondition_error() {
        let fam = projector_family();
        let bp = Bipartition::new(&[0], 2).unwrap();
        let coeffs = [ONE, ZERO, ONE, ONE];
        assert!(matches!(
            schmidt_bound_report(&fam, &coeffs, &bp, &TolerancePolicy::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn family_rejects_nonconforming_members() {
        let good = ProductOperator::unweighted(vec![sigma_x(), sigma_x()]).unwrap();
        let bad = ProductOperator::unweighted(vec![sigma_x(), ComplexMatrix::identity(3)]).unwrap();
        assert!(OperatorFamily::from_members(vec![good.clone(), bad]).is_err());
        assert!(OperatorFamily::new(PartySpec::square(&[2, 2]).unwrap(), vec![]).is_err());
        assert!(OperatorFamily::from_members(vec![good]).is_ok());
    }

    #[test]
    fn spec_budget() {
        assert!(matches!(PartySpec::square(&[64, 128]), Err(Error::Size(_))));
        assert!(PartySpec::square(&[64, 64]).is_ok());
        assert!(PartySpec::square(&[]).is_err());
        assert!(PartySpec::square(&[2, 0]).is_err());
    }

    #[test]
    fn equivalence_up_to_scale() {
        let fam = projector_family();
        let scaled: Vec<ProductOperator> = fam
            .members()
            .iter()
            .map(|m| m.with_weight(c(0., -3.)).unwrap())
            .collect();
        let other = OperatorFamily::new(fam.spec().clone(), scaled).unwrap();
        assert!(fam.equivalent_up_to_scale(&other, 1e-12).unwrap());
        let swapped = fam.permuted(&[1, 0, 2, 3]).unwrap();
        assert!(!fam.equivalent_up_to_scale(&swapped, 1e-12).unwrap());
    }
}
