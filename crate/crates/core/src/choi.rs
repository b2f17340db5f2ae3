//! Channel-state duality for product families.
//!
//! A product Kraus operator `w K(1) (x) ... (x) K(P)` maps to the product ket
//! `w vec(K(1)) (x) ... (x) vec(K(P))`, so each party of the state carries that
//! party's (input, output) pair and the product structure survives. The Choi
//! state is left unnormalized.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{vectorize, ComplexMatrix, ONE};
use crate::product::{OperatorFamily, PartyDims, PartySpec, ProductOperator};

/// Hermitian positive-semidefinite matrix together with its party dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>, tol: f64) -> Result<Self> {
        if !matrix.is_square() || dims.iter().product::<usize>() != matrix.rows() {
            return Err(Error::Shape(format!(
                "{}x{} matrix does not match party dimensions {dims:?}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let scale = matrix.frobenius_norm().max(1.0);
        if matrix.distance(&matrix.adjoint())? > tol * scale {
            return Err(Error::Precondition("density matrix is not Hermitian".into()));
        }
        let rho = Self { matrix, dims };
        let min = rho.min_eigenvalue();
        if min < -tol * scale {
            return Err(Error::Precondition(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(rho)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = self
            .matrix
            .add(&self.matrix.adjoint())
            .expect("square matrix")
            .scale(Complex64::new(0.5, 0.0));
        let mut ev = herm
            .to_faer()
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .unwrap_or_else(|_| vec![f64::NAN; herm.rows()]);
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }
}

/// Replaces every local operator by its column-stacked vectorization.
pub fn channel_to_choi_ensemble(fam: &OperatorFamily) -> Result<OperatorFamily> {
    let spec = PartySpec::new(
        fam.spec()
            .parties()
            .iter()
            .map(|p| PartyDims { d_in: 1, d_out: p.d_in * p.d_out })
            .collect(),
    )?;
    let members = fam
        .members()
        .iter()
        .map(|m| ProductOperator::new(m.weight(), m.factors().iter().map(vectorize).collect()))
        .collect::<Result<Vec<_>>>()?;
    OperatorFamily::new(spec, members)
}

/// `rho = sum_j |Psi_j><Psi_j|` over the assembled kets.
pub fn ensemble_to_state(ens: &OperatorFamily) -> Result<DensityMatrix> {
    if !ens.is_ket_family() {
        return Err(Error::Usage("ensemble members must be kets".into()));
    }
    let dim = ens.spec().total_out();
    let mut rho = ComplexMatrix::zeros(dim, dim);
    for m in ens.members() {
        let psi = m.assemble()?;
        rho.accumulate(ONE, &psi.matmul(&psi.adjoint())?)?;
    }
    let dims = ens.spec().parties().iter().map(|p| p.d_out).collect();
    let sym = rho.add(&rho.adjoint())?.scale(Complex64::new(0.5, 0.0));
    DensityMatrix::new(sym, dims, 1e-12)
}

/// Unnormalized Choi matrix of the channel, parties grouped as (input, output) pairs.
pub fn choi_matrix(fam: &OperatorFamily) -> Result<DensityMatrix> {
    ensemble_to_state(&channel_to_choi_ensemble(fam)?)
}

/// Frobenius distance between the Choi matrices of two families on the same parties.
pub fn choi_distance(a: &OperatorFamily, b: &OperatorFamily) -> Result<f64> {
    if a.spec() != b.spec() {
        return Err(Error::Usage("families act on different party specs".into()));
    }
    choi_matrix(a)?.matrix().distance(choi_matrix(b)?.matrix())
}

/// True when both families define the same channel to Frobenius tolerance `tol`.
pub fn channels_equal(a: &OperatorFamily, b: &OperatorFamily, tol: f64) -> Result<bool> {
    Ok(choi_distance(a, b)? <= tol)
}

/// `|Psi'_i> = sum_j u_ij |Psi_j>` for every row of `u`.
pub fn remix_kets(ens: &OperatorFamily, u: &ComplexMatrix) -> Result<Vec<ComplexMatrix>> {
    if u.cols() != ens.len() {
        return Err(Error::Shape(format!(
            "mixing matrix has {} columns for {} members",
            u.cols(),
            ens.len()
        )));
    }
    let kets = ens.assembled()?;
    let mut out = Vec::with_capacity(u.rows());
    for i in 0..u.rows() {
        let mut acc = kets[0].scale(u.get(i, 0));
        for (j, k) in kets.iter().enumerate().skip(1) {
            acc.accumulate(u.get(i, j), k)?;
        }
        out.push(acc);
    }
    Ok(out)
}

/// `sum_i |v_i><v_i|` for arbitrary column vectors.
pub fn gram_state(kets: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let first = kets.first().ok_or_else(|| Error::Usage("no kets".into()))?;
    let mut rho = ComplexMatrix::zeros(first.rows(), first.rows());
    for k in kets {
        rho.accumulate(ONE, &k.matmul(&k.adjoint())?)?;
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    fn kets_family(kets: Vec<Vec<ComplexMatrix>>) -> OperatorFamily {
        OperatorFamily::from_members(
            kets.into_iter()
                .map(|f| ProductOperator::unweighted(f).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_party_basis_gives_identity() {
        let ens = kets_family(vec![
            vec![ComplexMatrix::basis_ket(2, 0)],
            vec![ComplexMatrix::basis_ket(2, 1)],
        ]);
        let rho = ensemble_to_state(&ens).unwrap();
        assert_eq!(rho.matrix(), &ComplexMatrix::identity(2));
    }

    #[test]
    fn correlated_kets_give_diagonal_state() {
        let k = ComplexMatrix::basis_ket;
        let ens = kets_family(vec![vec![k(2, 0), k(2, 0)], vec![k(2, 1), k(2, 1)]]);
        let rho = ensemble_to_state(&ens).unwrap();
        let expect = ComplexMatrix::from_real(4, 4, &[
            1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 1.,
        ])
        .unwrap();
        assert_eq!(rho.matrix(), &expect);
        assert_eq!(rho.dims(), &[2, 2]);
    }

    #[test]
    fn normalized_identity_maps_to_maximally_entangled_ket() {
        let d = 3;
        let w = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        let op = ProductOperator::new(w, vec![ComplexMatrix::identity(d)]).unwrap();
        let fam = OperatorFamily::from_members(vec![op]).unwrap();
        let ens = channel_to_choi_ensemble(&fam).unwrap();
        let psi = ens.member(0).assemble().unwrap();
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j { w } else { ZERO };
                assert_eq!(psi.get(i * d + j, 0), expect);
            }
        }
    }

    #[test]
    fn operator_family_is_not_an_ensemble() {
        let fam = OperatorFamily::from_members(vec![
            ProductOperator::unweighted(vec![ComplexMatrix::identity(2)]).unwrap(),
        ])
        .unwrap();
        assert!(matches!(ensemble_to_state(&fam), Err(Error::Usage(_))));
    }

    #[test]
    fn negative_eigenvalue_is_rejected() {
        let m = ComplexMatrix::from_real(2, 2, &[1., 0., 0., -1.]).unwrap();
        assert!(DensityMatrix::new(m, vec![2], 1e-12).is_err());
    }
}
