use std::fmt;

use super::linalg::{norm_at_most, operator_norm, tolerance};
use super::matrix::{CMatrix, C64};
use super::state::{check_dim, DimTag};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Unitary,
    Projector,
    Hermitian,
    General,
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OperatorKind::Unitary => "unitary",
            OperatorKind::Projector => "projector",
            OperatorKind::Hermitian => "hermitian",
            OperatorKind::General => "general",
        };
        f.write_str(s)
    }
}

/// Square matrix with a validated kind and a register layout.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    mat: CMatrix,
    kind: OperatorKind,
    tag: DimTag,
}

/// ‖U†U − I‖_op
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let d = &(&u.adjoint() * u) - &CMatrix::identity(u.cols());
    let fro = d.frobenius_norm();
    if fro <= 1e-12 {
        return fro;
    }
    operator_norm(&d)
}

impl OperatorMatrix {
    fn square(mat: &CMatrix, tag: &DimTag) -> Result<()> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch { expected: mat.rows(), found: mat.cols() });
        }
        check_dim(tag.dim(), mat.rows())
    }

    pub fn unitary(mat: CMatrix, tag: DimTag) -> Result<Self> {
        Self::square(&mat, &tag)?;
        let d = &(&mat.adjoint() * &mat) - &CMatrix::identity(mat.rows());
        let (ok, residual) = norm_at_most(&d, tolerance());
        if !ok {
            return Err(Error::WrongKind { expected: "unitary", residual });
        }
        Ok(OperatorMatrix { mat, kind: OperatorKind::Unitary, tag })
    }

    pub fn projector(mat: CMatrix, tag: DimTag) -> Result<Self> {
        Self::square(&mat, &tag)?;
        let tol = tolerance();
        let herm = mat.hermitian_defect();
        if herm > tol {
            return Err(Error::WrongKind { expected: "a projector", residual: herm });
        }
        let (ok, residual) = norm_at_most(&(&(&mat * &mat) - &mat), tol);
        if !ok {
            return Err(Error::WrongKind { expected: "a projector", residual });
        }
        Ok(OperatorMatrix { mat, kind: OperatorKind::Projector, tag })
    }

    pub fn hermitian(mat: CMatrix, tag: DimTag) -> Result<Self> {
        Self::square(&mat, &tag)?;
        let herm = mat.hermitian_defect();
        if herm > tolerance() {
            return Err(Error::WrongKind { expected: "hermitian", residual: herm });
        }
        Ok(OperatorMatrix { mat, kind: OperatorKind::Hermitian, tag })
    }

    pub fn general(mat: CMatrix, tag: DimTag) -> Result<Self> {
        Self::square(&mat, &tag)?;
        Ok(OperatorMatrix { mat, kind: OperatorKind::General, tag })
    }

    /// For matrices that are unitary by construction (permutations, oracle
    /// formulas, products of unitaries).
    pub(crate) fn unitary_unchecked(mat: CMatrix, tag: DimTag) -> Self {
        debug_assert!(mat.is_square() && mat.rows() == tag.dim());
        OperatorMatrix { mat, kind: OperatorKind::Unitary, tag }
    }

    pub fn identity(tag: DimTag) -> Self {
        OperatorMatrix { mat: CMatrix::identity(tag.dim()), kind: OperatorKind::Unitary, tag }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn tag(&self) -> &DimTag {
        &self.tag
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix { mat: self.mat.adjoint(), kind: self.kind, tag: self.tag.clone() }
    }

    /// `self · other`. Unitary if both factors are.
    pub fn compose(&self, other: &OperatorMatrix) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        let kind = if self.kind == OperatorKind::Unitary && other.kind == OperatorKind::Unitary {
            OperatorKind::Unitary
        } else {
            OperatorKind::General
        };
        Ok(OperatorMatrix { mat: &self.mat * &other.mat, kind, tag: self.tag.clone() })
    }

    /// Product of a sequence applied right to left: `ops[0] · ops[1] · …`.
    pub fn product(ops: &[&OperatorMatrix]) -> Result<Self> {
        let (first, rest) = ops.split_first().ok_or_else(|| Error::InvalidConfig("empty product".into()))?;
        let mut acc = (*first).clone();
        for op in rest {
            acc = acc.compose(op)?;
        }
        Ok(acc)
    }

    pub fn tensor(&self, other: &OperatorMatrix) -> Self {
        let kind = if self.kind == other.kind { self.kind } else { OperatorKind::General };
        OperatorMatrix { mat: self.mat.kron(&other.mat), kind, tag: self.tag.product(&other.tag) }
    }

    pub fn operator_norm(&self) -> f64 {
        operator_norm(&self.mat)
    }

    /// ‖self − other‖_op
    pub fn distance(&self, other: &OperatorMatrix) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(operator_norm(&(&self.mat - &other.mat)))
    }

    /// ‖U†U − I‖_op
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.mat)
    }

    /// ‖U² − I‖_op
    pub fn involution_defect(&self) -> f64 {
        let d = &(&self.mat * &self.mat) - &CMatrix::identity(self.dim());
        let fro = d.frobenius_norm();
        if fro <= 1e-12 {
            return fro;
        }
        operator_norm(&d)
    }

    /// Whether the matrix is a permutation matrix (exactly one 1 per row and column).
    pub fn is_permutation(&self) -> bool {
        let d = self.dim();
        let mut col_hits = vec![0usize; d];
        for i in 0..d {
            let mut row_hits = 0;
            for (j, a) in self.mat.row(i).iter().enumerate() {
                if *a == C64::new(1.0, 0.0) {
                    row_hits += 1;
                    col_hits[j] += 1;
                } else if *a != C64::new(0.0, 0.0) {
                    return false;
                }
            }
            if row_hits != 1 {
                return false;
            }
        }
        col_hits.iter().all(|&c| c == 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_kinds() {
        let x = CMatrix::permutation(&[1, 0]);
        assert!(OperatorMatrix::unitary(x.clone(), DimTag::Qubits(1)).is_ok());
        assert!(OperatorMatrix::projector(x.clone(), DimTag::Qubits(1)).is_err());
        let twice = x.scale(C64::new(2.0, 0.0));
        assert!(matches!(
            OperatorMatrix::unitary(twice, DimTag::Qubits(1)),
            Err(Error::WrongKind { expected: "unitary", .. })
        ));
        let p = CMatrix::from_diagonal(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(OperatorMatrix::projector(p, DimTag::Qubits(1)).is_ok());
    }

    #[test]
    fn tensor_of_identities() {
        let i = OperatorMatrix::identity(DimTag::Qubits(1));
        let ii = i.tensor(&i);
        assert_eq!(ii.matrix(), &CMatrix::identity(4));
        assert_eq!(ii.kind(), OperatorKind::Unitary);
        assert!(ii.is_permutation());
    }
}
