//! Spectral routines, delegated to nalgebra's Hermitian eigensolver.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DMatrix;

use super::matrix::{CMatrix, C64};

pub const DEFAULT_TOL: f64 = 1e-9;

// Zero bits mean "not overridden".
static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0);

/// Global absolute tolerance for exact linear-algebra checks.
pub fn tolerance() -> f64 {
    match TOLERANCE_BITS.load(Ordering::Relaxed) {
        0 => DEFAULT_TOL,
        bits => f64::from_bits(bits),
    }
}

pub fn set_tolerance(tol: f64) {
    assert!(tol > 0.0 && tol.is_finite(), "tolerance must be positive");
    TOLERANCE_BITS.store(tol.to_bits(), Ordering::Relaxed);
}

fn to_nalgebra(a: &CMatrix) -> DMatrix<C64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

/// Symmetrized copy, so round-off asymmetry never reaches the solver.
fn hermitian_part(a: &CMatrix) -> DMatrix<C64> {
    let m = to_nalgebra(a);
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenvalues (ascending) and eigenvectors (as columns) of a Hermitian matrix.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    assert!(a.is_square(), "eigen of non-square matrix");
    let d = a.rows();
    if d == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    assert!(a.is_square(), "eigen of non-square matrix");
    if a.rows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitian_part(a).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Largest singular value.
///
/// Hermitian input goes straight to the eigensolver; otherwise the norm is
/// √λ_max(A†A), formed on the smaller side.
pub fn operator_norm(a: &CMatrix) -> f64 {
    let scale = a.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    if a.is_square() && a.hermitian_defect() <= 1e-14 * scale {
        return hermitian_eigenvalues(a).iter().map(|x| x.abs()).fold(0.0, f64::max);
    }
    let gram = if a.cols() <= a.rows() { &a.adjoint() * a } else { a * &a.adjoint() };
    let top = hermitian_eigenvalues(&gram).last().copied().unwrap_or(0.0);
    top.max(0.0).sqrt()
}

/// True when ‖a‖_op ≤ tol. Uses the Frobenius bound first and only falls back
/// to the eigensolver when that bound is inconclusive.
pub fn norm_at_most(a: &CMatrix, tol: f64) -> (bool, f64) {
    let fro = a.frobenius_norm();
    if fro <= tol {
        return (true, fro);
    }
    let op = operator_norm(a);
    (op <= tol, op)
}
