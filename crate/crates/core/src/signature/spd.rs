//! Log-Euclidean comparison of (possibly singular) PSD signatures.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{check_symmetric, GramHankel, SignatureError};

/// Eigenvalues below this are clamped before taking logarithms.
pub const DEFAULT_EIG_FLOOR: f64 = 1e-12;

const INPUT_SYMMETRY_TOLERANCE: f64 = 1e-10;
const MAX_SWEEPS: usize = 10_000;

/// `P diag(log max(λ, floor)) Pᵀ` for the eigendecomposition `G = P diag(λ) Pᵀ`.
pub fn matrix_log_psd(g: &DMatrix<f64>, eig_floor: f64) -> Result<DMatrix<f64>, SignatureError> {
    check_symmetric(g, INPUT_SYMMETRY_TOLERANCE)?;
    let eig = SymmetricEigen::try_new(g.clone(), f64::EPSILON, MAX_SWEEPS)
        .ok_or(SignatureError::EigenFailure)?;
    if !eig.eigenvalues.iter().all(|v| v.is_finite()) {
        return Err(SignatureError::EigenFailure);
    }
    let logs = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| l.max(eig_floor).ln()),
    );
    let p = &eig.eigenvectors;
    let l = p * DMatrix::from_diagonal(&logs) * p.transpose();
    Ok((&l + l.transpose()) * 0.5)
}

/// `‖log G1 − log G2‖_F` with eigenvalue clamping at `eig_floor`.
pub fn lerm_distance(a: &GramHankel, b: &GramHankel, eig_floor: f64) -> Result<f64, SignatureError> {
    if a.order() != b.order() {
        return Err(SignatureError::DimensionMismatch {
            left: a.order(),
            right: b.order(),
        });
    }
    let la = matrix_log_psd(a.matrix(), eig_floor)?;
    let lb = matrix_log_psd(b.matrix(), eig_floor)?;
    Ok((la - lb).norm())
}
