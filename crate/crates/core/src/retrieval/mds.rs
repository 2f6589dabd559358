use nalgebra::{DMatrix, SymmetricEigen};

use super::RetrievalError;
use crate::signature::SignatureError;

/// Classical (Torgerson) MDS.
///
/// `B = −½ H (D∘D) H` with `H = I − 11ᵀ/N`; the top `k` eigenpairs give the
/// coordinates `v·√max(λ, 0)`. Each axis is oriented so its first entry with
/// magnitude above `1e-12` is positive. Returns an `N×k` matrix; axes beyond
/// `N` are zero.
pub fn classical_mds(d: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>, RetrievalError> {
    let n = d.nrows();
    if d.ncols() != n {
        return Err(RetrievalError::InvalidDistances(format!("{}x{} is not square", n, d.ncols())));
    }
    if k == 0 {
        return Err(RetrievalError::InvalidDistances("target dimension must be >= 1".into()));
    }
    let scale = d.amax().max(1.0);
    for i in 0..n {
        if d[(i, i)].abs() > 1e-12 * scale {
            return Err(RetrievalError::InvalidDistances(format!("D[{i},{i}] != 0")));
        }
        for j in i + 1..n {
            if (d[(i, j)] - d[(j, i)]).abs() > 1e-10 * scale {
                return Err(RetrievalError::InvalidDistances(format!("D[{i},{j}] != D[{j},{i}]")));
            }
        }
    }
    let mut coords = DMatrix::zeros(n, k);
    if n == 0 {
        return Ok(coords);
    }

    let sq = d.map(|x| x * x);
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / nf).collect();
    let col_means: Vec<f64> = (0..n).map(|j| sq.column(j).sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - col_means[j] + grand));
    let b = (&b + b.transpose()) * 0.5;

    let eig = SymmetricEigen::try_new(b, f64::EPSILON, 10_000)
        .ok_or(RetrievalError::Signature(SignatureError::EigenFailure))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    for (axis, &col) in order.iter().take(k).enumerate() {
        let s = eig.eigenvalues[col].max(0.0).sqrt();
        let v = eig.eigenvectors.column(col);
        let sign = match v.iter().find(|x| x.abs() > 1e-12) {
            Some(&x) if x < 0.0 => -1.0,
            _ => 1.0,
        };
        for i in 0..n {
            coords[(i, axis)] = sign * v[i] * s;
        }
    }
    Ok(coords)
}
