//! Sequence Gram matrices and fixed-size Gram-Hankel motion signatures.
//!
//! For frames `M_1..M_T` the Gram matrix is `J_ij = ⟨M_i, M_j⟩`. The order-`r`
//! signature sums the `T − r` principal `r×r` blocks of `J` starting one
//! frame in:
//!
//! `G_ij = Σ_{k=1..T−r} J_{i+k, j+k}` (1-based), normalized to unit Frobenius norm.
//!
//! In 0-based indices this is `G[i][j] = Σ_{k=1..=T−r} J[i+k][j+k]` for
//! `i, j < r`, i.e. the blocks at offsets `1..=T−r`; the block at offset 0
//! (which would contain the first frame) is never visited, and the last
//! block ends exactly at frame `T`.

mod format;
mod spd;

pub use format::{
    decode_gram, decode_signature, encode_gram, encode_signature, read_signature, write_gram,
    write_signature, MatrixSidecar, GRAM_MAGIC, SIGNATURE_MAGIC, FORMAT_VERSION,
};
pub use spd::{lerm_distance, matrix_log_psd, DEFAULT_EIG_FLOOR};

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use crate::kernel::{packed_norm, packed_product, KernelConfig, KernelError, PackedAtoms};
use crate::mesh::VarifoldAtoms;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum SignatureError {
    #[error("frame {index}: {source}")]
    Frame {
        index: usize,
        #[source]
        source: KernelError,
    },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("a sequence needs at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("order r = {r} outside [1, {max}] for a {frames}-frame sequence")]
    InvalidOrder { r: usize, frames: usize, max: usize },
    #[error("Gram-Hankel matrix has zero Frobenius norm")]
    ZeroMatrix,
    #[error("matrix dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("symmetric eigensolver did not converge")]
    EigenFailure,
    #[error("bad matrix file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Absolute tolerance for the symmetry of Gram and signature matrices.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn check_symmetric(m: &DMatrix<f64>, tol: f64) -> Result<(), SignatureError> {
    if m.nrows() != m.ncols() {
        return Err(SignatureError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let asym = max_asymmetry(m);
    if asym > tol || asym.is_nan() {
        return Err(SignatureError::NotSymmetric(asym));
    }
    Ok(())
}

/// `T×T` matrix of pairwise frame inner products of one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceGram {
    j: DMatrix<f64>,
}

impl SequenceGram {
    pub fn from_matrix(j: DMatrix<f64>) -> Result<Self, SignatureError> {
        check_symmetric(&j, SYMMETRY_TOLERANCE)?;
        if j.nrows() < 2 {
            return Err(SignatureError::TooFewFrames(j.nrows()));
        }
        Ok(Self { j })
    }

    pub fn frames(&self) -> usize {
        self.j.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.j
    }
}

/// Pairwise frame products. Frames must already be preprocessed (see
/// [`crate::kernel::preprocess`]); only the upper triangle is evaluated.
pub fn sequence_gram<T: Real>(
    frames: &[VarifoldAtoms<T>],
    cfg: &KernelConfig,
) -> Result<SequenceGram, SignatureError> {
    cfg.validate()?;
    let packed: Vec<PackedAtoms> = frames.par_iter().map(PackedAtoms::new).collect();
    gram_from_packed(&packed, cfg)
}

pub(crate) fn gram_from_packed(
    packed: &[PackedAtoms],
    cfg: &KernelConfig,
) -> Result<SequenceGram, SignatureError> {
    let t = packed.len();
    if t < 2 {
        return Err(SignatureError::TooFewFrames(t));
    }
    let norms: Option<Vec<f64>> = if cfg.unit_norm {
        let norms = packed
            .par_iter()
            .enumerate()
            .map(|(index, p)| packed_norm(p, cfg).map_err(|source| SignatureError::Frame { index, source }))
            .collect::<Result<Vec<_>, _>>()?;
        Some(norms)
    } else {
        None
    };

    let pairs: Vec<(usize, usize)> = (0..t).flat_map(|i| (i..t).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let p = packed_product(&packed[i], &packed[j], cfg);
            match &norms {
                Some(n) => p / (n[i] * n[j]),
                None => p,
            }
        })
        .collect();

    let mut j = DMatrix::zeros(t, t);
    for (&(a, b), &v) in pairs.iter().zip(&values) {
        j[(a, b)] = v;
        j[(b, a)] = v;
    }
    Ok(SequenceGram { j })
}

/// Fixed-size motion signature: symmetric, PSD up to round-off, unit Frobenius norm.
#[derive(Debug, Clone, PartialEq)]
pub struct GramHankel {
    g: DMatrix<f64>,
}

impl GramHankel {
    /// Wraps an existing symmetric matrix without renormalizing it.
    pub fn from_matrix(g: DMatrix<f64>) -> Result<Self, SignatureError> {
        check_symmetric(&g, SYMMETRY_TOLERANCE)?;
        if g.nrows() == 0 {
            return Err(SignatureError::NotSquare { rows: 0, cols: 0 });
        }
        Ok(Self { g })
    }

    pub fn order(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }
}

/// Sum of the shifted diagonal blocks of `J`, before Frobenius normalization.
pub fn gram_hankel_unnormalized(j: &SequenceGram, r: usize) -> Result<DMatrix<f64>, SignatureError> {
    let t = j.frames();
    if r < 1 || r >= t {
        return Err(SignatureError::InvalidOrder {
            r,
            frames: t,
            max: t - 1,
        });
    }
    let jm = &j.j;
    let mut g = DMatrix::zeros(r, r);
    for k in 1..=t - r {
        for col in 0..r {
            for row in 0..r {
                g[(row, col)] += jm[(row + k, col + k)];
            }
        }
    }
    Ok(g)
}

pub fn gram_hankel(j: &SequenceGram, r: usize) -> Result<GramHankel, SignatureError> {
    let g = gram_hankel_unnormalized(j, r)?;
    let norm = g.norm();
    if !(norm > 1e-300) {
        return Err(SignatureError::ZeroMatrix);
    }
    Ok(GramHankel { g: g / norm })
}

/// `‖G1 − G2‖_F`.
pub fn frobenius_distance(a: &GramHankel, b: &GramHankel) -> Result<f64, SignatureError> {
    if a.order() != b.order() {
        return Err(SignatureError::DimensionMismatch {
            left: a.order(),
            right: b.order(),
        });
    }
    Ok(a
        .g
        .iter()
        .zip(b.g.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}
