//! Grid search over the kernel scale σ and the signature order r.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{pairwise_distances, retrieval_scores, DistanceMetric, RetrievalError, RetrievalScores};
use crate::dataset::LabeledSequence;
use crate::kernel::{preprocess, KernelConfig, KernelFamily, PackedAtoms};
use crate::scalar::Real;
use crate::signature::{gram_from_packed, gram_hankel, SequenceGram};

/// Ten scales spaced geometrically over `[1e-3, 10]`.
pub fn default_sigma_grid() -> Vec<f64> {
    (0..10).map(|i| 10f64.powf(-3.0 + 4.0 * i as f64 / 9.0)).collect()
}

/// Every computable order, `1..T_min`.
pub fn default_order_grid(t_min: usize) -> Vec<usize> {
    (1..t_min).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub sigma: f64,
    pub r: usize,
    pub scores: RetrievalScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsentCell {
    pub sigma: f64,
    pub r: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub family: KernelFamily,
    pub metric: DistanceMetric,
    pub unit_norm: bool,
    pub centroid_center: bool,
    /// Evaluated cells, σ-major in grid order.
    pub cells: Vec<SweepCell>,
    /// Cells whose evaluation failed; they do not abort the sweep.
    pub absent: Vec<AbsentCell>,
    /// Highest NN, then FT, then ST, then smaller r, then smaller σ.
    pub best: SweepCell,
}

fn better(a: &SweepCell, b: &SweepCell) -> bool {
    let key = |c: &SweepCell| (c.scores.nn, c.scores.ft, c.scores.st);
    let (ka, kb) = (key(a), key(b));
    match ka.partial_cmp(&kb).unwrap_or(Ordering::Equal) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => (a.r, a.sigma) < (b.r, b.sigma),
    }
}

/// Single-metric sweep. See [`parameter_sweep_metrics`].
pub fn parameter_sweep<T: Real>(
    dataset: &[LabeledSequence<T>],
    kernel: &KernelConfig,
    sigmas: &[f64],
    orders: &[usize],
    metric: DistanceMetric,
) -> Result<SweepResult, RetrievalError> {
    let mut out = parameter_sweep_metrics(dataset, kernel, sigmas, orders, &[metric])?;
    Ok(out.remove(0))
}

/// Evaluates every `(σ, r)` cell for each metric. Sequence Grams are computed
/// once per σ and shared by all orders and metrics; `kernel.sigma` is ignored.
pub fn parameter_sweep_metrics<T: Real>(
    dataset: &[LabeledSequence<T>],
    kernel: &KernelConfig,
    sigmas: &[f64],
    orders: &[usize],
    metrics: &[DistanceMetric],
) -> Result<Vec<SweepResult>, RetrievalError> {
    if dataset.is_empty() || sigmas.is_empty() || orders.is_empty() || metrics.is_empty() {
        return Err(RetrievalError::EmptySweep);
    }
    let labels: Vec<String> = dataset.iter().map(|s| s.label.clone()).collect();
    let subjects: Vec<String> = dataset.iter().map(|s| s.subject.clone()).collect();
    let packed: Vec<Vec<PackedAtoms>> = dataset
        .par_iter()
        .map(|seq| {
            seq.frames
                .iter()
                .map(|f| PackedAtoms::new(&preprocess(f, kernel)))
                .collect()
        })
        .collect();

    let mut cells: Vec<Vec<SweepCell>> = vec![Vec::new(); metrics.len()];
    let mut absent: Vec<Vec<AbsentCell>> = vec![Vec::new(); metrics.len()];
    let mut mark_absent = |sigma: f64, r: usize, which: Option<usize>, reason: String| {
        for (m, list) in absent.iter_mut().enumerate() {
            if which.is_none_or(|w| w == m) {
                list.push(AbsentCell {
                    sigma,
                    r,
                    reason: reason.clone(),
                });
            }
        }
    };

    for &sigma in sigmas {
        let cfg = kernel.with_sigma(sigma);
        let grams: Result<Vec<SequenceGram>, String> = cfg
            .validate()
            .map_err(|e| e.to_string())
            .and_then(|_| {
                packed
                    .par_iter()
                    .zip(dataset.par_iter())
                    .map(|(p, seq)| gram_from_packed(p, &cfg).map_err(|e| format!("sequence {}: {e}", seq.id)))
                    .collect()
            });
        let grams = match grams {
            Ok(g) => g,
            Err(reason) => {
                for &r in orders {
                    mark_absent(sigma, r, None, reason.clone());
                }
                continue;
            }
        };
        for &r in orders {
            let sigs: Result<Vec<_>, String> = grams
                .iter()
                .zip(dataset)
                .map(|(j, seq)| gram_hankel(j, r).map_err(|e| format!("sequence {}: {e}", seq.id)))
                .collect();
            let sigs = match sigs {
                Ok(s) => s,
                Err(reason) => {
                    mark_absent(sigma, r, None, reason);
                    continue;
                }
            };
            for (m, &metric) in metrics.iter().enumerate() {
                let scored = pairwise_distances(&sigs, metric, labels.clone(), subjects.clone())
                    .and_then(|d| retrieval_scores(&d));
                match scored {
                    Ok(scores) => cells[m].push(SweepCell { sigma, r, scores }),
                    Err(e) => mark_absent(sigma, r, Some(m), e.to_string()),
                }
            }
        }
    }

    metrics
        .iter()
        .zip(cells.into_iter().zip(absent))
        .map(|(&metric, (cells, absent))| {
            let best = *cells
                .iter()
                .reduce(|best, c| if better(c, best) { c } else { best })
                .ok_or(RetrievalError::EmptySweep)?;
            Ok(SweepResult {
                family: kernel.family,
                metric,
                unit_norm: kernel.unit_norm,
                centroid_center: kernel.centroid_center,
                cells,
                absent,
                best,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_grid_endpoints() {
        let g = default_sigma_grid();
        assert_eq!(g.len(), 10);
        assert!((g[0] - 1e-3).abs() < 1e-18);
        assert!((g[9] - 10.0).abs() < 1e-12);
        for w in g.windows(2) {
            assert!((w[1] / w[0] - 10f64.powf(4.0 / 9.0)).abs() < 1e-12);
        }
        assert_eq!(default_order_grid(5), vec![1, 2, 3, 4]);
    }

    #[test]
    fn tie_break_prefers_small_r_then_sigma() {
        let s = RetrievalScores { nn: 100.0, ft: 90.0, st: 95.0 };
        let a = SweepCell { sigma: 0.1, r: 3, scores: s };
        let b = SweepCell { sigma: 0.01, r: 3, scores: s };
        let c = SweepCell { sigma: 1.0, r: 2, scores: s };
        assert!(better(&b, &a));
        assert!(better(&c, &b));
        let d = SweepCell { sigma: 1.0, r: 9, scores: RetrievalScores { st: 96.0, ..s } };
        assert!(better(&d, &c));
    }
}
