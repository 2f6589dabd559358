//! Dataset-level distances and retrieval scoring.
//!
//! Scores follow the Princeton Shape Benchmark conventions. For a query of
//! class size `C` (query included), the other `N − 1` items are ranked by
//! ascending distance with ties broken by ascending index:
//!
//! * NN: the rank-1 item shares the query's class;
//! * FT: same-class items among the top `C − 1`, divided by `C − 1`;
//! * ST: same-class items among the top `2(C − 1)`, divided by `C − 1`.
//!
//! Each is averaged over queries (not pooled) and reported as a percentage.

mod export;
mod mds;
mod sweep;

pub use export::{
    confusion_csv, distance_csv, embedding_csv, sweep_csv, sweep_json, SweepReport, SWEEP_CSV_HEADER,
};
pub use mds::classical_mds;
pub use sweep::{
    default_order_grid, default_sigma_grid, parameter_sweep, parameter_sweep_metrics, SweepCell,
    SweepResult,
};

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signature::{matrix_log_psd, GramHankel, SignatureError, DEFAULT_EIG_FLOOR};

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("class {0:?} has a single member; retrieval needs at least two")]
    SingletonClass(String),
    #[error("distance matrix is {rows}x{cols} but {labels} labels and {subjects} subjects were given")]
    Shape {
        rows: usize,
        cols: usize,
        labels: usize,
        subjects: usize,
    },
    #[error("invalid distance matrix: {0}")]
    InvalidDistances(String),
    #[error("signatures have different orders: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("no sweep cell could be evaluated")]
    EmptySweep,
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
    #[error(transparent)]
    Signature(#[from] SignatureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DistanceMetric {
    Frobenius,
    #[serde(rename = "LERM")]
    Lerm,
}

impl DistanceMetric {
    pub fn name(self) -> &'static str {
        match self {
            DistanceMetric::Frobenius => "Frobenius",
            DistanceMetric::Lerm => "LERM",
        }
    }
}

impl fmt::Display for DistanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceMetric {
    type Err = RetrievalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "frobenius" | "fro" => Ok(DistanceMetric::Frobenius),
            "lerm" | "log-euclidean" => Ok(DistanceMetric::Lerm),
            _ => Err(RetrievalError::UnknownMetric(s.into())),
        }
    }
}

/// Symmetric, nonnegative, zero-diagonal distances with per-item class and subject.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDistanceMatrix {
    d: DMatrix<f64>,
    labels: Vec<String>,
    subjects: Vec<String>,
}

impl LabeledDistanceMatrix {
    pub fn new(d: DMatrix<f64>, labels: Vec<String>, subjects: Vec<String>) -> Result<Self, RetrievalError> {
        let n = d.nrows();
        if d.ncols() != n || labels.len() != n || subjects.len() != n {
            return Err(RetrievalError::Shape {
                rows: d.nrows(),
                cols: d.ncols(),
                labels: labels.len(),
                subjects: subjects.len(),
            });
        }
        for i in 0..n {
            if d[(i, i)] != 0.0 {
                return Err(RetrievalError::InvalidDistances(format!("D[{i},{i}] = {}", d[(i, i)])));
            }
            for j in 0..n {
                let v = d[(i, j)];
                if !(v.is_finite() && v >= 0.0) {
                    return Err(RetrievalError::InvalidDistances(format!("D[{i},{j}] = {v}")));
                }
                if v != d[(j, i)] {
                    return Err(RetrievalError::InvalidDistances(format!("D[{i},{j}] != D[{j},{i}]")));
                }
            }
        }
        Ok(Self { d, labels, subjects })
    }

    /// Labels only; subjects default to the item index.
    pub fn with_labels<S: Into<String>>(d: DMatrix<f64>, labels: impl IntoIterator<Item = S>) -> Result<Self, RetrievalError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let subjects = (0..labels.len()).map(|i| i.to_string()).collect();
        Self::new(d, labels, subjects)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn distances(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn subjects(&self) -> &[String] {
        &self.subjects
    }

    /// Applies `f` entrywise off the diagonal (for monotone-transform checks).
    pub fn map_distances(&self, f: impl Fn(f64) -> f64) -> Result<Self, RetrievalError> {
        let n = self.len();
        let d = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { f(self.d[(i, j)]) });
        Self::new(d, self.labels.clone(), self.subjects.clone())
    }

    /// Other items ordered by ascending distance from `q`, ties by index.
    pub fn ranking(&self, q: usize) -> Vec<usize> {
        let mut others: Vec<usize> = (0..self.len()).filter(|&i| i != q).collect();
        others.sort_by(|&a, &b| {
            self.d[(q, a)]
                .partial_cmp(&self.d[(q, b)])
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        others
    }

    fn class_sizes(&self) -> Result<BTreeMap<&str, usize>, RetrievalError> {
        let mut sizes = BTreeMap::new();
        for l in &self.labels {
            *sizes.entry(l.as_str()).or_insert(0) += 1;
        }
        if let Some((l, _)) = sizes.iter().find(|(_, &c)| c < 2) {
            return Err(RetrievalError::SingletonClass(l.to_string()));
        }
        Ok(sizes)
    }
}

/// Dataset distance matrix between signatures under `metric`.
pub fn pairwise_distances(
    signatures: &[GramHankel],
    metric: DistanceMetric,
    labels: Vec<String>,
    subjects: Vec<String>,
) -> Result<LabeledDistanceMatrix, RetrievalError> {
    if let Some(first) = signatures.first() {
        if let Some(bad) = signatures.iter().find(|g| g.order() != first.order()) {
            return Err(RetrievalError::DimensionMismatch(first.order(), bad.order()));
        }
    }
    let n = signatures.len();
    let mats: Vec<DMatrix<f64>> = match metric {
        DistanceMetric::Frobenius => signatures.iter().map(|g| g.matrix().clone()).collect(),
        DistanceMetric::Lerm => signatures
            .par_iter()
            .map(|g| matrix_log_psd(g.matrix(), DEFAULT_EIG_FLOOR))
            .collect::<Result<_, _>>()?,
    };
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            mats[i]
                .iter()
                .zip(mats[j].iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let mut d = DMatrix::zeros(n, n);
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        d[(i, j)] = v;
        d[(j, i)] = v;
    }
    LabeledDistanceMatrix::new(d, labels, subjects)
}

/// Per-query outcome; `ft` and `st` are fractions in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryScore {
    pub nearest: usize,
    pub nn: bool,
    pub ft: f64,
    pub st: f64,
}

pub fn query_scores(d: &LabeledDistanceMatrix) -> Result<Vec<QueryScore>, RetrievalError> {
    let sizes = d.class_sizes()?;
    Ok((0..d.len())
        .map(|q| {
            let label = &d.labels[q];
            let c = sizes[label.as_str()];
            let ranking = d.ranking(q);
            let hits = |window: usize| {
                ranking
                    .iter()
                    .take(window)
                    .filter(|&&i| &d.labels[i] == label)
                    .count() as f64
            };
            QueryScore {
                nearest: ranking[0],
                nn: &d.labels[ranking[0]] == label,
                ft: hits(c - 1) / (c - 1) as f64,
                st: hits(2 * (c - 1)) / (c - 1) as f64,
            }
        })
        .collect())
}

/// NN / FT / ST percentages, averaged over queries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrievalScores {
    pub nn: f64,
    pub ft: f64,
    pub st: f64,
}

pub fn retrieval_scores(d: &LabeledDistanceMatrix) -> Result<RetrievalScores, RetrievalError> {
    let per = query_scores(d)?;
    let n = per.len() as f64;
    let nn = per.iter().filter(|q| q.nn).count() as f64;
    let ft: f64 = per.iter().map(|q| q.ft).sum();
    let st: f64 = per.iter().map(|q| q.st).sum();
    Ok(RetrievalScores {
        nn: 100.0 * nn / n,
        ft: 100.0 * ft / n,
        st: 100.0 * st / n,
    })
}

/// Nearest-neighbour confusion counts; rows are query classes, columns the
/// class of the retrieved item. Classes are sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

pub fn confusion_matrix_nn(d: &LabeledDistanceMatrix) -> Result<ConfusionMatrix, RetrievalError> {
    let per = query_scores(d)?;
    let classes: Vec<String> = d.class_sizes()?.keys().map(|s| s.to_string()).collect();
    let index = |l: &str| classes.iter().position(|c| c == l).unwrap();
    let mut counts = vec![vec![0; classes.len()]; classes.len()];
    for (q, s) in per.iter().enumerate() {
        counts[index(&d.labels[q])][index(&d.labels[s.nearest])] += 1;
    }
    Ok(ConfusionMatrix { classes, counts })
}
