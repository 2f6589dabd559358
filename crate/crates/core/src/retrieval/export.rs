//! CSV / JSON renderings of retrieval outputs.

use std::borrow::Cow;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{ConfusionMatrix, LabeledDistanceMatrix, SweepResult};

pub const SWEEP_CSV_HEADER: &str = "family,sigma,r,metric,nn,ft,st";

fn field(s: &str) -> Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) {
        Cow::Owned(format!("\"{}\"", s.replace('"', "\"\"")))
    } else {
        Cow::Borrowed(s)
    }
}

/// One row per evaluated cell, grid order, results in the order given.
pub fn sweep_csv(results: &[SweepResult]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for res in results {
        for c in &res.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                res.family, c.sigma, c.r, res.metric, c.scores.nn, c.scores.ft, c.scores.st
            );
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    /// How FT/ST are aggregated: always `"per_query_mean"`.
    pub averaging: String,
    pub tie_break: String,
    pub results: Vec<SweepResult>,
}

impl SweepReport {
    pub fn new(results: Vec<SweepResult>) -> Self {
        Self {
            averaging: "per_query_mean".into(),
            tie_break: "ascending distance, then ascending sequence index".into(),
            results,
        }
    }
}

pub fn sweep_json(results: &[SweepResult]) -> String {
    serde_json::to_string_pretty(&SweepReport::new(results.to_vec())).expect("sweep results serialize") + "\n"
}

/// Square matrix with a leading `id` column and header row.
pub fn distance_csv(d: &LabeledDistanceMatrix, ids: &[String]) -> String {
    let mut out = String::from("id");
    for id in ids {
        let _ = write!(out, ",{}", field(id));
    }
    out.push('\n');
    let m = d.distances();
    for (i, id) in ids.iter().enumerate() {
        out.push_str(&field(id));
        for j in 0..m.ncols() {
            let _ = write!(out, ",{}", m[(i, j)]);
        }
        out.push('\n');
    }
    out
}

/// Rows: query class; columns: class of the nearest neighbour.
pub fn confusion_csv(c: &ConfusionMatrix) -> String {
    let mut out = String::from("class");
    for name in &c.classes {
        let _ = write!(out, ",{}", field(name));
    }
    out.push('\n');
    for (name, row) in c.classes.iter().zip(&c.counts) {
        out.push_str(&field(name));
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Coordinates with leading metadata columns. Axes are named `x,y` for 2D
/// and `c1..ck` otherwise.
pub fn embedding_csv(columns: &[&str], meta: &[Vec<String>], coords: &DMatrix<f64>) -> String {
    let k = coords.ncols();
    let axes: Vec<String> = if k == 2 {
        vec!["x".into(), "y".into()]
    } else {
        (1..=k).map(|i| format!("c{i}")).collect()
    };
    let mut out = columns.iter().map(|c| c.to_string()).chain(axes).collect::<Vec<_>>().join(",");
    out.push('\n');
    for (i, row) in meta.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .map(|s| field(s).into_owned())
            .chain((0..k).map(|a| coords[(i, a)].to_string()))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
