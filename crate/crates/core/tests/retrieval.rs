mod common;

use common::*;
use nalgebra::{dmatrix, DMatrix};
use proptest::prelude::*;
use rand::Rng;
use varifold_motion::retrieval::{
    classical_mds, confusion_matrix_nn, query_scores, retrieval_scores, LabeledDistanceMatrix, RetrievalScores,
};

fn random_labeled(seed: u64, n: usize, classes: usize) -> LabeledDistanceMatrix {
    let mut r = rng(seed);
    let mut labels: Vec<String> = (0..n).map(|i| format!("c{}", i % classes)).collect();
    shuffle(&mut labels, &mut r);
    // coarse values so ties actually occur
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = r.random_range(1..6) as f64 * 0.5;
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    LabeledDistanceMatrix::with_labels(d, labels).unwrap()
}

fn pairwise(points: &DMatrix<f64>) -> DMatrix<f64> {
    let n = points.nrows();
    DMatrix::from_fn(n, n, |i, j| (points.row(i) - points.row(j)).norm())
}

#[test]
fn hand_enumerated_examples() {
    let well = dmatrix![0.0, 1.0, 5.0, 6.0; 1.0, 0.0, 6.0, 5.0; 5.0, 6.0, 0.0, 1.0; 6.0, 5.0, 1.0, 0.0];
    let d = LabeledDistanceMatrix::with_labels(well, ["A", "A", "B", "B"]).unwrap();
    assert_eq!(retrieval_scores(&d).unwrap(), RetrievalScores { nn: 100.0, ft: 100.0, st: 100.0 });

    // item 0's nearest (item 2) is of the other class; everything else retrieves cleanly
    let one_miss = dmatrix![0.0, 9.0, 1.0, 2.0; 9.0, 0.0, 10.0, 10.0; 1.0, 10.0, 0.0, 0.5; 2.0, 10.0, 0.5, 0.0];
    let d = LabeledDistanceMatrix::with_labels(one_miss, ["A", "A", "B", "B"]).unwrap();
    assert_eq!(retrieval_scores(&d).unwrap(), RetrievalScores { nn: 75.0, ft: 75.0, st: 75.0 });
    let c = confusion_matrix_nn(&d).unwrap();
    assert_eq!(c.counts, vec![vec![1, 1], vec![0, 2]]);

    // queries rank: 0 → [2,3,1], 1 → [3,2,0], 2 → [0,3,1] (tie at 1 broken by index), 3 → [2,0,1]
    let tied = dmatrix![0.0, 9.0, 1.0, 2.0; 9.0, 0.0, 6.0, 5.0; 1.0, 6.0, 0.0, 1.0; 2.0, 5.0, 1.0, 0.0];
    let d = LabeledDistanceMatrix::with_labels(tied, ["A", "A", "B", "B"]).unwrap();
    let q = query_scores(&d).unwrap();
    assert_eq!(q.iter().map(|s| s.nearest).collect::<Vec<_>>(), vec![2, 3, 0, 2]);
    assert_eq!(retrieval_scores(&d).unwrap(), RetrievalScores { nn: 25.0, ft: 25.0, st: 50.0 });
}

#[test]
fn mds_recovers_planar_configurations() {
    let mut r = rng(4);
    for _ in 0..10 {
        let pts = DMatrix::from_fn(20, 2, |_, _| r.random_range(-5.0..5.0));
        let d = pairwise(&pts);
        let x = classical_mds(&d, 2).unwrap();
        assert!((pairwise(&x) - &d).amax() < 1e-8);
        // a third axis carries nothing
        let x3 = classical_mds(&d, 3).unwrap();
        assert!(x3.column(2).amax() < 1e-6);
    }
}

#[test]
fn mds_axes_follow_the_sign_convention() {
    let mut r = rng(12);
    let pts = DMatrix::from_fn(9, 3, |_, _| r.random_range(-1.0..1.0));
    let x = classical_mds(&pairwise(&pts), 3).unwrap();
    for col in x.column_iter() {
        let first = col.iter().find(|v| v.abs() > 1e-12).unwrap();
        assert!(*first > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn strictly_increasing_maps_keep_scores(seed in any::<u64>(), n in 4usize..16, k in 2usize..4) {
        let classes = k.min(n / 2);
        let d = random_labeled(seed, n, classes);
        let base = retrieval_scores(&d).unwrap();
        for f in [|x: f64| x * x * x, |x: f64| x.sqrt(), |x: f64| x.exp() - 1.0, |x: f64| 3.0 * x + 0.25] {
            prop_assert_eq!(retrieval_scores(&d.map_distances(f).unwrap()).unwrap(), base);
        }
    }

    #[test]
    fn score_ranges_and_ordering(seed in any::<u64>(), n in 4usize..16) {
        let d = random_labeled(seed, n, 2);
        let s = retrieval_scores(&d).unwrap();
        for v in [s.nn, s.ft, s.st] {
            prop_assert!((0.0..=100.0).contains(&v));
        }
        for q in query_scores(&d).unwrap() {
            prop_assert!(q.st >= q.ft);
        }
        prop_assert!(s.st >= s.ft);
        let c = confusion_matrix_nn(&d).unwrap();
        let total: usize = c.counts.iter().flatten().sum();
        prop_assert_eq!(total, n);
        let hits: usize = (0..c.classes.len()).map(|i| c.counts[i][i]).sum();
        prop_assert!((hits as f64 * 100.0 / n as f64 - s.nn).abs() < 1e-9);
    }
}
