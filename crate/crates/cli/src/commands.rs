use std::path::{Path, PathBuf};

use serde::Serialize;
use varifold_motion::dataset::{
    load_dataset, load_manifest, write_synthetic_dataset, AtomCache, AtomizeOptions, CaptureNuisance,
    LabeledSequence, SyntheticDatasetSpec,
};
use varifold_motion::kernel::KernelConfig;
use varifold_motion::retrieval::{
    classical_mds, confusion_csv, confusion_matrix_nn, default_order_grid, default_sigma_grid, distance_csv,
    embedding_csv, pairwise_distances, parameter_sweep_metrics, query_scores, retrieval_scores, sweep_csv,
    sweep_json, DistanceMetric, RetrievalScores,
};
use varifold_motion::signature::{write_gram, write_signature};
use varifold_motion::{gram_hankel, sequence_gram, GramHankel, KernelFamily, SequenceGram};

use crate::{AblateArgs, CliError, DataArgs, FixedArgs, GridArgs, MdsArgs, RetrieveArgs, SignatureArgs, SweepArgs, SynthArgs};

type Dataset = Vec<LabeledSequence<f64>>;

fn load(data: &DataArgs, centroid_center: bool) -> Result<Dataset, CliError> {
    if let Some(t) = data.drop_tolerance {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(CliError::config(format!("--drop-tolerance must be finite and >= 0, got {t}")));
        }
    }
    let manifest = load_manifest(&data.manifest)?;
    let cache = data
        .cache_dir
        .as_ref()
        .map(AtomCache::new)
        .transpose()
        .map_err(|e| CliError::data(format!("cache directory: {e}")))?;
    let opts = AtomizeOptions {
        drop_tolerance: data.drop_tolerance(),
        centroid_center,
    };
    let seqs = load_dataset(&manifest, &opts, cache.as_ref())?;
    if let Some(c) = &cache {
        let s = c.stats();
        eprintln!("atom cache: {} hits, {} misses, {} mesh files read", s.hits, s.misses, s.files_read);
    }
    Ok(seqs)
}

fn out_dir(path: &Path) -> Result<&Path, CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let p = dir.join(name);
    std::fs::write(&p, contents).map_err(|e| CliError::data(format!("{}: {e}", p.display())))?;
    Ok(p)
}

/// Sequence ids become file stems; anything outside `[A-Za-z0-9._-]` is replaced.
fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
        .collect()
}

fn validated(cfg: KernelConfig) -> Result<KernelConfig, CliError> {
    cfg.validate()?;
    Ok(cfg)
}

fn grams(seqs: &Dataset, cfg: &KernelConfig) -> Result<Vec<SequenceGram>, CliError> {
    seqs.iter()
        .map(|s| sequence_gram(&s.frames, cfg).map_err(|e| CliError::from(e).context(format!("sequence {:?}", s.id))))
        .collect()
}

fn signatures(seqs: &Dataset, grams: &[SequenceGram], r: usize) -> Result<Vec<GramHankel>, CliError> {
    seqs.iter()
        .zip(grams)
        .map(|(s, j)| gram_hankel(j, r).map_err(|e| CliError::from(e).context(format!("sequence {:?}", s.id))))
        .collect()
}

fn labels(seqs: &Dataset) -> (Vec<String>, Vec<String>) {
    (
        seqs.iter().map(|s| s.label.clone()).collect(),
        seqs.iter().map(|s| s.subject.clone()).collect(),
    )
}

pub fn gram(a: &FixedArgs) -> Result<(), CliError> {
    let cfg = validated(a.kernel.config(a.sigma))?;
    let seqs = load(&a.data, cfg.centroid_center)?;
    let dir = out_dir(&a.data.out)?;
    for (s, j) in seqs.iter().zip(grams(&seqs, &cfg)?) {
        write_gram(dir.join(format!("{}.gram", file_stem(&s.id))), &j, &cfg, Some(&s.id))?;
    }
    println!("wrote {} Gram matrices to {}", seqs.len(), dir.display());
    Ok(())
}

pub fn signature(a: &SignatureArgs) -> Result<(), CliError> {
    let f = &a.fixed;
    let cfg = validated(f.kernel.config(f.sigma))?;
    let seqs = load(&f.data, cfg.centroid_center)?;
    let dir = out_dir(&f.data.out)?;
    let grams = grams(&seqs, &cfg)?;
    for (s, g) in seqs.iter().zip(signatures(&seqs, &grams, a.r)?) {
        write_signature(
            dir.join(format!("{}.ghnk", file_stem(&s.id))),
            &g,
            &cfg,
            Some(&s.id),
            Some(s.frames.len()),
        )?;
    }
    println!("wrote {} order-{} signatures to {}", seqs.len(), a.r, dir.display());
    Ok(())
}

#[derive(Serialize)]
struct ScoreReport {
    family: KernelFamily,
    sigma: f64,
    r: usize,
    metric: DistanceMetric,
    unit_norm: bool,
    centroid_center: bool,
    sequences: usize,
    averaging: &'static str,
    #[serde(flatten)]
    scores: RetrievalScores,
}

pub fn retrieve(a: &RetrieveArgs) -> Result<(), CliError> {
    let f = &a.fixed;
    let cfg = validated(f.kernel.config(f.sigma))?;
    let seqs = load(&f.data, cfg.centroid_center)?;
    let dir = out_dir(&f.data.out)?;
    let sigs = signatures(&seqs, &grams(&seqs, &cfg)?, a.r)?;
    let (labels, subjects) = labels(&seqs);
    let d = pairwise_distances(&sigs, a.metric, labels, subjects)?;
    let scores = retrieval_scores(&d)?;
    let ids: Vec<String> = seqs.iter().map(|s| s.id.clone()).collect();

    let report = ScoreReport {
        family: cfg.family,
        sigma: cfg.sigma,
        r: a.r,
        metric: a.metric,
        unit_norm: cfg.unit_norm,
        centroid_center: cfg.centroid_center,
        sequences: seqs.len(),
        averaging: "per_query_mean",
        scores,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write(dir, "scores.json", &json)?;
    write(dir, "distances.csv", &distance_csv(&d, &ids))?;
    write(dir, "confusion.csv", &confusion_csv(&confusion_matrix_nn(&d)?))?;
    let mut q = String::from("sequence_id,label,nearest_id,nearest_label,nn,ft,st\n");
    for (i, s) in query_scores(&d)?.iter().enumerate() {
        q.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            ids[i], d.labels()[i], ids[s.nearest], d.labels()[s.nearest], s.nn as u8, s.ft, s.st
        ));
    }
    write(dir, "queries.csv", &q)?;
    println!(
        "{} {} sigma={} r={}: NN={} FT={} ST={}",
        cfg.family, a.metric, cfg.sigma, a.r, scores.nn, scores.ft, scores.st
    );
    Ok(())
}

fn grid(g: &GridArgs, seqs: &Dataset) -> Result<(Vec<f64>, Vec<usize>), CliError> {
    let sigmas = if g.sigmas.is_empty() { default_sigma_grid() } else { g.sigmas.clone() };
    let t_min = seqs.iter().map(|s| s.frames.len()).min().unwrap_or(0);
    let orders = if g.orders.is_empty() { default_order_grid(t_min) } else { g.orders.clone() };
    if orders.is_empty() {
        return Err(CliError::data("sequences are too short for any signature order"));
    }
    Ok((sigmas, orders))
}

pub fn sweep(a: &SweepArgs) -> Result<(), CliError> {
    let base = a.kernel.config(1.0);
    let seqs = load(&a.data, base.centroid_center)?;
    let dir = out_dir(&a.data.out)?;
    let (sigmas, orders) = grid(&a.grid, &seqs)?;
    let results = parameter_sweep_metrics(&seqs, &base, &sigmas, &orders, &a.grid.metric)?;
    write(dir, "sweep.csv", &sweep_csv(&results))?;
    write(dir, "sweep.json", &sweep_json(&results))?;
    for r in &results {
        for cell in &r.absent {
            eprintln!("absent cell sigma={} r={}: {}", cell.sigma, cell.r, cell.reason);
        }
        println!(
            "{} {}: best sigma={} r={} NN={} FT={} ST={}",
            r.family, r.metric, r.best.sigma, r.best.r, r.best.scores.nn, r.best.scores.ft, r.best.scores.st
        );
    }
    Ok(())
}

/// Row order of the ablation table: (centroid, unit norm).
const ABLATION_ROWS: [(bool, bool); 4] = [(false, false), (false, true), (true, false), (true, true)];

pub fn ablate(a: &AblateArgs) -> Result<(), CliError> {
    // centering is applied per row by the sweep itself
    let seqs = load(&a.data, false)?;
    let dir = out_dir(&a.data.out)?;
    let (sigmas, orders) = grid(&a.grid, &seqs)?;
    let yes_no = |b: bool| if b { "yes" } else { "no" };
    let mut csv = String::from("centroid,inner,metric,nn,ft,st,sigma,r\n");
    let mut rows = Vec::new();
    for (centroid, inner) in ABLATION_ROWS {
        let base = KernelConfig {
            sigma_o: a.sigma_o,
            tile_size: a.tile_size,
            ..KernelConfig::new(a.family, 1.0).with_normalizations(inner, centroid)
        };
        let results = parameter_sweep_metrics(&seqs, &base, &sigmas, &orders, &a.grid.metric)?;
        rows.push((centroid, inner, results));
    }
    for &m in &a.grid.metric {
        for (centroid, inner, results) in &rows {
            let r = results.iter().find(|r| r.metric == m).expect("one result per metric");
            let b = r.best;
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                yes_no(*centroid),
                yes_no(*inner),
                m,
                b.scores.nn,
                b.scores.ft,
                b.scores.st,
                b.sigma,
                b.r
            ));
        }
    }
    write(dir, "ablation.csv", &csv)?;
    print!("{csv}");
    Ok(())
}

// `2 − 2J` below this is round-off of an exact zero.
const FRAME_DIST_FLOOR: f64 = 1e-12;

pub fn mds(a: &MdsArgs) -> Result<(), CliError> {
    let f = &a.fixed;
    if a.dims == 0 {
        return Err(CliError::config("--dims must be >= 1"));
    }
    let cfg = validated(f.kernel.config(f.sigma))?;
    let seqs = load(&f.data, cfg.centroid_center)?;
    let dir = out_dir(&f.data.out)?;

    if let Some(r) = a.r {
        let sigs = signatures(&seqs, &grams(&seqs, &cfg)?, r)?;
        let (labels, subjects) = labels(&seqs);
        let d = pairwise_distances(&sigs, a.metric, labels, subjects)?;
        let x = classical_mds(d.distances(), a.dims)?;
        let meta: Vec<Vec<String>> = seqs.iter().map(|s| vec![s.id.clone(), s.subject.clone(), s.label.clone()]).collect();
        write(dir, "embedding.csv", &embedding_csv(&["sequence_id", "subject", "label"], &meta, &x))?;
        println!("embedded {} signatures in {} dimensions", seqs.len(), a.dims);
        return Ok(());
    }

    let mut frames = Vec::new();
    let mut meta = Vec::new();
    for id in &a.sequences {
        let s = seqs
            .iter()
            .find(|s| &s.id == id)
            .ok_or_else(|| CliError::config(format!("no sequence {id:?} in the manifest")))?;
        for (t, fr) in s.frames.iter().enumerate() {
            frames.push(fr.clone());
            meta.push(vec![s.id.clone(), s.label.clone(), t.to_string()]);
        }
    }
    // frame distances always use normalized products
    let cosine = KernelConfig { unit_norm: true, ..cfg };
    let j = sequence_gram(&frames, &cosine)?;
    let jm = j.matrix();
    let n = jm.nrows();
    let d = nalgebra::DMatrix::from_fn(n, n, |i, k| {
        let sq = 2.0 - 2.0 * jm[(i, k)];
        if i == k || sq <= FRAME_DIST_FLOOR {
            0.0
        } else {
            sq.sqrt()
        }
    });
    let x = classical_mds(&d, a.dims)?;
    write(dir, "embedding.csv", &embedding_csv(&["sequence_id", "label", "frame"], &meta, &x))?;
    println!("embedded {n} frames in {} dimensions", a.dims);
    Ok(())
}

pub fn synth(a: &SynthArgs) -> Result<(), CliError> {
    let spec = SyntheticDatasetSpec {
        classes: a.classes.clone(),
        subjects: a.subjects,
        frames: a.frames,
        vertex_count: a.vertex_count,
        noise_level: a.noise,
        capture: if a.no_capture_nuisance { CaptureNuisance::NONE } else { CaptureNuisance::default() },
        seed: a.seed,
    };
    let dir = out_dir(&a.out)?;
    let manifest = write_synthetic_dataset(&spec, dir)?;
    println!("wrote {} sequences; manifest {}", spec.classes.len() * spec.subjects, manifest.display());
    Ok(())
}
