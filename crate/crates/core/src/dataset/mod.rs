//! Dataset ingestion: JSON manifests, an on-disk atom cache and a synthetic
//! labeled-motion generator.

mod cache;
mod manifest;
mod synthetic;

pub use cache::{
    atomize_frame, atomize_sequence, decode_atoms, encode_atoms, load_dataset, AtomCache,
    AtomizeOptions, CacheStats, DropTolerance, CACHE_ENV,
};
pub use manifest::{load_manifest, DatasetManifest, ManifestEntry};
pub use synthetic::{
    generate_synthetic, synthetic_dataset, write_synthetic_dataset, CaptureNuisance, MotionClass,
    SyntheticDatasetSpec,
    SyntheticMotionSpec, SyntheticSequence,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::mesh::{MeshError, VarifoldAtoms};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot parse manifest: {0}")]
    Parse(String),
    #[error("missing frame file {}", .0.display())]
    MissingFrame(PathBuf),
    #[error("label {0:?} is used by a single sequence")]
    SingletonLabel(String),
    #[error("duplicate sequence id {0:?}")]
    DuplicateSequence(String),
    #[error("sequence {sequence:?} has {frames} frames; at least 2 are required")]
    TooFewFrames { sequence: String, frames: usize },
    #[error("sequence {sequence:?}, frame {index} ({}): {source}", .path.display())]
    Frame {
        sequence: String,
        index: usize,
        path: PathBuf,
        #[source]
        source: MeshError,
    },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An atomized sequence with its retrieval metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSequence<T> {
    pub id: String,
    pub subject: String,
    pub label: String,
    pub frames: Vec<VarifoldAtoms<T>>,
}
