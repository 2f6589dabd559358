use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::DatasetError;

/// One sequence: explicit, ordered frame files plus class and subject tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub sequence_id: String,
    pub subject: String,
    pub label: String,
    pub frame_paths: Vec<PathBuf>,
}

/// Manifest file contents.
///
/// ```json
/// {
///   "root": "frames",
///   "entries": [
///     {"sequence_id": "s0_bend", "subject": "s0", "label": "bend",
///      "frame_paths": ["s0_bend/000.obj", "s0_bend/001.obj"]}
///   ]
/// }
/// ```
///
/// `root` is optional and resolved against the manifest's directory; frame
/// paths are resolved against `root`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    #[serde(default)]
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn frame_path(&self, entry: &ManifestEntry, index: usize) -> PathBuf {
        self.root.join(&entry.frame_paths[index])
    }

    pub fn frame_paths<'a>(&'a self, entry: &'a ManifestEntry) -> impl Iterator<Item = PathBuf> + 'a {
        entry.frame_paths.iter().map(|p| self.root.join(p))
    }

    /// Checks id uniqueness, frame counts and label multiplicity.
    pub fn validate(&self) -> Result<(), DatasetError> {
        let mut ids = HashSet::new();
        let mut labels: BTreeMap<&str, usize> = BTreeMap::new();
        for e in &self.entries {
            if !ids.insert(e.sequence_id.as_str()) {
                return Err(DatasetError::DuplicateSequence(e.sequence_id.clone()));
            }
            if e.frame_paths.len() < 2 {
                return Err(DatasetError::TooFewFrames {
                    sequence: e.sequence_id.clone(),
                    frames: e.frame_paths.len(),
                });
            }
            *labels.entry(e.label.as_str()).or_default() += 1;
        }
        if let Some((l, _)) = labels.iter().find(|(_, &n)| n < 2) {
            return Err(DatasetError::SingletonLabel(l.to_string()));
        }
        Ok(())
    }

    /// Shortest sequence length (`T_min`).
    pub fn min_frames(&self) -> usize {
        self.entries.iter().map(|e| e.frame_paths.len()).min().unwrap_or(0)
    }
}

/// Parses and validates a manifest, resolving `root` and checking that
/// every frame file exists.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest, DatasetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::Parse(format!("{}: {e}", path.display())))?;
    let mut manifest: DatasetManifest =
        serde_json::from_str(&text).map_err(|e| DatasetError::Parse(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    manifest.root = base.join(&manifest.root);
    manifest.validate()?;
    for e in &manifest.entries {
        if let Some(missing) = manifest.frame_paths(e).find(|p| !p.is_file()) {
            return Err(DatasetError::MissingFrame(missing));
        }
    }
    Ok(manifest)
}
