//! Frame atomization with a content-addressed on-disk cache.
//!
//! Two layers live under the cache root:
//!
//! * `index/<key>` maps a file's (canonical path, size, mtime) to the
//!   SHA-256 of its bytes, so warm runs never re-read mesh files;
//! * `atoms/<key>.vatm` holds the atoms for a (content hash, drop tolerance,
//!   centering) triple.
//!
//! Atom files start with the 16-byte header `VATM`, version `u32`, atom count
//! `u64`, followed per atom by `cx cy cz nx ny nz area` as little-endian f64.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::UNIX_EPOCH;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::{DatasetError, DatasetManifest, LabeledSequence, ManifestEntry};
use crate::mesh::{atomize, center_at_centroid, parse_obj, parse_ply, MeshError, TriangleMesh, VarifoldAtoms};

pub const CACHE_ENV: &str = "VARIFOLD_CACHE_DIR";

const ATOM_MAGIC: &[u8; 4] = b"VATM";
const ATOM_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DropTolerance {
    /// `1e-12 · bbox_diagonal²` per mesh.
    #[default]
    Auto,
    Absolute(f64),
}

impl DropTolerance {
    fn key(self) -> String {
        match self {
            DropTolerance::Auto => "auto".into(),
            DropTolerance::Absolute(x) => format!("abs:{:016x}", x.to_bits()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AtomizeOptions {
    pub drop_tolerance: DropTolerance,
    pub centroid_center: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
    /// Mesh files whose bytes were read from disk.
    pub files_read: usize,
}

#[derive(Debug)]
pub struct AtomCache {
    root: PathBuf,
    hits: AtomicUsize,
    misses: AtomicUsize,
    files_read: AtomicUsize,
}

fn hex_digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

fn write_atomically(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

impl AtomCache {
    pub fn new(root: impl Into<PathBuf>) -> std::io::Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(root.join("index"))?;
        std::fs::create_dir_all(root.join("atoms"))?;
        Ok(Self {
            root,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
            files_read: AtomicUsize::new(0),
        })
    }

    /// Uses `$VARIFOLD_CACHE_DIR` when set and non-empty.
    pub fn from_env() -> std::io::Result<Option<Self>> {
        match std::env::var_os(CACHE_ENV) {
            Some(v) if !v.is_empty() => Self::new(PathBuf::from(v)).map(Some),
            _ => Ok(None),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            files_read: self.files_read.load(Ordering::Relaxed),
        }
    }

    fn stat_key(path: &Path) -> std::io::Result<String> {
        let canon = std::fs::canonicalize(path)?;
        let meta = std::fs::metadata(&canon)?;
        let mtime = meta
            .modified()?
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0);
        Ok(hex_digest(&[
            canon.to_string_lossy().as_bytes(),
            &meta.len().to_le_bytes(),
            &mtime.to_le_bytes(),
        ]))
    }

    fn atoms_path(&self, content: &str, opts: &AtomizeOptions) -> PathBuf {
        let key = hex_digest(&[
            content.as_bytes(),
            opts.drop_tolerance.key().as_bytes(),
            &[opts.centroid_center as u8],
        ]);
        self.root.join("atoms").join(format!("{key}.vatm"))
    }

    fn lookup(&self, content: &str, opts: &AtomizeOptions) -> Option<VarifoldAtoms<f64>> {
        let bytes = std::fs::read(self.atoms_path(content, opts)).ok()?;
        decode_atoms(&bytes).ok()
    }

    fn get(&self, path: &Path, opts: &AtomizeOptions) -> Result<VarifoldAtoms<f64>, MeshError> {
        let stat = Self::stat_key(path)?;
        let index = self.root.join("index").join(&stat);
        if let Ok(content) = std::fs::read_to_string(&index) {
            if let Some(atoms) = self.lookup(content.trim(), opts) {
                self.hits.fetch_add(1, Ordering::Relaxed);
                return Ok(atoms);
            }
        }
        let bytes = std::fs::read(path)?;
        self.files_read.fetch_add(1, Ordering::Relaxed);
        let content = hex_digest(&[&bytes]);
        write_atomically(&index, content.as_bytes())?;
        if let Some(atoms) = self.lookup(&content, opts) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(atoms);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let atoms = atomize_bytes(path, &bytes, opts)?;
        write_atomically(&self.atoms_path(&content, opts), &encode_atoms(&atoms))?;
        Ok(atoms)
    }
}

pub fn encode_atoms(atoms: &VarifoldAtoms<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + atoms.len() * 56);
    out.extend_from_slice(ATOM_MAGIC);
    out.extend_from_slice(&ATOM_VERSION.to_le_bytes());
    out.extend_from_slice(&(atoms.len() as u64).to_le_bytes());
    for ((c, n), a) in atoms.centers().iter().zip(atoms.normals()).zip(atoms.areas()) {
        for x in c.iter().chain(n).chain(std::iter::once(a)) {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn decode_atoms(bytes: &[u8]) -> Result<VarifoldAtoms<f64>, MeshError> {
    let bad = |m: &str| MeshError::Parse { line: 0, msg: format!("atom cache file: {m}") };
    if bytes.len() < 16 || &bytes[..4] != ATOM_MAGIC {
        return Err(bad("bad magic"));
    }
    if u32::from_le_bytes(bytes[4..8].try_into().unwrap()) != ATOM_VERSION {
        return Err(bad("unsupported version"));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let body = &bytes[16..];
    if n.checked_mul(56) != Some(body.len()) {
        return Err(bad("truncated"));
    }
    let mut centers = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let mut areas = Vec::with_capacity(n);
    for rec in body.chunks_exact(56) {
        let v: Vec<f64> = rec
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        centers.push([v[0], v[1], v[2]]);
        normals.push([v[3], v[4], v[5]]);
        areas.push(v[6]);
    }
    VarifoldAtoms::new(centers, normals, areas)
}

fn atomize_bytes(path: &Path, bytes: &[u8], opts: &AtomizeOptions) -> Result<VarifoldAtoms<f64>, MeshError> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let mesh: TriangleMesh<f64> = match ext.as_deref() {
        Some("obj") => parse_obj(
            std::str::from_utf8(bytes).map_err(|e| MeshError::Parse { line: 0, msg: e.to_string() })?,
        )?,
        Some("ply") => parse_ply(bytes)?,
        _ => return Err(MeshError::UnsupportedFormat(path.display().to_string())),
    };
    let tol = match opts.drop_tolerance {
        DropTolerance::Auto => mesh.default_drop_tolerance(),
        DropTolerance::Absolute(t) => t,
    };
    let atoms = atomize(&mesh, tol)?.atoms;
    Ok(if opts.centroid_center { center_at_centroid(&atoms) } else { atoms })
}

/// Loads and atomizes one frame, consulting the cache when given.
pub fn atomize_frame(
    path: &Path,
    opts: &AtomizeOptions,
    cache: Option<&AtomCache>,
) -> Result<VarifoldAtoms<f64>, MeshError> {
    match cache {
        Some(c) => c.get(path, opts),
        None => atomize_bytes(path, &std::fs::read(path)?, opts),
    }
}

/// Atomizes all frames of one manifest entry in parallel. Errors name the
/// sequence and frame index.
pub fn atomize_sequence(
    manifest: &DatasetManifest,
    entry: &ManifestEntry,
    opts: &AtomizeOptions,
    cache: Option<&AtomCache>,
) -> Result<Vec<VarifoldAtoms<f64>>, DatasetError> {
    let paths: Vec<PathBuf> = manifest.frame_paths(entry).collect();
    paths
        .par_iter()
        .enumerate()
        .map(|(index, path)| {
            atomize_frame(path, opts, cache).map_err(|source| DatasetError::Frame {
                sequence: entry.sequence_id.clone(),
                index,
                path: path.clone(),
                source,
            })
        })
        .collect()
}

/// Atomizes every sequence in manifest order.
pub fn load_dataset(
    manifest: &DatasetManifest,
    opts: &AtomizeOptions,
    cache: Option<&AtomCache>,
) -> Result<Vec<LabeledSequence<f64>>, DatasetError> {
    manifest
        .entries
        .iter()
        .map(|e| {
            Ok(LabeledSequence {
                id: e.sequence_id.clone(),
                subject: e.subject.clone(),
                label: e.label.clone(),
                frames: atomize_sequence(manifest, e, opts, cache)?,
            })
        })
        .collect()
}
