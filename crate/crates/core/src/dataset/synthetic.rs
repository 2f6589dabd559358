//! Labeled synthetic motions on a subdivided icosphere.
//!
//! A subject fixes the body: anisotropic scale and a few extra face splits (so
//! tessellations differ). A class fixes the deformation program and its phase
//! profile over `θ = 2πt/T`:
//!
//! * `bending`: `x += 0.6·sin(θ/2)·z²`, one bend-and-return;
//! * `pulsation`: radii scale by `1 + 0.2·sin θ`;
//! * `swing`: a protrusion around direction `(cos φ, 0, sin φ)`, `φ = 0.9·sin 2θ`.
//!
//! Deformation acts on the unit sphere, then the body scale, then uniform
//! jitter in `[−noise, noise]` per coordinate.
//!
//! Datasets additionally pass each recording through [`CaptureNuisance`]:
//! a random rigid placement, a linear drift and per-frame isotropic scale
//! jitter about the body origin. These are the nuisances the centering and
//! unit-norm normalizations exist to remove.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DatasetError, DatasetManifest, LabeledSequence, ManifestEntry};
use crate::mesh::{atomize, center_at_centroid, write_obj, RigidMotion, TriangleMesh};
use crate::scalar::{Real, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionClass {
    Bending,
    Pulsation,
    Swing,
}

impl MotionClass {
    pub const ALL: [MotionClass; 3] = [MotionClass::Bending, MotionClass::Pulsation, MotionClass::Swing];

    pub fn name(self) -> &'static str {
        match self {
            MotionClass::Bending => "bending",
            MotionClass::Pulsation => "pulsation",
            MotionClass::Swing => "swing",
        }
    }

    fn code(self) -> u64 {
        self as u64
    }

    fn deform(self, p: Vec3<f64>, t: usize, frames: usize) -> Vec3<f64> {
        let theta = 2.0 * PI * t as f64 / frames as f64;
        let [x, y, z] = p;
        match self {
            MotionClass::Bending => [x + 0.6 * (theta / 2.0).sin() * z * z, y, z],
            MotionClass::Pulsation => p.map(|c| c * (1.0 + 0.2 * theta.sin())),
            MotionClass::Swing => {
                let phi = 0.9 * (2.0 * theta).sin();
                let d = [phi.cos(), 0.0, phi.sin()];
                let dist2 = (x - d[0]).powi(2) + (y - d[1]).powi(2) + (z - d[2]).powi(2);
                let bump = 1.0 + 0.8 * (-dist2 / 0.2).exp();
                p.map(|c| c * bump)
            }
        }
    }
}

impl fmt::Display for MotionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MotionClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MotionClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown motion class {s:?} (expected bending, pulsation or swing)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticMotionSpec {
    pub class: MotionClass,
    pub subject_seed: u64,
    pub frames: usize,
    /// Target vertex count before the subject's extra splits.
    pub vertex_count: usize,
    pub noise_level: f64,
}

impl SyntheticMotionSpec {
    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.frames < 4 {
            return Err(DatasetError::InvalidSpec(format!("frame count {} < 4", self.frames)));
        }
        if self.vertex_count < 12 {
            return Err(DatasetError::InvalidSpec(format!("vertex count {} < 12", self.vertex_count)));
        }
        if !(self.noise_level >= 0.0 && self.noise_level.is_finite()) {
            return Err(DatasetError::InvalidSpec(format!("noise level {}", self.noise_level)));
        }
        Ok(())
    }
}

fn icosahedron() -> (Vec<Vec3<f64>>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let v = vec![
        [-1.0, t, 0.0], [1.0, t, 0.0], [-1.0, -t, 0.0], [1.0, -t, 0.0],
        [0.0, -1.0, t], [0.0, 1.0, t], [0.0, -1.0, -t], [0.0, 1.0, -t],
        [t, 0.0, -1.0], [t, 0.0, 1.0], [-t, 0.0, -1.0], [-t, 0.0, 1.0],
    ];
    let f = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    (v.into_iter().map(unit).collect(), f)
}

fn unit(p: Vec3<f64>) -> Vec3<f64> {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    p.map(|c| c / n)
}

fn subdivide(v: &mut Vec<Vec3<f64>>, faces: &[[usize; 3]]) -> Vec<[usize; 3]> {
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, v: &mut Vec<Vec3<f64>>| {
        *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let (p, q) = (v[a], v[b]);
            v.push(unit([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
            v.len() - 1
        })
    };
    let mut out = Vec::with_capacity(faces.len() * 4);
    for &[a, b, c] in faces {
        let ab = midpoint(a, b, v);
        let bc = midpoint(b, c, v);
        let ca = midpoint(c, a, v);
        out.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
    }
    out
}

/// Unit-sphere body for a subject: the densest icosphere with at most
/// `vertex_count` vertices, topped up to `vertex_count + extra` by splitting
/// randomly chosen faces at their projected barycenters.
fn base_body(vertex_count: usize, extra: usize, rng: &mut ChaCha8Rng) -> (Vec<Vec3<f64>>, Vec<[usize; 3]>) {
    let (mut v, mut f) = icosahedron();
    while 4 * v.len() - 6 <= vertex_count {
        f = subdivide(&mut v, &f);
    }
    while v.len() < vertex_count + extra {
        let k = rng.random_range(0..f.len());
        let [a, b, c] = f[k];
        let (p, q, r) = (v[a], v[b], v[c]);
        v.push(unit([p[0] + q[0] + r[0], p[1] + q[1] + r[1], p[2] + q[2] + r[2]]));
        let m = v.len() - 1;
        f[k] = [a, b, m];
        f.extend([[b, c, m], [c, a, m]]);
    }
    (v, f)
}

struct Subject {
    scale: Vec3<f64>,
    vertices: Vec<Vec3<f64>>,
    faces: Vec<[usize; 3]>,
}

impl Subject {
    fn new(seed: u64, vertex_count: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = rng.random_range(0.8..1.25);
        let scale = [
            s * rng.random_range(0.85..1.1),
            s * rng.random_range(0.85..1.1),
            s * rng.random_range(1.4..1.9),
        ];
        let extra = rng.random_range(0..=12);
        let (vertices, faces) = base_body(vertex_count, extra, &mut rng);
        Self {
            scale,
            vertices,
            faces,
        }
    }
}

fn stream(spec: &SyntheticMotionSpec, t: u64, tag: &[u8; 8]) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&spec.subject_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&spec.class.code().to_le_bytes());
    seed[16..24].copy_from_slice(&t.to_le_bytes());
    seed[24..].copy_from_slice(tag);
    ChaCha8Rng::from_seed(seed)
}

/// `T` meshes sharing one face list; a pure function of `spec`.
pub fn generate_synthetic<T: Real>(spec: &SyntheticMotionSpec) -> Result<Vec<TriangleMesh<T>>, DatasetError> {
    spec.validate()?;
    let subject = Subject::new(spec.subject_seed, spec.vertex_count);
    (0..spec.frames)
        .map(|t| {
            let mut rng = stream(spec, t as u64, b"jitter\0\0");
            let verts: Vec<Vec3<T>> = subject
                .vertices
                .iter()
                .map(|&p| {
                    let d = spec.class.deform(p, t, spec.frames);
                    let mut q = [d[0] * subject.scale[0], d[1] * subject.scale[1], d[2] * subject.scale[2]];
                    if spec.noise_level > 0.0 {
                        for c in &mut q {
                            *c += rng.random_range(-spec.noise_level..=spec.noise_level);
                        }
                    }
                    q.map(T::from_f64_lossy)
                })
                .collect();
            Ok(TriangleMesh::new(verts, subject.faces.clone())?)
        })
        .collect()
}

/// Recording conditions applied on top of a motion program.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaptureNuisance {
    /// Uniformly random rotation and a start offset in `[−5, 5]³`.
    pub random_placement: bool,
    /// Upper bound of the per-frame drift speed; the speed is drawn from
    /// `[0.5, 1]·max_drift` with a random horizontal heading.
    pub max_drift: f64,
    /// Each frame is shifted by an independent offset in `[−w, w]³`, as if
    /// every frame were captured in its own unregistered origin.
    pub frame_offset: f64,
    /// Frame `t` is scaled about the body origin by `1 + u_t`, `u_t ∈ [−j, j]`.
    pub scale_jitter: f64,
}

impl CaptureNuisance {
    pub const NONE: CaptureNuisance = CaptureNuisance {
        random_placement: false,
        max_drift: 0.0,
        frame_offset: 0.0,
        scale_jitter: 0.0,
    };

    fn validate(&self) -> Result<(), DatasetError> {
        let ok = |x: f64| x >= 0.0 && x.is_finite();
        if !ok(self.max_drift) || !ok(self.frame_offset) || !ok(self.scale_jitter) || self.scale_jitter >= 1.0 {
            return Err(DatasetError::InvalidSpec(format!("capture nuisance {self:?}")));
        }
        Ok(())
    }

    fn apply(&self, spec: &SyntheticMotionSpec, meshes: Vec<TriangleMesh<f64>>) -> Result<Vec<TriangleMesh<f64>>, DatasetError> {
        let mut rng = stream(spec, 0, b"capture\0");
        let placement = if self.random_placement {
            let q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let start: Vec3<f64> = std::array::from_fn(|_| rng.random_range(-5.0..5.0));
            RigidMotion::from_quaternion(q, start)
        } else {
            RigidMotion::identity()
        };
        let heading = rng.random_range(0.0..2.0 * PI);
        let speed = self.max_drift * rng.random_range(0.5..=1.0);
        let drift = [speed * heading.cos(), speed * heading.sin(), 0.0];
        meshes
            .into_iter()
            .enumerate()
            .map(|(t, m)| {
                let mut frame_rng = stream(spec, t as u64, b"capture\x01");
                let s = if self.scale_jitter > 0.0 {
                    1.0 + frame_rng.random_range(-self.scale_jitter..=self.scale_jitter)
                } else {
                    1.0
                };
                let w = self.frame_offset;
                let offset: Vec3<f64> = if w > 0.0 {
                    std::array::from_fn(|_| frame_rng.random_range(-w..=w))
                } else {
                    [0.0; 3]
                };
                let tf = t as f64;
                let verts = m
                    .vertices()
                    .iter()
                    .map(|p| {
                        let q = placement.apply_point(p.map(|c| c * s));
                        std::array::from_fn(|k| q[k] + drift[k] * tf + offset[k])
                    })
                    .collect();
                Ok(TriangleMesh::new(verts, m.faces().to_vec())?)
            })
            .collect()
    }
}

impl Default for CaptureNuisance {
    fn default() -> Self {
        Self {
            random_placement: true,
            max_drift: 0.3,
            frame_offset: 10.0,
            scale_jitter: 0.1,
        }
    }
}

/// A class × subject grid of synthetic sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDatasetSpec {
    pub classes: Vec<MotionClass>,
    pub subjects: usize,
    pub frames: usize,
    pub vertex_count: usize,
    pub noise_level: f64,
    pub capture: CaptureNuisance,
    pub seed: u64,
}

impl Default for SyntheticDatasetSpec {
    /// 3 classes × 5 subjects × 20 frames, ~320 faces per frame.
    fn default() -> Self {
        Self {
            classes: MotionClass::ALL.to_vec(),
            subjects: 5,
            frames: 20,
            vertex_count: 162,
            noise_level: 0.01,
            capture: CaptureNuisance::default(),
            seed: 0,
        }
    }
}

impl SyntheticDatasetSpec {
    fn subject_seed(&self, s: usize) -> u64 {
        self.seed.wrapping_mul(1_000_003).wrapping_add(s as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSequence<T> {
    pub id: String,
    pub subject: String,
    pub label: String,
    pub meshes: Vec<TriangleMesh<T>>,
}

impl<T: Real> SyntheticSequence<T> {
    /// Atomizes every frame with the default drop tolerance.
    pub fn to_labeled(&self, centroid_center: bool) -> Result<LabeledSequence<T>, DatasetError> {
        let frames = self
            .meshes
            .iter()
            .map(|m| {
                let atoms = atomize(m, m.default_drop_tolerance())?.atoms;
                Ok(if centroid_center { center_at_centroid(&atoms) } else { atoms })
            })
            .collect::<Result<_, DatasetError>>()?;
        Ok(LabeledSequence {
            id: self.id.clone(),
            subject: self.subject.clone(),
            label: self.label.clone(),
            frames,
        })
    }
}

/// Class-major list of sequences with ids `<class>_s<NN>`.
pub fn synthetic_dataset<T: Real>(spec: &SyntheticDatasetSpec) -> Result<Vec<SyntheticSequence<T>>, DatasetError> {
    if spec.subjects < 2 {
        return Err(DatasetError::InvalidSpec("at least 2 subjects per class are required".into()));
    }
    spec.capture.validate()?;
    let mut out = Vec::with_capacity(spec.classes.len() * spec.subjects);
    for &class in &spec.classes {
        for s in 0..spec.subjects {
            let motion = SyntheticMotionSpec {
                class,
                subject_seed: spec.subject_seed(s),
                frames: spec.frames,
                vertex_count: spec.vertex_count,
                noise_level: spec.noise_level,
            };
            out.push(SyntheticSequence {
                id: format!("{class}_s{s:02}"),
                subject: format!("s{s:02}"),
                label: class.name().to_string(),
                meshes: spec
                    .capture
                    .apply(&motion, generate_synthetic(&motion)?)?
                    .iter()
                    .map(TriangleMesh::cast)
                    .collect(),
            });
        }
    }
    Ok(out)
}

/// Writes `frames/<id>/<t>.obj` and `manifest.json` under `out_dir` and
/// returns the manifest path.
pub fn write_synthetic_dataset(spec: &SyntheticDatasetSpec, out_dir: &Path) -> Result<PathBuf, DatasetError> {
    let seqs = synthetic_dataset::<f64>(spec)?;
    let frames_dir = out_dir.join("frames");
    let mut entries = Vec::with_capacity(seqs.len());
    for seq in &seqs {
        std::fs::create_dir_all(frames_dir.join(&seq.id))?;
        let mut frame_paths = Vec::with_capacity(seq.meshes.len());
        for (t, mesh) in seq.meshes.iter().enumerate() {
            let rel = PathBuf::from(&seq.id).join(format!("{t:03}.obj"));
            write_obj(mesh, frames_dir.join(&rel))?;
            frame_paths.push(rel);
        }
        entries.push(ManifestEntry {
            sequence_id: seq.id.clone(),
            subject: seq.subject.clone(),
            label: seq.label.clone(),
            frame_paths,
        });
    }
    let manifest = DatasetManifest {
        root: PathBuf::from("frames"),
        entries,
    };
    let path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| DatasetError::Parse(e.to_string()))?;
    std::fs::write(&path, json + "\n")?;
    Ok(path)
}
