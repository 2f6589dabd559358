//! Triangle meshes and their discrete varifold representation.
//!
//! A mesh is reduced to one weighted atom per triangle: the face barycenter,
//! its unit normal (counter-clockwise winding is outward) and its area.

mod obj;
mod ply;
mod rigid;

pub use obj::{parse_obj, read_obj, write_obj};
pub use ply::{parse_ply, read_ply};
pub use rigid::RigidMotion;

use std::path::Path;

use thiserror::Error;

use crate::scalar::{add, cross, norm, scale, sub, Real, Vec3};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("face {face} references vertex {index} but the mesh has {vertex_count} vertices")]
    InvalidIndex {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("vertex {0} has a non-finite coordinate")]
    NonFiniteVertex(usize),
    #[error("all {0} faces are degenerate")]
    AllFacesDegenerate(usize),
    #[error("atom list lengths differ: {centers} centers, {normals} normals, {areas} areas")]
    LengthMismatch {
        centers: usize,
        normals: usize,
        areas: usize,
    },
    #[error("a varifold needs at least one atom")]
    EmptyAtoms,
    #[error("atom {0} has a non-positive or non-finite area")]
    BadArea(usize),
    #[error("atom {0} normal is not unit length")]
    NonUnitNormal(usize),
    #[error("rotation matrix is not orthogonal with determinant +1")]
    InvalidRotation,
    #[error("permutation of length {got} does not match {expected} atoms")]
    BadPermutation { expected: usize, got: usize },
    #[error("unsupported file extension for {0}")]
    UnsupportedFormat(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("malformed PLY: {0}")]
    Ply(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Indexed triangle geometry for a single frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh<T> {
    vertices: Vec<Vec3<T>>,
    faces: Vec<[usize; 3]>,
}

impl<T: Real> TriangleMesh<T> {
    /// Builds a mesh, rejecting out-of-range face indices and non-finite vertices.
    pub fn new(vertices: Vec<Vec3<T>>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if let Some(i) = vertices
            .iter()
            .position(|v| !v.iter().all(|c| c.is_finite()))
        {
            return Err(MeshError::NonFiniteVertex(i));
        }
        let vertex_count = vertices.len();
        for (face, f) in faces.iter().enumerate() {
            if let Some(&index) = f.iter().find(|&&i| i >= vertex_count) {
                return Err(MeshError::InvalidIndex {
                    face,
                    index,
                    vertex_count,
                });
            }
        }
        Ok(Self { vertices, faces })
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Loads an OBJ or PLY file, dispatching on the extension.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, MeshError> {
        let path = path.as_ref();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("obj") => read_obj(path),
            Some("ply") => read_ply(path),
            _ => Err(MeshError::UnsupportedFormat(path.display().to_string())),
        }
    }

    /// Length of the axis-aligned bounding box diagonal (zero for an empty mesh).
    pub fn bounding_box_diagonal(&self) -> T {
        let Some(first) = self.vertices.first() else {
            return T::zero();
        };
        let (mut lo, mut hi) = (*first, *first);
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        norm(sub(hi, lo))
    }

    /// `1e-12 * diagonal²`: faces with area at or below this are dropped.
    pub fn default_drop_tolerance(&self) -> T {
        let d = self.bounding_box_diagonal();
        T::from_f64_lossy(1e-12) * d * d
    }

    /// Converts the scalar type of the vertex buffer.
    pub fn cast<U: Real>(&self) -> TriangleMesh<U> {
        TriangleMesh {
            vertices: self
                .vertices
                .iter()
                .map(|v| v.map(|c| U::from_f64_lossy(c.widen())))
                .collect(),
            faces: self.faces.clone(),
        }
    }
}

/// Weighted Dirac masses `Σ a_i δ(c_i, n_i)`, stored as parallel arrays.
///
/// Always non-empty, with strictly positive areas and unit normals.
#[derive(Debug, Clone, PartialEq)]
pub struct VarifoldAtoms<T> {
    centers: Vec<Vec3<T>>,
    normals: Vec<Vec3<T>>,
    areas: Vec<T>,
}

impl<T: Real> VarifoldAtoms<T> {
    pub fn new(
        centers: Vec<Vec3<T>>,
        normals: Vec<Vec3<T>>,
        areas: Vec<T>,
    ) -> Result<Self, MeshError> {
        if centers.len() != normals.len() || centers.len() != areas.len() {
            return Err(MeshError::LengthMismatch {
                centers: centers.len(),
                normals: normals.len(),
                areas: areas.len(),
            });
        }
        if areas.is_empty() {
            return Err(MeshError::EmptyAtoms);
        }
        if let Some(i) = areas.iter().position(|a| !(a.is_finite() && *a > T::zero())) {
            return Err(MeshError::BadArea(i));
        }
        let tol = T::geometric_tolerance();
        if let Some(i) = normals
            .iter()
            .position(|n| (norm(*n) - T::one()).abs() > tol)
        {
            return Err(MeshError::NonUnitNormal(i));
        }
        if let Some(i) = centers.iter().position(|c| !c.iter().all(|x| x.is_finite())) {
            return Err(MeshError::NonFiniteVertex(i));
        }
        Ok(Self {
            centers,
            normals,
            areas,
        })
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    pub fn centers(&self) -> &[Vec3<T>] {
        &self.centers
    }

    pub fn normals(&self) -> &[Vec3<T>] {
        &self.normals
    }

    pub fn areas(&self) -> &[T] {
        &self.areas
    }

    pub fn total_area(&self) -> T {
        self.areas.iter().copied().sum()
    }

    /// Reorders atoms so that atom `k` of the result is atom `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, MeshError> {
        let n = self.len();
        let mut seen = vec![false; n];
        if perm.len() != n || !perm.iter().all(|&p| p < n && !std::mem::replace(&mut seen[p], true)) {
            return Err(MeshError::BadPermutation {
                expected: n,
                got: perm.len(),
            });
        }
        Ok(Self {
            centers: perm.iter().map(|&p| self.centers[p]).collect(),
            normals: perm.iter().map(|&p| self.normals[p]).collect(),
            areas: perm.iter().map(|&p| self.areas[p]).collect(),
        })
    }
}

/// Result of [`atomize`]: the atoms plus how many faces were discarded.
#[derive(Debug, Clone, PartialEq)]
pub struct Atomized<T> {
    pub atoms: VarifoldAtoms<T>,
    pub dropped_faces: usize,
}

/// One atom per face: barycenter, unit normal `(q−p)×(r−p)/‖·‖`, area `‖(q−p)×(r−p)‖/2`.
///
/// Faces whose area is `<= drop_tolerance` are skipped and counted.
pub fn atomize<T: Real>(
    mesh: &TriangleMesh<T>,
    drop_tolerance: T,
) -> Result<Atomized<T>, MeshError> {
    let v = &mesh.vertices;
    let m = mesh.faces.len();
    let mut centers = Vec::with_capacity(m);
    let mut normals = Vec::with_capacity(m);
    let mut areas = Vec::with_capacity(m);
    let three = T::from_f64_lossy(3.0);
    let two = T::from_f64_lossy(2.0);
    for &[a, b, c] in &mesh.faces {
        let (p, q, r) = (v[a], v[b], v[c]);
        let cr = cross(sub(q, p), sub(r, p));
        let len = norm(cr);
        let area = len / two;
        if !(area > drop_tolerance) || len == T::zero() {
            continue;
        }
        let sum = add(add(p, q), r);
        centers.push([sum[0] / three, sum[1] / three, sum[2] / three]);
        normals.push([cr[0] / len, cr[1] / len, cr[2] / len]);
        areas.push(area);
    }
    if areas.is_empty() {
        return Err(MeshError::AllFacesDegenerate(m));
    }
    let dropped_faces = m - areas.len();
    Ok(Atomized {
        atoms: VarifoldAtoms {
            centers,
            normals,
            areas,
        },
        dropped_faces,
    })
}

/// Area-weighted mean of atom centers.
pub fn centroid<T: Real>(atoms: &VarifoldAtoms<T>) -> Vec3<T> {
    let mut acc = [T::zero(); 3];
    for (c, &a) in atoms.centers.iter().zip(&atoms.areas) {
        acc = add(acc, scale(*c, a));
    }
    let total = atoms.total_area();
    [acc[0] / total, acc[1] / total, acc[2] / total]
}

/// Translates the atoms so their centroid sits at the origin.
pub fn center_at_centroid<T: Real>(atoms: &VarifoldAtoms<T>) -> VarifoldAtoms<T> {
    let c = centroid(atoms);
    VarifoldAtoms {
        centers: atoms.centers.iter().map(|p| sub(*p, c)).collect(),
        normals: atoms.normals.clone(),
        areas: atoms.areas.clone(),
    }
}

/// Push-forward under `x ↦ Rx + t`: centers move rigidly, normals rotate, areas are kept.
pub fn apply_rigid<T: Real>(atoms: &VarifoldAtoms<T>, motion: &RigidMotion<T>) -> VarifoldAtoms<T> {
    VarifoldAtoms {
        centers: atoms.centers.iter().map(|c| motion.apply_point(*c)).collect(),
        normals: atoms.normals.iter().map(|n| motion.rotate(*n)).collect(),
        areas: atoms.areas.clone(),
    }
}
