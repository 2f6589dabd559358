//! ASCII Wavefront OBJ: only `v` and `f` records are read.

use std::fmt::Write as _;
use std::path::Path;

use crate::scalar::{Real, Vec3};

use super::{MeshError, TriangleMesh};

pub fn read_obj<T: Real>(path: impl AsRef<Path>) -> Result<TriangleMesh<T>, MeshError> {
    let text = std::fs::read_to_string(path)?;
    parse_obj(&text)
}

/// Parses OBJ text. Polygons with more than three corners are fan-triangulated
/// from their first corner; `/vt/vn` suffixes are ignored and negative
/// (relative) indices are resolved.
pub fn parse_obj<T: Real>(text: &str) -> Result<TriangleMesh<T>, MeshError> {
    let mut vertices: Vec<Vec3<T>> = Vec::new();
    let mut faces = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut xyz = [T::zero(); 3];
                for slot in &mut xyz {
                    let tok = tokens.next().ok_or_else(|| MeshError::Parse {
                        line,
                        msg: "vertex needs three coordinates".into(),
                    })?;
                    let val: f64 = tok.parse().map_err(|_| MeshError::Parse {
                        line,
                        msg: format!("bad coordinate {tok:?}"),
                    })?;
                    *slot = T::from_f64_lossy(val);
                }
                vertices.push(xyz);
            }
            Some("f") => {
                let corners = tokens
                    .map(|tok| resolve_index(tok, vertices.len(), line))
                    .collect::<Result<Vec<_>, _>>()?;
                if corners.len() < 3 {
                    return Err(MeshError::Parse {
                        line,
                        msg: "face needs at least three vertices".into(),
                    });
                }
                for k in 1..corners.len() - 1 {
                    faces.push([corners[0], corners[k], corners[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, faces)
}

fn resolve_index(tok: &str, seen: usize, line: usize) -> Result<usize, MeshError> {
    let head = tok.split('/').next().unwrap_or("");
    let idx: i64 = head.parse().map_err(|_| MeshError::Parse {
        line,
        msg: format!("bad face index {tok:?}"),
    })?;
    let resolved = match idx {
        0 => None,
        i if i > 0 => Some(i - 1),
        i => Some(seen as i64 + i),
    };
    match resolved {
        Some(i) if i >= 0 => Ok(i as usize),
        _ => Err(MeshError::Parse {
            line,
            msg: format!("face index {idx} out of range"),
        }),
    }
}

/// Serializes a mesh as OBJ with shortest round-trip float formatting.
pub fn write_obj<T: Real>(mesh: &TriangleMesh<T>, path: impl AsRef<Path>) -> Result<(), MeshError> {
    std::fs::write(path, obj_string(mesh))?;
    Ok(())
}

pub(crate) fn obj_string<T: Real>(mesh: &TriangleMesh<T>) -> String {
    let mut out = String::with_capacity(mesh.vertices().len() * 40 + mesh.faces().len() * 20);
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}
