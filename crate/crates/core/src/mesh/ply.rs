//! Stanford PLY, ASCII and binary little-endian.

use std::path::Path;

use crate::scalar::{Real, Vec3};

use super::{MeshError, TriangleMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Ty {
    fn parse(s: &str) -> Result<Self, MeshError> {
        Ok(match s {
            "char" | "int8" => Ty::I8,
            "uchar" | "uint8" => Ty::U8,
            "short" | "int16" => Ty::I16,
            "ushort" | "uint16" => Ty::U16,
            "int" | "int32" => Ty::I32,
            "uint" | "uint32" => Ty::U32,
            "float" | "float32" => Ty::F32,
            "double" | "float64" => Ty::F64,
            other => return Err(MeshError::Ply(format!("unknown property type {other:?}"))),
        })
    }
}

#[derive(Debug)]
enum Prop {
    Scalar { name: String, ty: Ty },
    List { name: String, count: Ty, item: Ty },
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Prop>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Ascii,
    BinaryLe,
}

pub fn read_ply<T: Real>(path: impl AsRef<Path>) -> Result<TriangleMesh<T>, MeshError> {
    let bytes = std::fs::read(path)?;
    parse_ply(&bytes)
}

/// Parses a PLY file with a `vertex` element (x/y/z) and a `face` element
/// carrying a `vertex_indices` (or `vertex_index`) list. Polygons are
/// fan-triangulated; unrelated elements and properties are skipped.
pub fn parse_ply<T: Real>(bytes: &[u8]) -> Result<TriangleMesh<T>, MeshError> {
    let (format, elements, body) = parse_header(bytes)?;
    let mut src = match format {
        Format::Ascii => Source::Ascii(
            std::str::from_utf8(body)
                .map_err(|_| MeshError::Ply("ASCII body is not UTF-8".into()))?
                .split_ascii_whitespace(),
        ),
        Format::BinaryLe => Source::Binary(body),
    };

    let mut vertices: Vec<Vec3<T>> = Vec::new();
    let mut faces = Vec::new();
    for el in &elements {
        match el.name.as_str() {
            "vertex" => {
                let pos = ["x", "y", "z"].map(|axis| {
                    el.props
                        .iter()
                        .position(|p| matches!(p, Prop::Scalar { name, .. } if name == axis))
                });
                let [Some(px), Some(py), Some(pz)] = pos else {
                    return Err(MeshError::Ply("vertex element lacks x/y/z".into()));
                };
                vertices.reserve(el.count);
                let mut row = vec![0.0; el.props.len()];
                for _ in 0..el.count {
                    for (k, p) in el.props.iter().enumerate() {
                        row[k] = read_prop_scalar(&mut src, p)?;
                    }
                    vertices.push([row[px], row[py], row[pz]].map(T::from_f64_lossy));
                }
            }
            "face" => {
                let target = el.props.iter().position(|p| {
                    matches!(p, Prop::List { name, .. } if name == "vertex_indices" || name == "vertex_index")
                });
                let Some(target) = target else {
                    return Err(MeshError::Ply("face element lacks vertex_indices".into()));
                };
                faces.reserve(el.count);
                for _ in 0..el.count {
                    for (k, p) in el.props.iter().enumerate() {
                        match p {
                            Prop::List { count, item, .. } if k == target => {
                                let n = src.read(*count)? as usize;
                                let mut corners = Vec::with_capacity(n);
                                for _ in 0..n {
                                    let v = src.read(*item)?;
                                    if v < 0.0 {
                                        return Err(MeshError::Ply(format!("negative index {v}")));
                                    }
                                    corners.push(v as usize);
                                }
                                if n < 3 {
                                    return Err(MeshError::Ply(format!("face with {n} vertices")));
                                }
                                for j in 1..n - 1 {
                                    faces.push([corners[0], corners[j], corners[j + 1]]);
                                }
                            }
                            other => skip_prop(&mut src, other)?,
                        }
                    }
                }
            }
            _ => {
                for _ in 0..el.count {
                    for p in &el.props {
                        skip_prop(&mut src, p)?;
                    }
                }
            }
        }
    }
    TriangleMesh::new(vertices, faces)
}

fn parse_header(bytes: &[u8]) -> Result<(Format, Vec<Element>, &[u8]), MeshError> {
    const END: &[u8] = b"end_header";
    let end = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| MeshError::Ply("missing end_header".into()))?;
    let mut body_start = end + END.len();
    // the header terminator line ends with \n or \r\n
    while body_start < bytes.len() && bytes[body_start] != b'\n' {
        body_start += 1;
    }
    body_start = (body_start + 1).min(bytes.len());
    let header = std::str::from_utf8(&bytes[..end])
        .map_err(|_| MeshError::Ply("header is not UTF-8".into()))?;

    let mut lines = header.lines().map(str::trim);
    if lines.next() != Some("ply") {
        return Err(MeshError::Ply("missing ply magic".into()));
    }
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    for line in lines {
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] => {}
            ["format", "ascii", _] => format = Some(Format::Ascii),
            ["format", "binary_little_endian", _] => format = Some(Format::BinaryLe),
            ["format", other, _] => {
                return Err(MeshError::Ply(format!("unsupported format {other}")))
            }
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| MeshError::Ply(format!("bad element count {count:?}")))?,
                props: Vec::new(),
            }),
            ["property", "list", count, item, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| MeshError::Ply("property before element".into()))?;
                el.props.push(Prop::List {
                    name: name.to_string(),
                    count: Ty::parse(count)?,
                    item: Ty::parse(item)?,
                });
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| MeshError::Ply("property before element".into()))?;
                el.props.push(Prop::Scalar {
                    name: name.to_string(),
                    ty: Ty::parse(ty)?,
                });
            }
            _ => return Err(MeshError::Ply(format!("unrecognized header line {line:?}"))),
        }
    }
    let format = format.ok_or_else(|| MeshError::Ply("missing format line".into()))?;
    Ok((format, elements, &bytes[body_start..]))
}

enum Source<'a> {
    Ascii(std::str::SplitAsciiWhitespace<'a>),
    Binary(&'a [u8]),
}

impl Source<'_> {
    fn read(&mut self, ty: Ty) -> Result<f64, MeshError> {
        match self {
            Source::Ascii(tokens) => {
                let tok = tokens
                    .next()
                    .ok_or_else(|| MeshError::Ply("unexpected end of data".into()))?;
                tok.parse::<f64>()
                    .map_err(|_| MeshError::Ply(format!("bad value {tok:?}")))
            }
            Source::Binary(buf) => {
                let size = match ty {
                    Ty::I8 | Ty::U8 => 1,
                    Ty::I16 | Ty::U16 => 2,
                    Ty::I32 | Ty::U32 | Ty::F32 => 4,
                    Ty::F64 => 8,
                };
                if buf.len() < size {
                    return Err(MeshError::Ply("unexpected end of data".into()));
                }
                let (head, rest) = buf.split_at(size);
                *buf = rest;
                Ok(match ty {
                    Ty::I8 => head[0] as i8 as f64,
                    Ty::U8 => head[0] as f64,
                    Ty::I16 => i16::from_le_bytes([head[0], head[1]]) as f64,
                    Ty::U16 => u16::from_le_bytes([head[0], head[1]]) as f64,
                    Ty::I32 => i32::from_le_bytes(head.try_into().unwrap()) as f64,
                    Ty::U32 => u32::from_le_bytes(head.try_into().unwrap()) as f64,
                    Ty::F32 => f32::from_le_bytes(head.try_into().unwrap()) as f64,
                    Ty::F64 => f64::from_le_bytes(head.try_into().unwrap()),
                })
            }
        }
    }
}

fn read_prop_scalar(src: &mut Source<'_>, p: &Prop) -> Result<f64, MeshError> {
    match p {
        Prop::Scalar { ty, .. } => src.read(*ty),
        list => {
            skip_prop(src, list)?;
            Ok(0.0)
        }
    }
}

fn skip_prop(src: &mut Source<'_>, p: &Prop) -> Result<(), MeshError> {
    match p {
        Prop::Scalar { ty, .. } => {
            src.read(*ty)?;
        }
        Prop::List { count, item, .. } => {
            let n = src.read(*count)? as usize;
            for _ in 0..n {
                src.read(*item)?;
            }
        }
    }
    Ok(())
}
