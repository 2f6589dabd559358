//! Binary matrix files with a JSON sidecar.
//!
//! Layout (little-endian): 4-byte magic, `version: u32`, `n: u32`,
//! `family: u32`, then `n·n` `f64` values in row-major order. Signatures
//! use magic `GHNK` (`n = r`); sequence Gram matrices use `GRAM` (`n = T`).
//! The sidecar is written next to the binary as `<file>.json`.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{GramHankel, SequenceGram, SignatureError};
use crate::kernel::{KernelConfig, KernelFamily};

pub const SIGNATURE_MAGIC: [u8; 4] = *b"GHNK";
pub const GRAM_MAGIC: [u8; 4] = *b"GRAM";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSidecar {
    pub format: String,
    pub version: u32,
    pub dimension: usize,
    pub sequence_id: Option<String>,
    pub frames: Option<usize>,
    pub kernel: KernelConfig,
}

fn encode(magic: [u8; 4], m: &DMatrix<f64>, family: KernelFamily) -> Vec<u8> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * n * n);
    out.extend_from_slice(&magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&family.code().to_le_bytes());
    for row in 0..n {
        for col in 0..n {
            out.extend_from_slice(&m[(row, col)].to_le_bytes());
        }
    }
    out
}

fn decode(magic: [u8; 4], bytes: &[u8]) -> Result<(DMatrix<f64>, KernelFamily), SignatureError> {
    let bad = |msg: String| SignatureError::Format(msg);
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if bytes[..4] != magic {
        return Err(bad(format!("expected magic {:?}", String::from_utf8_lossy(&magic))));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[4 * k..4 * k + 4].try_into().unwrap());
    let (version, n, code) = (word(1), word(2) as usize, word(3));
    if version != FORMAT_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let family = KernelFamily::from_code(code).ok_or_else(|| bad(format!("unknown family code {code}")))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * n * n {
        return Err(bad(format!("expected {} payload bytes, found {}", 8 * n * n, body.len())));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    Ok((DMatrix::from_row_iterator(n, n, values), family))
}

pub fn encode_signature(g: &GramHankel, family: KernelFamily) -> Vec<u8> {
    encode(SIGNATURE_MAGIC, g.matrix(), family)
}

pub fn decode_signature(bytes: &[u8]) -> Result<(GramHankel, KernelFamily), SignatureError> {
    let (m, family) = decode(SIGNATURE_MAGIC, bytes)?;
    Ok((GramHankel::from_matrix(m)?, family))
}

pub fn encode_gram(j: &SequenceGram, family: KernelFamily) -> Vec<u8> {
    encode(GRAM_MAGIC, j.matrix(), family)
}

pub fn decode_gram(bytes: &[u8]) -> Result<(SequenceGram, KernelFamily), SignatureError> {
    let (m, family) = decode(GRAM_MAGIC, bytes)?;
    Ok((SequenceGram::from_matrix(m)?, family))
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn write_pair(path: &Path, bytes: &[u8], sidecar: &MatrixSidecar) -> Result<(), SignatureError> {
    std::fs::write(path, bytes)?;
    let json = serde_json::to_string_pretty(sidecar).map_err(|e| SignatureError::Format(e.to_string()))?;
    std::fs::write(sidecar_path(path), json + "\n")?;
    Ok(())
}

/// Writes `path` (binary) and `path.json` (kernel configuration and provenance).
pub fn write_signature(
    path: impl AsRef<Path>,
    g: &GramHankel,
    cfg: &KernelConfig,
    sequence_id: Option<&str>,
    frames: Option<usize>,
) -> Result<(), SignatureError> {
    let sidecar = MatrixSidecar {
        format: "GHNK".into(),
        version: FORMAT_VERSION,
        dimension: g.order(),
        sequence_id: sequence_id.map(str::to_owned),
        frames,
        kernel: *cfg,
    };
    write_pair(path.as_ref(), &encode_signature(g, cfg.family), &sidecar)
}

pub fn read_signature(path: impl AsRef<Path>) -> Result<(GramHankel, KernelFamily), SignatureError> {
    decode_signature(&std::fs::read(path)?)
}

pub fn write_gram(
    path: impl AsRef<Path>,
    j: &SequenceGram,
    cfg: &KernelConfig,
    sequence_id: Option<&str>,
) -> Result<(), SignatureError> {
    let sidecar = MatrixSidecar {
        format: "GRAM".into(),
        version: FORMAT_VERSION,
        dimension: j.frames(),
        sequence_id: sequence_id.map(str::to_owned),
        frames: Some(j.frames()),
        kernel: *cfg,
    };
    write_pair(path.as_ref(), &encode_gram(j, cfg.family), &sidecar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn header_layout() {
        let g = GramHankel::from_matrix(dmatrix![0.5, 0.25; 0.25, 0.75]).unwrap();
        let bytes = encode_signature(&g, KernelFamily::OrientedVarifold);
        assert_eq!(&bytes[..4], b"GHNK");
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &2u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &2u32.to_le_bytes());
        assert_eq!(bytes.len(), 16 + 4 * 8);
        // row-major: (0,1) precedes (1,0)
        assert_eq!(&bytes[24..32], &0.25f64.to_le_bytes());
        assert_eq!(&bytes[40..48], &0.75f64.to_le_bytes());
        let (back, family) = decode_signature(&bytes).unwrap();
        assert_eq!(back, g);
        assert_eq!(family, KernelFamily::OrientedVarifold);
    }

    #[test]
    fn rejects_corrupt_files() {
        let g = GramHankel::from_matrix(dmatrix![1.0]).unwrap();
        let mut bytes = encode_signature(&g, KernelFamily::Current);
        assert!(decode_gram(&bytes).is_err());
        bytes.pop();
        assert!(decode_signature(&bytes).is_err());
        assert!(decode_signature(b"GHNK").is_err());
    }

    #[test]
    fn sidecar_written_next_to_binary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("walk.ghnk");
        let g = GramHankel::from_matrix(dmatrix![1.0]).unwrap();
        let cfg = KernelConfig::new(KernelFamily::AbsoluteVarifold, 0.2);
        write_signature(&path, &g, &cfg, Some("walk"), Some(20)).unwrap();
        let (back, _) = read_signature(&path).unwrap();
        assert_eq!(back, g);
        let meta: MatrixSidecar =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("walk.ghnk.json")).unwrap()).unwrap();
        assert_eq!(meta.kernel, cfg);
        assert_eq!(meta.sequence_id.as_deref(), Some("walk"));
    }
}
