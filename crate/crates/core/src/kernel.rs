//! Varifold inner products between atomized meshes.
//!
//! `⟨A, B⟩ = Σ_i Σ_j a_i b_j · exp(−‖c_i − c_j‖² / σ²) · γ(n_i · n_j)`
//!
//! with `γ(u) = u` (currents), `|u|` (absolute varifolds) or
//! `exp(2u / σ_o²)` (oriented varifolds). The Gaussian has no factor 2 in
//! its denominator; compare against `σ²/2` conventions by rescaling σ.
//!
//! # Reduction order
//!
//! Atoms of `A` are split into tiles of `tile_size`; each `A` tile is
//! reduced against every `B` tile in ascending order, and the per-tile
//! partials are then added in ascending tile index. Work is spread over the
//! rayon pool by `A` tile only, so for a fixed tile size the result is
//! bit-identical for every thread count. All accumulation is in `f64`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{center_at_centroid, VarifoldAtoms};
use crate::scalar::Real;

pub const DEFAULT_SIGMA_O: f64 = 0.5;
pub const DEFAULT_TILE_SIZE: usize = 256;

/// Self-products at or below this cannot be normalized.
pub const MIN_SELF_PRODUCT: f64 = 1e-300;

// exp(-x) is exactly 0.0 in f64 beyond this, so skipping such terms is exact.
const EXP_UNDERFLOW: f64 = 746.0;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("invalid kernel configuration: {0}")]
    InvalidConfig(String),
    #[error("self-product {0:e} is too small to normalize")]
    NonPositiveSelfProduct(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Current,
    AbsoluteVarifold,
    OrientedVarifold,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 3] = [
        KernelFamily::Current,
        KernelFamily::AbsoluteVarifold,
        KernelFamily::OrientedVarifold,
    ];

    /// Stable numeric tag used by the binary signature format.
    pub fn code(self) -> u32 {
        match self {
            KernelFamily::Current => 0,
            KernelFamily::AbsoluteVarifold => 1,
            KernelFamily::OrientedVarifold => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.code() == code)
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Current => "current",
            KernelFamily::AbsoluteVarifold => "absolute_varifold",
            KernelFamily::OrientedVarifold => "oriented_varifold",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "current" | "currents" => Ok(KernelFamily::Current),
            "absolute" | "absolute_varifold" | "absolute_varifolds" => {
                Ok(KernelFamily::AbsoluteVarifold)
            }
            "oriented" | "oriented_varifold" | "oriented_varifolds" => {
                Ok(KernelFamily::OrientedVarifold)
            }
            _ => Err(KernelError::InvalidConfig(format!("unknown kernel family {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub family: KernelFamily,
    /// Spatial Gaussian scale, in world units.
    pub sigma: f64,
    /// Orientation scale; only read by [`KernelFamily::OrientedVarifold`].
    pub sigma_o: f64,
    /// Divide every product by both varifold norms.
    pub unit_norm: bool,
    /// Translate every frame to its area-weighted centroid before comparing.
    pub centroid_center: bool,
    /// Atoms per reduction tile.
    pub tile_size: usize,
    /// Skip pairs with `‖Δc‖ > cutoff·σ`. `None` evaluates every term.
    pub cutoff: Option<f64>,
}

impl KernelConfig {
    pub fn new(family: KernelFamily, sigma: f64) -> Self {
        Self {
            family,
            sigma,
            sigma_o: DEFAULT_SIGMA_O,
            unit_norm: true,
            centroid_center: true,
            tile_size: DEFAULT_TILE_SIZE,
            cutoff: None,
        }
    }

    pub fn with_normalizations(mut self, unit_norm: bool, centroid_center: bool) -> Self {
        self.unit_norm = unit_norm;
        self.centroid_center = centroid_center;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.sigma) {
            return Err(KernelError::InvalidConfig(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if !positive(self.sigma_o) {
            return Err(KernelError::InvalidConfig(format!(
                "sigma_o must be > 0, got {}",
                self.sigma_o
            )));
        }
        if self.tile_size == 0 {
            return Err(KernelError::InvalidConfig("tile_size must be >= 1".into()));
        }
        if let Some(c) = self.cutoff {
            if !positive(c) {
                return Err(KernelError::InvalidConfig(format!("cutoff must be > 0, got {c}")));
            }
        }
        Ok(())
    }
}

/// Atoms widened to `f64` and interleaved as `[cx, cy, cz, nx, ny, nz, area, _]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedAtoms {
    data: Vec<[f64; 8]>,
}

impl PackedAtoms {
    pub fn new<T: Real>(atoms: &VarifoldAtoms<T>) -> Self {
        let data = atoms
            .centers()
            .iter()
            .zip(atoms.normals())
            .zip(atoms.areas())
            .map(|((c, n), a)| {
                [
                    c[0].widen(),
                    c[1].widen(),
                    c[2].widen(),
                    n[0].widen(),
                    n[1].widen(),
                    n[2].widen(),
                    a.widen(),
                    0.0,
                ]
            })
            .collect();
        Self { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Applies the per-frame preprocessing requested by `cfg` (centroid centering).
pub fn preprocess<T: Real>(atoms: &VarifoldAtoms<T>, cfg: &KernelConfig) -> VarifoldAtoms<T> {
    if cfg.centroid_center {
        center_at_centroid(atoms)
    } else {
        atoms.clone()
    }
}

/// Unnormalized varifold inner product. Centering is not applied here.
pub fn kernel_product<T: Real>(a: &VarifoldAtoms<T>, b: &VarifoldAtoms<T>, cfg: &KernelConfig) -> f64 {
    packed_product(&PackedAtoms::new(a), &PackedAtoms::new(b), cfg)
}

pub fn packed_product(a: &PackedAtoms, b: &PackedAtoms, cfg: &KernelConfig) -> f64 {
    match cfg.family {
        KernelFamily::Current => reduce(a, b, cfg, |u| u),
        KernelFamily::AbsoluteVarifold => reduce(a, b, cfg, f64::abs),
        KernelFamily::OrientedVarifold => {
            let k = 2.0 / (cfg.sigma_o * cfg.sigma_o);
            reduce(a, b, cfg, move |u| (k * u).exp())
        }
    }
}

fn reduce<G>(a: &PackedAtoms, b: &PackedAtoms, cfg: &KernelConfig, gamma: G) -> f64
where
    G: Fn(f64) -> f64 + Sync,
{
    let tile = cfg.tile_size.max(1);
    let inv_s2 = 1.0 / (cfg.sigma * cfg.sigma);
    let limit = match cfg.cutoff {
        Some(c) => (c * c).min(EXP_UNDERFLOW),
        None => EXP_UNDERFLOW,
    };
    let partials: Vec<f64> = a
        .data
        .par_chunks(tile)
        .map(|ta| {
            b.data
                .chunks(tile)
                .map(|tb| tile_sum(ta, tb, inv_s2, limit, &gamma))
                .fold(0.0, |acc, s| acc + s)
        })
        .collect();
    partials.iter().fold(0.0, |acc, s| acc + s)
}

#[inline]
fn tile_sum<G: Fn(f64) -> f64>(ta: &[[f64; 8]], tb: &[[f64; 8]], inv_s2: f64, limit: f64, gamma: &G) -> f64 {
    let mut sum = 0.0;
    for p in ta {
        let mut row = 0.0;
        for q in tb {
            let dx = p[0] - q[0];
            let dy = p[1] - q[1];
            let dz = p[2] - q[2];
            // scaled squared distance; the cutoff is expressed in units of σ
            let x = (dx * dx + dy * dy + dz * dz) * inv_s2;
            if x > limit {
                continue;
            }
            let u = p[3] * q[3] + p[4] * q[4] + p[5] * q[5];
            row += q[6] * (-x).exp() * gamma(u);
        }
        sum += p[6] * row;
    }
    sum
}

/// `sqrt(⟨A, A⟩)`.
pub fn varifold_norm<T: Real>(a: &VarifoldAtoms<T>, cfg: &KernelConfig) -> Result<f64, KernelError> {
    cfg.validate()?;
    packed_norm(&PackedAtoms::new(a), cfg)
}

pub fn packed_norm(a: &PackedAtoms, cfg: &KernelConfig) -> Result<f64, KernelError> {
    let s = packed_product(a, a, cfg);
    if s > MIN_SELF_PRODUCT {
        Ok(s.sqrt())
    } else {
        Err(KernelError::NonPositiveSelfProduct(s))
    }
}

/// `⟨A, B⟩ / (‖A‖ ‖B‖)`, a cosine similarity in the kernel's feature space.
pub fn normalized_product<T: Real>(
    a: &VarifoldAtoms<T>,
    b: &VarifoldAtoms<T>,
    cfg: &KernelConfig,
) -> Result<f64, KernelError> {
    cfg.validate()?;
    let (pa, pb) = (PackedAtoms::new(a), PackedAtoms::new(b));
    let na = packed_norm(&pa, cfg)?;
    let nb = packed_norm(&pb, cfg)?;
    Ok(packed_product(&pa, &pb, cfg) / (na * nb))
}
