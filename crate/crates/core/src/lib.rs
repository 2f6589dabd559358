//! Varifold and current kernels on triangulated surfaces, Gram-Hankel
//! signatures of surface sequences, and retrieval scoring.
//!
//! Pipeline: [`mesh::atomize`] each frame, build the sequence Gram matrix
//! with [`signature::sequence_gram`], reduce it to a fixed-size signature
//! with [`signature::gram_hankel`], then compare signatures with
//! [`retrieval::pairwise_distances`] and score with
//! [`retrieval::retrieval_scores`].
//!
//! Geometry is generic over [`Real`] (`f32` or `f64`); kernel sums, Gram
//! matrices and everything downstream are `f64`.

pub mod dataset;
pub mod kernel;
pub mod mesh;
pub mod retrieval;
pub mod scalar;
pub mod signature;

pub use kernel::{kernel_product, normalized_product, varifold_norm, KernelConfig, KernelError, KernelFamily};
pub use mesh::{atomize, center_at_centroid, MeshError, RigidMotion, TriangleMesh, VarifoldAtoms};
pub use scalar::{Real, Vec3};
pub use signature::{gram_hankel, sequence_gram, GramHankel, SequenceGram};

pub type Mesh32 = TriangleMesh<f32>;
pub type Mesh64 = TriangleMesh<f64>;
pub type Atoms32 = VarifoldAtoms<f32>;
pub type Atoms64 = VarifoldAtoms<f64>;
pub type Motion32 = RigidMotion<f32>;
pub type Motion64 = RigidMotion<f64>;
pub type Sequence32 = dataset::LabeledSequence<f32>;
pub type Sequence64 = dataset::LabeledSequence<f64>;
