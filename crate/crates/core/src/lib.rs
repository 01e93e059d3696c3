//! Landmark selection for scalable manifold learning.
//!
//! Landmarks are drawn from determinantal point processes (exactly, or with a
//! linear-time approximation that restricts probability updates to local
//! neighborhoods), the landmark kernel is completed with the Nyström method, and
//! landmark graphs can select neighbors with the Bhattacharyya distance between
//! locally estimated Gaussians before Laplacian eigenmaps embeds them.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`.

pub mod datasets;
mod error;
pub mod graph;
pub mod linalg;
pub mod metric;
pub mod nystrom;
pub mod quality;
pub mod sampling;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use datasets::PointSet;
pub use graph::{
    GraphMetric, NeighborRule, NeighborhoodGraph, PipelineConfig, PipelineOutput, SpectralEmbedding,
};
pub use metric::{DistanceMatrix, DistanceMode, KernelSpec};
pub use nystrom::NystromReconstruction;
pub use sampling::{
    CovarianceMode, Covariances, EfficientDppConfig, LandmarkSelection, UpdateFunction,
};

use rand::SeedableRng;

/// Random generator used throughout; fully determined by its seed.
pub type Rng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

pub type PointSet64 = PointSet<f64>;
pub type KernelSpec64 = KernelSpec<f64>;
pub type DistanceMatrix64 = DistanceMatrix<f64>;
pub type LandmarkSelection64 = LandmarkSelection<f64>;
pub type UpdateFunction64 = UpdateFunction<f64>;
pub type NeighborhoodGraph64 = NeighborhoodGraph<f64>;
pub type SpectralEmbedding64 = SpectralEmbedding<f64>;
pub type PipelineConfig64 = PipelineConfig<f64>;
pub type PipelineOutput64 = PipelineOutput<f64>;

pub type PointSet32 = PointSet<f32>;
pub type KernelSpec32 = KernelSpec<f32>;
pub type LandmarkSelection32 = LandmarkSelection<f32>;
