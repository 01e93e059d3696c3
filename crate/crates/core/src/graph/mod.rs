//! Landmark graphs, Laplacian eigenmaps and the end-to-end embedding pipeline.

mod bhattacharyya;
mod eigenmaps;
mod neighborhood;
mod pipeline;

pub use bhattacharyya::{bhattacharyya_distance, log_det};
pub use eigenmaps::{
    laplacian_eigenmaps, laplacian_eigenmaps_with, EigenSolver, SpectralEmbedding, DENSE_NODE_LIMIT,
    RESIDUAL_TOLERANCE,
};
pub use neighborhood::{build_graph, GraphMetric, NeighborRule, NeighborhoodGraph};
pub use pipeline::{extend_embedding, run_pipeline, PipelineConfig, PipelineOutput};
