use nalgebra::DMatrix;

use super::{build_graph, laplacian_eigenmaps, GraphMetric, NeighborRule, SpectralEmbedding};
use crate::datasets::{complement, sq_dist, PointSet};
use crate::metric::{gaussian_sq, KernelSpec};
use crate::nystrom::{landmark_kernel_means, oos_extend, reconstruction_error_lazy};
use crate::sampling::{efficient_dpp_sample, EfficientDppConfig, LandmarkSelection};
use crate::{rng_from_seed, Error, Result, Scalar};

/// Target points whose cross kernel is formed at a time during extension.
const EXTENSION_TILE: usize = 2048;

/// Parameters of the sample → graph → embed → extend pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig<T: Scalar> {
    pub sampler: EfficientDppConfig<T>,
    pub metric: GraphMetric,
    pub rule: NeighborRule<T>,
    /// Gaussian bandwidth for graph weights and the extension kernel.
    pub sigma: T,
    /// Embedding dimension `l`.
    pub dim: usize,
    pub seed: u64,
    /// Also report the Nyström trace-norm error of the landmark set.
    pub reconstruction_error: bool,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput<T: Scalar> {
    pub landmarks: LandmarkSelection<T>,
    pub landmark_embedding: SpectralEmbedding<T>,
    pub components: usize,
    pub edges: usize,
    /// `n × l` coordinates of every point: landmark rows copy `Φ_J`, the others are
    /// the out-of-sample extension.
    pub embedding: DMatrix<T>,
    pub reconstruction_error: Option<T>,
}

/// Runs the four stages on `points`. Errors carry the stage that raised them
/// (`sample`, `graph`, `embed`, `extend` or `reconstruct`).
pub fn run_pipeline<T: Scalar>(points: &PointSet<T>, config: &PipelineConfig<T>) -> Result<PipelineOutput<T>> {
    let mut rng = rng_from_seed(config.seed);
    let landmarks = efficient_dpp_sample(points, &config.sampler, &mut rng).map_err(|e| e.at_stage("sample"))?;
    log::info!("sampled {} landmarks", landmarks.len());

    let graph = build_graph(points, &landmarks, config.metric, config.rule, config.sigma)
        .map_err(|e| e.at_stage("graph"))?;
    log::info!(
        "landmark graph: {} edges, {} components",
        graph.edge_count(),
        graph.components()
    );

    let landmark_embedding = laplacian_eigenmaps(&graph, config.dim).map_err(|e| e.at_stage("embed"))?;

    let idx = landmarks.indices();
    let rest = complement(idx, points.len());
    let landmark_points = points.select(idx)?;
    let mut embedding = DMatrix::zeros(points.len(), config.dim);
    for (row, &i) in idx.iter().enumerate() {
        embedding.set_row(i, &landmark_embedding.phi().row(row));
    }
    if !rest.is_empty() {
        let targets = points.select(&rest)?;
        let extended = extend_embedding(&landmark_points, &landmark_embedding, config.sigma, &targets)
            .map_err(|e| match e {
                Error::IsolatedPoint { index } => Error::IsolatedPoint { index: rest[index] },
                other => other,
            })
            .map_err(|e| e.at_stage("extend"))?;
        for (row, &i) in rest.iter().enumerate() {
            embedding.set_row(i, &extended.row(row));
        }
    }

    let reconstruction_error = if config.reconstruction_error {
        let spec = KernelSpec::euclidean(config.sigma)?;
        Some(reconstruction_error_lazy(points, &spec, idx).map_err(|e| e.at_stage("reconstruct"))?)
    } else {
        None
    };

    Ok(PipelineOutput {
        landmarks,
        landmark_embedding,
        components: graph.components(),
        edges: graph.edge_count(),
        embedding,
        reconstruction_error,
    })
}

/// Extends a landmark embedding to arbitrary `targets` with the Nyström extension,
/// using the Euclidean Gaussian kernel of bandwidth `sigma` and the normalized
/// eigenvalues `1 − λ` so extended and landmark coordinates share one scale.
/// Row `r` of the result belongs to target point `r`.
pub fn extend_embedding<T: Scalar>(
    landmark_points: &PointSet<T>,
    embedding: &SpectralEmbedding<T>,
    sigma: T,
    targets: &PointSet<T>,
) -> Result<DMatrix<T>> {
    let k = landmark_points.len();
    if embedding.len() != k {
        return Err(Error::invalid(format!(
            "embedding has {} rows for {k} landmarks",
            embedding.len()
        )));
    }
    if targets.dim() != landmark_points.dim() {
        return Err(Error::invalid("targets and landmarks differ in dimension"));
    }
    let kjj = DMatrix::from_fn(k, k, |a, b| gaussian_sq(landmark_points.sq_dist(a, b), sigma));
    let means = landmark_kernel_means(&kjj);
    let mu = embedding.normalized_eigenvalues();
    let m = targets.len();
    let mut out = DMatrix::zeros(m, embedding.dim());
    let mut start = 0;
    while start < m {
        let end = (start + EXTENSION_TILE).min(m);
        let cross = DMatrix::from_fn(k, end - start, |a, c| {
            gaussian_sq(sq_dist(landmark_points.point_slice(a), targets.point_slice(start + c)), sigma)
        });
        let tile = oos_extend(embedding.phi(), &mu, &cross, &means).map_err(|e| match e {
            Error::IsolatedPoint { index } => Error::IsolatedPoint { index: start + index },
            other => other,
        })?;
        out.rows_mut(start, end - start).copy_from(&tile);
        start = end;
    }
    Ok(out)
}
