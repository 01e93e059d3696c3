use dpp_landmarks::datasets::PointSet;
use dpp_landmarks::sampling::{
    efficient_dpp_sample, kmeans, kmeanspp_seed, local_covariance, uniform_sample, Covariances,
    KMeansInit, OwnedCovariance,
};
use dpp_landmarks::{
    CovarianceMode, EfficientDppConfig, LandmarkSelection64, PointSet64, Rng, UpdateFunction64,
};

use crate::config::{ExperimentConfig, SamplerSpec, UpdateSpec};
use crate::error::Result;

/// Sampler settings shared by every trial of an experiment.
#[derive(Debug, Clone, Copy)]
pub struct SamplerParams {
    pub m: usize,
    pub update: UpdateFunction64,
    pub covariance: CovarianceMode,
    pub kmeans_max_iter: usize,
}

impl SamplerParams {
    pub fn from_config(cfg: &ExperimentConfig, covariance: CovarianceMode) -> Result<Self> {
        let update = match cfg.update {
            UpdateSpec::Welsch { sigma } => UpdateFunction64::welsch(sigma.unwrap_or(cfg.sigma))?,
            UpdateSpec::SineSquared { tau } => UpdateFunction64::sine_squared(tau)?,
        };
        Ok(Self {
            m: cfg.m,
            update,
            covariance,
            kmeans_max_iter: cfg.kmeans_max_iter,
        })
    }
}

/// Draws `k` landmarks with `sampler`. Only the efficient DPP sampler estimates
/// covariances itself; see [`attach_local_covariances`] for the others.
pub fn select_landmarks(
    points: &PointSet64,
    sampler: SamplerSpec,
    k: usize,
    params: &SamplerParams,
    rng: &mut Rng,
) -> Result<LandmarkSelection64> {
    let n = points.len();
    let selection = match sampler {
        SamplerSpec::Uniform => uniform_sample(n, k, rng)?,
        SamplerSpec::KMeansUniform => kmeans(points, k, KMeansInit::Uniform, params.kmeans_max_iter, rng)?,
        SamplerSpec::KMeansPlusPlusSeed => kmeanspp_seed(points, k, rng)?,
        SamplerSpec::KMeansPlusPlus => kmeans(points, k, KMeansInit::PlusPlus, params.kmeans_max_iter, rng)?,
        SamplerSpec::EfficientDpp => {
            let cfg = EfficientDppConfig {
                k,
                neighborhood: params.m.min(n),
                update: params.update,
                covariance: params.covariance,
            };
            efficient_dpp_sample(points, &cfg, rng)?
        }
    };
    Ok(selection)
}

/// Adds covariances estimated over the `m` nearest points of each landmark (the
/// landmark included), as the efficient DPP sampler does, if none are present.
pub fn attach_local_covariances(
    points: &PointSet<f64>,
    selection: LandmarkSelection64,
    m: usize,
    mode: CovarianceMode,
) -> LandmarkSelection64 {
    if selection.covariances().is_some() || mode == CovarianceMode::None {
        return selection;
    }
    let n = points.len();
    let m = m.clamp(1, n);
    let mut full = Vec::new();
    let mut diag = Vec::new();
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(n);
    for &i in selection.indices() {
        order.clear();
        order.extend((0..n).map(|j| (points.sq_dist(i, j), j)));
        if m < n {
            order.select_nth_unstable_by(m - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        let hood: Vec<usize> = order[..m].iter().map(|&(_, j)| j).collect();
        match local_covariance(points, &hood, mode) {
            OwnedCovariance::Full(c) => full.push(c),
            OwnedCovariance::Diagonal(c) => diag.push(c),
        }
    }
    let covs = match mode {
        CovarianceMode::Full => Covariances::Full(full),
        _ => Covariances::Diagonal(diag),
    };
    LandmarkSelection64::with_covariances(selection.indices().to_vec(), covs)
}
