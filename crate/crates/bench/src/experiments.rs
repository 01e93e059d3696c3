//! Benchmark drivers. Every trial derives its generator from `seed + repetition`, so a
//! configuration and seed determine the output completely (runtimes aside).

use std::time::Instant;

use dpp_landmarks::datasets::{complement, PointSet};
use dpp_landmarks::graph::{build_graph, extend_embedding, laplacian_eigenmaps, run_pipeline};
use dpp_landmarks::nystrom::reconstruction_error_lazy;
use dpp_landmarks::quality::dominant_spearman;
use dpp_landmarks::{
    rng_from_seed, CovarianceMode, EfficientDppConfig, Error, KernelSpec64, LandmarkSelection64, NeighborRule,
    PipelineConfig64, PipelineOutput64, PointSet64,
};
use nalgebra::DMatrix;

use crate::config::{ExperimentConfig, MetricSpec, Purpose, SamplerSpec, ScoreOn};
use crate::dataset::{load_dataset, Dataset};
use crate::error::{BenchError, Result};
use crate::results::{mean_std, ResultRow, ResultTable};
use crate::samplers::{attach_local_covariances, select_landmarks, SamplerParams};

fn trial_seed(base: u64, repetition: usize) -> u64 {
    base.wrapping_add(repetition as u64)
}

fn check_k(cfg: &ExperimentConfig, n: usize) -> Result<()> {
    let bad: Vec<String> = cfg
        .k
        .iter()
        .filter(|&&k| k > n)
        .map(|k| format!("k = {k} exceeds the {n} available points"))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(BenchError::Config(bad))
    }
}

struct Accumulator {
    values: Vec<f64>,
    millis: Vec<f64>,
    failed: usize,
}

impl Accumulator {
    fn new() -> Self {
        Self {
            values: Vec::new(),
            millis: Vec::new(),
            failed: 0,
        }
    }

    fn into_row(self, cfg: &ExperimentConfig, dataset: &str, sampler: &str, metric: &str, k: usize, knn: Option<usize>) -> ResultRow {
        let (mean, std) = mean_std(&self.values);
        let runtime_ms = cfg.timing.then(|| mean_std(&self.millis).0);
        ResultRow {
            dataset: dataset.to_owned(),
            sampler: sampler.to_owned(),
            metric: metric.to_owned(),
            k,
            knn,
            mean,
            std,
            runtime_ms,
            seed: cfg.seed,
            runs: self.values.len(),
            failed: self.failed,
        }
    }
}

fn new_table(command: &str, cfg: &ExperimentConfig) -> ResultTable {
    let mut table = ResultTable::new(command, cfg.seed, cfg.to_json());
    table.notes.extend(cfg.note.clone());
    table
}

/// Nyström trace-norm error of each sampler's landmarks under the Euclidean Gaussian
/// kernel of bandwidth `sigma`. Runtimes cover landmark selection only. Runs where the
/// efficient sampler exhausts its probability mass are counted as failed.
pub fn bench_reconstruction(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate(Purpose::Reconstruction)?;
    let data = load_dataset(&cfg.dataset)?;
    check_k(cfg, data.train.len())?;
    let points = &data.train;
    let params = SamplerParams::from_config(cfg, CovarianceMode::None)?;
    let kernel = KernelSpec64::euclidean(cfg.sigma)?;
    let mut table = new_table("bench-recon", cfg);

    for &sampler in &cfg.samplers {
        for &k in &cfg.k {
            let mut acc = Accumulator::new();
            for r in 0..cfg.repetitions {
                let mut rng = rng_from_seed(trial_seed(cfg.seed, r));
                let start = Instant::now();
                let selection = match select_landmarks(points, sampler, k, &params, &mut rng) {
                    Ok(s) => s,
                    Err(BenchError::Core(Error::ExhaustedMass { iteration })) => {
                        log::warn!("{} k={k} run {r}: probability mass exhausted at draw {iteration}", sampler.name());
                        acc.failed += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                acc.millis.push(start.elapsed().as_secs_f64() * 1e3);
                acc.values
                    .push(reconstruction_error_lazy(points, &kernel, selection.indices())?);
            }
            log::info!("{} k={k}: {} runs", sampler.name(), acc.values.len());
            table.rows.push(acc.into_row(cfg, data.name, sampler.name(), "-", k, None));
        }
    }
    table.sort();
    Ok(table)
}

/// Embeds efficient-DPP landmarks with every graph metric and neighbor count and
/// scores each embedding by the dominant |Spearman ρ| against the ground truth.
/// Disconnected graphs score 0 and are counted in `failed`.
pub fn bench_robustness(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate(Purpose::Robustness)?;
    let data = load_dataset(&cfg.dataset)?;
    check_k(cfg, data.train.len())?;
    let points = &data.train;
    let truth = points
        .truth()
        .ok_or_else(|| BenchError::Config(vec![format!("dataset {} has no ground truth", data.name)]))?;
    let params = SamplerParams::from_config(cfg, cfg.graph.covariance.mode())?;
    let mut table = new_table("bench-robust", cfg);
    table.notes.push(format!(
        "landmarks from {} points; graph weights use sigma = {}",
        points.len(),
        cfg.sigma
    ));

    for &k in &cfg.k {
        let mut cells: Vec<Vec<Accumulator>> = cfg
            .graph
            .metrics
            .iter()
            .map(|_| cfg.graph.knn.iter().map(|_| Accumulator::new()).collect())
            .collect();
        for r in 0..cfg.repetitions {
            let mut rng = rng_from_seed(trial_seed(cfg.seed, r));
            let selection = select_landmarks(points, SamplerSpec::EfficientDpp, k, &params, &mut rng)
                .map_err(|e| stage(e, "sample"))?;
            let landmark_truth = truth.select_columns(selection.indices());
            for (mi, &metric) in cfg.graph.metrics.iter().enumerate() {
                for (ki, &knn) in cfg.graph.knn.iter().enumerate() {
                    let start = Instant::now();
                    let score = robustness_score(cfg, points, &selection, metric, knn, &landmark_truth)?;
                    let acc = &mut cells[mi][ki];
                    acc.millis.push(start.elapsed().as_secs_f64() * 1e3);
                    match score {
                        Some(s) => acc.values.push(s),
                        None => {
                            acc.values.push(0.0);
                            acc.failed += 1;
                        }
                    }
                    log::info!("k={k} run {r} {} knn={knn}: {:?}", metric.name(), score);
                }
            }
        }
        for (mi, row) in cells.into_iter().enumerate() {
            for (ki, acc) in row.into_iter().enumerate() {
                let metric = cfg.graph.metrics[mi].name();
                let knn = cfg.graph.knn[ki];
                table
                    .rows
                    .push(acc.into_row(cfg, data.name, SamplerSpec::EfficientDpp.name(), metric, k, Some(knn)));
            }
        }
    }
    table.sort();
    Ok(table)
}

fn stage(e: BenchError, name: &'static str) -> BenchError {
    match e {
        BenchError::Core(inner) => BenchError::Core(inner.at_stage(name)),
        other => other,
    }
}

/// Score of one landmark embedding, `None` for a disconnected graph.
fn robustness_score(
    cfg: &ExperimentConfig,
    points: &PointSet64,
    selection: &LandmarkSelection64,
    metric: MetricSpec,
    knn: usize,
    landmark_truth: &DMatrix<f64>,
) -> Result<Option<f64>> {
    let graph = build_graph(points, selection, metric.graph_metric(), NeighborRule::Knn(knn), cfg.sigma)
        .map_err(|e| e.at_stage("graph"))?;
    if !graph.is_connected() {
        return Ok(None);
    }
    let embedding = laplacian_eigenmaps(&graph, cfg.dim).map_err(|e| e.at_stage("embed"))?;
    let score = match cfg.score_on {
        ScoreOn::Landmarks => dominant_spearman(embedding.phi(), landmark_truth)?,
        ScoreOn::AllPoints => {
            let full = embed_all(points, selection, &embedding, cfg.sigma)?;
            dominant_spearman(&full, points.truth().expect("checked by caller"))?
        }
    };
    Ok(Some(score))
}

/// Landmark rows copied from the landmark embedding, all other rows extended.
fn embed_all(
    points: &PointSet64,
    selection: &LandmarkSelection64,
    embedding: &dpp_landmarks::SpectralEmbedding64,
    sigma: f64,
) -> Result<DMatrix<f64>> {
    let idx = selection.indices();
    let mut full = DMatrix::zeros(points.len(), embedding.dim());
    for (row, &i) in idx.iter().enumerate() {
        full.set_row(i, &embedding.phi().row(row));
    }
    let rest = complement(idx, points.len());
    if !rest.is_empty() {
        let landmark_points = points.select(idx)?;
        let extended = extend_embedding(&landmark_points, embedding, sigma, &points.select(&rest)?)
            .map_err(|e| e.at_stage("extend"))?;
        for (row, &i) in rest.iter().enumerate() {
            full.set_row(i, &extended.row(row));
        }
    }
    Ok(full)
}

/// 1-nearest-neighbor test accuracy in the embedding built from each sampler's
/// landmarks. Training points outside the landmark set and all test points are
/// placed with the out-of-sample extension. Runs with a disconnected graph or a
/// test point far from every landmark are counted as failed and left out of the mean.
pub fn bench_classification(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate(Purpose::Classification)?;
    let data = load_dataset(&cfg.dataset)?;
    check_k(cfg, data.train.len())?;
    let Dataset { train, test, name } = &data;
    let test = test.as_ref().expect("validated test split");
    let (Some(train_labels), Some(test_labels)) = (train.labels(), test.labels()) else {
        return Err(BenchError::Config(vec![format!("dataset {name} has no labels")]));
    };
    let wants_covariances = cfg.graph.metrics.contains(&MetricSpec::Bhattacharyya);
    let covariance = cfg.graph.covariance.mode();
    let mut table = new_table("bench-classify", cfg);

    for &sampler in &cfg.samplers {
        let mode = if wants_covariances && sampler == SamplerSpec::EfficientDpp {
            covariance
        } else {
            CovarianceMode::None
        };
        let params = SamplerParams::from_config(cfg, mode)?;
        for &k in &cfg.k {
            let mut cells: Vec<Vec<Accumulator>> = cfg
                .graph
                .metrics
                .iter()
                .map(|_| cfg.graph.knn.iter().map(|_| Accumulator::new()).collect())
                .collect();
            for r in 0..cfg.repetitions {
                let mut rng = rng_from_seed(trial_seed(cfg.seed, r));
                let start = Instant::now();
                let mut selection =
                    select_landmarks(train, sampler, k, &params, &mut rng).map_err(|e| stage(e, "sample"))?;
                let sample_ms = start.elapsed().as_secs_f64() * 1e3;
                for (mi, &metric) in cfg.graph.metrics.iter().enumerate() {
                    if metric == MetricSpec::Bhattacharyya {
                        selection = attach_local_covariances(train, selection, cfg.m, covariance);
                    }
                    for (ki, &knn) in cfg.graph.knn.iter().enumerate() {
                        let start = Instant::now();
                        let accuracy = classification_accuracy(
                            cfg,
                            train,
                            train_labels,
                            test,
                            test_labels,
                            &selection,
                            metric,
                            knn,
                        )?;
                        let acc = &mut cells[mi][ki];
                        acc.millis.push(sample_ms + start.elapsed().as_secs_f64() * 1e3);
                        match accuracy {
                            Some(a) => acc.values.push(a),
                            None => acc.failed += 1,
                        }
                        log::info!(
                            "{} k={k} run {r} {} knn={knn}: accuracy {:?}",
                            sampler.name(),
                            metric.name(),
                            accuracy
                        );
                    }
                }
            }
            for (mi, row) in cells.into_iter().enumerate() {
                for (ki, acc) in row.into_iter().enumerate() {
                    let metric = cfg.graph.metrics[mi].name();
                    table
                        .rows
                        .push(acc.into_row(cfg, name, sampler.name(), metric, k, Some(cfg.graph.knn[ki])));
                }
            }
        }
    }
    table.sort();
    Ok(table)
}

#[allow(clippy::too_many_arguments)]
fn classification_accuracy(
    cfg: &ExperimentConfig,
    train: &PointSet64,
    train_labels: &[u32],
    test: &PointSet64,
    test_labels: &[u32],
    selection: &LandmarkSelection64,
    metric: MetricSpec,
    knn: usize,
) -> Result<Option<f64>> {
    let graph = build_graph(train, selection, metric.graph_metric(), NeighborRule::Knn(knn), cfg.sigma)
        .map_err(|e| e.at_stage("graph"))?;
    if !graph.is_connected() {
        log::warn!("landmark graph has {} components", graph.components());
        return Ok(None);
    }
    let embedding = laplacian_eigenmaps(&graph, cfg.dim).map_err(|e| e.at_stage("embed"))?;
    let train_embedding = match embed_all(train, selection, &embedding, cfg.sigma) {
        Ok(e) => e,
        Err(BenchError::Core(e)) if is_isolated(&e) => return Ok(None),
        Err(e) => return Err(e),
    };
    let landmark_points = train.select(selection.indices())?;
    let test_embedding = match extend_embedding(&landmark_points, &embedding, cfg.sigma, test) {
        Ok(e) => e,
        Err(e) if is_isolated(&e) => return Ok(None),
        Err(e) => return Err(e.at_stage("extend").into()),
    };
    let predicted = nearest_neighbor_labels(&train_embedding, train_labels, &test_embedding);
    let correct = predicted.iter().zip(test_labels).filter(|(p, t)| p == t).count();
    Ok(Some(correct as f64 / test_labels.len() as f64))
}

fn is_isolated(e: &Error) -> bool {
    match e {
        Error::IsolatedPoint { .. } => true,
        Error::Stage { source, .. } => is_isolated(source),
        _ => false,
    }
}

/// Label of the nearest reference row (Euclidean) for every query row; ties go to
/// the lower reference index.
pub fn nearest_neighbor_labels(reference: &DMatrix<f64>, labels: &[u32], queries: &DMatrix<f64>) -> Vec<u32> {
    let reference_t = reference.transpose();
    let queries_t = queries.transpose();
    (0..queries_t.ncols())
        .map(|q| {
            let x = queries_t.column(q);
            let mut best = (f64::INFINITY, 0);
            for (i, col) in reference_t.column_iter().enumerate() {
                let d = (col - x).norm_squared();
                if d < best.0 {
                    best = (d, i);
                }
            }
            labels[best.1]
        })
        .collect()
}

/// Landmarks drawn by the `sample` command.
#[derive(Debug, Clone)]
pub struct SampleOutput {
    pub dataset: Dataset,
    pub selection: LandmarkSelection64,
}

/// Draws one landmark set with the first configured sampler and landmark count.
pub fn run_sample(cfg: &ExperimentConfig) -> Result<SampleOutput> {
    cfg.validate(Purpose::Sample)?;
    let dataset = load_dataset(&cfg.dataset)?;
    check_k(cfg, dataset.train.len())?;
    let params = SamplerParams::from_config(cfg, CovarianceMode::None)?;
    let mut rng = rng_from_seed(cfg.seed);
    let selection = select_landmarks(&dataset.train, cfg.samplers[0], cfg.k[0], &params, &mut rng)
        .map_err(|e| stage(e, "sample"))?;
    Ok(SampleOutput { dataset, selection })
}

/// Runs the full pipeline with the first configured landmark count, metric and
/// neighbor count.
pub fn run_embed(cfg: &ExperimentConfig) -> Result<(Dataset, PipelineOutput64)> {
    cfg.validate(Purpose::Embed)?;
    let dataset = load_dataset(&cfg.dataset)?;
    check_k(cfg, dataset.train.len())?;
    let metric = cfg.graph.metrics[0];
    let covariance = match metric {
        MetricSpec::Bhattacharyya => cfg.graph.covariance.mode(),
        MetricSpec::Euclidean => CovarianceMode::None,
    };
    let params = SamplerParams::from_config(cfg, covariance)?;
    let pipeline = PipelineConfig64 {
        sampler: EfficientDppConfig {
            k: cfg.k[0],
            neighborhood: params.m.min(dataset.train.len()),
            update: params.update,
            covariance,
        },
        metric: metric.graph_metric(),
        rule: NeighborRule::Knn(cfg.graph.knn[0]),
        sigma: cfg.sigma,
        dim: cfg.dim,
        seed: cfg.seed,
        reconstruction_error: true,
    };
    let output = run_pipeline(&dataset.train, &pipeline)?;
    Ok((dataset, output))
}

/// CSV of an embedding: `index,landmark,phi1..phil`, then the ground-truth
/// coordinates (`t,h` for two-dimensional truth) and the label when present.
pub fn embedding_csv(points: &PointSet<f64>, output: &PipelineOutput64, header: &str) -> Result<String> {
    let l = output.embedding.ncols();
    let mut columns = vec!["index".to_owned(), "landmark".to_owned()];
    columns.extend((1..=l).map(|j| format!("phi{j}")));
    let truth = points.truth();
    if let Some(t) = truth {
        if t.nrows() == 2 {
            columns.extend(["t".to_owned(), "h".to_owned()]);
        } else {
            columns.extend((1..=t.nrows()).map(|j| format!("truth{j}")));
        }
    }
    if points.labels().is_some() {
        columns.push("label".to_owned());
    }
    let mut is_landmark = vec![false; points.len()];
    for &i in output.landmarks.indices() {
        is_landmark[i] = true;
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(&columns)?;
    let mut record = Vec::with_capacity(columns.len());
    for i in 0..points.len() {
        record.clear();
        record.push(i.to_string());
        record.push(u8::from(is_landmark[i]).to_string());
        record.extend(output.embedding.row(i).iter().map(f64::to_string));
        if let Some(t) = truth {
            record.extend(t.column(i).iter().map(f64::to_string));
        }
        if let Some(labels) = points.labels() {
            record.push(labels[i].to_string());
        }
        writer.write_record(&record)?;
    }
    let body = writer.into_inner().map_err(|e| e.into_error())?;
    Ok(format!("{header}{}", String::from_utf8(body).expect("csv output is utf-8")))
}

/// CSV of landmark indices and coordinates: `index,x0..x{d-1}`.
pub fn landmarks_csv(points: &PointSet<f64>, selection: &LandmarkSelection64, header: &str) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut columns = vec!["index".to_owned()];
    columns.extend((0..points.dim()).map(|j| format!("x{j}")));
    writer.write_record(&columns)?;
    for &i in selection.indices() {
        let mut record = vec![i.to_string()];
        record.extend(points.point_slice(i).iter().map(f64::to_string));
        writer.write_record(&record)?;
    }
    let body = writer.into_inner().map_err(|e| e.into_error())?;
    Ok(format!("{header}{}", String::from_utf8(body).expect("csv output is utf-8")))
}
