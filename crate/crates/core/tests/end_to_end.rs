use dpp_landmarks::datasets::generate_swiss_roll;
use dpp_landmarks::graph::{build_graph, extend_embedding, laplacian_eigenmaps, run_pipeline};
use dpp_landmarks::quality::dominant_spearman;
use dpp_landmarks::sampling::efficient_dpp_sample;
use dpp_landmarks::{
    rng_from_seed, CovarianceMode, EfficientDppConfig, GraphMetric, NeighborRule, PipelineConfig,
    PointSet64, UpdateFunction,
};

#[test]
fn extended_embedding_tracks_roll_parameters() {
    let points: PointSet64 = generate_swiss_roll(2000, 0.0, 1).unwrap();
    let cfg = EfficientDppConfig {
        k: 200,
        neighborhood: 20,
        update: UpdateFunction::welsch(3.0).unwrap(),
        covariance: CovarianceMode::None,
    };
    let landmarks = efficient_dpp_sample(&points, &cfg, &mut rng_from_seed(2)).unwrap();
    let graph = build_graph(&points, &landmarks, GraphMetric::Euclidean, NeighborRule::Knn(6), 2.0).unwrap();
    let emb = laplacian_eigenmaps(&graph, 2).unwrap();
    let landmark_points = points.select(landmarks.indices()).unwrap();
    let rest = dpp_landmarks::datasets::complement(landmarks.indices(), points.len());
    let targets = points.select(&rest).unwrap();
    let extended = extend_embedding(&landmark_points, &emb, 2.0, &targets).unwrap();
    let rho = dominant_spearman(&extended, targets.truth().unwrap()).unwrap();
    assert!(rho >= 0.9, "dominant |rho| = {rho}");
}

#[test]
fn bhattacharyya_pipeline_on_large_roll() {
    let points: PointSet64 = generate_swiss_roll(10_000, 0.0, 3).unwrap();
    let config = PipelineConfig {
        sampler: EfficientDppConfig {
            k: 500,
            neighborhood: 40,
            update: UpdateFunction::welsch(3.0).unwrap(),
            covariance: CovarianceMode::Full,
        },
        metric: GraphMetric::Bhattacharyya,
        rule: NeighborRule::Knn(50),
        sigma: 2.0,
        dim: 2,
        seed: 4,
        reconstruction_error: false,
    };
    let out = run_pipeline(&points, &config).unwrap();
    assert_eq!(out.components, 1);
    let rho = dominant_spearman(&out.embedding, points.truth().unwrap()).unwrap();
    assert!(rho >= 0.9, "dominant |rho| = {rho}");
}
