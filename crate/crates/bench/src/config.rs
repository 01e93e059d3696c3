//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "dataset": { "kind": "swiss-roll", "n": 1000, "scale": 0.12, "seed": 1 },
//!   "samplers": ["uniform", "kmeans++", "efficient-dpp"],
//!   "k": [50, 100],
//!   "repetitions": 50,
//!   "sigma": 1.0,
//!   "m": 30,
//!   "seed": 0,
//!   "output": "results/recon.csv"
//! }
//! ```

use std::path::{Path, PathBuf};

use dpp_landmarks::{CovarianceMode, GraphMetric};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSpec {
    SwissRoll {
        n: usize,
        #[serde(default)]
        noise: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Punctured unit sphere, optionally scaled by `scale` about the origin.
    FishBowl {
        n: usize,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Labeled Gaussian blobs; `test_per_blob` points per blob form a test split.
    Blobs {
        centers: Vec<Vec<f64>>,
        per_blob: usize,
        std: f64,
        #[serde(default)]
        test_per_blob: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Point CSV as written by `generate` (optional trailing `label` column).
    Csv {
        path: PathBuf,
        #[serde(default)]
        test_path: Option<PathBuf>,
    },
    /// MNIST-style IDX image and label files.
    Mnist {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
        #[serde(default)]
        train_limit: Option<usize>,
        #[serde(default)]
        test_limit: Option<usize>,
    },
}

fn one() -> f64 {
    1.0
}

impl DatasetSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DatasetSpec::SwissRoll { .. } => "swiss-roll",
            DatasetSpec::FishBowl { .. } => "fish-bowl",
            DatasetSpec::Blobs { .. } => "blobs",
            DatasetSpec::Csv { .. } => "csv",
            DatasetSpec::Mnist { .. } => "mnist",
        }
    }

    /// Training-set size when it is known without reading files.
    pub fn known_size(&self) -> Option<usize> {
        match self {
            DatasetSpec::SwissRoll { n, .. } | DatasetSpec::FishBowl { n, .. } => Some(*n),
            DatasetSpec::Blobs { centers, per_blob, .. } => Some(centers.len() * per_blob),
            DatasetSpec::Csv { .. } => None,
            DatasetSpec::Mnist { train_limit, .. } => *train_limit,
        }
    }

    pub fn has_labels(&self) -> bool {
        matches!(self, DatasetSpec::Blobs { .. } | DatasetSpec::Mnist { .. } | DatasetSpec::Csv { .. })
    }

    pub fn has_test_split(&self) -> bool {
        match self {
            DatasetSpec::Blobs { test_per_blob, .. } => *test_per_blob > 0,
            DatasetSpec::Csv { test_path, .. } => test_path.is_some(),
            DatasetSpec::Mnist { .. } => true,
            _ => false,
        }
    }

    fn files(&self) -> Vec<&Path> {
        match self {
            DatasetSpec::Csv { path, test_path } => {
                let mut v = vec![path.as_path()];
                v.extend(test_path.as_deref());
                v
            }
            DatasetSpec::Mnist {
                train_images,
                train_labels,
                test_images,
                test_labels,
                ..
            } => vec![train_images, train_labels, test_images, test_labels],
            _ => Vec::new(),
        }
    }
}

/// Landmark selection scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SamplerSpec {
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "kmeans-uniform")]
    KMeansUniform,
    #[serde(rename = "kmeans++-seed")]
    KMeansPlusPlusSeed,
    #[serde(rename = "kmeans++")]
    KMeansPlusPlus,
    #[serde(rename = "efficient-dpp")]
    EfficientDpp,
}

impl SamplerSpec {
    pub const ALL: [SamplerSpec; 5] = [
        SamplerSpec::Uniform,
        SamplerSpec::KMeansUniform,
        SamplerSpec::KMeansPlusPlusSeed,
        SamplerSpec::KMeansPlusPlus,
        SamplerSpec::EfficientDpp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SamplerSpec::Uniform => "uniform",
            SamplerSpec::KMeansUniform => "kmeans-uniform",
            SamplerSpec::KMeansPlusPlusSeed => "kmeans++-seed",
            SamplerSpec::KMeansPlusPlus => "kmeans++",
            SamplerSpec::EfficientDpp => "efficient-dpp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum UpdateSpec {
    /// Welsch update; `sigma` defaults to the kernel bandwidth.
    Welsch {
        #[serde(default)]
        sigma: Option<f64>,
    },
    /// `sin²(Δ/τ)`; automatic `τ` when omitted.
    SineSquared {
        #[serde(default)]
        tau: Option<f64>,
    },
}

impl Default for UpdateSpec {
    fn default() -> Self {
        UpdateSpec::Welsch { sigma: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricSpec {
    Euclidean,
    Bhattacharyya,
}

impl MetricSpec {
    pub fn name(self) -> &'static str {
        match self {
            MetricSpec::Euclidean => "euclidean",
            MetricSpec::Bhattacharyya => "bhattacharyya",
        }
    }

    pub fn graph_metric(self) -> GraphMetric {
        match self {
            MetricSpec::Euclidean => GraphMetric::Euclidean,
            MetricSpec::Bhattacharyya => GraphMetric::Bhattacharyya,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CovarianceSpec {
    #[default]
    Full,
    Diagonal,
}

impl CovarianceSpec {
    pub fn mode(self) -> CovarianceMode {
        match self {
            CovarianceSpec::Full => CovarianceMode::Full,
            CovarianceSpec::Diagonal => CovarianceMode::Diagonal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    #[serde(default = "default_metrics")]
    pub metrics: Vec<MetricSpec>,
    #[serde(default = "default_knn")]
    pub knn: Vec<usize>,
    /// Covariance estimate used by the Bhattacharyya metric.
    #[serde(default)]
    pub covariance: CovarianceSpec,
}

fn default_metrics() -> Vec<MetricSpec> {
    vec![MetricSpec::Euclidean]
}

fn default_knn() -> Vec<usize> {
    vec![10]
}

impl Default for GraphSpec {
    fn default() -> Self {
        Self {
            metrics: default_metrics(),
            knn: default_knn(),
            covariance: CovarianceSpec::default(),
        }
    }
}

/// Which points the robustness score is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreOn {
    #[default]
    Landmarks,
    AllPoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    #[serde(default = "default_samplers")]
    pub samplers: Vec<SamplerSpec>,
    pub k: Vec<usize>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "one")]
    pub sigma: f64,
    /// Neighborhood size of the efficient DPP sampler and of covariance estimates.
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub update: UpdateSpec,
    #[serde(default = "default_max_iter")]
    pub kmeans_max_iter: usize,
    #[serde(default)]
    pub graph: GraphSpec,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Record runtimes; disable for byte-reproducible output.
    #[serde(default = "default_true")]
    pub timing: bool,
    #[serde(default)]
    pub score_on: ScoreOn,
    /// Free-form remark copied into output metadata.
    #[serde(default)]
    pub note: Option<String>,
}

fn default_samplers() -> Vec<SamplerSpec> {
    vec![SamplerSpec::EfficientDpp]
}

fn default_repetitions() -> usize {
    1
}

fn default_m() -> usize {
    30
}

fn default_max_iter() -> usize {
    100
}

fn default_dim() -> usize {
    2
}

fn default_true() -> bool {
    true
}

/// What a configuration is about to be used for; decides which fields are required.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Generate,
    Sample,
    Embed,
    Reconstruction,
    Robustness,
    Classification,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Checks the configuration for `purpose`, reporting every problem at once.
    pub fn validate(&self, purpose: Purpose) -> Result<()> {
        let mut problems = Vec::new();
        let n = self.dataset.known_size();

        match &self.dataset {
            DatasetSpec::SwissRoll { n, noise, scale, .. } => {
                if *n == 0 {
                    problems.push("dataset.n must be positive".to_owned());
                }
                if !(*noise >= 0.0) {
                    problems.push("dataset.noise must be nonnegative".to_owned());
                }
                if !(*scale > 0.0) {
                    problems.push("dataset.scale must be positive".to_owned());
                }
            }
            DatasetSpec::FishBowl { n, scale, .. } => {
                if *n == 0 {
                    problems.push("dataset.n must be positive".to_owned());
                }
                if !(*scale > 0.0) {
                    problems.push("dataset.scale must be positive".to_owned());
                }
            }
            DatasetSpec::Blobs { centers, per_blob, std, .. } => {
                if centers.is_empty() || *per_blob == 0 {
                    problems.push("dataset needs at least one center and per_blob >= 1".to_owned());
                }
                if !(*std >= 0.0) {
                    problems.push("dataset.std must be nonnegative".to_owned());
                }
            }
            _ => {}
        }
        for file in self.dataset.files() {
            if !file.exists() {
                problems.push(format!("file {} does not exist", file.display()));
            }
        }

        if purpose != Purpose::Generate {
            if self.k.is_empty() {
                problems.push("k must list at least one landmark count".to_owned());
            }
            for &k in &self.k {
                if k == 0 {
                    problems.push("k values must be positive".to_owned());
                }
                if let Some(n) = n {
                    if k > n {
                        problems.push(format!("k = {k} exceeds the {n} available points"));
                    }
                }
            }
            if self.samplers.is_empty() {
                problems.push("samplers must not be empty".to_owned());
            }
            if self.repetitions == 0 {
                problems.push("repetitions must be at least 1".to_owned());
            }
            if !(self.sigma > 0.0 && self.sigma.is_finite()) {
                problems.push("sigma must be positive".to_owned());
            }
            if self.m == 0 {
                problems.push("m must be positive".to_owned());
            }
            if let Some(n) = n {
                if self.m > n {
                    problems.push(format!("m = {} exceeds the {n} available points", self.m));
                }
            }
            match self.update {
                UpdateSpec::Welsch { sigma: Some(s) } if !(s > 0.0) => {
                    problems.push("update.sigma must be positive".to_owned())
                }
                UpdateSpec::SineSquared { tau: Some(t) } if !(t > 0.0) => {
                    problems.push("update.tau must be positive".to_owned())
                }
                _ => {}
            }
        }

        if matches!(purpose, Purpose::Embed | Purpose::Robustness | Purpose::Classification) {
            if self.graph.metrics.is_empty() {
                problems.push("graph.metrics must not be empty".to_owned());
            }
            if self.graph.knn.is_empty() {
                problems.push("graph.knn must not be empty".to_owned());
            }
            for &knn in &self.graph.knn {
                if knn == 0 {
                    problems.push("graph.knn values must be positive".to_owned());
                }
                for &k in &self.k {
                    if knn >= k {
                        problems.push(format!("graph.knn = {knn} must be below the landmark count {k}"));
                    }
                }
            }
            if self.dim == 0 {
                problems.push("dim must be positive".to_owned());
            }
            for &k in &self.k {
                if self.dim >= k {
                    problems.push(format!("dim = {} must be below the landmark count {k}", self.dim));
                }
            }
        }
        if purpose == Purpose::Robustness && !self.samplers.contains(&SamplerSpec::EfficientDpp) {
            problems.push("robustness runs use the efficient-dpp sampler; list it in samplers".to_owned());
        }
        if purpose == Purpose::Classification {
            if !self.dataset.has_labels() {
                problems.push(format!("dataset {} has no labels", self.dataset.name()));
            }
            if !self.dataset.has_test_split() {
                problems.push("classification needs a test split".to_owned());
            }
        }

        if problems.is_empty() {
            Ok(())
        } else {
            Err(BenchError::Config(problems))
        }
    }
}
