use dpp_landmarks::datasets::{
    generate_blobs, generate_fish_bowl, generate_swiss_roll_scaled, read_csv, read_idx,
};
use dpp_landmarks::PointSet64;

use crate::config::DatasetSpec;
use crate::error::Result;

/// A loaded dataset: the points landmarks are drawn from and an optional test split.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: &'static str,
    pub train: PointSet64,
    pub test: Option<PointSet64>,
}

/// Multiplies every coordinate by `factor`, keeping labels and ground truth.
fn scaled(points: PointSet64, factor: f64) -> Result<PointSet64> {
    if factor == 1.0 {
        return Ok(points);
    }
    let mut out = PointSet64::new(points.coords() * factor)?;
    if let Some(truth) = points.truth() {
        out = out.with_truth(truth.clone())?;
    }
    if let Some(labels) = points.labels() {
        out = out.with_labels(labels.to_vec())?;
    }
    Ok(out)
}

pub fn load_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    let (train, test) = match spec {
        DatasetSpec::SwissRoll { n, noise, scale, seed } => {
            (generate_swiss_roll_scaled(*n, *noise, *scale, *seed)?, None)
        }
        DatasetSpec::FishBowl { n, scale, seed } => (scaled(generate_fish_bowl(*n, *seed)?, *scale)?, None),
        DatasetSpec::Blobs {
            centers,
            per_blob,
            std,
            test_per_blob,
            seed,
        } => {
            let train = generate_blobs(centers, *per_blob, *std, *seed)?;
            let test = if *test_per_blob > 0 {
                Some(generate_blobs(centers, *test_per_blob, *std, seed.wrapping_add(1))?)
            } else {
                None
            };
            (train, test)
        }
        DatasetSpec::Csv { path, test_path } => {
            let test = test_path.as_ref().map(read_csv).transpose()?;
            (read_csv(path)?, test)
        }
        DatasetSpec::Mnist {
            train_images,
            train_labels,
            test_images,
            test_labels,
            train_limit,
            test_limit,
        } => (
            read_idx(train_images, train_labels, *train_limit)?,
            Some(read_idx(test_images, test_labels, *test_limit)?),
        ),
    };
    log::info!(
        "loaded {}: {} points in {} dimensions{}",
        spec.name(),
        train.len(),
        train.dim(),
        test.as_ref().map_or(String::new(), |t| format!(", {} test points", t.len()))
    );
    Ok(Dataset {
        name: spec.name(),
        train,
        test,
    })
}
