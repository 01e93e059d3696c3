use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::PointSet;
use crate::{rng_from_seed, Error, Result, Scalar};

/// Range of the roll angle `t`.
pub const SWISS_ROLL_T_RANGE: (f64, f64) = (1.5 * PI, 4.5 * PI);
/// Height of the roll along the `x2` axis.
pub const SWISS_ROLL_HEIGHT: f64 = 21.0;
/// Points with `z` above this are removed from the fish bowl (top 5% of the sphere's height).
pub const FISH_BOWL_PUNCTURE_HEIGHT: f64 = 0.9;

/// Swiss roll `(t cos t, h, t sin t)` with `t ~ U[3π/2, 9π/2]`, `h ~ U[0, 21]` and
/// isotropic Gaussian noise of standard deviation `noise`. Truth rows are `(t, h)`.
pub fn generate_swiss_roll<T: Scalar>(n: usize, noise: f64, seed: u64) -> Result<PointSet<T>> {
    generate_swiss_roll_scaled(n, noise, 1.0, seed)
}

/// Swiss roll with all ambient coordinates multiplied by `scale` (noise is added before
/// scaling). Truth keeps the unscaled `(t, h)`.
pub fn generate_swiss_roll_scaled<T: Scalar>(
    n: usize,
    noise: f64,
    scale: f64,
    seed: u64,
) -> Result<PointSet<T>> {
    if n == 0 {
        return Err(Error::invalid("swiss roll needs n >= 1"));
    }
    if !(noise >= 0.0 && noise.is_finite()) || !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::invalid("noise must be >= 0 and scale > 0"));
    }
    let mut rng = rng_from_seed(seed);
    let (t0, t1) = SWISS_ROLL_T_RANGE;
    let mut coords = Vec::with_capacity(3 * n);
    let mut truth = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let t = rng.random_range(t0..=t1);
        let h = rng.random_range(0.0..=SWISS_ROLL_HEIGHT);
        let mut p = [t * t.cos(), h, t * t.sin()];
        if noise > 0.0 {
            for c in &mut p {
                let z: f64 = rng.sample(StandardNormal);
                *c += noise * z;
            }
        }
        coords.extend(p.iter().map(|&c| T::lit(c * scale)));
        truth.push(T::lit(t));
        truth.push(T::lit(h));
    }
    PointSet::new(DMatrix::from_vec(3, n, coords))?.with_truth(DMatrix::from_vec(2, n, truth))
}

/// Punctured unit sphere, dense at the top and sparse at the bottom.
///
/// Planar points are drawn uniformly from a disk and lifted by the inverse stereographic
/// projection through the north pole, so the disk centre lands on the south pole and the
/// rim on the circle `z = 0.9`. Area distortion of the projection makes the density grow
/// monotonically towards the puncture. Truth holds the planar pre-images.
pub fn generate_fish_bowl<T: Scalar>(n: usize, seed: u64) -> Result<PointSet<T>> {
    if n == 0 {
        return Err(Error::invalid("fish bowl needs n >= 1"));
    }
    let z_max = FISH_BOWL_PUNCTURE_HEIGHT;
    // |u|^2 = (1 + z) / (1 - z) on the rim
    let radius = ((1.0 + z_max) / (1.0 - z_max)).sqrt();
    let mut rng = rng_from_seed(seed);
    let mut coords = Vec::with_capacity(3 * n);
    let mut truth = Vec::with_capacity(2 * n);
    for _ in 0..n {
        // u in [0, 1) keeps the rim itself out of the sample
        let r = radius * rng.random::<f64>().sqrt();
        let phi = 2.0 * PI * rng.random::<f64>();
        let (u1, u2) = (r * phi.cos(), r * phi.sin());
        let s = u1 * u1 + u2 * u2;
        let p = [2.0 * u1 / (1.0 + s), 2.0 * u2 / (1.0 + s), (s - 1.0) / (s + 1.0)];
        coords.extend(p.iter().map(|&c| T::lit(c)));
        truth.push(T::lit(u1));
        truth.push(T::lit(u2));
    }
    PointSet::new(DMatrix::from_vec(3, n, coords))?.with_truth(DMatrix::from_vec(2, n, truth))
}

/// Labeled isotropic Gaussian blobs, `per_blob` points around each centre.
pub fn generate_blobs<T: Scalar>(
    centers: &[Vec<f64>],
    per_blob: usize,
    std_dev: f64,
    seed: u64,
) -> Result<PointSet<T>> {
    let d = centers.first().map(Vec::len).unwrap_or(0);
    if d == 0 || per_blob == 0 || centers.iter().any(|c| c.len() != d) {
        return Err(Error::invalid("blobs need equal-length non-empty centres and per_blob >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    let n = centers.len() * per_blob;
    let mut coords = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for (label, c) in centers.iter().enumerate() {
        for _ in 0..per_blob {
            for &ci in c {
                let z: f64 = rng.sample(StandardNormal);
                coords.push(T::lit(ci + std_dev * z));
            }
            labels.push(label as u32);
        }
    }
    PointSet::new(DMatrix::from_vec(d, n, coords))?.with_labels(labels)
}
