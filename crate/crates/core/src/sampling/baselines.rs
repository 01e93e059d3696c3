use nalgebra::DMatrix;
use rand::Rng;

use super::{draw_weighted, LandmarkSelection};
use crate::datasets::{sq_dist, PointSet};
use crate::{Error, Result, Scalar};

/// Uniform `k`-subset without replacement.
pub fn uniform_sample<T: Scalar, R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<LandmarkSelection<T>> {
    if k > n {
        return Err(Error::invalid(format!("cannot draw {k} of {n} points")));
    }
    Ok(LandmarkSelection::new(
        rand::seq::index::sample(rng, n, k).into_vec(),
    ))
}

/// K-means++ (D²) seeding. The first index is uniform; each further index is drawn with
/// probability proportional to the squared distance to its nearest chosen seed. When
/// all remaining points coincide with a seed, the draw falls back to uniform among the
/// points not chosen yet.
pub fn kmeanspp_seed<T: Scalar, R: Rng + ?Sized>(
    points: &PointSet<T>,
    k: usize,
    rng: &mut R,
) -> Result<LandmarkSelection<T>> {
    let n = points.len();
    if k > n {
        return Err(Error::invalid(format!("cannot seed {k} of {n} points")));
    }
    let mut chosen = Vec::with_capacity(k);
    if k == 0 {
        return Ok(LandmarkSelection::new(chosen));
    }
    let mut taken = vec![false; n];
    let first = rng.random_range(0..n);
    chosen.push(first);
    taken[first] = true;
    let mut d2: Vec<T> = (0..n).map(|j| points.sq_dist(first, j)).collect();
    while chosen.len() < k {
        let next = match draw_weighted(&d2, rng) {
            Some(i) if !taken[i] => i,
            _ => {
                let free: Vec<usize> = (0..n).filter(|&j| !taken[j]).collect();
                free[rng.random_range(0..free.len())]
            }
        };
        chosen.push(next);
        taken[next] = true;
        let x = points.point_slice(next);
        for (j, slot) in d2.iter_mut().enumerate() {
            let d = sq_dist(x, points.point_slice(j));
            if d < *slot {
                *slot = d;
            }
        }
        d2[next] = T::zero();
    }
    Ok(LandmarkSelection::new(chosen))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KMeansInit {
    Uniform,
    PlusPlus,
}

/// Outcome of [`kmeans_fit`].
#[derive(Debug, Clone)]
pub struct KMeansFit<T: Scalar> {
    /// Final centroids as columns (`d × k`).
    pub centroids: DMatrix<T>,
    /// Cluster of each point.
    pub assignment: Vec<usize>,
    /// Sum of squared distances of points to their centroid.
    pub distortion: T,
    pub iterations: usize,
    /// Data points nearest to the centroids, distinct.
    pub landmarks: LandmarkSelection<T>,
}

/// Lloyd K-means; returns only the snapped landmarks. See [`kmeans_fit`].
pub fn kmeans<T: Scalar, R: Rng + ?Sized>(
    points: &PointSet<T>,
    k: usize,
    init: KMeansInit,
    max_iter: usize,
    rng: &mut R,
) -> Result<LandmarkSelection<T>> {
    kmeans_fit(points, k, init, max_iter, rng).map(|f| f.landmarks)
}

/// Lloyd iterations from uniform or K-means++ seeds, until assignments stop changing or
/// `max_iter` is reached.
///
/// A cluster that becomes empty is re-seeded at the point farthest from its current
/// centroid. Landmarks are obtained by snapping each centroid, in order, to the nearest
/// data point not already used, so they are always `k` distinct indices. With
/// `max_iter = 0` the seeds are returned unchanged.
pub fn kmeans_fit<T: Scalar, R: Rng + ?Sized>(
    points: &PointSet<T>,
    k: usize,
    init: KMeansInit,
    max_iter: usize,
    rng: &mut R,
) -> Result<KMeansFit<T>> {
    let n = points.len();
    let d = points.dim();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let seeds = match init {
        KMeansInit::Uniform => uniform_sample::<T, R>(n, k, rng)?,
        KMeansInit::PlusPlus => kmeanspp_seed(points, k, rng)?,
    };
    let mut centroids = points.select(seeds.indices())?.coords().clone();
    let mut assignment = vec![0usize; n];
    let mut dist = vec![T::zero(); n];
    assign(points, &centroids, &mut assignment, &mut dist);

    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut sums = DMatrix::<T>::zeros(d, k);
        let mut counts = vec![0usize; k];
        for (j, &c) in assignment.iter().enumerate() {
            counts[c] += 1;
            let mut col = sums.column_mut(c);
            col += points.point(j);
        }
        for c in 0..k {
            if counts[c] > 0 {
                let mean = sums.column(c) / T::from_usize_lossy(counts[c]);
                centroids.set_column(c, &mean);
            } else {
                let far = (0..n)
                    .max_by(|&a, &b| dist[a].partial_cmp(&dist[b]).unwrap().then(b.cmp(&a)))
                    .unwrap();
                centroids.set_column(c, &points.point(far));
                dist[far] = T::zero();
            }
        }
        let changed = assign(points, &centroids, &mut assignment, &mut dist);
        if !changed {
            break;
        }
    }
    let distortion = dist.iter().fold(T::zero(), |acc, &x| acc + x);

    let landmarks = if iterations == 0 {
        seeds
    } else {
        LandmarkSelection::new(snap_to_points(points, &centroids))
    };
    Ok(KMeansFit {
        centroids,
        assignment,
        distortion,
        iterations,
        landmarks,
    })
}

/// Assigns each point to its nearest centroid (lower index on ties); returns whether any
/// assignment changed.
fn assign<T: Scalar>(
    points: &PointSet<T>,
    centroids: &DMatrix<T>,
    assignment: &mut [usize],
    dist: &mut [T],
) -> bool {
    let mut changed = false;
    for j in 0..points.len() {
        let x = points.point_slice(j);
        let mut best = (T::infinity(), 0);
        for (c, col) in centroids.column_iter().enumerate() {
            let d2 = sq_dist(x, col.as_slice());
            if d2 < best.0 {
                best = (d2, c);
            }
        }
        if assignment[j] != best.1 {
            changed = true;
            assignment[j] = best.1;
        }
        dist[j] = best.0;
    }
    changed
}

fn snap_to_points<T: Scalar>(points: &PointSet<T>, centroids: &DMatrix<T>) -> Vec<usize> {
    let mut used = vec![false; points.len()];
    let mut out = Vec::with_capacity(centroids.ncols());
    for col in centroids.column_iter() {
        let c = col.as_slice();
        let mut best = (T::infinity(), usize::MAX);
        for j in (0..points.len()).filter(|&j| !used[j]) {
            let d2 = sq_dist(c, points.point_slice(j));
            if d2 < best.0 {
                best = (d2, j);
            }
        }
        used[best.1] = true;
        out.push(best.1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::generate_blobs;
    use crate::rng_from_seed;
    use crate::sampling::combinations;

    #[test]
    fn uniform_full_and_half() {
        let mut rng = rng_from_seed(0);
        let s = uniform_sample::<f64, _>(5, 5, &mut rng).unwrap();
        assert_eq!(s.sorted_indices(), vec![0, 1, 2, 3, 4]);
        let ones = (0..100_000)
            .filter(|_| uniform_sample::<f64, _>(2, 1, &mut rng).unwrap().indices()[0] == 1)
            .count();
        assert!((ones as f64 / 1e5 - 0.5).abs() < 0.01);
        assert!(uniform_sample::<f64, _>(2, 3, &mut rng).is_err());
    }

    #[test]
    fn uniform_subsets_pass_chi_square() {
        let subsets = combinations(10, 3);
        let mut rng = rng_from_seed(1);
        let draws = 60_000;
        let mut counts = vec![0usize; subsets.len()];
        for _ in 0..draws {
            let s = uniform_sample::<f64, _>(10, 3, &mut rng).unwrap().sorted_indices();
            counts[subsets.binary_search(&s).unwrap()] += 1;
        }
        let expected = draws as f64 / subsets.len() as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // chi-square 0.99 quantile for 119 degrees of freedom
        assert!(chi2 < 158.95, "chi2 = {chi2}");
    }

    #[test]
    fn plusplus_single_seed_is_uniform() {
        let p = PointSet::from_rows(4, 1, &[0.0f64, 1.0, 5.0, 9.0]).unwrap();
        let mut rng = rng_from_seed(2);
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            counts[kmeanspp_seed(&p, 1, &mut rng).unwrap().indices()[0]] += 1;
        }
        assert!(counts.iter().all(|&c| (c as f64 / 4e4 - 0.25).abs() < 0.01));
    }

    #[test]
    fn plusplus_second_seed_crosses_clusters() {
        let mut prev = 0.0;
        for sep in [2.0, 10.0, 100.0] {
            let p: PointSet<f64> =
                generate_blobs(&[vec![0.0, 0.0], vec![sep, 0.0]], 50, 0.5, 3).unwrap();
            let labels = p.labels().unwrap().to_vec();
            let mut rng = rng_from_seed(4);
            let crossed = (0..2000)
                .filter(|_| {
                    let s = kmeanspp_seed(&p, 2, &mut rng).unwrap();
                    labels[s.indices()[0]] != labels[s.indices()[1]]
                })
                .count() as f64
                / 2000.0;
            assert!(crossed >= prev - 0.02);
            prev = crossed;
        }
        assert!(prev > 0.99, "{prev}");
    }

    #[test]
    fn plusplus_duplicates_fall_back_to_uniform() {
        let p = PointSet::from_rows(5, 2, &[1.0f64; 10]).unwrap();
        let mut rng = rng_from_seed(5);
        let s = kmeanspp_seed(&p, 5, &mut rng).unwrap();
        assert_eq!(s.sorted_indices(), vec![0, 1, 2, 3, 4]);
        assert!(kmeanspp_seed(&p, 6, &mut rng).is_err());
    }

    #[test]
    fn kmeans_all_points() {
        let p: PointSet<f64> = generate_blobs(&[vec![0.0], vec![3.0]], 6, 1.0, 6).unwrap();
        for init in [KMeansInit::Uniform, KMeansInit::PlusPlus] {
            let f = kmeans_fit(&p, 12, init, 50, &mut rng_from_seed(7)).unwrap();
            assert_eq!(f.landmarks.sorted_indices(), (0..12).collect::<Vec<_>>());
            assert!(f.distortion.abs() < 1e-24);
        }
    }

    #[test]
    fn kmeans_separates_two_blobs() {
        let p: PointSet<f64> =
            generate_blobs(&[vec![0.0, 0.0], vec![8.0, 8.0]], 100, 1.0, 8).unwrap();
        let labels = p.labels().unwrap().to_vec();
        for init in [KMeansInit::Uniform, KMeansInit::PlusPlus] {
            let ok = (0..100)
                .filter(|&r| {
                    let s = kmeans(&p, 2, init, 100, &mut rng_from_seed(r)).unwrap();
                    labels[s.indices()[0]] != labels[s.indices()[1]]
                })
                .count();
            assert!(ok >= 95, "{init:?}: {ok}");
        }
    }

    #[test]
    fn zero_iterations_equals_seeding() {
        let p: PointSet<f64> = crate::datasets::generate_swiss_roll(300, 0.1, 9).unwrap();
        for seed in 0..10 {
            let a = kmeans(&p, 25, KMeansInit::PlusPlus, 0, &mut rng_from_seed(seed)).unwrap();
            let b = kmeanspp_seed(&p, 25, &mut rng_from_seed(seed)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn lloyd_does_not_increase_distortion_and_landmarks_distinct() {
        let p: PointSet<f64> = crate::datasets::generate_swiss_roll(400, 0.0, 10).unwrap();
        let f0 = kmeans_fit(&p, 30, KMeansInit::PlusPlus, 0, &mut rng_from_seed(11)).unwrap();
        let f = kmeans_fit(&p, 30, KMeansInit::PlusPlus, 100, &mut rng_from_seed(11)).unwrap();
        assert!(f.distortion <= f0.distortion);
        let mut idx = f.landmarks.sorted_indices();
        idx.dedup();
        assert_eq!(idx.len(), 30);
    }
}
