//! Nyström completion of a kernel matrix from landmark rows.
//!
//! With landmarks `J` and the remaining points `J̄`, the unseen block is approximated by
//! `K_{J̄J̄} ≈ K_{JJ̄}ᵀ K_{JJ}⁺ K_{JJ̄}` and its quality is measured in trace norm:
//!
//! ```text
//! ‖K − K̃‖_tr = tr(K_{J̄J̄}) − tr(K_{JJ̄}ᵀ K_{JJ}⁺ K_{JJ̄})
//! ```

use nalgebra::{DMatrix, DVector};

use crate::datasets::{check_distinct_indices, complement, PointSet};
use crate::linalg::{check_symmetric, inverse_spectrum, pseudo_inverse_symmetric};
use crate::metric::{kernel_cross, DistanceMode, KernelSpec};
use crate::{Error, Result, Scalar};

/// Largest point count accepted by [`nystrom_reconstruct`].
pub const MAX_RECONSTRUCT_POINTS: usize = 2000;

/// Columns of `K_{JJ̄}` evaluated at a time by [`reconstruction_error_lazy`].
pub const LAZY_TILE_COLUMNS: usize = 512;

/// Landmark indices, the pseudo-inverse of their kernel block and the trace-norm error.
#[derive(Debug, Clone)]
pub struct NystromReconstruction<T: Scalar> {
    landmarks: Vec<usize>,
    landmark_pinv: DMatrix<T>,
    raw_error: T,
}

impl<T: Scalar> NystromReconstruction<T> {
    /// Builds the reconstruction of a dense kernel.
    pub fn new(kernel: &DMatrix<T>, landmarks: &[usize]) -> Result<Self> {
        let (kjj, cross, rest_trace) = dense_blocks(kernel, landmarks)?;
        let landmark_pinv = pseudo_inverse_symmetric(&kjj);
        let raw_error = rest_trace - captured_trace(&kjj, &cross);
        Ok(Self {
            landmarks: landmarks.to_vec(),
            landmark_pinv,
            raw_error,
        })
    }

    pub fn landmarks(&self) -> &[usize] {
        &self.landmarks
    }

    /// `K_{JJ}⁺`.
    pub fn landmark_pinv(&self) -> &DMatrix<T> {
        &self.landmark_pinv
    }

    /// Trace-norm error, clamped at zero.
    pub fn error(&self) -> T {
        self.raw_error.max(T::zero())
    }

    /// Error as computed, possibly a tiny negative number from rounding.
    pub fn raw_error(&self) -> T {
        self.raw_error
    }
}

fn check_landmarks(landmarks: &[usize], n: usize) -> Result<()> {
    if landmarks.is_empty() {
        return Err(Error::invalid("landmark set must not be empty"));
    }
    check_distinct_indices(landmarks, n)
}

/// `(K_JJ, K_JJ̄, tr K_J̄J̄)` of a dense kernel.
fn dense_blocks<T: Scalar>(
    kernel: &DMatrix<T>,
    landmarks: &[usize],
) -> Result<(DMatrix<T>, DMatrix<T>, T)> {
    if !kernel.is_square() {
        return Err(Error::invalid("kernel matrix must be square"));
    }
    check_symmetric(kernel)?;
    let n = kernel.nrows();
    check_landmarks(landmarks, n)?;
    let rest = complement(landmarks, n);
    let kjj = kernel.select_rows(landmarks).select_columns(landmarks);
    let cross = kernel.select_rows(landmarks).select_columns(&rest);
    let trace = rest.iter().fold(T::zero(), |acc, &j| acc + kernel[(j, j)]);
    Ok((kjj, cross, trace))
}

/// `tr(Cᵀ K_JJ⁺ C)` for a block of columns `C` of `K_{JJ̄}`.
fn captured_trace<T: Scalar>(kjj: &DMatrix<T>, cross: &DMatrix<T>) -> T {
    let (vecs, inv) = inverse_spectrum(kjj);
    captured_trace_with(&vecs, &inv, cross)
}

fn captured_trace_with<T: Scalar>(vecs: &DMatrix<T>, inv: &DVector<T>, cross: &DMatrix<T>) -> T {
    let projected = vecs.tr_mul(cross);
    let mut total = T::zero();
    for (r, w) in inv.iter().enumerate() {
        if *w != T::zero() {
            total += *w * projected.row(r).norm_squared();
        }
    }
    total
}

/// Trace-norm Nyström error of a dense kernel, clamped at zero.
pub fn reconstruction_error<T: Scalar>(kernel: &DMatrix<T>, landmarks: &[usize]) -> Result<T> {
    Ok(NystromReconstruction::new(kernel, landmarks)?.error())
}

/// Trace-norm Nyström error evaluated from points without forming the `n × n` kernel.
///
/// Only `K_{JJ}` and `K_{JJ̄}` are computed, the latter in tiles of
/// [`LAZY_TILE_COLUMNS`] columns for Euclidean kernels. The Gaussian kernel has a unit
/// diagonal, so `tr(K_{J̄J̄}) = |J̄|`.
pub fn reconstruction_error_lazy<T: Scalar>(
    points: &PointSet<T>,
    spec: &KernelSpec<T>,
    landmarks: &[usize],
) -> Result<T> {
    let n = points.len();
    check_landmarks(landmarks, n)?;
    let rest = complement(landmarks, n);
    let kjj = kernel_cross(points, landmarks, landmarks, spec)?;
    let (vecs, inv) = inverse_spectrum(&kjj);
    let captured = match spec.mode() {
        DistanceMode::Euclidean => {
            let mut total = T::zero();
            for tile in rest.chunks(LAZY_TILE_COLUMNS) {
                let cross = kernel_cross(points, landmarks, tile, spec)?;
                total += captured_trace_with(&vecs, &inv, &cross);
            }
            total
        }
        // shortest paths are computed per landmark anyway, so the block is built at once
        DistanceMode::Geodesic { .. } => {
            let cross = kernel_cross(points, landmarks, &rest, spec)?;
            captured_trace_with(&vecs, &inv, &cross)
        }
    };
    let trace = T::from_usize_lossy(rest.len()) * spec.weight_sq(T::zero());
    Ok((trace - captured).max(T::zero()))
}

/// Explicit `K̃_{J̄J̄} = K_{JJ̄}ᵀ K_{JJ}⁺ K_{JJ̄}`, rows and columns ordered as the
/// ascending complement of `landmarks`. Limited to [`MAX_RECONSTRUCT_POINTS`] points.
pub fn nystrom_reconstruct<T: Scalar>(kernel: &DMatrix<T>, landmarks: &[usize]) -> Result<DMatrix<T>> {
    let n = kernel.nrows();
    if n > MAX_RECONSTRUCT_POINTS {
        return Err(Error::TooLarge {
            what: "explicit Nyström reconstruction",
            n,
            max: MAX_RECONSTRUCT_POINTS,
        });
    }
    let (kjj, cross, _) = dense_blocks(kernel, landmarks)?;
    let pinv = pseudo_inverse_symmetric(&kjj);
    Ok(cross.tr_mul(&(pinv * &cross)))
}

/// Row means of the landmark kernel block `K_JJ`, the expectation over landmarks used
/// to normalize the cross kernel in [`oos_extend`].
pub fn landmark_kernel_means<T: Scalar>(kjj: &DMatrix<T>) -> DVector<T> {
    let k = T::from_usize_lossy(kjj.ncols().max(1));
    DVector::from_iterator(kjj.nrows(), kjj.row_iter().map(|r| r.sum() / k))
}

/// Extends a landmark embedding to the remaining points.
///
/// `phi_landmarks` is `k × l` (one row per landmark), `eigenvalues` holds the `l`
/// eigenvalues of the embedded operator, `cross` is the `k × m` kernel between landmarks
/// and new points and `landmark_means` the row means of `K_JJ`
/// (see [`landmark_kernel_means`]). The cross kernel is normalized as
///
/// ```text
/// K̃_ij = K_ij / (k · sqrt(E_i'[K_i'j] · E_j'[K_ij']))
/// ```
///
/// with both expectations taken over the landmarks, and the result is
/// `Φ_J̄ = K̃ᵀ Φ_J Λ⁻¹` (`m × l`).
pub fn oos_extend<T: Scalar>(
    phi_landmarks: &DMatrix<T>,
    eigenvalues: &[T],
    cross: &DMatrix<T>,
    landmark_means: &DVector<T>,
) -> Result<DMatrix<T>> {
    let k = phi_landmarks.nrows();
    let l = phi_landmarks.ncols();
    if eigenvalues.len() != l {
        return Err(Error::invalid(format!(
            "{} eigenvalues for a {l}-dimensional embedding",
            eigenvalues.len()
        )));
    }
    if cross.nrows() != k || landmark_means.len() != k {
        return Err(Error::invalid(format!(
            "cross kernel has {} rows and {} landmark means for {k} landmarks",
            cross.nrows(),
            landmark_means.len()
        )));
    }
    if let Some(index) = eigenvalues.iter().position(|&v| v == T::zero() || !v.is_finite()) {
        return Err(Error::ZeroEigenvalue { index });
    }
    if let Some(index) = landmark_means.iter().position(|&v| !(v > T::zero())) {
        return Err(Error::invalid(format!("landmark {index} has zero kernel mass")));
    }
    let kf = T::from_usize_lossy(k);
    let mut weights = cross.clone();
    for (j, mut col) in weights.column_iter_mut().enumerate() {
        let col_mean = col.sum() / kf;
        if !(col_mean > T::zero()) {
            return Err(Error::IsolatedPoint { index: j });
        }
        for (i, w) in col.iter_mut().enumerate() {
            *w /= kf * (col_mean * landmark_means[i]).sqrt();
        }
    }
    let mut out = weights.tr_mul(phi_landmarks);
    for (c, &lambda) in eigenvalues.iter().enumerate() {
        out.column_mut(c).scale_mut(T::one() / lambda);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::kernel_matrix;
    use crate::rng_from_seed;
    use crate::sampling::combinations;
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn random_points(n: usize, d: usize, seed: u64) -> PointSet<f64> {
        let mut rng = rng_from_seed(seed);
        let v: Vec<f64> = (0..n * d).map(|_| rng.random_range(0.0..1.0)).collect();
        PointSet::from_rows(n, d, &v).unwrap()
    }

    /// Independent evaluation via an SVD-based pseudo-inverse.
    fn oracle(kernel: &DMatrix<f64>, landmarks: &[usize]) -> f64 {
        let rest = complement(landmarks, kernel.nrows());
        let kjj = kernel.select_rows(landmarks).select_columns(landmarks);
        let cross = kernel.select_rows(landmarks).select_columns(&rest);
        let svd = kjj.svd(true, true);
        let cut = 1e-10 * svd.singular_values.max();
        let pinv = svd.pseudo_inverse(cut).unwrap();
        let rest_block = kernel.select_rows(&rest).select_columns(&rest);
        rest_block.trace() - (cross.transpose() * pinv * &cross).trace()
    }

    #[test]
    fn all_points_give_zero() {
        let k = kernel_matrix(&random_points(12, 2, 0), &KernelSpec::euclidean(0.5).unwrap()).unwrap();
        let all: Vec<usize> = (0..12).collect();
        assert!(reconstruction_error(&k, &all).unwrap().abs() < 1e-12);
    }

    #[test]
    fn two_by_two_closed_form() {
        let k = DMatrix::<f64>::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        assert!((reconstruction_error(&k, &[0]).unwrap() - 0.75).abs() < 1e-15);
        let r = nystrom_reconstruct(&k, &[1]).unwrap();
        assert!((r[(0, 0)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn dense_and_lazy_match_oracle() {
        let pts = random_points(30, 3, 1);
        let spec = KernelSpec::euclidean(0.4).unwrap();
        let k = kernel_matrix(&pts, &spec).unwrap();
        let j = [3, 17, 8, 25, 0];
        let expected = oracle(&k, &j);
        assert!((reconstruction_error(&k, &j).unwrap() - expected).abs() < 1e-10);
        assert!((reconstruction_error_lazy(&pts, &spec, &j).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn lazy_tiles_and_geodesic_agree_with_dense() {
        let pts = random_points(1300, 2, 2);
        let spec = KernelSpec::euclidean(0.2).unwrap();
        let j: Vec<usize> = (0..1300).step_by(37).collect();
        let dense = reconstruction_error(&kernel_matrix(&pts, &spec).unwrap(), &j).unwrap();
        let lazy = reconstruction_error_lazy(&pts, &spec, &j).unwrap();
        assert!((dense - lazy).abs() < 1e-8 * dense.max(1.0), "{dense} vs {lazy}");

        let small = random_points(60, 2, 3);
        let geo = KernelSpec::geodesic(0.5, 6).unwrap();
        let jg = [1, 9, 22, 40];
        let dense = reconstruction_error(&kernel_matrix(&small, &geo).unwrap(), &jg).unwrap();
        let lazy = reconstruction_error_lazy(&small, &geo, &jg).unwrap();
        assert!((dense - lazy).abs() < 1e-10);
    }

    #[test]
    fn permutation_invariance() {
        let k = kernel_matrix(&random_points(25, 2, 4), &KernelSpec::euclidean(0.3).unwrap()).unwrap();
        let mut rng = rng_from_seed(5);
        let mut j = vec![2, 7, 11, 19, 23, 4];
        let base = reconstruction_error(&k, &j).unwrap();
        for _ in 0..20 {
            j.shuffle(&mut rng);
            assert!((reconstruction_error(&k, &j).unwrap() - base).abs() < 1e-10);
        }
    }

    #[test]
    fn superset_never_increases_error() {
        for seed in 0..3 {
            let k = kernel_matrix(&random_points(8, 2, 10 + seed), &KernelSpec::euclidean(0.5).unwrap())
                .unwrap();
            for size in 1..8 {
                for j in combinations(8, size) {
                    let e = reconstruction_error(&k, &j).unwrap();
                    for extra in complement(&j, 8) {
                        let mut bigger = j.clone();
                        bigger.push(extra);
                        assert!(reconstruction_error(&k, &bigger).unwrap() <= e + 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn rank_one_is_exact() {
        let v = DVector::<f64>::from_vec(vec![1.0, -2.0, 0.5, 3.0, 0.0, 1.5]);
        let k = &v * v.transpose();
        for j in [vec![0], vec![1, 3], vec![5, 2, 4]] {
            assert!(reconstruction_error(&k, &j).unwrap().abs() < 1e-10);
            let rest = complement(&j, 6);
            let r = nystrom_reconstruct(&k, &j).unwrap();
            let truth = k.select_rows(&rest).select_columns(&rest);
            assert!((r - truth).amax() < 1e-10);
        }
    }

    #[test]
    fn leave_one_out_on_grid() {
        let grid: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let pts = PointSet::from_rows(11, 1, &grid).unwrap();
        let k = kernel_matrix(&pts, &KernelSpec::euclidean(0.3).unwrap()).unwrap();
        let j: Vec<usize> = (0..10).collect();
        let r = nystrom_reconstruct(&k, &j).unwrap();
        assert_eq!(r.shape(), (1, 1));
        let residual = (r[(0, 0)] - k[(10, 10)]).abs();
        assert!(residual < 1e-3, "residual {residual}");
    }

    #[test]
    fn error_paths() {
        let k = DMatrix::<f64>::identity(4, 4);
        assert!(reconstruction_error(&k, &[]).is_err());
        assert!(reconstruction_error(&k, &[4]).is_err());
        assert!(reconstruction_error(&k, &[1, 1]).is_err());
        assert!(nystrom_reconstruct(&k, &[]).is_err());
        let big = DMatrix::<f64>::identity(2001, 2001);
        assert!(matches!(nystrom_reconstruct(&big, &[0]), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn extension_hand_evaluated() {
        // k = 3 landmarks, l = 2, one new point
        let phi = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, -1.0, 2.0]);
        let cross = DMatrix::from_column_slice(3, 1, &[1.0, 0.5, 0.2]);
        let kjj = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.2, 0.5, 1.0, 0.4, 0.2, 0.4, 1.0]);
        let means = landmark_kernel_means(&kjj);
        let out = oos_extend(&phi, &[1.0, 1.0], &cross, &means).unwrap();
        let col_mean = 1.7 / 3.0;
        let row_means = [1.7 / 3.0, 1.9 / 3.0, 1.6 / 3.0];
        let w: Vec<f64> = (0..3)
            .map(|i| cross[(i, 0)] / (3.0 * (col_mean * row_means[i] as f64).sqrt()))
            .collect();
        let expected = [w[0] - w[2], w[1] + 2.0 * w[2]];
        assert!((out[(0, 0)] - expected[0]).abs() < 1e-14);
        assert!((out[(0, 1)] - expected[1]).abs() < 1e-14);
    }

    #[test]
    fn extension_one_hot_and_eigenvalue_scaling() {
        let phi = DMatrix::<f64>::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let cross = DMatrix::from_column_slice(3, 2, &[0.0, 0.7, 0.0, 0.3, 0.0, 0.0]);
        let means = DVector::from_element(3, 0.5);
        let out = oos_extend(&phi, &[1.0, 1.0], &cross, &means).unwrap();
        let ratio = out[(0, 0)] / 3.0;
        assert!(ratio > 0.0 && (out[(0, 1)] - 4.0 * ratio).abs() < 1e-12);
        let ratio = out[(1, 0)] / 1.0;
        assert!(ratio > 0.0 && (out[(1, 1)] - 2.0 * ratio).abs() < 1e-12);
        let halved = oos_extend(&phi, &[2.0, 0.5], &cross, &means).unwrap();
        assert!((halved[(0, 0)] - out[(0, 0)] / 2.0).abs() < 1e-12);
        assert!((halved[(0, 1)] - out[(0, 1)] * 2.0).abs() < 1e-12);
    }

    #[test]
    fn extension_errors() {
        let phi = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        let means = DVector::from_element(2, 1.0);
        let cross = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            oos_extend(&phi, &[1.0], &cross, &means),
            Err(Error::IsolatedPoint { index: 1 })
        ));
        assert!(matches!(
            oos_extend(&phi, &[0.0], &cross, &means),
            Err(Error::ZeroEigenvalue { index: 0 })
        ));
        assert!(oos_extend(&phi, &[1.0, 1.0], &cross, &means).is_err());
    }
}
