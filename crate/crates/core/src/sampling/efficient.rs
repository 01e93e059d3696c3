use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{draw_weighted, Covariances, LandmarkSelection, OwnedCovariance};
use crate::datasets::PointSet;
use crate::metric::cmp_dist_index;
use crate::{Error, Result, Scalar};

/// Ridge added to local covariances, relative to their mean variance `trace(C)/d`.
pub const COVARIANCE_REGULARIZATION: f64 = 1e-6;

/// Multiplicative probability update applied to the neighborhood of each new landmark.
/// Both variants satisfy `f(0) = 0`, are non-decreasing and bounded by 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpdateFunction<T: Scalar> {
    /// `sin²(Δ/τ)`. With `tau = None`, `τ = 2Δ_max/π` where `Δ_max` is the largest
    /// distance inside the current neighborhood, so arguments stay within `[0, π/2]`.
    SineSquared { tau: Option<T> },
    /// Welsch function `1 − exp(−Δ²/2σ²)`.
    Welsch { sigma: T },
}

impl<T: Scalar> UpdateFunction<T> {
    pub fn welsch(sigma: T) -> Result<Self> {
        if !(sigma > T::zero()) {
            return Err(Error::invalid("Welsch sigma must be positive"));
        }
        Ok(UpdateFunction::Welsch { sigma })
    }

    pub fn sine_squared(tau: Option<T>) -> Result<Self> {
        if let Some(t) = tau {
            if !(t > T::zero()) {
                return Err(Error::invalid("sine-squared tau must be positive"));
            }
        }
        Ok(UpdateFunction::SineSquared { tau })
    }

    /// `f(Δ)`; `neighborhood_max` is only used by the automatic `τ`.
    pub fn value(&self, delta: T, neighborhood_max: T) -> T {
        match *self {
            UpdateFunction::Welsch { sigma } => {
                T::one() - (-(delta * delta) / (T::lit(2.0) * sigma * sigma)).exp()
            }
            UpdateFunction::SineSquared { tau } => {
                let tau = match tau {
                    Some(t) => t,
                    None if neighborhood_max > T::zero() => {
                        T::lit(2.0) * neighborhood_max / T::pi()
                    }
                    // every neighbor coincides with the landmark
                    None => return T::zero(),
                };
                let s = (delta / tau).sin();
                s * s
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceMode {
    #[default]
    None,
    Full,
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficientDppConfig<T: Scalar> {
    /// Number of landmarks.
    pub k: usize,
    /// Neighborhood size `m` (the selected point included).
    pub neighborhood: usize,
    pub update: UpdateFunction<T>,
    pub covariance: CovarianceMode,
}

/// Linear-time approximate DPP sampling.
///
/// Starting from uniform weights `D = 1`, each of the `k` iterations draws `i ∝ D_i`,
/// finds the `m` points nearest to `x_i` (ties broken by lower index; `x_i` itself is
/// included) and multiplies their weights by `f(‖x_i − x_j‖)`. The cost is `O(ndk)`.
/// Local covariances of each neighborhood are estimated when requested.
pub fn efficient_dpp_sample<T: Scalar, R: Rng + ?Sized>(
    points: &PointSet<T>,
    config: &EfficientDppConfig<T>,
    rng: &mut R,
) -> Result<LandmarkSelection<T>> {
    efficient_dpp_sample_with_weights(points, config, rng).map(|(s, _)| s)
}

/// As [`efficient_dpp_sample`], also returning the final weight vector `D`.
pub fn efficient_dpp_sample_with_weights<T: Scalar, R: Rng + ?Sized>(
    points: &PointSet<T>,
    config: &EfficientDppConfig<T>,
    rng: &mut R,
) -> Result<(LandmarkSelection<T>, Vec<T>)> {
    let n = points.len();
    let EfficientDppConfig {
        k,
        neighborhood: m,
        update,
        covariance,
    } = *config;
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    if m == 0 || m > n {
        return Err(Error::invalid(format!("need 1 <= m <= n, got m={m}, n={n}")));
    }

    let mut weights = vec![T::one(); n];
    let mut selected = Vec::with_capacity(k);
    let mut covs = match covariance {
        CovarianceMode::None => None,
        CovarianceMode::Full => Some(Covariances::Full(Vec::with_capacity(k))),
        CovarianceMode::Diagonal => Some(Covariances::Diagonal(Vec::with_capacity(k))),
    };
    let mut order: Vec<(T, usize)> = Vec::with_capacity(n);
    let mut hood: Vec<usize> = Vec::with_capacity(m);

    for iteration in 0..k {
        let i = draw_weighted(&weights, rng).ok_or(Error::ExhaustedMass { iteration })?;
        selected.push(i);

        let xi = points.point_slice(i);
        order.clear();
        order.extend((0..n).map(|j| (crate::datasets::sq_dist(xi, points.point_slice(j)), j)));
        if m < n {
            order.select_nth_unstable_by(m - 1, cmp_dist_index);
        }
        let nearest = &order[..m];
        let delta_max = nearest
            .iter()
            .fold(T::zero(), |acc, &(d2, _)| acc.max(d2))
            .sqrt();
        hood.clear();
        for &(d2, j) in nearest {
            weights[j] *= update.value(d2.sqrt(), delta_max);
            hood.push(j);
        }
        // f(0) = 0 in exact arithmetic; pin it so rounding can never resurrect i
        weights[i] = T::zero();

        if let Some(c) = covs.as_mut() {
            let mode = covariance;
            c.push(local_covariance(points, &hood, mode));
        }
    }

    let selection = match covs {
        Some(c) => LandmarkSelection::with_covariances(selected, c),
        None => LandmarkSelection::new(selected),
    };
    Ok((selection, weights))
}

/// Sample covariance of the given points, regularized by `1e-6·trace(C)/d·I` so it is
/// positive definite even when the neighborhood has fewer points than dimensions.
///
/// # Panics
///
/// Panics if `mode` is [`CovarianceMode::None`] or `neighborhood` is empty.
pub fn local_covariance<T: Scalar>(
    points: &PointSet<T>,
    neighborhood: &[usize],
    mode: CovarianceMode,
) -> OwnedCovariance<T> {
    assert!(!neighborhood.is_empty(), "empty neighborhood");
    let d = points.dim();
    let m = neighborhood.len();
    let mut mean = DVector::<T>::zeros(d);
    for &j in neighborhood {
        mean += points.point(j);
    }
    mean /= T::from_usize_lossy(m);
    let denom = T::from_usize_lossy(m.saturating_sub(1).max(1));
    let floor = |trace: T| {
        let r = T::lit(COVARIANCE_REGULARIZATION) * trace / T::from_usize_lossy(d);
        if r > T::zero() {
            r
        } else {
            T::lit(1e-12)
        }
    };
    match mode {
        CovarianceMode::Full => {
            let mut c = DMatrix::<T>::zeros(d, d);
            for &j in neighborhood {
                let diff = points.point(j) - &mean;
                c.syger(T::one(), &diff, &diff, T::one());
            }
            c /= denom;
            c.fill_lower_triangle_with_upper_triangle();
            let r = floor(c.trace());
            for a in 0..d {
                c[(a, a)] += r;
            }
            OwnedCovariance::Full(c)
        }
        CovarianceMode::Diagonal => {
            let mut v = DVector::<T>::zeros(d);
            for &j in neighborhood {
                for (a, &x) in points.point_slice(j).iter().enumerate() {
                    let diff = x - mean[a];
                    v[a] += diff * diff;
                }
            }
            v /= denom;
            let r = floor(v.sum());
            v.add_scalar_mut(r);
            OwnedCovariance::Diagonal(v)
        }
        CovarianceMode::None => panic!("covariance requested with CovarianceMode::None"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::generate_swiss_roll;
    use crate::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn line(n: usize) -> PointSet<f64> {
        let v: Vec<f64> = (0..n).map(|i| i as f64).collect();
        PointSet::from_rows(n, 1, &v).unwrap()
    }

    fn welsch(k: usize, m: usize) -> EfficientDppConfig<f64> {
        EfficientDppConfig {
            k,
            neighborhood: m,
            update: UpdateFunction::welsch(1.0).unwrap(),
            covariance: CovarianceMode::None,
        }
    }

    #[test]
    fn update_functions_shape() {
        let w = UpdateFunction::welsch(1.0f64).unwrap();
        let s = UpdateFunction::sine_squared(None).unwrap();
        assert_eq!(w.value(0.0, 3.0), 0.0);
        assert_eq!(s.value(0.0, 3.0), 0.0);
        assert!((s.value(3.0, 3.0) - 1.0f64).abs() < 1e-15);
        let mut prev = (0.0, 0.0);
        for i in 1..=30 {
            let d = i as f64 * 0.1;
            let cur = (w.value(d, 3.0), s.value(d, 3.0));
            assert!(cur.0 >= prev.0 && cur.1 >= prev.1 && cur.0 <= 1.0 && cur.1 <= 1.0);
            prev = cur;
        }
        assert!(UpdateFunction::welsch(0.0f64).is_err());
        assert!(UpdateFunction::sine_squared(Some(-1.0f64)).is_err());
    }

    #[test]
    fn single_landmark_is_uniform() {
        let p = line(4);
        let mut counts = [0usize; 4];
        let mut rng = rng_from_seed(0);
        for _ in 0..40_000 {
            let s = efficient_dpp_sample(&p, &welsch(1, 2), &mut rng).unwrap();
            counts[s.indices()[0]] += 1;
        }
        for c in counts {
            assert!((c as f64 / 40_000.0 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn exhaustion_gives_permutation() {
        let p = line(12);
        let mut rng = rng_from_seed(1);
        let s = efficient_dpp_sample(&p, &welsch(12, 1), &mut rng).unwrap();
        assert_eq!(s.sorted_indices(), (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn exhausted_mass_reports_iteration() {
        // duplicated points: the first draw zeroes both copies
        let p = PointSet::from_rows(2, 1, &[1.0, 1.0]).unwrap();
        let mut rng = rng_from_seed(2);
        match efficient_dpp_sample(&p, &welsch(2, 2), &mut rng) {
            Err(Error::ExhaustedMass { iteration }) => assert_eq!(iteration, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn argument_checks() {
        let p = line(3);
        let mut rng = rng_from_seed(3);
        assert!(efficient_dpp_sample(&p, &welsch(4, 1), &mut rng).is_err());
        assert!(efficient_dpp_sample(&p, &welsch(1, 0), &mut rng).is_err());
        assert!(efficient_dpp_sample(&p, &welsch(0, 1), &mut rng).is_err());
    }

    #[test]
    fn covariances_are_spd_and_aligned() {
        let p: PointSet<f64> = generate_swiss_roll(500, 0.0, 4).unwrap();
        let mut cfg = welsch(20, 10);
        for mode in [CovarianceMode::Full, CovarianceMode::Diagonal] {
            cfg.covariance = mode;
            let s = efficient_dpp_sample(&p, &cfg, &mut rng_from_seed(5)).unwrap();
            let covs = s.covariances().unwrap();
            assert_eq!(covs.len(), 20);
            match covs {
                Covariances::Full(v) => {
                    for c in v {
                        assert_eq!(c, &c.transpose());
                        let floor = COVARIANCE_REGULARIZATION * c.trace() / 3.0 * 0.99;
                        assert!(c.symmetric_eigenvalues().min() >= floor * 0.5);
                    }
                }
                Covariances::Diagonal(v) => assert!(v.iter().all(|d| d.min() > 0.0)),
            }
        }
    }

    #[test]
    fn covariance_with_fewer_points_than_dims() {
        let p = PointSet::from_rows(2, 3, &[0.0, 0.0, 0.0, 1.0, 2.0, 3.0]).unwrap();
        let OwnedCovariance::Full(c) = local_covariance(&p, &[0, 1], CovarianceMode::Full) else {
            unreachable!()
        };
        assert!(c.clone().cholesky().is_some());
        let OwnedCovariance::Full(c) = local_covariance(&p, &[0], CovarianceMode::Full) else {
            unreachable!()
        };
        assert!(c.cholesky().is_some());
    }

    #[test]
    fn swiss_roll_landmarks_cover_parameter_grid() {
        let p: PointSet<f64> = generate_swiss_roll(1000, 0.0, 8).unwrap();
        let truth = p.truth().unwrap();
        let (t0, t1) = crate::datasets::SWISS_ROLL_T_RANGE;
        // the auto bandwidth adapts to the point spacing of the unscaled roll
        let cfg = EfficientDppConfig {
            update: UpdateFunction::sine_squared(None).unwrap(),
            ..welsch(100, 20)
        };
        let mut covered_runs = 0;
        for seed in 0..50 {
            let s = efficient_dpp_sample(&p, &cfg, &mut rng_from_seed(seed)).unwrap();
            let mut cells = [false; 25];
            for &i in s.indices() {
                let a = (((truth[(0, i)] - t0) / (t1 - t0) * 5.0) as usize).min(4);
                let b = ((truth[(1, i)] / 21.0 * 5.0) as usize).min(4);
                cells[a * 5 + b] = true;
            }
            if cells.iter().all(|&c| c) {
                covered_runs += 1;
            }
        }
        assert!(covered_runs >= 45, "{covered_runs}/50 runs covered every cell");
    }

    fn min_pairwise(p: &PointSet<f64>, idx: &[usize]) -> f64 {
        let mut best = f64::INFINITY;
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                best = best.min(p.sq_dist(i, j).sqrt());
            }
        }
        best
    }

    #[test]
    fn min_distance_dominates_uniform() {
        let mut rng = rng_from_seed(11);
        let v: Vec<f64> = (0..2 * 300).map(|_| rng.random_range(0.0..1.0)).collect();
        let p = PointSet::from_rows(300, 2, &v).unwrap();
        let cfg = EfficientDppConfig {
            update: UpdateFunction::welsch(0.1).unwrap(),
            ..welsch(15, 300)
        };
        let dpp: Vec<f64> = (0..50)
            .map(|r| {
                let s = efficient_dpp_sample(&p, &cfg, &mut rng_from_seed(100 + r)).unwrap();
                min_pairwise(&p, s.indices())
            })
            .collect();
        let uni: Vec<f64> = (0..50)
            .map(|r| {
                let s = crate::sampling::uniform_sample::<f64, _>(300, 15, &mut rng_from_seed(500 + r)).unwrap();
                min_pairwise(&p, s.indices())
            })
            .collect();
        // one-sided Mann-Whitney U with normal approximation, no ties expected
        let u: f64 = dpp
            .iter()
            .map(|a| uni.iter().map(|b| if a > b { 1.0 } else if a == b { 0.5 } else { 0.0 }).sum::<f64>())
            .sum();
        let mean = 50.0 * 50.0 / 2.0;
        let sd = (50.0 * 50.0 * 101.0 / 12.0f64).sqrt();
        let z = (u - mean) / sd;
        assert!(z > 2.3263, "z = {z}");
    }

    #[test]
    fn volume_sampling_matches_conditioned_exact_dpp() {
        use crate::sampling::{ExactDpp, VolumeSampler};
        use std::collections::HashMap;
        let mut rng = rng_from_seed(21);
        let a = DMatrix::<f64>::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0));
        let l = &a * a.transpose() * 0.5;
        let exact = ExactDpp::new(&l).unwrap();
        let vol = VolumeSampler::new(&l, 2, 1.0).unwrap();
        let draws = 200_000;
        let mut e_counts: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut e_total = 0usize;
        while e_total < draws {
            let j = exact.sample(&mut rng).sorted_indices();
            if j.len() == 2 {
                *e_counts.entry(j).or_default() += 1;
                e_total += 1;
            }
        }
        let mut v_counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for _ in 0..draws {
            let j = vol.sample(&mut rng).sorted_indices();
            *v_counts.entry(j).or_default() += 1;
        }
        let tv: f64 = vol
            .subsets()
            .iter()
            .map(|s| {
                let e = *e_counts.get(s).unwrap_or(&0) as f64 / draws as f64;
                let v = *v_counts.get(s).unwrap_or(&0) as f64 / draws as f64;
                (e - v).abs()
            })
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.02, "tv = {tv}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn indices_distinct_and_weights_nonnegative(
            seed in any::<u64>(), n in 5usize..60, kf in 0.1f64..1.0, m in 1usize..10, sine in any::<bool>()
        ) {
            let mut rng = rng_from_seed(seed);
            let v: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let p = PointSet::from_rows(n, 2, &v).unwrap();
            let k = ((n as f64 * kf) as usize).max(1);
            let update = if sine { UpdateFunction::sine_squared(None).unwrap() } else { UpdateFunction::welsch(0.7).unwrap() };
            let cfg = EfficientDppConfig { k, neighborhood: m.min(n), update, covariance: CovarianceMode::None };
            match efficient_dpp_sample_with_weights(&p, &cfg, &mut rng) {
                Ok((s, w)) => {
                    prop_assert_eq!(s.len(), k);
                    let mut idx = s.sorted_indices();
                    idx.dedup();
                    prop_assert_eq!(idx.len(), k);
                    prop_assert!(w.iter().all(|&x| x >= 0.0));
                    for &i in s.indices() { prop_assert_eq!(w[i], 0.0); }
                }
                Err(Error::ExhaustedMass { iteration }) => prop_assert!(iteration > 0 && iteration < k),
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }
    }
}
