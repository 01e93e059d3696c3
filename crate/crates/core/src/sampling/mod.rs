//! Landmark subset selection.
//!
//! * [`ExactDpp`]: exact L-ensemble sampling via eigendecomposition and projection updates.
//! * [`VolumeSampler`]: brute-force enumeration of `det(K_J)^s` over all `k`-subsets.
//! * [`efficient_dpp_sample`]: linear-time approximation with local multiplicative updates.
//! * [`uniform_sample`], [`kmeanspp_seed`], [`kmeans`]: baselines.

mod baselines;
mod efficient;
mod exact;
mod volume;

pub use baselines::{kmeans, kmeans_fit, kmeanspp_seed, uniform_sample, KMeansFit, KMeansInit};
pub use efficient::{
    efficient_dpp_sample, efficient_dpp_sample_with_weights, local_covariance, CovarianceMode,
    EfficientDppConfig, UpdateFunction, COVARIANCE_REGULARIZATION,
};
pub use exact::{exact_dpp_sample, projection_update, ExactDpp};
pub use volume::{volume_sampling_enumerate, VolumeSampler, MAX_ENUMERATION_POINTS};
#[cfg(test)]
pub(crate) use volume::combinations;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::Scalar;

/// Per-landmark covariance estimates aligned with the landmark indices.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariances<T: Scalar> {
    Full(Vec<DMatrix<T>>),
    Diagonal(Vec<DVector<T>>),
}

impl<T: Scalar> Covariances<T> {
    pub fn len(&self) -> usize {
        match self {
            Covariances::Full(v) => v.len(),
            Covariances::Diagonal(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> Covariance<'_, T> {
        match self {
            Covariances::Full(v) => Covariance::Full(&v[i]),
            Covariances::Diagonal(v) => Covariance::Diagonal(&v[i]),
        }
    }

    fn push(&mut self, c: OwnedCovariance<T>) {
        match (self, c) {
            (Covariances::Full(v), OwnedCovariance::Full(m)) => v.push(m),
            (Covariances::Diagonal(v), OwnedCovariance::Diagonal(m)) => v.push(m),
            _ => unreachable!("covariance kind fixed by the sampler mode"),
        }
    }
}

/// Borrowed covariance of one landmark.
#[derive(Debug, Clone, Copy)]
pub enum Covariance<'a, T: Scalar> {
    Full(&'a DMatrix<T>),
    Diagonal(&'a DVector<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum OwnedCovariance<T: Scalar> {
    Full(DMatrix<T>),
    Diagonal(DVector<T>),
}

impl<T: Scalar> OwnedCovariance<T> {
    pub fn as_ref(&self) -> Covariance<'_, T> {
        match self {
            OwnedCovariance::Full(m) => Covariance::Full(m),
            OwnedCovariance::Diagonal(v) => Covariance::Diagonal(v),
        }
    }
}

/// Ordered set of distinct landmark indices with optional local covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSelection<T: Scalar> {
    indices: Vec<usize>,
    covariances: Option<Covariances<T>>,
}

impl<T: Scalar> LandmarkSelection<T> {
    pub fn new(indices: Vec<usize>) -> Self {
        Self {
            indices,
            covariances: None,
        }
    }

    pub fn with_covariances(indices: Vec<usize>, covariances: Covariances<T>) -> Self {
        debug_assert_eq!(indices.len(), covariances.len());
        Self {
            indices,
            covariances: Some(covariances),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn covariances(&self) -> Option<&Covariances<T>> {
        self.covariances.as_ref()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Indices sorted ascending (subset identity, order dropped).
    pub fn sorted_indices(&self) -> Vec<usize> {
        let mut v = self.indices.clone();
        v.sort_unstable();
        v
    }
}

/// Draws index `i` with probability `w_i / Σw` using a single cumulative pass.
/// Returns `None` when the total weight is not positive.
pub(crate) fn draw_weighted<T: Scalar, R: Rng + ?Sized>(weights: &[T], rng: &mut R) -> Option<usize> {
    let total = weights.iter().fold(T::zero(), |acc, &w| acc + w);
    if !(total > T::zero() && total.is_finite()) {
        return None;
    }
    let target = T::lit(rng.random::<f64>()) * total;
    let mut acc = T::zero();
    let mut last_positive = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > T::zero() {
            acc += w;
            last_positive = Some(i);
            if acc > target {
                return Some(i);
            }
        }
    }
    last_positive
}
