use nalgebra::DMatrix;
use rand::Rng;

use super::LandmarkSelection;
use crate::linalg::{check_symmetric, psd_determinant};
use crate::{Error, Result, Scalar};

/// Largest point count accepted by the enumeration sampler.
pub const MAX_ENUMERATION_POINTS: usize = 20;

/// Exact annealed volume sampling `p(J) ∝ det(K_J)^s` over all `k`-subsets, by
/// enumeration. Intended as an oracle on small kernels.
#[derive(Debug, Clone)]
pub struct VolumeSampler<T: Scalar> {
    subsets: Vec<Vec<usize>>,
    probabilities: Vec<T>,
    cumulative: Vec<T>,
}

impl<T: Scalar> VolumeSampler<T> {
    /// `s = 0` gives the uniform distribution over `k`-subsets.
    pub fn new(kernel: &DMatrix<T>, k: usize, s: T) -> Result<Self> {
        check_symmetric(kernel)?;
        let n = kernel.nrows();
        if n > MAX_ENUMERATION_POINTS {
            return Err(Error::EnumerationTooLarge {
                n,
                max: MAX_ENUMERATION_POINTS,
            });
        }
        if k > n {
            return Err(Error::invalid(format!("subset size {k} exceeds {n} points")));
        }
        if s < T::zero() {
            return Err(Error::invalid("annealing exponent must be >= 0"));
        }
        let subsets = combinations(n, k);
        let weights: Vec<T> = subsets
            .iter()
            .map(|sub| {
                if s == T::zero() {
                    return T::one();
                }
                let det = psd_determinant(&kernel.select_rows(sub).select_columns(sub));
                if det > T::zero() {
                    det.powf(s)
                } else {
                    T::zero()
                }
            })
            .collect();
        let total = weights.iter().fold(T::zero(), |a, &w| a + w);
        if total <= T::zero() {
            return Err(Error::DegenerateDistribution(subsets.len()));
        }
        let probabilities: Vec<T> = weights.iter().map(|&w| w / total).collect();
        let mut acc = T::zero();
        let cumulative = probabilities
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            subsets,
            probabilities,
            cumulative,
        })
    }

    /// All `k`-subsets in lexicographic order.
    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    /// Exact expectation of `f(J)` under the distribution.
    pub fn expectation(&self, mut f: impl FnMut(&[usize]) -> T) -> T {
        self.subsets
            .iter()
            .zip(&self.probabilities)
            .fold(T::zero(), |acc, (s, &p)| if p > T::zero() { acc + p * f(s) } else { acc })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LandmarkSelection<T> {
        let total = *self.cumulative.last().expect("at least one subset");
        let u = T::lit(rng.random::<f64>()) * total;
        let mut idx = self.cumulative.partition_point(|&c| c <= u);
        idx = idx.min(self.subsets.len() - 1);
        // skip zero-probability subsets that share a cumulative value
        while self.probabilities[idx] == T::zero() && idx + 1 < self.subsets.len() {
            idx += 1;
        }
        LandmarkSelection::new(self.subsets[idx].clone())
    }
}

pub fn volume_sampling_enumerate<T: Scalar, R: Rng + ?Sized>(
    kernel: &DMatrix<T>,
    k: usize,
    s: T,
    rng: &mut R,
) -> Result<LandmarkSelection<T>> {
    Ok(VolumeSampler::new(kernel, k, s)?.sample(rng))
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        // rightmost position that can still advance
        let Some(pos) = (0..k).rev().find(|&i| current[i] < n - k + i) else {
            return out;
        };
        current[pos] += 1;
        for i in pos + 1..k {
            current[i] = current[i - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_from_seed;
    use std::collections::HashMap;

    fn random_psd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rng_from_seed(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &a * a.transpose()
    }

    #[test]
    fn combination_counts() {
        assert_eq!(combinations(6, 2).len(), 15);
        assert_eq!(combinations(8, 3).len(), 56);
        assert_eq!(combinations(4, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn full_set_with_certainty() {
        let k = random_psd(5, 1);
        let v = VolumeSampler::new(&k, 5, 1.0).unwrap();
        assert_eq!(v.subsets().len(), 1);
        let mut rng = rng_from_seed(0);
        assert_eq!(v.sample(&mut rng).indices(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn zero_exponent_is_uniform() {
        let k = random_psd(6, 2);
        let v = VolumeSampler::new(&k, 2, 0.0).unwrap();
        let mut rng = rng_from_seed(1);
        let draws = 60_000;
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for _ in 0..draws {
            *counts.entry(v.sample(&mut rng).indices().to_vec()).or_default() += 1;
        }
        assert_eq!(counts.len(), 15);
        let expected = draws as f64 / 15.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // χ²(14) 0.999 quantile
        assert!(chi2 < 36.12, "chi2 {chi2}");
    }

    #[test]
    fn frequencies_match_normalized_determinants() {
        let k = random_psd(8, 3);
        let v = VolumeSampler::new(&k, 3, 1.0).unwrap();
        let dets: Vec<f64> = combinations(8, 3)
            .iter()
            .map(|s| k.select_rows(s).select_columns(s).determinant())
            .collect();
        let z: f64 = dets.iter().sum();
        let mut rng = rng_from_seed(2);
        let draws = 200_000;
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for _ in 0..draws {
            *counts.entry(v.sample(&mut rng).indices().to_vec()).or_default() += 1;
        }
        let tv: f64 = combinations(8, 3)
            .iter()
            .zip(&dets)
            .map(|(s, d)| (d / z - *counts.get(s).unwrap_or(&0) as f64 / draws as f64).abs())
            .sum::<f64>()
            * 0.5;
        assert!(tv < 0.01, "tv {tv}");
    }

    #[test]
    fn guards() {
        let big = DMatrix::<f64>::identity(21, 21);
        assert!(matches!(
            VolumeSampler::new(&big, 2, 1.0),
            Err(Error::EnumerationTooLarge { n: 21, .. })
        ));
        let rank1 = DMatrix::from_element(4, 4, 1.0);
        assert!(matches!(
            VolumeSampler::new(&rank1, 2, 1.0),
            Err(Error::DegenerateDistribution(6))
        ));
    }
}
