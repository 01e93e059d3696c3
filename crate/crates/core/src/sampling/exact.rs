use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{draw_weighted, LandmarkSelection};
use crate::linalg::psd_eigen;
use crate::{Error, Result, Scalar};

/// Removes from `b_j` its component along `b_i`: `b_j − (⟨b_j,b_i⟩/‖b_i‖²)·b_i`.
///
/// The squared norm of the result is `‖b_j‖² sin²θ` with `θ` the angle between the two.
pub fn projection_update<T: Scalar>(b_i: &DVector<T>, b_j: &DVector<T>) -> Result<DVector<T>> {
    if b_i.len() != b_j.len() {
        return Err(Error::invalid("projection vectors differ in length"));
    }
    let norm_sq = b_i.norm_squared();
    if norm_sq == T::zero() {
        return Err(Error::ZeroVector);
    }
    let coef = b_j.dot(b_i) / norm_sq;
    Ok(b_j - b_i * coef)
}

/// Exact sampler for the L-ensemble `P(J) = det(L_J) / det(L + I)` with `L = K`.
///
/// The eigendecomposition is computed once; each [`sample`](Self::sample) first keeps
/// eigenvector `v_i` with probability `λ_i / (λ_i + 1)` and then draws one point per kept
/// vector, with probability proportional to the squared row norms of `B = Vᵀ`, projecting
/// every row onto the orthogonal complement of the chosen one after each draw.
#[derive(Debug, Clone)]
pub struct ExactDpp<T: Scalar> {
    eigenvalues: DVector<T>,
    eigenvectors: DMatrix<T>,
}

impl<T: Scalar> ExactDpp<T> {
    pub fn new(kernel: &DMatrix<T>) -> Result<Self> {
        let eig = psd_eigen(kernel)?;
        Ok(Self {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &DVector<T> {
        &self.eigenvalues
    }

    /// Marginal inclusion probabilities `P(i ∈ J) = diag(K (K + I)⁻¹)`.
    pub fn inclusion_probabilities(&self) -> DVector<T> {
        let n = self.len();
        DVector::from_fn(n, |i, _| {
            (0..n).fold(T::zero(), |acc, c| {
                let l = self.eigenvalues[c];
                let v = self.eigenvectors[(i, c)];
                acc + l / (l + T::one()) * v * v
            })
        })
    }

    /// Expected subset size `Σ λ_i / (λ_i + 1)`.
    pub fn expected_size(&self) -> T {
        self.eigenvalues
            .iter()
            .fold(T::zero(), |acc, &l| acc + l / (l + T::one()))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LandmarkSelection<T> {
        let n = self.len();
        let kept: Vec<usize> = (0..n)
            .filter(|&c| {
                let l = self.eigenvalues[c];
                let p = l / (l + T::one());
                T::lit(rng.random::<f64>()) < p
            })
            .collect();
        let m = kept.len();
        // rows of V restricted to the kept eigenvectors
        let mut rows = self.eigenvectors.select_columns(&kept);
        let mut weights = vec![T::zero(); n];
        let mut picked = Vec::with_capacity(m);
        for _ in 0..m {
            for (j, w) in weights.iter_mut().enumerate() {
                *w = rows.row(j).norm_squared();
            }
            let Some(i) = draw_weighted(&weights, rng) else {
                break;
            };
            picked.push(i);
            let b_i = rows.row(i).transpose();
            let norm_sq = b_i.norm_squared();
            for j in 0..n {
                if j == i {
                    continue;
                }
                let coef = rows.row(j).transpose().dot(&b_i) / norm_sq;
                if coef != T::zero() {
                    for c in 0..m {
                        let v = rows[(j, c)] - coef * b_i[c];
                        rows[(j, c)] = v;
                    }
                }
            }
            // Proj⊥B_i(B_i) = 0; store it exactly so the row can never be drawn again
            rows.row_mut(i).fill(T::zero());
        }
        LandmarkSelection::new(picked)
    }
}

pub fn exact_dpp_sample<T: Scalar, R: Rng + ?Sized>(
    kernel: &DMatrix<T>,
    rng: &mut R,
) -> Result<LandmarkSelection<T>> {
    Ok(ExactDpp::new(kernel)?.sample(rng))
}
