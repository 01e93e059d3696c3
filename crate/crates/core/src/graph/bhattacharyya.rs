use nalgebra::{DMatrix, DVector};

use crate::sampling::Covariance;
use crate::{Error, Result, Scalar};

/// Bhattacharyya distance between Gaussians `N(x_i, C_i)` and `N(x_j, C_j)`:
///
/// ```text
/// B = ⅛ Δᵀ C⁻¹ Δ + ½ ln( |C| / sqrt(|C_i| |C_j|) ),   C = (C_i + C_j)/2,  Δ = x_i − x_j
/// ```
///
/// Log-determinants come from Cholesky factors; diagonal covariances use the closed
/// per-coordinate form. Both covariances must be of the same kind.
pub fn bhattacharyya_distance<T: Scalar>(
    xi: &[T],
    ci: Covariance<'_, T>,
    xj: &[T],
    cj: Covariance<'_, T>,
) -> Result<T> {
    let ld_i = log_det(ci)?;
    let ld_j = log_det(cj)?;
    bhattacharyya_with_log_dets(xi, ci, ld_i, xj, cj, ld_j)
}

/// `ln |C|` of an SPD covariance.
pub fn log_det<T: Scalar>(c: Covariance<'_, T>) -> Result<T> {
    match c {
        Covariance::Full(m) => {
            let chol = m.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
            Ok(chol_log_det(chol.l_dirty()))
        }
        Covariance::Diagonal(v) => {
            if v.iter().any(|&x| !(x > T::zero())) {
                return Err(Error::NotPositiveDefinite);
            }
            Ok(v.iter().fold(T::zero(), |acc, &x| acc + x.ln()))
        }
    }
}

fn chol_log_det<T: Scalar>(l: &DMatrix<T>) -> T {
    l.diagonal().iter().fold(T::zero(), |acc, &x| acc + x.ln()) * T::lit(2.0)
}

/// As [`bhattacharyya_distance`] with `ln|C_i|` and `ln|C_j|` already known.
pub(crate) fn bhattacharyya_with_log_dets<T: Scalar>(
    xi: &[T],
    ci: Covariance<'_, T>,
    ld_i: T,
    xj: &[T],
    cj: Covariance<'_, T>,
    ld_j: T,
) -> Result<T> {
    let d = xi.len();
    if xj.len() != d {
        return Err(Error::invalid("points differ in dimension"));
    }
    let half = T::lit(0.5);
    let (mahalanobis, ld) = match (ci, cj) {
        (Covariance::Full(a), Covariance::Full(b)) => {
            if a.nrows() != d || b.nrows() != d {
                return Err(Error::invalid("covariance dimension mismatch"));
            }
            let c = (a + b) * half;
            let chol = c.cholesky().ok_or(Error::NotPositiveDefinite)?;
            let delta = DVector::from_iterator(d, xi.iter().zip(xj).map(|(&p, &q)| p - q));
            let z = chol
                .l_dirty()
                .solve_lower_triangular(&delta)
                .ok_or(Error::NotPositiveDefinite)?;
            (z.norm_squared(), chol_log_det(chol.l_dirty()))
        }
        (Covariance::Diagonal(a), Covariance::Diagonal(b)) => {
            if a.len() != d || b.len() != d {
                return Err(Error::invalid("covariance dimension mismatch"));
            }
            let mut m = T::zero();
            let mut ld = T::zero();
            for t in 0..d {
                let c = (a[t] + b[t]) * half;
                if !(c > T::zero()) {
                    return Err(Error::NotPositiveDefinite);
                }
                let delta = xi[t] - xj[t];
                m += delta * delta / c;
                ld += c.ln();
            }
            (m, ld)
        }
        _ => return Err(Error::invalid("cannot mix full and diagonal covariances")),
    };
    let b = mahalanobis / T::lit(8.0) + half * (ld - half * (ld_i + ld_j));
    Ok(b.max(T::zero()))
}
