//! Small dense helpers shared by the samplers and the Nyström code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result, Scalar};

/// Relative threshold below which eigen/singular values count as zero in pseudo-inverses.
pub const PINV_RELATIVE_TOLERANCE: f64 = 1e-10;
/// Relative tolerance for clamping slightly negative kernel eigenvalues to zero.
pub const NEGATIVE_EIGENVALUE_TOLERANCE: f64 = 1e-8;

pub fn max_asymmetry<T: Scalar>(m: &DMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for j in 0..n {
        for i in 0..j {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn check_symmetric<T: Scalar>(m: &DMatrix<T>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::invalid(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.amax().max(T::one());
    let asym = max_asymmetry(m);
    if asym > T::lit(1e-10) * scale {
        return Err(Error::NotSymmetric(asym.as_f64()));
    }
    Ok(())
}

/// Eigendecomposition of a symmetric positive semidefinite matrix.
///
/// Eigenvalues in `[-1e-8·max(λ_max, 1), 0)` are clamped to zero; anything more
/// negative is reported as [`Error::Indefinite`].
pub fn psd_eigen<T: Scalar>(m: &DMatrix<T>) -> Result<SymmetricEigen<T, nalgebra::Dyn>> {
    check_symmetric(m)?;
    let mut eig = SymmetricEigen::new(m.clone());
    let lmax = eig.eigenvalues.max();
    let tol = T::lit(NEGATIVE_EIGENVALUE_TOLERANCE) * lmax.max(T::one());
    let mut clamped = 0;
    for v in eig.eigenvalues.iter_mut() {
        if *v < T::zero() {
            if *v < -tol {
                return Err(Error::Indefinite {
                    eigenvalue: v.as_f64(),
                    tolerance: tol.as_f64(),
                });
            }
            *v = T::zero();
            clamped += 1;
        }
    }
    if clamped > 0 {
        log::warn!("clamped {clamped} slightly negative kernel eigenvalues to zero");
    }
    Ok(eig)
}

/// Moore–Penrose pseudo-inverse of a symmetric matrix via its eigendecomposition.
/// Eigenvalues with `|λ| <= 1e-10·max|λ|` are treated as zero.
pub fn pseudo_inverse_symmetric<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let (vecs, inv) = inverse_spectrum(m);
    let scaled = &vecs * DMatrix::from_diagonal(&inv);
    scaled * vecs.transpose()
}

/// Eigenvectors and inverted eigenvalues (zeros for the null space) of a symmetric matrix.
pub(crate) fn inverse_spectrum<T: Scalar>(m: &DMatrix<T>) -> (DMatrix<T>, DVector<T>) {
    let eig = SymmetricEigen::new(m.clone());
    let smax = eig.eigenvalues.amax();
    let cut = T::lit(PINV_RELATIVE_TOLERANCE) * smax;
    let inv = eig
        .eigenvalues
        .map(|v| if v.abs() > cut && v != T::zero() { T::one() / v } else { T::zero() });
    (eig.eigenvectors, inv)
}

/// Eigenvalues sorted in descending order.
pub fn sorted_eigenvalues_desc<T: Scalar>(m: &DMatrix<T>) -> Vec<T> {
    let mut v: Vec<T> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// `‖K − K_k‖_F²` for the best rank-`k` approximation `K_k` of a symmetric matrix,
/// i.e. the sum of squares of all but the `k` largest eigenvalues.
pub fn rank_k_residual_frobenius_sq<T: Scalar>(m: &DMatrix<T>, k: usize) -> T {
    sorted_eigenvalues_desc(m)
        .into_iter()
        .skip(k)
        .fold(T::zero(), |acc, v| acc + v * v)
}

/// Sum of all but the `k` largest eigenvalues of a PSD matrix `K = YᵀY`, which equals
/// `‖Y − Y_k‖_F²` for the factor `Y`.
pub fn eigenvalue_tail_sum<T: Scalar>(m: &DMatrix<T>, k: usize) -> T {
    sorted_eigenvalues_desc(m)
        .into_iter()
        .skip(k)
        .fold(T::zero(), |acc, v| acc + v)
}

/// Determinant of a symmetric PSD matrix, zero when the Cholesky factorization fails.
pub fn psd_determinant<T: Scalar>(m: &DMatrix<T>) -> T {
    if m.nrows() == 0 {
        return T::one();
    }
    match m.clone().cholesky() {
        Some(c) => {
            let d = c.l_dirty().diagonal().iter().fold(T::one(), |acc, &v| acc * v);
            d * d
        }
        None => m.determinant().max(T::zero()),
    }
}
