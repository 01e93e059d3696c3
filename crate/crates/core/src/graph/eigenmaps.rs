use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use super::NeighborhoodGraph;
use crate::{rng_from_seed, Error, Result, Scalar};

/// Graphs with fewer nodes than this are solved densely by [`EigenSolver::Auto`].
pub const DENSE_NODE_LIMIT: usize = 500;

/// Relative generalized residual every returned eigenpair satisfies.
pub const RESIDUAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenSolver {
    /// Dense below [`DENSE_NODE_LIMIT`] nodes (or when `3l ≥ n`), Lanczos otherwise.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

/// Landmark coordinates from Laplacian eigenmaps.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding<T: Scalar> {
    phi: DMatrix<T>,
    eigenvalues: DVector<T>,
}

impl<T: Scalar> SpectralEmbedding<T> {
    /// `n × l`, row `a` is the embedding of node `a`. Columns are `𝒟`-orthonormal.
    pub fn phi(&self) -> &DMatrix<T> {
        &self.phi
    }

    /// Generalized eigenvalues `λ` of `(𝒟 − W)φ = λ𝒟φ`, ascending and nonzero.
    pub fn eigenvalues(&self) -> &DVector<T> {
        &self.eigenvalues
    }

    /// `1 − λ`, the matching eigenvalues of `𝒟^{-1/2} W 𝒟^{-1/2}`.
    pub fn normalized_eigenvalues(&self) -> Vec<T> {
        self.eigenvalues.iter().map(|&l| T::one() - l).collect()
    }

    pub fn len(&self) -> usize {
        self.phi.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.phi.ncols()
    }

    /// `‖(𝒟 − W)φ_j − λ_j 𝒟φ_j‖ / ‖𝒟φ_j‖` for each column.
    pub fn generalized_residuals(&self, graph: &NeighborhoodGraph<T>) -> Vec<T> {
        let deg = graph.degrees();
        let mut wphi = DVector::zeros(self.len());
        (0..self.dim())
            .map(|c| {
                let phi = self.phi.column(c).into_owned();
                graph.mul_vec(&phi, &mut wphi);
                let lambda = self.eigenvalues[c];
                let mut res = T::zero();
                let mut scale = T::zero();
                for a in 0..phi.len() {
                    let dphi = deg[a] * phi[a];
                    let r = dphi - wphi[a] - lambda * dphi;
                    res += r * r;
                    scale += dphi * dphi;
                }
                (res / scale).sqrt()
            })
            .collect()
    }
}

/// Laplacian eigenmaps: the `l` eigenvectors of `(𝒟 − W)φ = λ𝒟φ` with the smallest
/// nonzero eigenvalues. See [`laplacian_eigenmaps_with`].
pub fn laplacian_eigenmaps<T: Scalar>(graph: &NeighborhoodGraph<T>, l: usize) -> Result<SpectralEmbedding<T>> {
    laplacian_eigenmaps_with(graph, l, EigenSolver::Auto)
}

/// Laplacian eigenmaps with an explicit solver choice.
///
/// The problem is solved as the symmetric eigenproblem of `A = 𝒟^{-1/2} W 𝒟^{-1/2}`
/// (`λ = 1 − μ`, `φ = 𝒟^{-1/2} ψ`) with the constant mode `ψ₀ ∝ 𝒟^{1/2} 1` removed.
/// Each eigenvector is signed so its entry of largest magnitude is positive.
pub fn laplacian_eigenmaps_with<T: Scalar>(
    graph: &NeighborhoodGraph<T>,
    l: usize,
    solver: EigenSolver,
) -> Result<SpectralEmbedding<T>> {
    let n = graph.len();
    if l == 0 || l >= n {
        return Err(Error::invalid(format!(
            "embedding dimension must satisfy 1 <= l < {n}, got {l}"
        )));
    }
    if !graph.is_connected() {
        return Err(Error::Disconnected {
            components: graph.components(),
        });
    }
    let inv_sqrt_deg: Vec<T> = graph.degrees().iter().map(|&d| T::one() / d.sqrt()).collect();
    let mut trivial = DVector::from_iterator(n, graph.degrees().iter().map(|&d| d.sqrt()));
    trivial.normalize_mut();

    let use_dense = match solver {
        EigenSolver::Dense => true,
        EigenSolver::Lanczos => false,
        EigenSolver::Auto => n < DENSE_NODE_LIMIT || 3 * l >= n,
    };
    let (mu, psi) = if use_dense {
        dense_top(graph, &inv_sqrt_deg, &trivial, l)
    } else {
        lanczos_top(graph, &inv_sqrt_deg, &trivial, l)?
    };

    let mut phi = DMatrix::zeros(n, l);
    let mut eigenvalues = DVector::zeros(l);
    for c in 0..l {
        let mut col = DVector::from_iterator(n, psi.column(c).iter().zip(&inv_sqrt_deg).map(|(&p, &s)| p * s));
        let (pos, _) = col
            .iter()
            .enumerate()
            .fold((0, T::zero()), |best, (i, &v)| if v.abs() > best.1 { (i, v.abs()) } else { best });
        if col[pos] < T::zero() {
            col.neg_mut();
        }
        phi.set_column(c, &col);
        eigenvalues[c] = T::one() - mu[c];
    }
    Ok(SpectralEmbedding { phi, eigenvalues })
}

fn normalized_apply<T: Scalar>(
    graph: &NeighborhoodGraph<T>,
    inv_sqrt_deg: &[T],
    x: &DVector<T>,
    scratch: &mut DVector<T>,
    out: &mut DVector<T>,
) {
    for (s, (&v, &d)) in scratch.iter_mut().zip(x.iter().zip(inv_sqrt_deg)) {
        *s = v * d;
    }
    graph.mul_vec(scratch, out);
    for (o, &d) in out.iter_mut().zip(inv_sqrt_deg) {
        *o *= d;
    }
}

/// Largest `l` eigenpairs of `A` after dropping the trivial mode, `μ` descending.
fn dense_top<T: Scalar>(
    graph: &NeighborhoodGraph<T>,
    inv_sqrt_deg: &[T],
    trivial: &DVector<T>,
    l: usize,
) -> (Vec<T>, DMatrix<T>) {
    let n = graph.len();
    let mut a = graph.to_dense();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] *= inv_sqrt_deg[i] * inv_sqrt_deg[j];
        }
    }
    let eig = SymmetricEigen::new(a);
    let skip = (0..n)
        .max_by(|&x, &y| {
            let ox = eig.eigenvectors.column(x).dot(trivial).abs();
            let oy = eig.eigenvectors.column(y).dot(trivial).abs();
            ox.partial_cmp(&oy).unwrap()
        })
        .unwrap();
    let mut order: Vec<usize> = (0..n).filter(|&i| i != skip).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].partial_cmp(&eig.eigenvalues[x]).unwrap().then(x.cmp(&y)));
    let mu = order[..l].iter().map(|&i| eig.eigenvalues[i]).collect();
    let psi = DMatrix::from_columns(&order[..l].iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    (mu, psi)
}

/// Lanczos with full reorthogonalization on the complement of the trivial mode. The
/// Krylov space grows until the `l` leading Ritz pairs meet the residual tolerance.
fn lanczos_top<T: Scalar>(
    graph: &NeighborhoodGraph<T>,
    inv_sqrt_deg: &[T],
    trivial: &DVector<T>,
    l: usize,
) -> Result<(Vec<T>, DMatrix<T>)> {
    let n = graph.len();
    let max_dim = n - 1;
    let mut rng = rng_from_seed(0x1a7c_205);
    let mut basis: Vec<DVector<T>> = Vec::new();
    let mut alpha: Vec<T> = Vec::new();
    let mut beta: Vec<T> = Vec::new();
    let mut scratch = DVector::zeros(n);
    let mut w = DVector::zeros(n);

    let dmin = graph.degrees().iter().fold(T::infinity(), |acc, &d| acc.min(d));
    let dmax = graph.degrees().iter().fold(T::zero(), |acc, &d| acc.max(d));
    // ‖𝒟^{1/2} r‖ ≤ sqrt(dmax)‖r‖ and ‖𝒟^{1/2} ψ‖ ≥ sqrt(dmin) for unit ψ
    let ritz_tol = T::lit(0.5 * RESIDUAL_TOLERANCE) * (dmin / dmax).sqrt();

    let mut q = match fresh_direction(&mut rng, n, &basis, trivial) {
        Some(q) => q,
        None => return Err(Error::NoConvergence { iterations: 0 }),
    };
    let mut next_check = (2 * l + 20).min(max_dim);
    loop {
        let j = basis.len();
        normalized_apply(graph, inv_sqrt_deg, &q, &mut scratch, &mut w);
        let a_j = q.dot(&w);
        w.axpy(-a_j, &q, T::one());
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            w.axpy(-b, prev, T::one());
        }
        basis.push(q);
        alpha.push(a_j);
        for _ in 0..2 {
            orthogonalize(&mut w, &basis, trivial);
        }
        let b_j = w.norm();

        let dim = j + 1;
        if dim >= next_check || dim == max_dim {
            if let Some(found) = converged_ritz(&alpha, &beta, b_j, &basis, l, ritz_tol, dim == max_dim) {
                return Ok(found);
            }
            next_check = (dim + dim / 2).min(max_dim);
        }
        if dim == max_dim {
            return Err(Error::NoConvergence { iterations: dim });
        }
        if b_j > T::lit(1e-10) {
            beta.push(b_j);
            q = w.unscale(b_j);
        } else {
            // invariant subspace found; continue from a new orthogonal direction
            beta.push(T::zero());
            q = match fresh_direction(&mut rng, n, &basis, trivial) {
                Some(q) => q,
                None => return Err(Error::NoConvergence { iterations: dim }),
            };
        }
    }
}

fn orthogonalize<T: Scalar>(w: &mut DVector<T>, basis: &[DVector<T>], trivial: &DVector<T>) {
    let t = trivial.dot(w);
    w.axpy(-t, trivial, T::one());
    for b in basis {
        let c = b.dot(w);
        w.axpy(-c, b, T::one());
    }
}

fn fresh_direction<T: Scalar>(
    rng: &mut crate::Rng,
    n: usize,
    basis: &[DVector<T>],
    trivial: &DVector<T>,
) -> Option<DVector<T>> {
    for _ in 0..3 {
        let mut v = DVector::from_fn(n, |_, _| T::lit(rng.random_range(-1.0..1.0)));
        for _ in 0..2 {
            orthogonalize(&mut v, basis, trivial);
        }
        let norm = v.norm();
        if norm > T::lit(1e-8) {
            return Some(v.unscale(norm));
        }
    }
    None
}

/// Ritz pairs of the tridiagonal projection if the leading `l` have residual estimate
/// `|β_last · s_last|` below `tol` (or unconditionally when the space is complete).
fn converged_ritz<T: Scalar>(
    alpha: &[T],
    beta: &[T],
    beta_last: T,
    basis: &[DVector<T>],
    l: usize,
    tol: T,
    complete: bool,
) -> Option<(Vec<T>, DMatrix<T>)> {
    let m = alpha.len();
    if m < l {
        return None;
    }
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].partial_cmp(&eig.eigenvalues[x]).unwrap());
    let top = &order[..l];
    if !complete && top.iter().any(|&i| (beta_last * eig.eigenvectors[(m - 1, i)]).abs() > tol) {
        return None;
    }
    let n = basis[0].len();
    let mut psi = DMatrix::zeros(n, l);
    for (c, &i) in top.iter().enumerate() {
        let mut col = psi.column_mut(c);
        for (k, b) in basis.iter().enumerate() {
            col.axpy(eig.eigenvectors[(k, i)], b, T::one());
        }
        let norm = col.norm();
        col.unscale_mut(norm);
    }
    Some((top.iter().map(|&i| eig.eigenvalues[i]).collect(), psi))
}
