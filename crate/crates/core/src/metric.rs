//! Euclidean and graph-geodesic distances and Gaussian kernel assembly.
//!
//! Unreachable geodesic pairs carry an infinite distance, which the kernel maps to 0.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;

use crate::datasets::{check_indices, PointSet};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMode {
    Euclidean,
    /// Shortest paths on the symmetric `knn`-nearest-neighbor graph.
    Geodesic { knn: usize },
}

/// Gaussian kernel `K_ij = exp(-dist_ij² / 2σ²)` over a distance mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec<T: Scalar> {
    sigma: T,
    mode: DistanceMode,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn new(sigma: T, mode: DistanceMode) -> Result<Self> {
        if !(sigma > T::zero() && sigma.is_finite()) {
            return Err(Error::invalid("kernel bandwidth must be positive and finite"));
        }
        if mode == (DistanceMode::Geodesic { knn: 0 }) {
            return Err(Error::invalid("geodesic kernel needs knn >= 1"));
        }
        Ok(Self { sigma, mode })
    }

    pub fn euclidean(sigma: T) -> Result<Self> {
        Self::new(sigma, DistanceMode::Euclidean)
    }

    pub fn geodesic(sigma: T, knn: usize) -> Result<Self> {
        Self::new(sigma, DistanceMode::Geodesic { knn })
    }

    #[inline]
    pub fn sigma(&self) -> T {
        self.sigma
    }

    #[inline]
    pub fn mode(&self) -> DistanceMode {
        self.mode
    }

    /// Kernel value for a squared distance.
    #[inline]
    pub fn weight_sq(&self, dist_sq: T) -> T {
        gaussian_sq(dist_sq, self.sigma)
    }
}

#[inline]
pub fn gaussian_sq<T: Scalar>(dist_sq: T, sigma: T) -> T {
    if dist_sq.is_finite() {
        (-dist_sq / (T::lit(2.0) * sigma * sigma)).exp()
    } else {
        T::zero()
    }
}

/// Symmetric `n × n` distance matrix with zero diagonal; entries may be `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T: Scalar>(DMatrix<T>);

impl<T: Scalar> DistanceMatrix<T> {
    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.0[(i, j)]
    }
}

pub fn euclidean_distances<T: Scalar>(points: &PointSet<T>) -> DistanceMatrix<T> {
    let n = points.len();
    let mut d = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let v = points.sq_dist(i, j).sqrt();
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    DistanceMatrix(d)
}

/// Symmetric k-nearest-neighbor graph with Euclidean edge lengths. An edge joins `i`
/// and `j` when either is among the other's `knn` nearest points (ties: lower index).
#[derive(Debug, Clone)]
pub struct KnnGraph<T: Scalar> {
    adjacency: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> KnnGraph<T> {
    pub fn build(points: &PointSet<T>, knn: usize) -> Result<Self> {
        if knn == 0 {
            return Err(Error::invalid("knn must be >= 1"));
        }
        let n = points.len();
        let k = knn.min(n.saturating_sub(1));
        let mut adjacency: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        let mut order: Vec<(T, usize)> = Vec::with_capacity(n);
        for i in 0..n {
            order.clear();
            order.extend((0..n).filter(|&j| j != i).map(|j| (points.sq_dist(i, j), j)));
            if k < order.len() {
                order.select_nth_unstable_by(k, cmp_dist_index);
                order.truncate(k);
            }
            for &(d2, j) in &order {
                let w = d2.sqrt();
                adjacency[i].push((j, w));
                adjacency[j].push((i, w));
            }
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(j, _)| j);
            list.dedup_by_key(|&mut (j, _)| j);
        }
        Ok(Self { adjacency })
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, T)] {
        &self.adjacency[i]
    }

    /// Dijkstra from `source`; unreachable nodes get `+∞`.
    pub fn shortest_paths_from(&self, source: usize) -> Vec<T> {
        let mut dist = vec![T::infinity(); self.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = T::zero();
        heap.push(Reverse(T::zero(), source));
        while let Some(Reverse(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adjacency[u] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse(nd, v));
                }
            }
        }
        dist
    }
}

#[derive(PartialEq)]
struct Reverse<T>(T, usize);

impl<T: Scalar> Eq for Reverse<T> {}

impl<T: Scalar> PartialOrd for Reverse<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Reverse<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .partial_cmp(&self.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.1.cmp(&self.1))
    }
}

/// Orders `(distance, index)` pairs by distance, then by index.
#[inline]
pub(crate) fn cmp_dist_index<T: Scalar>(a: &(T, usize), b: &(T, usize)) -> Ordering {
    a.0.partial_cmp(&b.0)
        .unwrap_or(Ordering::Equal)
        .then(a.1.cmp(&b.1))
}

/// All-pairs graph shortest-path distances on the symmetric kNN graph.
pub fn geodesic_distances<T: Scalar>(points: &PointSet<T>, knn: usize) -> Result<DistanceMatrix<T>> {
    let graph = KnnGraph::build(points, knn)?;
    let n = points.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for (j, v) in graph.shortest_paths_from(i).into_iter().enumerate() {
            d[(i, j)] = v;
        }
    }
    // summation order differs between the two directions; keep the shorter
    for j in 0..n {
        for i in 0..j {
            let v = d[(i, j)].min(d[(j, i)]);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    Ok(DistanceMatrix(d))
}

pub fn distances<T: Scalar>(points: &PointSet<T>, mode: DistanceMode) -> Result<DistanceMatrix<T>> {
    match mode {
        DistanceMode::Euclidean => Ok(euclidean_distances(points)),
        DistanceMode::Geodesic { knn } => geodesic_distances(points, knn),
    }
}

pub fn kernel_from_distances<T: Scalar>(dist: &DistanceMatrix<T>, sigma: T) -> DMatrix<T> {
    dist.0.map(|v| gaussian_sq(v * v, sigma))
}

/// Full `n × n` Gaussian kernel matrix.
pub fn kernel_matrix<T: Scalar>(points: &PointSet<T>, spec: &KernelSpec<T>) -> Result<DMatrix<T>> {
    Ok(kernel_from_distances(&distances(points, spec.mode)?, spec.sigma))
}

/// Kernel block with rows `rows` and columns `cols`, without forming the full matrix.
pub fn kernel_cross<T: Scalar>(
    points: &PointSet<T>,
    rows: &[usize],
    cols: &[usize],
    spec: &KernelSpec<T>,
) -> Result<DMatrix<T>> {
    check_indices(rows, points.len())?;
    check_indices(cols, points.len())?;
    match spec.mode {
        DistanceMode::Euclidean => Ok(DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            spec.weight_sq(points.sq_dist(rows[r], cols[c]))
        })),
        DistanceMode::Geodesic { knn } => {
            let graph = KnnGraph::build(points, knn)?;
            let mut out = DMatrix::zeros(rows.len(), cols.len());
            for (r, &i) in rows.iter().enumerate() {
                let dist = graph.shortest_paths_from(i);
                for (c, &j) in cols.iter().enumerate() {
                    out[(r, c)] = gaussian_sq(dist[j] * dist[j], spec.sigma);
                }
            }
            Ok(out)
        }
    }
}
