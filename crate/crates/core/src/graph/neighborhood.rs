use std::collections::VecDeque;
use std::io::Write;

use nalgebra::{DMatrix, DVector};

use super::bhattacharyya::{bhattacharyya_with_log_dets, log_det};
use crate::datasets::{check_distinct_indices, sq_dist, PointSet};
use crate::metric::{cmp_dist_index, gaussian_sq};
use crate::sampling::LandmarkSelection;
use crate::{Error, Result, Scalar};

/// How neighbors are ranked when building a landmark graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GraphMetric {
    #[default]
    Euclidean,
    /// Bhattacharyya distance between the local Gaussians of the landmarks.
    Bhattacharyya,
}

/// Which neighbors each node connects to, measured in the chosen [`GraphMetric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NeighborRule<T: Scalar> {
    /// The `m` nearest other nodes (lower index first on ties).
    Knn(usize),
    /// All other nodes within distance `ε` (inclusive).
    EpsBall(T),
}

/// Sparse symmetric weight matrix without self-loops, stored row-compressed.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodGraph<T: Scalar> {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<T>,
    degrees: Vec<T>,
    components: usize,
}

impl<T: Scalar> NeighborhoodGraph<T> {
    /// Builds a graph from undirected weighted edges. Each edge is stored in both
    /// directions; repeated edges keep the first weight. Self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize, T)]) -> Result<Self> {
        let mut adjacency: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), len: n });
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop at node {i}")));
            }
            if !(w >= T::zero() && w.is_finite()) {
                return Err(Error::invalid(format!("edge ({i}, {j}) has invalid weight {w}")));
            }
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
        Ok(Self::from_adjacency(adjacency))
    }

    fn from_adjacency(mut adjacency: Vec<Vec<(usize, T)>>) -> Self {
        let n = adjacency.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        let mut degrees = Vec::with_capacity(n);
        offsets.push(0);
        for row in adjacency.iter_mut() {
            // stable sort keeps the first weight of a repeated edge in front
            row.sort_by_key(|&(j, _)| j);
            row.dedup_by_key(|&mut (j, _)| j);
            let mut deg = T::zero();
            for &(j, w) in row.iter() {
                targets.push(j);
                weights.push(w);
                deg += w;
            }
            degrees.push(deg);
            offsets.push(targets.len());
        }
        let mut graph = Self {
            offsets,
            targets,
            weights,
            degrees,
            components: 0,
        };
        graph.components = graph.count_components();
        graph
    }

    fn count_components(&self) -> usize {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbor_indices(u) {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        count
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Row sums of `W`.
    pub fn degrees(&self) -> &[T] {
        &self.degrees
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn is_connected(&self) -> bool {
        self.components == 1
    }

    /// Neighbor indices of node `i`, ascending.
    pub fn neighbor_indices(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    /// `(neighbor, weight)` pairs of node `i`, neighbors ascending.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    /// `W_ij`, zero when there is no edge.
    pub fn weight(&self, i: usize, j: usize) -> T {
        let row = self.neighbor_indices(i);
        match row.binary_search(&j) {
            Ok(pos) => self.weights[self.offsets[i] + pos],
            Err(_) => T::zero(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let n = self.len();
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            for (j, v) in self.neighbors(i) {
                w[(i, j)] = v;
            }
        }
        w
    }

    /// `y = W x`.
    pub fn mul_vec(&self, x: &DVector<T>, y: &mut DVector<T>) {
        for i in 0..self.len() {
            y[i] = self.neighbors(i).fold(T::zero(), |acc, (j, w)| acc + w * x[j]);
        }
    }

    /// Writes `i,j,weight` rows (each undirected edge once, `i < j`) with a header.
    pub fn write_edge_list<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["i", "j", "weight"])?;
        for i in 0..self.len() {
            for (j, w) in self.neighbors(i).filter(|&(j, _)| j > i) {
                writer.write_record([i.to_string(), j.to_string(), w.to_string()])?;
            }
        }
        writer.flush()?;
        Ok(())
    }
}

/// Builds the landmark graph. Node `a` is landmark `landmarks.indices()[a]`.
///
/// Neighbors are chosen by `metric` under `rule` and the union of both directions is
/// kept. Edge weights are always the Gaussian kernel `exp(−‖x_a − x_b‖²/2σ²)` of the
/// Euclidean distance, so the graph is a sparsified landmark kernel matrix whatever
/// metric selected the edges.
pub fn build_graph<T: Scalar>(
    points: &PointSet<T>,
    landmarks: &LandmarkSelection<T>,
    metric: GraphMetric,
    rule: NeighborRule<T>,
    sigma: T,
) -> Result<NeighborhoodGraph<T>> {
    let idx = landmarks.indices();
    let n = idx.len();
    check_distinct_indices(idx, points.len())?;
    if !(sigma > T::zero() && sigma.is_finite()) {
        return Err(Error::invalid("graph bandwidth must be positive and finite"));
    }
    match rule {
        NeighborRule::Knn(m) if m == 0 || m >= n => {
            return Err(Error::invalid(format!(
                "graph kNN needs 1 <= m < {n} landmarks, got {m}"
            )))
        }
        NeighborRule::EpsBall(eps) if !(eps > T::zero()) => {
            return Err(Error::invalid("ε-ball radius must be positive"))
        }
        _ => {}
    }

    let covs = match metric {
        GraphMetric::Euclidean => None,
        GraphMetric::Bhattacharyya => {
            let c = landmarks.covariances().ok_or(Error::MissingCovariances)?;
            if c.len() != n {
                return Err(Error::invalid("covariance count differs from landmark count"));
            }
            let log_dets = (0..n).map(|a| log_det(c.get(a))).collect::<Result<Vec<_>>>()?;
            Some((c, log_dets))
        }
    };

    let mut adjacency: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    let mut candidates: Vec<(T, usize)> = Vec::with_capacity(n);
    for a in 0..n {
        let xa = points.point_slice(idx[a]);
        candidates.clear();
        for b in (0..n).filter(|&b| b != a) {
            let xb = points.point_slice(idx[b]);
            let d = match &covs {
                None => sq_dist(xa, xb).sqrt(),
                Some((c, ld)) => bhattacharyya_with_log_dets(xa, c.get(a), ld[a], xb, c.get(b), ld[b])?,
            };
            candidates.push((d, b));
        }
        let chosen: &[(T, usize)] = match rule {
            NeighborRule::Knn(m) => {
                candidates.select_nth_unstable_by(m - 1, cmp_dist_index);
                &candidates[..m]
            }
            NeighborRule::EpsBall(eps) => {
                candidates.retain(|&(d, _)| d <= eps);
                &candidates
            }
        };
        for &(_, b) in chosen {
            let w = gaussian_sq(sq_dist(xa, points.point_slice(idx[b])), sigma);
            adjacency[a].push((b, w));
            adjacency[b].push((a, w));
        }
    }
    Ok(NeighborhoodGraph::from_adjacency(adjacency))
}
