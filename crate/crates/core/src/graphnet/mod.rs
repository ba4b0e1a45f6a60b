//! Threshold correlation networks, their topology metrics, and minimum
//! spanning trees over the correlation distance.

mod clique;
mod mst;

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::spectra::CorrMatrix;

pub use clique::{max_clique, MAX_CLIQUE_VERTICES};
pub use mst::{mst, mst_prim, Mst, MstEdge};

/// Undirected simple graph over index labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGraph {
    labels: Vec<String>,
    /// `None` for graphs not built from a correlation matrix.
    theta: Option<f64>,
    adjacency: Vec<Vec<bool>>,
}

impl ThresholdGraph {
    /// Graph from an explicit adjacency matrix, which must be symmetric with
    /// an empty diagonal.
    pub fn from_adjacency(labels: Vec<String>, adjacency: Vec<Vec<bool>>) -> Result<Self> {
        let n = labels.len();
        if adjacency.len() != n || adjacency.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter(format!(
                "adjacency must be {n}x{n}"
            )));
        }
        for i in 0..n {
            if adjacency[i][i] {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {i}")));
            }
            for j in i + 1..n {
                if adjacency[i][j] != adjacency[j][i] {
                    return Err(Error::InvalidParameter(format!(
                        "adjacency not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(ThresholdGraph {
            labels,
            theta: None,
            adjacency,
        })
    }

    /// Graph on `n` vertices labelled `0..n` with the given edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![vec![false; n]; n];
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidParameter(format!("bad edge ({a}, {b})")));
            }
            adj[a][b] = true;
            adj[b][a] = true;
        }
        ThresholdGraph::from_adjacency((0..n).map(|i| i.to_string()).collect(), adj)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].iter().filter(|&&e| e).count()
    }

    /// Edges `(i, j)` with `i < j`, in row order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.adjacency[i][j])
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }
}

/// Links `i ≠ j` whenever `C_ij ≥ θ`.
pub fn build_graph(c: &CorrMatrix, theta: f64) -> Result<ThresholdGraph> {
    if theta.is_nan() {
        return Err(Error::InvalidParameter("threshold is NaN".into()));
    }
    let n = c.dim();
    let adjacency = (0..n)
        .map(|i| (0..n).map(|j| i != j && c.get(i, j) >= theta).collect())
        .collect();
    Ok(ThresholdGraph {
        labels: c.labels().to_vec(),
        theta: Some(theta),
        adjacency,
    })
}

/// Average vertex degree, `2|E| / N`.
pub fn mean_degree(g: &ThresholdGraph) -> f64 {
    if g.n() == 0 {
        return 0.0;
    }
    (0..g.n()).map(|i| g.degree(i)).sum::<usize>() as f64 / g.n() as f64
}

fn triangles_and_triples(g: &ThresholdGraph) -> (usize, usize) {
    let n = g.n();
    let mut triangles = 0;
    for i in 0..n {
        for j in i + 1..n {
            if !g.adjacent(i, j) {
                continue;
            }
            triangles += (j + 1..n)
                .filter(|&k| g.adjacent(i, k) && g.adjacent(j, k))
                .count();
        }
    }
    let triples = (0..n)
        .map(|v| {
            let k = g.degree(v);
            k * k.saturating_sub(1) / 2
        })
        .sum();
    (triangles, triples)
}

/// Transitivity: `3 · triangles / connected triples`, or 0 without triples.
pub fn global_clustering(g: &ThresholdGraph) -> f64 {
    let (tri, triples) = triangles_and_triples(g);
    if triples == 0 {
        0.0
    } else {
        3.0 * tri as f64 / triples as f64
    }
}

/// Mean of the per-vertex clustering coefficients; vertices with degree
/// below 2 contribute 0.
pub fn average_clustering(g: &ThresholdGraph) -> f64 {
    let n = g.n();
    if n == 0 {
        return 0.0;
    }
    let total: f64 = (0..n)
        .map(|v| {
            let nb: Vec<usize> = (0..n).filter(|&u| g.adjacent(v, u)).collect();
            let k = nb.len();
            if k < 2 {
                return 0.0;
            }
            let links = nb
                .iter()
                .enumerate()
                .flat_map(|(a, &x)| nb[a + 1..].iter().map(move |&y| (x, y)))
                .filter(|&(x, y)| g.adjacent(x, y))
                .count();
            2.0 * links as f64 / (k * (k - 1)) as f64
        })
        .sum();
    total / n as f64
}

/// Connected components, isolated vertices included.
#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    /// Vertex indices of each component, ascending; components ordered by
    /// their smallest vertex.
    pub members: Vec<Vec<usize>>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.members.len()
    }

    pub fn max_size(&self) -> usize {
        self.members.iter().map(Vec::len).max().unwrap_or(0)
    }
}

pub fn components(g: &ThresholdGraph) -> Components {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut members = Vec::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut comp = vec![root];
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for u in 0..n {
                if g.adjacent(v, u) && !seen[u] {
                    seen[u] = true;
                    comp.push(u);
                    queue.push_back(u);
                }
            }
        }
        comp.sort_unstable();
        members.push(comp);
    }
    Components { members }
}

/// Topology summary of one threshold network.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphMetrics {
    pub edge_count: usize,
    pub mean_degree: f64,
    pub global_clustering: f64,
    /// Per-vertex (Watts–Strogatz) average, reported alongside transitivity.
    pub average_clustering: f64,
    pub component_count: usize,
    pub max_component_size: usize,
    pub max_clique_size: usize,
    pub components: Vec<Vec<String>>,
    pub max_clique: Vec<String>,
}

pub fn graph_metrics(g: &ThresholdGraph) -> Result<GraphMetrics> {
    let comps = components(g);
    let clique = max_clique(g)?;
    let names = |idx: &[usize]| idx.iter().map(|&i| g.labels()[i].clone()).collect();
    Ok(GraphMetrics {
        edge_count: g.edge_count(),
        mean_degree: mean_degree(g),
        global_clustering: global_clustering(g),
        average_clustering: average_clustering(g),
        component_count: comps.count(),
        max_component_size: comps.max_size(),
        max_clique_size: clique.len(),
        components: comps.members.iter().map(|m| names(m)).collect(),
        max_clique: names(&clique),
    })
}

/// `d_ij = sqrt(2 (1 - C_ij))`, in `[0, 2]`.
pub fn distance_matrix(c: &CorrMatrix) -> Matrix {
    Matrix::from_fn(c.dim(), |i, j| {
        if i == j {
            0.0
        } else {
            (2.0 * (1.0 - c.get(i, j))).max(0.0).sqrt()
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub period: String,
    pub theta: f64,
    pub metrics: GraphMetrics,
}

/// Network metrics for every `(period, θ)` pair. All matrices must share
/// one label set.
pub fn theta_sweep(periods: &[(&str, &CorrMatrix)], thetas: &[f64]) -> Result<Vec<SweepRow>> {
    if let Some((_, first)) = periods.first() {
        if let Some((name, _)) = periods.iter().find(|(_, c)| c.labels() != first.labels()) {
            return Err(Error::InvalidParameter(format!(
                "period `{name}` has a different label set"
            )));
        }
    }
    let mut rows = Vec::with_capacity(periods.len() * thetas.len());
    for (name, c) in periods {
        for &theta in thetas {
            let g = build_graph(c, theta)?;
            rows.push(SweepRow {
                period: name.to_string(),
                theta,
                metrics: graph_metrics(&g)?,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> ThresholdGraph {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        ThresholdGraph::from_edges(n, &edges).unwrap()
    }

    fn corr(rho: f64, n: usize) -> CorrMatrix {
        let m = Matrix::from_fn(n, |i, j| if i == j { 1.0 } else { rho });
        CorrMatrix::new((0..n).map(|i| format!("L{i}")).collect(), m).unwrap()
    }

    #[test]
    fn extreme_thresholds() {
        let c = corr(0.3, 20);
        let full = build_graph(&c, -1.0).unwrap();
        assert_eq!(full.edge_count(), 190);
        assert_eq!(build_graph(&c, 1.0 + 1e-9).unwrap().edge_count(), 0);
        assert_eq!(build_graph(&c, 0.3).unwrap().edge_count(), 190);
        assert!(build_graph(&c, f64::NAN).is_err());
    }

    #[test]
    fn degree_of_complete_and_empty() {
        assert_eq!(mean_degree(&complete(20)), 19.0);
        assert_eq!(
            mean_degree(&ThresholdGraph::from_edges(20, &[]).unwrap()),
            0.0
        );
    }

    #[test]
    fn clustering_small_graphs() {
        assert_eq!(global_clustering(&complete(3)), 1.0);
        let path = ThresholdGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(global_clustering(&path), 0.0);
        assert_eq!(
            global_clustering(&ThresholdGraph::from_edges(4, &[]).unwrap()),
            0.0
        );
        // Triangle with a pendant: 1 triangle, triples 1+1+3+0 = 5.
        let paw = ThresholdGraph::from_edges(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        assert!((global_clustering(&paw) - 0.6).abs() < 1e-15);
        assert!((average_clustering(&paw) - (1.0 + 1.0 + 1.0 / 3.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn components_by_construction() {
        assert_eq!(components(&complete(20)).count(), 1);
        let empty = components(&ThresholdGraph::from_edges(20, &[]).unwrap());
        assert_eq!((empty.count(), empty.max_size()), (20, 1));
        let two = ThresholdGraph::from_edges(20, &[(0, 1), (1, 2), (0, 2), (5, 6), (6, 7), (5, 7)])
            .unwrap();
        let c = components(&two);
        assert_eq!((c.count(), c.max_size()), (16, 3));
        assert_eq!(c.members[0], vec![0, 1, 2]);
    }

    #[test]
    fn distances_at_reference_correlations() {
        let m = Matrix::from_rows(&[
            vec![1.0, 1.0, -1.0, 0.0],
            vec![1.0, 1.0, -1.0, 0.0],
            vec![-1.0, -1.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        let c = CorrMatrix::new((0..4).map(|i| i.to_string()).collect(), m).unwrap();
        let d = distance_matrix(&c);
        assert_eq!(d[(0, 1)], 0.0);
        assert_eq!(d[(0, 2)], 2.0);
        assert!((d[(0, 3)] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(d[(3, 3)], 0.0);
    }

    #[test]
    fn sweep_extremes_on_twenty_indices() {
        let c = corr(0.4, 20);
        let rows = theta_sweep(&[("before", &c), ("during", &c)], &[-1.0, 1.0 + 1e-9]).unwrap();
        assert_eq!(rows.len(), 4);
        let low = &rows[0].metrics;
        assert_eq!(low.mean_degree, 19.0);
        assert_eq!(low.global_clustering, 1.0);
        assert_eq!(low.component_count, 1);
        assert_eq!(low.max_clique_size, 20);
        let high = &rows[1].metrics;
        assert_eq!(high.mean_degree, 0.0);
        assert_eq!(high.component_count, 20);
        assert_eq!(rows[2].period, "during");
    }

    #[test]
    fn sweep_rejects_mismatched_labels() {
        let a = corr(0.4, 3);
        let m = Matrix::identity(3);
        let b = CorrMatrix::new(vec!["x".into(), "y".into(), "z".into()], m).unwrap();
        assert!(theta_sweep(&[("a", &a), ("b", &b)], &[0.0]).is_err());
    }

    #[test]
    fn adjacency_validation() {
        let labels = vec!["a".to_string(), "b".to_string()];
        assert!(ThresholdGraph::from_adjacency(
            labels.clone(),
            vec![vec![true, false], vec![false, false]]
        )
        .is_err());
        assert!(ThresholdGraph::from_adjacency(
            labels,
            vec![vec![false, true], vec![false, false]]
        )
        .is_err());
        assert!(ThresholdGraph::from_edges(3, &[(0, 0)]).is_err());
    }
}
