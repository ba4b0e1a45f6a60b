use std::cmp::Ordering;

use super::distance_matrix;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::spectra::CorrMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MstEdge {
    /// Smaller vertex index.
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mst {
    pub labels: Vec<String>,
    /// `N - 1` edges in the order Prim added them.
    pub edges: Vec<MstEdge>,
    /// Sum of the edge weights taken in ascending order.
    pub total_weight: f64,
}

impl Mst {
    /// Tree neighbours of every vertex.
    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.labels.len()];
        for e in &self.edges {
            nb[e.a].push(e.b);
            nb[e.b].push(e.a);
        }
        nb
    }
}

/// Candidate edge key: weight first, then the `(min, max)` vertex pair.
#[derive(Clone, Copy)]
struct Key {
    weight: f64,
    pair: (usize, usize),
}

impl Key {
    fn new(weight: f64, u: usize, v: usize) -> Self {
        Key {
            weight,
            pair: (u.min(v), u.max(v)),
        }
    }

    fn cmp(&self, other: &Key) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.pair.cmp(&other.pair))
    }
}

/// Prim's algorithm on the complete graph with weights `distances`, grown
/// from vertex 0. Among equal-weight candidates the edge with the smaller
/// `(min, max)` index pair wins.
pub fn mst_prim(distances: &Matrix, labels: &[String]) -> Result<Mst> {
    let n = distances.dim();
    if labels.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{} labels for a {n}x{n} distance matrix",
            labels.len()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("empty distance matrix".into()));
    }
    if distances.as_slice().iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite("distance matrix".into()));
    }
    if !distances.is_symmetric(0.0) {
        return Err(Error::InvalidParameter(
            "distance matrix is not symmetric".into(),
        ));
    }

    let mut in_tree = vec![false; n];
    in_tree[0] = true;
    let mut best: Vec<Key> = (0..n).map(|v| Key::new(distances[(0, v)], 0, v)).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let v = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&x, &y| best[x].cmp(&best[y]))
            .expect("vertices remain outside the tree");
        let key = best[v];
        edges.push(MstEdge {
            a: key.pair.0,
            b: key.pair.1,
            weight: key.weight,
        });
        in_tree[v] = true;
        for u in 0..n {
            if !in_tree[u] {
                let cand = Key::new(distances[(v, u)], v, u);
                if cand.cmp(&best[u]) == Ordering::Less {
                    best[u] = cand;
                }
            }
        }
    }
    // Summed in ascending order so the total does not depend on insertion order.
    let mut weights: Vec<f64> = edges.iter().map(|e| e.weight).collect();
    weights.sort_by(f64::total_cmp);
    let total_weight = weights.iter().sum();
    Ok(Mst {
        labels: labels.to_vec(),
        edges,
        total_weight,
    })
}

/// Minimum spanning tree of the correlation distance `sqrt(2 (1 - C))`.
pub fn mst(c: &CorrMatrix) -> Result<Mst> {
    mst_prim(&distance_matrix(c), c.labels())
}
