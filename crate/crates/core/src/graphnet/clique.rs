//! Exact maximum clique on graphs of at most 64 vertices, using `u64`
//! vertex sets.

use super::ThresholdGraph;
use crate::error::{Error, Result};

pub const MAX_CLIQUE_VERTICES: usize = 64;

fn bit(v: usize) -> u64 {
    1u64 << v
}

/// Vertices strictly after `v`.
fn above(v: usize) -> u64 {
    if v >= 63 {
        0
    } else {
        !0u64 << (v + 1)
    }
}

fn neighbourhoods(g: &ThresholdGraph) -> Vec<u64> {
    let n = g.n();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| g.adjacent(i, j))
                .fold(0u64, |acc, j| acc | bit(j))
        })
        .collect()
}

/// Size of the largest clique: Bron–Kerbosch with Tomita pivoting, pruned
/// whenever the current clique plus all candidates cannot beat the best.
fn clique_number(adj: &[u64], r: usize, mut p: u64, mut x: u64, best: &mut usize) {
    if p == 0 {
        *best = (*best).max(r);
        return;
    }
    if r + p.count_ones() as usize <= *best {
        return;
    }
    let mut pivot = 0;
    let mut pivot_cover = 0;
    let mut ux = p | x;
    while ux != 0 {
        let u = ux.trailing_zeros() as usize;
        ux &= ux - 1;
        let cover = (p & adj[u]).count_ones();
        if cover >= pivot_cover {
            pivot_cover = cover;
            pivot = u;
        }
    }
    let mut branch = p & !adj[pivot];
    while branch != 0 {
        let v = branch.trailing_zeros() as usize;
        branch &= branch - 1;
        clique_number(adj, r + 1, p & adj[v], x & adj[v], best);
        p &= !bit(v);
        x |= bit(v);
        if r + p.count_ones() as usize <= *best {
            return;
        }
    }
}

/// Depth-first search over increasing vertex sequences; the first clique of
/// size `target` reached is the lexicographically smallest one.
fn first_clique(adj: &[u64], chosen: &mut Vec<usize>, mut p: u64, target: usize) -> bool {
    if chosen.len() == target {
        return true;
    }
    while p != 0 {
        if chosen.len() + (p.count_ones() as usize) < target {
            return false;
        }
        let v = p.trailing_zeros() as usize;
        p &= p - 1;
        chosen.push(v);
        if first_clique(adj, chosen, p & adj[v] & above(v), target) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Vertices of a maximum clique, ascending. Among all maximum cliques the one
/// whose sorted vertex list is lexicographically smallest (in label order) is
/// returned, so the witness is deterministic.
pub fn max_clique(g: &ThresholdGraph) -> Result<Vec<usize>> {
    let n = g.n();
    if n > MAX_CLIQUE_VERTICES {
        return Err(Error::InvalidParameter(format!(
            "exact clique search is limited to {MAX_CLIQUE_VERTICES} vertices, got {n}"
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let adj = neighbourhoods(g);
    let all = if n == 64 { !0u64 } else { (1u64 << n) - 1 };
    let mut omega = 0;
    clique_number(&adj, 0, all, 0, &mut omega);

    let mut witness = Vec::with_capacity(omega);
    let found = first_clique(&adj, &mut witness, all, omega);
    debug_assert!(found, "a clique of size {omega} must exist");
    Ok(witness)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k5_plus_isolated() {
        let edges: Vec<_> = (0..5)
            .flat_map(|i| (i + 1..5).map(move |j| (i + 3, j + 3)))
            .collect();
        let g = ThresholdGraph::from_edges(12, &edges).unwrap();
        assert_eq!(max_clique(&g).unwrap(), vec![3, 4, 5, 6, 7]);
    }

    #[test]
    fn bipartite_has_clique_two() {
        let edges = [(0, 3), (0, 4), (1, 3), (2, 4), (2, 5)];
        let g = ThresholdGraph::from_edges(6, &edges).unwrap();
        assert_eq!(max_clique(&g).unwrap(), vec![0, 3]);
    }

    #[test]
    fn edgeless_and_empty_graphs() {
        assert_eq!(
            max_clique(&ThresholdGraph::from_edges(4, &[]).unwrap()).unwrap(),
            vec![0]
        );
        assert!(max_clique(&ThresholdGraph::from_edges(0, &[]).unwrap())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn lexicographic_witness() {
        // Two triangles {1,2,5} and {0,3,4}; the second is lex-smaller.
        let edges = [(1, 2), (2, 5), (1, 5), (0, 3), (3, 4), (0, 4)];
        let g = ThresholdGraph::from_edges(6, &edges).unwrap();
        assert_eq!(max_clique(&g).unwrap(), vec![0, 3, 4]);
    }

    #[test]
    fn sixty_four_vertices_complete() {
        let edges: Vec<_> = (0..64)
            .flat_map(|i| (i + 1..64).map(move |j| (i, j)))
            .collect();
        let g = ThresholdGraph::from_edges(64, &edges).unwrap();
        assert_eq!(max_clique(&g).unwrap().len(), 64);
        let too_big = ThresholdGraph::from_edges(65, &[]).unwrap();
        assert!(max_clique(&too_big).is_err());
    }
}
