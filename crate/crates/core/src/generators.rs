//! Small graph families used by tests, benchmarks and the acceptance suite.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{Dist, Graph, VertexId};

pub fn path(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|v| (v - 1, v, 1))).expect("valid path")
}

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "cycle needs at least three vertices");
    Graph::from_edges(n, (0..n).map(|v| (v, (v + 1) % n, 1))).expect("valid cycle")
}

/// `rows x cols` grid; vertex `(r, c)` has id `r * cols + c`.
pub fn grid(rows: usize, cols: usize) -> Graph {
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1, 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols, 1));
            }
        }
    }
    Graph::from_edges(rows * cols, edges).expect("valid grid")
}

/// Star with hub 0 and `leaves` leaves.
pub fn star(leaves: usize) -> Graph {
    Graph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v, 1))).expect("valid star")
}

pub fn complete(n: usize) -> Graph {
    let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v, 1)));
    Graph::from_edges(n, edges).expect("valid complete graph")
}

/// `0-1, 0-2, 1-3, 2-3`.
pub fn diamond() -> Graph {
    Graph::from_edges(4, [(0, 1, 1), (0, 2, 1), (1, 3, 1), (2, 3, 1)]).expect("valid diamond")
}

/// Connected random graph: a random spanning tree plus `extra` random edges.
/// Weights are 1 when `max_weight == 1`, otherwise uniform in `1..=max_weight`.
pub fn random_connected<R: Rng>(rng: &mut R, n: usize, extra: usize, max_weight: Dist) -> Graph {
    assert!(n >= 1);
    let weight = |rng: &mut R| {
        if max_weight <= 1 {
            1
        } else {
            rng.gen_range(1..=max_weight)
        }
    };
    let mut edges: Vec<(VertexId, VertexId, Dist)> = Vec::with_capacity(n + extra);
    for v in 1..n {
        let parent = rng.gen_range(0..v);
        let w = weight(rng);
        edges.push((parent, v, w));
    }
    if n >= 2 {
        for _ in 0..extra {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            let w = weight(rng);
            edges.push((u, v, w));
        }
    }
    // Shuffle ids so the tree structure is not aligned with vertex order.
    let mut perm: Vec<VertexId> = (0..n).collect();
    perm.shuffle(rng);
    Graph::from_edges(n, edges.into_iter().map(|(u, v, w)| (perm[u], perm[v], w)))
        .expect("valid random graph")
}
